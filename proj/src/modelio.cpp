#include "toonforge/modelio.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace toonforge {

namespace {

using nlohmann::json;

json points(const std::vector<Vec2>& v) {
    json a = json::array();
    for (const auto& p : v) a.push_back({p.x, p.y});
    return a;
}

std::vector<Vec2> read_points(const json& a) {
    std::vector<Vec2> out;
    out.reserve(a.size());
    for (const auto& p : a) {
        if (!p.is_array() || p.size() != 2) throw ModelIoError("expected [x, y] pair");
        out.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    return out;
}

std::string texture_path(std::size_t i) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "textures/layer_%03zu.png", i);
    return buf;
}

std::string dump(const json& j) { return j.dump(1) + "\n"; }

std::vector<std::uint8_t> to_bytes(const std::string& s) { return {s.begin(), s.end()}; }

json parse_manifest(std::string_view text, std::string_view kind) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ModelIoError(std::string(kind) + " manifest: " + e.what());
    }
    if (!j.is_object() || !j.contains("format_version")) throw ModelIoError(std::string(kind) + " manifest: no format_version");
    const json& v = j["format_version"];
    if (!v.is_number_integer() || v.get<int>() != kFormatVersion)
        throw ModelIoError(std::string(kind) + " manifest: unsupported format_version " + v.dump() + " (expected " +
                           std::to_string(kFormatVersion) + ")");
    if (j.value("kind", "") != kind) throw ModelIoError(std::string(kind) + " manifest: kind is not '" + std::string(kind) + "'");
    return j;
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ModelIoError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ModelIoError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw ModelIoError("cannot write " + path.string());
}

}  // namespace

std::string model_manifest(const CharacterModel& model) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "character";
    j["canvas"] = {model.canvas_size.width, model.canvas_size.height};
    json layers = json::array();
    for (std::size_t i = 0; i < model.layers.size(); ++i) {
        const ModelLayer& l = model.layers[i];
        json tris = json::array();
        for (const auto& t : l.mesh.triangles) tris.push_back({t[0], t[1], t[2]});
        layers.push_back({{"name", l.name},
                          {"z", l.z},
                          {"opacity", l.opacity},
                          {"texture", texture_path(i)},
                          {"vertices", points(l.mesh.vertices)},
                          {"uvs", points(l.mesh.uvs)},
                          {"triangles", tris}});
    }
    j["layers"] = layers;
    json params = json::array();
    for (const auto& p : model.parameters)
        params.push_back({{"id", p.id}, {"min", p.min}, {"max", p.max}, {"default", p.default_value}});
    j["parameters"] = params;
    json deformers = json::array();
    for (const auto& d : model.deformers) {
        json keys = json::array();
        for (const auto& k : d.keys) keys.push_back({{"value", k.value}, {"offsets", points(k.offsets)}});
        deformers.push_back({{"layer", d.layer}, {"parameter", d.parameter}, {"keys", keys}});
    }
    j["deformers"] = deformers;
    json shapes = json::array();
    for (const auto& b : model.blendshapes)
        shapes.push_back({{"name", b.name}, {"layer", b.layer}, {"offsets", points(b.offsets)}});
    j["blendshapes"] = shapes;
    j["metadata"] = model.metadata;
    return dump(j);
}

Bundle encode_bundle(const CharacterModel& model) {
    try {
        validate_model(model);
    } catch (const RigError& e) {
        throw ModelIoError(std::string("refusing to save invalid model: ") + e.what());
    }
    Bundle bundle;
    bundle.push_back({std::string(kModelManifest), to_bytes(model_manifest(model))});
    for (std::size_t i = 0; i < model.layers.size(); ++i)
        bundle.push_back({texture_path(i), encode_png(*model.layers[i].texture)});
    std::sort(bundle.begin(), bundle.end(), [](const BundleFile& a, const BundleFile& b) { return a.path < b.path; });
    return bundle;
}

CharacterModel decode_bundle(const Bundle& bundle) {
    std::map<std::string_view, const BundleFile*> files;
    for (const auto& f : bundle) files[f.path] = &f;
    auto manifest = files.find(kModelManifest);
    if (manifest == files.end()) throw ModelIoError("bundle has no " + std::string(kModelManifest));
    const auto& bytes = manifest->second->bytes;
    const json j = parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()), "character");

    CharacterModel m;
    try {
        m.canvas_size = {j.at("canvas").at(0).get<int>(), j.at("canvas").at(1).get<int>()};
        for (const auto& l : j.at("layers")) {
            ModelLayer layer;
            layer.name = l.at("name").get<std::string>();
            layer.z = l.at("z").get<int>();
            layer.opacity = l.at("opacity").get<double>();
            layer.mesh.vertices = read_points(l.at("vertices"));
            layer.mesh.uvs = read_points(l.at("uvs"));
            for (const auto& t : l.at("triangles"))
                layer.mesh.triangles.push_back({t.at(0).get<std::uint32_t>(), t.at(1).get<std::uint32_t>(),
                                                t.at(2).get<std::uint32_t>()});
            const std::string tex = l.at("texture").get<std::string>();
            auto f = files.find(tex);
            if (f == files.end()) throw ModelIoError("layer '" + layer.name + "': missing texture " + tex);
            try {
                layer.texture = std::make_shared<const RasterImage>(decode_png(f->second->bytes));
            } catch (const ImageError& e) {
                throw ModelIoError("layer '" + layer.name + "': texture " + tex + ": " + e.what());
            }
            m.layers.push_back(std::move(layer));
        }
        for (const auto& p : j.at("parameters"))
            m.parameters.push_back({p.at("id").get<std::string>(), p.at("min").get<double>(), p.at("max").get<double>(),
                                    p.at("default").get<double>()});
        for (const auto& d : j.at("deformers")) {
            Deformer def{d.at("layer").get<std::string>(), d.at("parameter").get<std::string>(), {}};
            for (const auto& k : d.at("keys")) def.keys.push_back({k.at("value").get<double>(), read_points(k.at("offsets"))});
            m.deformers.push_back(std::move(def));
        }
        for (const auto& b : j.at("blendshapes"))
            m.blendshapes.push_back(
                {b.at("name").get<std::string>(), b.at("layer").get<std::string>(), read_points(b.at("offsets"))});
        m.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    } catch (const json::exception& e) {
        throw ModelIoError(std::string("character manifest: ") + e.what());
    }
    try {
        validate_model(m);
    } catch (const RigError& e) {
        throw ModelIoError(std::string("invalid model: ") + e.what());
    }
    return m;
}

Bundle read_bundle_dir(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw ModelIoError("not a directory: " + dir.string());
    Bundle bundle;
    for (const auto& entry : fs::recursive_directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        const std::string text = read_text(entry.path());
        bundle.push_back({entry.path().lexically_relative(dir).generic_string(), to_bytes(text)});
    }
    std::sort(bundle.begin(), bundle.end(), [](const BundleFile& a, const BundleFile& b) { return a.path < b.path; });
    return bundle;
}

void write_bundle_dir(const Bundle& bundle, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    for (const auto& f : bundle) {
        const fs::path p = dir / fs::path(f.path);
        fs::create_directories(p.parent_path(), ec);
        if (ec) throw ModelIoError("cannot create " + p.parent_path().string() + ": " + ec.message());
        write_file(p, f.bytes);
    }
}

std::filesystem::path save_model(const CharacterModel& model, const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    const Bundle bundle = encode_bundle(model);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw ModelIoError("cannot create " + dir.string() + ": " + ec.message());
    // Stale textures from a larger model would otherwise linger in the bundle.
    fs::remove_all(dir / "textures", ec);
    write_bundle_dir(bundle, dir);
    return dir / kModelManifest;
}

CharacterModel load_model(const std::filesystem::path& dir) {
    if (!std::filesystem::exists(dir / kModelManifest))
        throw ModelIoError("manifest not found: " + (dir / kModelManifest).string());
    return decode_bundle(read_bundle_dir(dir));
}

std::span<const Parameter> default_clip_parameters() {
    static const std::vector<Parameter> params = standard_parameters();
    return params;
}

std::string clip_text(const AnimationClip& clip) {
    json j;
    j["format_version"] = kFormatVersion;
    j["kind"] = "clip";
    j["duration"] = clip.duration;
    json tracks = json::array();
    for (const auto& t : clip.tracks) {
        json keys = json::array();
        for (const auto& k : t.keys) keys.push_back({k.t, k.value});
        tracks.push_back({{"parameter", t.parameter},
                          {"interpolation", t.interpolation == Interpolation::hold ? "hold" : "linear"},
                          {"keys", keys}});
    }
    j["tracks"] = tracks;
    return dump(j);
}

AnimationClip parse_clip(std::string_view text, std::span<const Parameter> parameters) {
    const json j = parse_manifest(text, "clip");
    AnimationClip clip;
    try {
        clip.duration = j.at("duration").get<double>();
        for (const auto& t : j.at("tracks")) {
            Track track;
            track.parameter = t.at("parameter").get<std::string>();
            const std::string interp = t.at("interpolation").get<std::string>();
            if (interp == "hold")
                track.interpolation = Interpolation::hold;
            else if (interp != "linear")
                throw ModelIoError("clip track '" + track.parameter + "': unknown interpolation '" + interp + "'");
            for (const auto& k : t.at("keys")) {
                if (!k.is_array() || k.size() != 2) throw ModelIoError("clip track '" + track.parameter + "': key is not [t, value]");
                track.keys.push_back({k[0].get<double>(), k[1].get<double>()});
            }
            clip.tracks.push_back(std::move(track));
        }
    } catch (const json::exception& e) {
        throw ModelIoError(std::string("clip manifest: ") + e.what());
    }
    try {
        validate_clip(clip, parameters);
    } catch (const RigError& e) {
        throw ModelIoError(std::string("invalid clip: ") + e.what());
    }
    return clip;
}

void save_clip(const AnimationClip& clip, const std::filesystem::path& path, std::span<const Parameter> parameters) {
    try {
        validate_clip(clip, parameters);
    } catch (const RigError& e) {
        throw ModelIoError(std::string("refusing to save invalid clip: ") + e.what());
    }
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    write_file(path, to_bytes(clip_text(clip)));
}

AnimationClip load_clip(const std::filesystem::path& path, std::span<const Parameter> parameters) {
    return parse_clip(read_text(path), parameters);
}

}  // namespace toonforge
