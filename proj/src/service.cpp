#include "toonforge/service.hpp"

#include "toonforge/archive.hpp"
#include "toonforge/raster.hpp"

#include <httplib.h>
#include <json.hpp>
#include <unistd.h>

#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace toonforge {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::size_t kIdLength = 32;
constexpr std::size_t kModelCacheLimit = 32;
constexpr std::size_t kMaxClipFrames = 3000;
constexpr int kMaxFrameSize = 4096;

std::string digest_text(const std::string& text) {
    return sha256_hex(std::vector<std::uint8_t>(text.begin(), text.end())).substr(0, kIdLength);
}

fs::path temp_name(const fs::path& target) {
    static std::atomic<std::uint64_t> counter{0};
    return target.parent_path() /
           (".tmp." + std::to_string(::getpid()) + "." + std::to_string(counter.fetch_add(1)) + "." +
            target.filename().string());
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes `text` to `path` unless it already exists. Never leaves a partial file
/// at `path`. Returns false when another writer got there first.
bool create_file(const fs::path& path, const std::string& text) {
    if (fs::exists(path)) return false;
    fs::create_directories(path.parent_path());
    const fs::path tmp = temp_name(path);
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw std::runtime_error("store: cannot write " + tmp.string());
    }
    std::error_code ec;
    fs::create_hard_link(tmp, path, ec);  // unlike rename, fails if path exists
    std::error_code ignored;
    fs::remove(tmp, ignored);
    if (ec) {
        if (fs::exists(path)) return false;
        throw std::runtime_error("store: cannot create " + path.string());
    }
    return true;
}

std::string canonical(const json& j) { return j.dump(1) + "\n"; }

}  // namespace

bool valid_id(const std::string& id) {
    if (id.size() != kIdLength) return false;
    for (char c : id)
        if (!((c >= '0' && c <= '9') || (c >= 'a' && c <= 'f'))) return false;
    return true;
}

// ---------------------------------------------------------------------------
// CharacterStore

CharacterStore::CharacterStore(fs::path root) : root_(std::move(root)) {
    for (const char* sub : {"bundles", "characters", "clips"}) fs::create_directories(root_ / sub);
}

CharacterStore::Record CharacterStore::put_character(const Bundle& bundle, const std::string& parent,
                                                     const std::string& ops) {
    Record rec;
    rec.content_hash = bundle_digest(bundle);
    rec.parent = parent;
    rec.id = digest_text(rec.content_hash + "\n" + parent + "\n" + ops);

    const fs::path dir = root_ / "bundles" / rec.content_hash;
    if (!fs::exists(dir)) {
        const fs::path tmp = temp_name(dir);
        write_bundle_dir(bundle, tmp);
        std::error_code ec;
        fs::rename(tmp, dir, ec);
        if (ec) {
            fs::remove_all(tmp, ec);
            if (!fs::exists(dir)) throw std::runtime_error("store: cannot create " + dir.string());
        }
    }

    const fs::path record = root_ / "characters" / (rec.id + ".json");
    if (create_file(record, canonical({{"content_hash", rec.content_hash}, {"parent", parent}, {"ops", ops}})))
        append_index("character\t" + rec.id + "\t" + rec.content_hash + "\t" + (parent.empty() ? "-" : parent));
    return rec;
}

std::optional<CharacterStore::Record> CharacterStore::find_character(const std::string& id) const {
    if (!valid_id(id)) return std::nullopt;
    const fs::path record = root_ / "characters" / (id + ".json");
    if (!fs::exists(record)) return std::nullopt;
    const json j = json::parse(read_text(record));
    return Record{id, j.at("content_hash").get<std::string>(), j.at("parent").get<std::string>()};
}

std::optional<Bundle> CharacterStore::get_bundle(const std::string& id) const {
    const auto rec = find_character(id);
    if (!rec) return std::nullopt;
    return read_bundle_dir(root_ / "bundles" / rec->content_hash);
}

std::string CharacterStore::put_clip(const std::string& character_id, const AnimationClip& clip) {
    const std::string text = clip_text(clip);
    const std::string id = digest_text(character_id + "\n" + text);
    const fs::path record = root_ / "clips" / (id + ".json");
    if (create_file(record, canonical({{"character", character_id}, {"clip", json::parse(text)}})))
        append_index("clip\t" + id + "\t" + character_id + "\t-");
    return id;
}

std::optional<CharacterStore::StoredClip> CharacterStore::get_clip(const std::string& clip_id) const {
    if (!valid_id(clip_id)) return std::nullopt;
    const fs::path record = root_ / "clips" / (clip_id + ".json");
    if (!fs::exists(record)) return std::nullopt;
    const json j = json::parse(read_text(record));
    return StoredClip{j.at("character").get<std::string>(),
                      parse_clip(j.at("clip").dump(), std::span<const Parameter>{})};
}

void CharacterStore::append_index(const std::string& line) {
    std::lock_guard lock(index_mutex_);
    std::ofstream out(root_ / "index.tsv", std::ios::app | std::ios::binary);
    out << line << '\n';
}

// ---------------------------------------------------------------------------
// Api

namespace {

struct HttpError {
    int status;
    std::string message;
};

[[noreturn]] void fail(int status, std::string message) { throw HttpError{status, std::move(message)}; }

ApiResponse json_response(const json& body, int status = 200) { return {status, "application/json", canonical(body)}; }

ApiResponse binary_response(const std::vector<std::uint8_t>& bytes, std::string type) {
    return {200, std::move(type), std::string(bytes.begin(), bytes.end())};
}

std::vector<std::string> split_path(const std::string& path) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : path) {
        if (c == '/') {
            if (!cur.empty()) parts.push_back(std::move(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!cur.empty()) parts.push_back(std::move(cur));
    return parts;
}

json parse_body(const std::string& body) {
    json j;
    try {
        j = json::parse(body);
    } catch (const json::parse_error& e) {
        fail(400, std::string("malformed JSON: ") + e.what());
    }
    if (!j.is_object()) fail(400, "request body must be a JSON object");
    return j;
}

std::optional<double> parse_number(std::string_view s) {
    if (s.empty()) return std::nullopt;
    const std::string tmp(s);
    char* end = nullptr;
    const double v = std::strtod(tmp.c_str(), &end);
    if (end != tmp.c_str() + tmp.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

int query_int(const ApiRequest& req, const std::string& key, int fallback, int lo, int hi) {
    const auto it = req.query.find(key);
    if (it == req.query.end()) return fallback;
    int v = 0;
    const auto [p, ec] = std::from_chars(it->second.data(), it->second.data() + it->second.size(), v);
    if (ec != std::errc{} || p != it->second.data() + it->second.size() || v < lo || v > hi)
        fail(400, key + " must be an integer in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    return v;
}

Size viewport_for(const CharacterModel& model, int width) {
    const int h = std::max(1, static_cast<int>(static_cast<long long>(width) * model.canvas_size.height /
                                               std::max(1, model.canvas_size.width)));
    return {width, h};
}

Rgb op_color(const json& op, const Lexicon& lexicon) {
    if (!op.contains("rgb") || !op["rgb"].is_string()) fail(422, "op needs an rgb string");
    const std::string s = op["rgb"].get<std::string>();
    if (auto c = parse_hex(s)) return *c;
    if (const ColorTerm* term = lexicon.find_color(s)) return term->rgb;
    fail(422, "bad rgb '" + s + "'");
}

std::string op_string(const json& op, const char* key) {
    if (!op.contains(key) || !op[key].is_string()) fail(422, std::string("op needs a string '") + key + "'");
    return op[key].get<std::string>();
}

std::vector<EditOp> parse_ops(const json& ops, const Lexicon& lexicon) {
    if (!ops.is_array() || ops.empty()) fail(422, "ops must be a non-empty array");
    std::vector<EditOp> out;
    for (const json& op : ops) {
        if (!op.is_object()) fail(422, "each op must be an object");
        const std::string kind = op_string(op, "op");
        if (kind == "swap") {
            out.push_back(SwapOp{op_string(op, "slot"), op_string(op, "variant")});
        } else if (kind == "recolor") {
            out.push_back(RecolorOp{op_string(op, "slot"), op_color(op, lexicon)});
        } else if (kind == "mask_recolor") {
            RasterImage mask;
            try {
                mask = decode_png(base64_decode(op_string(op, "mask")));
            } catch (const std::exception& e) {
                fail(422, std::string("mask: ") + e.what());
            }
            out.push_back(MaskRecolorOp{std::move(mask), op_color(op, lexicon)});
        } else {
            fail(422, "unknown op '" + kind + "'");
        }
    }
    return out;
}

VisemeTimeline timeline_from(const json& visemes) {
    if (visemes.is_string()) return parse_visemes(visemes.get<std::string>());
    if (!visemes.is_array()) fail(422, "visemes must be timeline text or an array of events");
    VisemeTimeline tl;
    for (const json& e : visemes) {
        if (!e.is_object() || !e.contains("t") || !e["t"].is_number() || !e.contains("viseme") ||
            !e["viseme"].is_string())
            fail(422, "viseme events need numeric t and a viseme name");
        const auto v = parse_viseme(e["viseme"].get<std::string>());
        if (!v) fail(422, "unknown viseme '" + e["viseme"].get<std::string>() + "'");
        const double w = e.value("weight", 1.0);
        if (!(w >= 0.0 && w <= 1.0)) fail(422, "viseme weight must be in [0, 1]");
        const double t = e["t"].get<double>();
        if (!(t >= 0.0) || (!tl.events.empty() && t < tl.events.back().t))
            fail(422, "viseme times must be non-negative and non-decreasing");
        tl.events.push_back({t, *v, w});
    }
    return tl;
}

}  // namespace

Api::Api(std::shared_ptr<const Resources> resources, fs::path store_root)
    : res_(std::move(resources)), store_(std::move(store_root)) {}

std::shared_ptr<const CharacterModel> Api::model(const std::string& id) {
    {
        std::lock_guard lock(cache_mutex_);
        if (auto it = cache_.find(id); it != cache_.end()) return it->second;
    }
    const auto bundle = store_.get_bundle(id);
    if (!bundle) fail(404, "unknown character " + id);
    auto m = std::make_shared<const CharacterModel>(decode_bundle(*bundle));
    std::lock_guard lock(cache_mutex_);
    if (cache_.size() >= kModelCacheLimit) cache_.clear();
    cache_.emplace(id, m);
    return m;
}

ApiResponse Api::handle(const ApiRequest& req) {
    try {
        const auto parts = split_path(req.path);
        const bool get = req.method == "GET";
        const bool post = req.method == "POST";
        if (parts.size() < 2 || parts[0] != "v1") fail(404, "no route " + req.path);

        if (parts[1] == "characters" && parts.size() == 2) {
            if (!post) fail(405, "use POST");
            const json body = parse_body(req.body);
            std::string text;
            std::uint64_t seed = 0;
            if (body.contains("text")) {
                if (!body["text"].is_string()) fail(422, "text must be a string");
                text = body["text"].get<std::string>();
            }
            if (body.contains("seed")) {
                if (!body["seed"].is_number_unsigned()) fail(422, "seed must be a non-negative integer");
                seed = body["seed"].get<std::uint64_t>();
            }
            const Generated g = generate_character(text, seed, *res_);
            const auto rec = store_.put_character(encode_bundle(g.model));
            return json_response({{"content_hash", rec.content_hash}, {"id", rec.id}}, 201);
        }

        if (parts[1] == "characters" && parts.size() == 4) {
            const std::string& id = parts[2];
            const std::string& what = parts[3];
            if (!store_.find_character(id)) fail(404, "unknown character " + id);

            if (what == "model") {
                if (!get) fail(405, "use GET");
                return binary_response(zip_store(*store_.get_bundle(id)), "application/zip");
            }
            if (what == "edits") {
                if (!post) fail(405, "use POST");
                const json body = parse_body(req.body);
                if (!body.contains("ops")) fail(422, "missing ops");
                const auto ops = parse_ops(body["ops"], res_->lexicon);
                CharacterModel edited;
                try {
                    edited = apply_edits(*model(id), ops, *res_);
                } catch (const EditError& e) {
                    fail(422, e.what());
                }
                const auto rec = store_.put_character(encode_bundle(edited), id, body["ops"].dump());
                return json_response({{"content_hash", rec.content_hash}, {"id", rec.id}, {"parent", id}}, 201);
            }
            if (what == "frame") {
                if (!get) fail(405, "use GET");
                const auto m = model(id);
                PoseValues values;
                if (auto it = req.query.find("params"); it != req.query.end()) {
                    std::string_view rest = it->second;
                    while (!rest.empty()) {
                        const auto comma = rest.find(',');
                        const std::string_view item = rest.substr(0, comma);
                        rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
                        const auto colon = item.rfind(':');
                        if (colon == std::string_view::npos) fail(400, "params entries are name:value");
                        const auto v = parse_number(item.substr(colon + 1));
                        if (!v) fail(400, "bad value in '" + std::string(item) + "'");
                        values[std::string(item.substr(0, colon))] = *v;
                    }
                }
                const int size = query_int(req, "size", m->canvas_size.width, 1, kMaxFrameSize);
                PosedModel posed;
                try {
                    posed = apply_parameters(*m, values);
                } catch (const RigError& e) {
                    fail(422, e.what());
                }
                return binary_response(encode_png(rasterize(posed, viewport_for(*m, size), Rgba{})), "image/png");
            }
            if (what == "clips") {
                if (!post) fail(405, "use POST");
                const json body = parse_body(req.body);
                const int fps = body.value("fps", 30);
                if (fps < 1 || fps > 240) fail(422, "fps must be in [1, 240]");
                AnimationClip clip;
                try {
                    if (body.contains("visemes")) {
                        clip = viseme_clip(timeline_from(body["visemes"]), fps);
                    } else if (body.contains("arkit") && body["arkit"].is_string()) {
                        const auto frames = parse_arkit_csv(body["arkit"].get<std::string>());
                        clip = coefficients_to_clip(frames);
                    } else {
                        fail(422, "clip needs visemes or arkit");
                    }
                    validate_clip(clip, model(id)->parameters);
                } catch (const RigError& e) {
                    fail(422, e.what());
                }
                return json_response({{"clip_id", store_.put_clip(id, clip)}}, 201);
            }
            fail(404, "no route " + req.path);
        }

        if (parts[1] == "clips" && parts.size() == 4 && parts[3] == "frames") {
            if (!get) fail(405, "use GET");
            const auto stored = store_.get_clip(parts[2]);
            if (!stored) fail(404, "unknown clip " + parts[2]);
            const int fps = query_int(req, "fps", 10, 1, 240);
            const auto m = model(stored->character_id);
            const int size = query_int(req, "size", 512, 1, kMaxFrameSize);
            const std::size_t n = frame_count(stored->clip.duration, fps);
            if (n > kMaxClipFrames) fail(422, "clip too long: " + std::to_string(n) + " frames");
            Bundle frames;
            for (std::size_t k = 0; k < n; ++k) {
                char name[32];
                std::snprintf(name, sizeof name, "frame_%05zu.png", k);
                const double t = static_cast<double>(k) / fps;
                frames.push_back({name, encode_png(clip_frame(*m, stored->clip, t, viewport_for(*m, size)))});
            }
            return binary_response(zip_store(frames), "application/zip");
        }

        fail(404, "no route " + req.path);
    } catch (const HttpError& e) {
        return json_response({{"error", e.message}}, e.status);
    } catch (const std::exception& e) {
        return json_response({{"error", e.what()}}, 500);
    }
}

// ---------------------------------------------------------------------------
// HttpServer

struct HttpServer::Impl {
    Api& api;
    httplib::Server server;

    explicit Impl(Api& a) : api(a) {
        auto dispatch = [this](const httplib::Request& hreq, httplib::Response& hres) {
            ApiRequest req;
            req.method = hreq.method;
            req.path = hreq.path;
            for (const auto& [k, v] : hreq.params) req.query.emplace(k, v);
            req.body = hreq.body;
            const ApiResponse r = api.handle(req);
            hres.status = r.status;
            hres.set_content(r.body, r.content_type);
        };
        server.Get(R"(/.*)", dispatch);
        server.Post(R"(/.*)", dispatch);
        server.Options(R"(/.*)", [](const httplib::Request&, httplib::Response& res) { res.status = 204; });
        server.set_default_headers({{"Access-Control-Allow-Origin", "*"},
                                    {"Access-Control-Allow-Headers", "Content-Type"},
                                    {"Access-Control-Allow-Methods", "GET, POST, OPTIONS"}});
        server.set_payload_max_length(64u << 20);
    }
};

HttpServer::HttpServer(Api& api) : impl_(std::make_unique<Impl>(api)) {}
HttpServer::~HttpServer() = default;

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = impl_->server.bind_to_any_port(host);
        if (bound <= 0) throw std::runtime_error("serve: cannot bind " + host);
        return bound;
    }
    if (!impl_->server.bind_to_port(host, port))
        throw std::runtime_error("serve: cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void HttpServer::run() { impl_->server.listen_after_bind(); }
void HttpServer::stop() { impl_->server.stop(); }
void HttpServer::wait_until_ready() { impl_->server.wait_until_ready(); }

fs::path store_root(const fs::path& fallback) {
    if (const char* env = std::getenv("TOONFORGE_STORE"); env && *env) return env;
    return fallback;
}

}  // namespace toonforge
