#include "toonforge/rig.hpp"

#include <algorithm>
#include <set>
#include <tuple>

namespace toonforge {

const ModelLayer* CharacterModel::find_layer(std::string_view name) const {
    for (const auto& l : layers)
        if (l.name == name) return &l;
    return nullptr;
}

const Parameter* CharacterModel::find_parameter(std::string_view id) const {
    for (const auto& p : parameters)
        if (p.id == id) return &p;
    return nullptr;
}

std::vector<Parameter> standard_parameters() {
    return {
        {std::string(kMouthOpenY), 0.0, 1.0, 0.0},  {std::string(kMouthForm), -1.0, 1.0, 0.0},
        {std::string(kMouthPucker), 0.0, 1.0, 0.0}, {std::string(kMouthFunnel), 0.0, 1.0, 0.0},
        {std::string(kMouthPress), 0.0, 1.0, 0.0},  {std::string(kMouthX), -1.0, 1.0, 0.0},
        {"AngleX", -30.0, 30.0, 0.0},               {"AngleY", -30.0, 30.0, 0.0},
        {"BodyAngleX", -10.0, 10.0, 0.0},           {"EyeOpen", 0.0, 1.0, 1.0},
    };
}

void validate_model(const CharacterModel& m) {
    if (m.canvas_size.width < 1 || m.canvas_size.height < 1) throw RigError("model: bad canvas size");
    std::set<std::string> names;
    for (std::size_t i = 0; i < m.layers.size(); ++i) {
        const ModelLayer& l = m.layers[i];
        const std::string who = "layer '" + l.name + "'";
        if (!names.insert(l.name).second) throw RigError(who + ": duplicate layer name");
        if (i > 0 && m.layers[i - 1].z >= l.z) throw RigError(who + ": z order not strictly increasing");
        if (l.mesh.uvs.size() != l.mesh.vertices.size()) throw RigError(who + ": uv count differs from vertex count");
        if (l.mesh.triangles.empty()) throw RigError(who + ": mesh has no triangles");
        for (const auto& tri : l.mesh.triangles)
            for (auto idx : tri)
                if (idx >= l.mesh.vertices.size()) throw RigError(who + ": triangle index out of range");
        for (const auto& uv : l.mesh.uvs)
            if (!(uv.x >= 0.0 && uv.x <= 1.0 && uv.y >= 0.0 && uv.y <= 1.0)) throw RigError(who + ": uv outside [0,1]");
        if (!l.texture || l.texture->empty()) throw RigError(who + ": missing texture");
        if (!(l.opacity >= 0.0 && l.opacity <= 1.0)) throw RigError(who + ": opacity outside [0,1]");
    }
    std::set<std::string> ids;
    for (const auto& p : m.parameters) {
        if (!ids.insert(p.id).second) throw RigError("parameter '" + p.id + "': duplicate id");
        if (!(p.min <= p.default_value && p.default_value <= p.max))
            throw RigError("parameter '" + p.id + "': requires min <= default <= max");
    }
    std::set<std::pair<std::string, std::string>> bound;
    for (const auto& d : m.deformers) {
        const std::string who = "deformer " + d.layer + "/" + d.parameter;
        const ModelLayer* layer = m.find_layer(d.layer);
        if (!layer) throw RigError(who + ": unknown layer");
        const Parameter* p = m.find_parameter(d.parameter);
        if (!p) throw RigError(who + ": unknown parameter");
        if (!bound.insert({d.layer, d.parameter}).second) throw RigError(who + ": duplicate deformer");
        if (d.keys.empty()) throw RigError(who + ": no keys");
        bool has_default = false;
        for (std::size_t k = 0; k < d.keys.size(); ++k) {
            const Keyform& key = d.keys[k];
            if (k > 0 && !(d.keys[k - 1].value < key.value)) throw RigError(who + ": key values not strictly increasing");
            if (key.offsets.size() != layer->mesh.vertices.size())
                throw RigError(who + ": key offset count differs from layer vertex count");
            if (key.value == p->default_value) {
                has_default = true;
                for (const auto& o : key.offsets)
                    if (o.x != 0.0 || o.y != 0.0) throw RigError(who + ": default key must have zero offsets");
            }
        }
        if (!has_default) throw RigError(who + ": missing key at the parameter default value");
    }
    std::set<std::pair<std::string, std::string>> shapes;
    for (const auto& b : m.blendshapes) {
        const std::string who = "blendshape " + b.layer + "/" + b.name;
        const ModelLayer* layer = m.find_layer(b.layer);
        if (!layer) throw RigError(who + ": unknown layer");
        if (!shapes.insert({b.layer, b.name}).second) throw RigError(who + ": duplicate name on layer");
        if (ids.count(b.name)) throw RigError(who + ": name collides with a parameter id");
        if (b.offsets.size() != layer->mesh.vertices.size())
            throw RigError(who + ": offset count differs from layer vertex count");
    }
}

std::vector<Vec2> interpolate_keys(const Deformer& d, double value) {
    const auto& keys = d.keys;
    if (value <= keys.front().value) return keys.front().offsets;
    if (value >= keys.back().value) return keys.back().offsets;
    std::size_t i = 0;
    while (keys[i + 1].value <= value) ++i;
    if (keys[i].value == value) return keys[i].offsets;
    const double t = (value - keys[i].value) / (keys[i + 1].value - keys[i].value);
    std::vector<Vec2> out(keys[i].offsets.size());
    for (std::size_t v = 0; v < out.size(); ++v) {
        const Vec2 a = keys[i].offsets[v], b = keys[i + 1].offsets[v];
        out[v] = {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
    return out;
}

PosedModel apply_parameters(const CharacterModel& model, const PoseValues& values) {
    std::map<std::string, double> param_values;
    for (const auto& p : model.parameters) param_values[p.id] = p.default_value;
    std::map<std::string, double> weights;
    for (const auto& [id, raw] : values) {
        if (const Parameter* p = model.find_parameter(id)) {
            param_values[id] = std::clamp(raw, p->min, p->max);
            continue;
        }
        const bool is_shape = std::any_of(model.blendshapes.begin(), model.blendshapes.end(),
                                          [&](const Blendshape& b) { return b.name == id; });
        if (!is_shape) throw RigError("unknown parameter '" + id + "'");
        weights[id] = std::clamp(raw, 0.0, 1.0);
    }

    // Contributions are summed in (parameter id, blendshape name) order so the
    // result does not depend on the order deformers appear in the model.
    std::vector<const Deformer*> deformers;
    for (const auto& d : model.deformers) deformers.push_back(&d);
    std::sort(deformers.begin(), deformers.end(), [](const Deformer* a, const Deformer* b) {
        return std::tie(a->layer, a->parameter) < std::tie(b->layer, b->parameter);
    });
    std::vector<const Blendshape*> shapes;
    for (const auto& b : model.blendshapes) shapes.push_back(&b);
    std::sort(shapes.begin(), shapes.end(), [](const Blendshape* a, const Blendshape* b) {
        return std::tie(a->layer, a->name) < std::tie(b->layer, b->name);
    });

    PosedModel posed;
    posed.canvas_size = model.canvas_size;
    for (const auto& layer : model.layers) {
        std::vector<Vec2> delta(layer.mesh.vertices.size());
        for (const Deformer* d : deformers) {
            if (d->layer != layer.name) continue;
            const auto offsets = interpolate_keys(*d, param_values.at(d->parameter));
            for (std::size_t v = 0; v < delta.size(); ++v) {
                delta[v].x += offsets[v].x;
                delta[v].y += offsets[v].y;
            }
        }
        for (const Blendshape* b : shapes) {
            if (b->layer != layer.name) continue;
            auto it = weights.find(b->name);
            if (it == weights.end() || it->second == 0.0) continue;
            for (std::size_t v = 0; v < delta.size(); ++v) {
                delta[v].x += it->second * b->offsets[v].x;
                delta[v].y += it->second * b->offsets[v].y;
            }
        }
        PosedLayer out{layer.name, layer.z, layer.mesh.vertices, layer.mesh.uvs, layer.mesh.triangles, layer.texture,
                       layer.opacity};
        // Zero deltas leave rest coordinates bit-for-bit untouched.
        for (std::size_t v = 0; v < delta.size(); ++v) {
            if (delta[v].x != 0.0) out.vertices[v].x += delta[v].x;
            if (delta[v].y != 0.0) out.vertices[v].y += delta[v].y;
        }
        posed.layers.push_back(std::move(out));
    }
    return posed;
}

}  // namespace toonforge
