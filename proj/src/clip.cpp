#include "toonforge/rig.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace toonforge {

void validate_clip(const AnimationClip& clip, std::span<const Parameter> parameters) {
    if (!(clip.duration >= 0.0)) throw RigError("clip: negative duration");
    for (const auto& track : clip.tracks) {
        const std::string who = "clip track '" + track.parameter + "'";
        const Parameter* param = nullptr;
        for (const auto& p : parameters)
            if (p.id == track.parameter) param = &p;
        for (std::size_t k = 0; k < track.keys.size(); ++k) {
            const Keyframe& key = track.keys[k];
            if (!(key.t >= 0.0)) throw RigError(who + ": negative keyframe time");
            if (k > 0 && key.t < track.keys[k - 1].t) throw RigError(who + ": keyframe times decrease");
            if (param && !(key.value >= param->min && key.value <= param->max))
                throw RigError(who + ": value " + std::to_string(key.value) + " outside [" +
                               std::to_string(param->min) + ", " + std::to_string(param->max) + "]");
        }
    }
}

PoseValues sample_clip(const AnimationClip& clip, double t) {
    PoseValues out;
    for (const auto& track : clip.tracks) {
        const auto& keys = track.keys;
        if (keys.empty()) continue;
        double v;
        if (t <= keys.front().t) {
            v = keys.front().value;
        } else if (t >= keys.back().t) {
            v = keys.back().value;
        } else {
            // last key with time <= t
            auto it = std::upper_bound(keys.begin(), keys.end(), t,
                                       [](double tt, const Keyframe& k) { return tt < k.t; });
            const Keyframe& a = *(it - 1);
            const Keyframe& b = *it;
            if (track.interpolation == Interpolation::hold || a.t == t)
                v = a.value;
            else
                v = a.value + (t - a.t) / (b.t - a.t) * (b.value - a.value);
        }
        out[track.parameter] = v;
    }
    return out;
}

AnimationClip coefficients_to_clip(std::span<const ArkitFrame> frames) {
    if (frames.empty()) throw RigError("coefficients_to_clip: no frames");
    for (std::size_t i = 1; i < frames.size(); ++i)
        if (frames[i].t < frames[i - 1].t)
            throw RigError("coefficients_to_clip: frame " + std::to_string(i) + " is earlier than its predecessor");
    AnimationClip clip;
    clip.duration = std::max(0.0, frames.back().t);
    for (auto name : kMouthParameters) clip.tracks.push_back({std::string(name), {}, Interpolation::linear});
    for (const auto& f : frames) {
        const PoseValues mouth = map_arkit_mouth(f);
        for (auto& track : clip.tracks) track.keys.push_back({f.t, mouth.at(track.parameter)});
    }
    return clip;
}

std::string_view viseme_name(Viseme v) {
    switch (v) {
        case Viseme::A: return "A";
        case Viseme::I: return "I";
        case Viseme::U: return "U";
        case Viseme::E: return "E";
        case Viseme::O: return "O";
        case Viseme::M: return "M";
        case Viseme::F: return "F";
        case Viseme::sil: return "sil";
    }
    return "sil";
}

std::optional<Viseme> parse_viseme(std::string_view s) {
    if (s == "closed" || s == "M/closed") return Viseme::M;
    for (Viseme v : {Viseme::A, Viseme::I, Viseme::U, Viseme::E, Viseme::O, Viseme::M, Viseme::F, Viseme::sil})
        if (viseme_name(v) == s) return v;
    return std::nullopt;
}

const std::array<double, 6>& viseme_row(Viseme v) {
    //                                     OpenY  Form  Pucker Funnel Press  X
    static constexpr std::array<double, 6> A{0.9, 0.2, 0.0, 0.0, 0.0, 0.0};
    static constexpr std::array<double, 6> I{0.25, 0.6, 0.0, 0.0, 0.0, 0.0};
    static constexpr std::array<double, 6> U{0.3, -0.2, 0.8, 0.4, 0.0, 0.0};
    static constexpr std::array<double, 6> E{0.5, 0.4, 0.0, 0.0, 0.0, 0.0};
    static constexpr std::array<double, 6> O{0.7, -0.1, 0.3, 0.8, 0.0, 0.0};
    static constexpr std::array<double, 6> M{0.0, 0.0, 0.0, 0.0, 0.8, 0.0};
    static constexpr std::array<double, 6> F{0.15, 0.0, 0.0, 0.0, 0.5, 0.0};
    static constexpr std::array<double, 6> sil{};
    switch (v) {
        case Viseme::A: return A;
        case Viseme::I: return I;
        case Viseme::U: return U;
        case Viseme::E: return E;
        case Viseme::O: return O;
        case Viseme::M: return M;
        case Viseme::F: return F;
        case Viseme::sil: return sil;
    }
    return sil;
}

VisemeTimeline parse_visemes(std::string_view text) {
    VisemeTimeline tl;
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        std::istringstream fields(line);
        std::string t_s, v_s, w_s, extra;
        if (!(fields >> t_s)) continue;
        const std::string where = "viseme line " + std::to_string(line_no);
        if (!(fields >> v_s)) throw RigError(where + ": expected 't viseme weight'");
        fields >> w_s;
        if (fields >> extra) throw RigError(where + ": trailing fields");
        VisemeEvent ev;
        auto [p, ec] = std::from_chars(t_s.data(), t_s.data() + t_s.size(), ev.t);
        if (ec != std::errc{} || p != t_s.data() + t_s.size() || !(ev.t >= 0.0))
            throw RigError(where + ": bad time '" + t_s + "'");
        auto v = parse_viseme(v_s);
        if (!v) throw RigError(where + ": unknown viseme '" + v_s + "'");
        ev.viseme = *v;
        if (!w_s.empty()) {
            auto [q, ec2] = std::from_chars(w_s.data(), w_s.data() + w_s.size(), ev.weight);
            if (ec2 != std::errc{} || q != w_s.data() + w_s.size() || !(ev.weight >= 0.0 && ev.weight <= 1.0))
                throw RigError(where + ": weight must be in [0, 1]");
        }
        if (!tl.events.empty() && ev.t < tl.events.back().t) throw RigError(where + ": times must be non-decreasing");
        tl.events.push_back(ev);
    }
    return tl;
}

VisemeTimeline read_visemes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_visemes(ss.str());
}

namespace {

using Row = std::array<double, 6>;

Row weighted(const VisemeEvent& e) {
    Row r = viseme_row(e.viseme);
    for (double& v : r) v *= e.weight;
    return r;
}

Row blend(const Row& from, const Row& to, double alpha) {
    if (alpha >= 1.0) return to;
    Row r;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = from[i] + alpha * (to[i] - from[i]);
    return r;
}

double fade(double elapsed) { return std::clamp(elapsed / kVisemeCrossfade, 0.0, 1.0); }

}  // namespace

PoseValues viseme_params(const VisemeTimeline& timeline, double t) {
    // Each event fades in from whatever pose was showing when it started.
    Row from{};
    Row current{};
    const auto& ev = timeline.events;
    for (std::size_t i = 0; i < ev.size() && ev[i].t <= t; ++i) {
        const bool active = i + 1 == ev.size() || ev[i + 1].t > t;
        const double until = active ? t : ev[i + 1].t;
        current = blend(from, weighted(ev[i]), fade(until - ev[i].t));
        from = current;
    }
    PoseValues out;
    for (std::size_t i = 0; i < kMouthParameters.size(); ++i) out[std::string(kMouthParameters[i])] = current[i];
    return out;
}

AnimationClip viseme_clip(const VisemeTimeline& timeline, double fps) {
    if (!(fps > 0.0)) throw RigError("viseme_clip: fps must be positive");
    AnimationClip clip;
    clip.duration = (timeline.events.empty() ? 0.0 : timeline.events.back().t) + kVisemeTail;
    for (auto name : kMouthParameters) clip.tracks.push_back({std::string(name), {}, Interpolation::linear});
    const auto frames = static_cast<long>(std::floor(clip.duration * fps + 1e-9));
    for (long k = 0; k <= frames; ++k) {
        const double t = static_cast<double>(k) / fps;
        const PoseValues v = viseme_params(timeline, t);
        for (auto& track : clip.tracks) track.keys.push_back({t, v.at(track.parameter)});
    }
    return clip;
}

}  // namespace toonforge
