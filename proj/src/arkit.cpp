#include "toonforge/rig.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace toonforge {

const std::array<std::string_view, kArkitCount>& arkit_names() {
    static constexpr std::array<std::string_view, kArkitCount> names = {
        "eyeBlinkLeft",     "eyeLookDownLeft",    "eyeLookInLeft",     "eyeLookOutLeft",   "eyeLookUpLeft",
        "eyeSquintLeft",    "eyeWideLeft",        "eyeBlinkRight",     "eyeLookDownRight", "eyeLookInRight",
        "eyeLookOutRight",  "eyeLookUpRight",     "eyeSquintRight",    "eyeWideRight",     "jawForward",
        "jawLeft",          "jawRight",           "jawOpen",           "mouthClose",       "mouthFunnel",
        "mouthPucker",      "mouthLeft",          "mouthRight",        "mouthSmileLeft",   "mouthSmileRight",
        "mouthFrownLeft",   "mouthFrownRight",    "mouthDimpleLeft",   "mouthDimpleRight", "mouthStretchLeft",
        "mouthStretchRight", "mouthRollLower",    "mouthRollUpper",    "mouthShrugLower",  "mouthShrugUpper",
        "mouthPressLeft",   "mouthPressRight",    "mouthLowerDownLeft", "mouthLowerDownRight", "mouthUpperUpLeft",
        "mouthUpperUpRight", "browDownLeft",      "browDownRight",     "browInnerUp",      "browOuterUpLeft",
        "browOuterUpRight", "cheekPuff",          "cheekSquintLeft",   "cheekSquintRight", "noseSneerLeft",
        "noseSneerRight",   "tongueOut",
    };
    return names;
}

std::optional<std::size_t> arkit_index(std::string_view name) {
    const auto& names = arkit_names();
    auto it = std::find(names.begin(), names.end(), name);
    if (it == names.end()) return std::nullopt;
    return static_cast<std::size_t>(it - names.begin());
}

std::vector<std::string_view> arkit_mouth_names() {
    std::vector<std::string_view> out;
    for (auto n : arkit_names())
        if (n.starts_with("jaw") || n.starts_with("mouth")) out.push_back(n);
    return out;
}

double ArkitFrame::get(std::string_view name) const {
    auto i = arkit_index(name);
    if (!i) throw RigError("unknown ARKit coefficient '" + std::string(name) + "'");
    return coefficients[*i];
}

void ArkitFrame::set(std::string_view name, double value) {
    auto i = arkit_index(name);
    if (!i) throw RigError("unknown ARKit coefficient '" + std::string(name) + "'");
    coefficients[*i] = std::clamp(value, 0.0, 1.0);
}

PoseValues map_arkit_mouth(const ArkitFrame& f) {
    PoseValues out;
    out[std::string(kMouthOpenY)] = f.get("jawOpen");
    out[std::string(kMouthForm)] = std::clamp(
        (f.get("mouthSmileLeft") + f.get("mouthSmileRight")) / 2.0 - (f.get("mouthFrownLeft") + f.get("mouthFrownRight")) / 2.0,
        -1.0, 1.0);
    out[std::string(kMouthPucker)] = f.get("mouthPucker");
    out[std::string(kMouthFunnel)] = f.get("mouthFunnel");
    out[std::string(kMouthPress)] = (f.get("mouthPressLeft") + f.get("mouthPressRight")) / 2.0;
    out[std::string(kMouthX)] = std::clamp(f.get("mouthLeft") - f.get("mouthRight"), -1.0, 1.0);
    return out;
}

namespace {

std::vector<std::string> split_csv_line(std::string_view line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r' && c != ' ' && c != '\t') {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

double parse_number(const std::string& s, std::size_t line) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || p != s.data() + s.size())
        throw RigError("ARKit CSV line " + std::to_string(line) + ": bad number '" + s + "'");
    return v;
}

}  // namespace

std::vector<ArkitFrame> parse_arkit_csv(std::string_view text) {
    std::istringstream in{std::string(text)};
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::optional<std::size_t>> columns;  // nullopt = timestamp
    bool have_header = false;
    std::vector<ArkitFrame> frames;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        auto cells = split_csv_line(line);
        if (!have_header) {
            std::vector<bool> seen(kArkitCount, false);
            bool has_time = false;
            for (const auto& c : cells) {
                if (c == "timestamp") {
                    if (has_time) throw RigError("ARKit CSV: duplicate timestamp column");
                    has_time = true;
                    columns.push_back(std::nullopt);
                    continue;
                }
                auto idx = arkit_index(c);
                if (!idx) throw RigError("ARKit CSV: unknown column '" + c + "'");
                if (seen[*idx]) throw RigError("ARKit CSV: duplicate column '" + c + "'");
                seen[*idx] = true;
                columns.push_back(idx);
            }
            if (!has_time) throw RigError("ARKit CSV: missing timestamp column");
            for (std::size_t i = 0; i < kArkitCount; ++i)
                if (!seen[i]) throw RigError("ARKit CSV: missing column '" + std::string(arkit_names()[i]) + "'");
            have_header = true;
            continue;
        }
        if (cells.size() != columns.size())
            throw RigError("ARKit CSV line " + std::to_string(line_no) + ": expected " +
                           std::to_string(columns.size()) + " cells");
        ArkitFrame f;
        for (std::size_t c = 0; c < cells.size(); ++c) {
            const double v = parse_number(cells[c], line_no);
            if (!columns[c])
                f.t = v;
            else
                f.coefficients[*columns[c]] = std::clamp(v, 0.0, 1.0);
        }
        frames.push_back(f);
    }
    if (!have_header) throw RigError("ARKit CSV: empty input");
    return frames;
}

std::vector<ArkitFrame> read_arkit_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw RigError("cannot open " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_arkit_csv(ss.str());
}

std::string write_arkit_csv(std::span<const ArkitFrame> frames) {
    std::string out = "timestamp";
    for (auto n : arkit_names()) {
        out += ',';
        out += n;
    }
    out += '\n';
    char buf[32];
    for (const auto& f : frames) {
        auto [p, ec] = std::to_chars(buf, buf + sizeof buf, f.t);
        out.append(buf, p);
        for (double c : f.coefficients) {
            out += ',';
            auto [q, ec2] = std::to_chars(buf, buf + sizeof buf, c);
            out.append(buf, q);
        }
        out += '\n';
    }
    return out;
}

}  // namespace toonforge
