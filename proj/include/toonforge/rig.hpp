#pragma once

#include "toonforge/image.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace toonforge {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    friend bool operator==(const Vec2&, const Vec2&) = default;
};

struct Mesh {
    std::vector<Vec2> vertices;  // canvas px
    std::vector<Vec2> uvs;       // [0, 1]
    std::vector<std::array<std::uint32_t, 3>> triangles;
    friend bool operator==(const Mesh&, const Mesh&) = default;
};

struct Parameter {
    std::string id;
    double min = 0.0;
    double max = 1.0;
    double default_value = 0.0;
    friend bool operator==(const Parameter&, const Parameter&) = default;
};

/// Offsets of every layer vertex at one parameter value.
struct Keyform {
    double value = 0.0;
    std::vector<Vec2> offsets;
    friend bool operator==(const Keyform&, const Keyform&) = default;
};

struct Deformer {
    std::string layer;
    std::string parameter;
    std::vector<Keyform> keys;  // strictly increasing values
    friend bool operator==(const Deformer&, const Deformer&) = default;
};

/// Weighted (0..1) per-vertex offsets, added after deformers.
struct Blendshape {
    std::string name;
    std::string layer;
    std::vector<Vec2> offsets;
    friend bool operator==(const Blendshape&, const Blendshape&) = default;
};

struct ModelLayer {
    std::string name;
    int z = 0;
    Mesh mesh;
    std::shared_ptr<const RasterImage> texture;
    double opacity = 1.0;

    friend bool operator==(const ModelLayer& a, const ModelLayer& b) {
        const bool tex = a.texture == b.texture || (a.texture && b.texture && *a.texture == *b.texture);
        return tex && a.name == b.name && a.z == b.z && a.mesh == b.mesh && a.opacity == b.opacity;
    }
};

/// Layered, parameterized polygon-mesh character. Immutable once validated;
/// textures are shared between copies.
struct CharacterModel {
    Size canvas_size;
    std::vector<ModelLayer> layers;
    std::vector<Parameter> parameters;
    std::vector<Deformer> deformers;
    std::vector<Blendshape> blendshapes;
    /// Free-form generation recipe (selection, colors, seed, source text).
    std::map<std::string, std::string> metadata;

    const ModelLayer* find_layer(std::string_view name) const;
    const Parameter* find_parameter(std::string_view id) const;
    friend bool operator==(const CharacterModel&, const CharacterModel&) = default;
};

class RigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Throws RigError naming the first offending element.
void validate_model(const CharacterModel& model);

/// Parameter ids and blendshape names mapped to values.
using PoseValues = std::map<std::string, double>;

struct PosedLayer {
    std::string name;
    int z = 0;
    std::vector<Vec2> vertices;
    std::vector<Vec2> uvs;
    std::vector<std::array<std::uint32_t, 3>> triangles;
    std::shared_ptr<const RasterImage> texture;
    double opacity = 1.0;
};

struct PosedModel {
    Size canvas_size;
    std::vector<PosedLayer> layers;  // ascending z
};

/// Deformers interpolate piecewise-linearly between keys (clamped to the key
/// range) and add; blendshapes add weight * offsets. Values are clamped to the
/// parameter range ([0, 1] for blendshape weights). Unknown ids throw RigError.
PosedModel apply_parameters(const CharacterModel& model, const PoseValues& values);

/// Interpolated deformer offsets at `value`; exact stored offsets at a key.
std::vector<Vec2> interpolate_keys(const Deformer& deformer, double value);

// ---------------------------------------------------------------------------
// Parameter vocabulary

inline constexpr std::string_view kMouthOpenY = "MouthOpenY";
inline constexpr std::string_view kMouthForm = "MouthForm";
inline constexpr std::string_view kMouthPucker = "MouthPucker";
inline constexpr std::string_view kMouthFunnel = "MouthFunnel";
inline constexpr std::string_view kMouthPress = "MouthPress";
inline constexpr std::string_view kMouthX = "MouthX";

/// Order used by viseme rows and mouth parameter vectors.
inline constexpr std::array<std::string_view, 6> kMouthParameters = {kMouthOpenY,  kMouthForm,  kMouthPucker,
                                                                     kMouthFunnel, kMouthPress, kMouthX};

/// Canonical mouth set plus head/body/eye controls used by generated characters.
std::vector<Parameter> standard_parameters();

// ---------------------------------------------------------------------------
// ARKit

inline constexpr std::size_t kArkitCount = 52;
const std::array<std::string_view, kArkitCount>& arkit_names();
std::optional<std::size_t> arkit_index(std::string_view name);

/// The jaw/mouth subset of ARKit names; generated characters carry a mouth
/// blendshape for each.
std::vector<std::string_view> arkit_mouth_names();

struct ArkitFrame {
    double t = 0.0;
    std::array<double, kArkitCount> coefficients{};

    double get(std::string_view name) const;
    void set(std::string_view name, double value);  // clamps to [0, 1]
};

PoseValues map_arkit_mouth(const ArkitFrame& frame);

/// CSV with header "timestamp" + the 52 names in any order.
std::vector<ArkitFrame> parse_arkit_csv(std::string_view text);
std::vector<ArkitFrame> read_arkit_csv(const std::filesystem::path& path);
std::string write_arkit_csv(std::span<const ArkitFrame> frames);

// ---------------------------------------------------------------------------
// Clips and visemes

enum class Interpolation { linear, hold };

struct Keyframe {
    double t = 0.0;
    double value = 0.0;
    friend bool operator==(const Keyframe&, const Keyframe&) = default;
};

struct Track {
    std::string parameter;
    std::vector<Keyframe> keys;
    Interpolation interpolation = Interpolation::linear;
    friend bool operator==(const Track&, const Track&) = default;
};

struct AnimationClip {
    double duration = 0.0;
    std::vector<Track> tracks;
    friend bool operator==(const AnimationClip&, const AnimationClip&) = default;
};

/// Checks keyframe ordering and, for known parameters, value ranges.
void validate_clip(const AnimationClip& clip, std::span<const Parameter> parameters);

/// Values for every track with at least one key.
PoseValues sample_clip(const AnimationClip& clip, double t);

/// One linear mouth-parameter keyframe per frame. Throws RigError when frames
/// are empty or out of time order.
AnimationClip coefficients_to_clip(std::span<const ArkitFrame> frames);

enum class Viseme { A, I, U, E, O, M, F, sil };

std::string_view viseme_name(Viseme v);
std::optional<Viseme> parse_viseme(std::string_view s);

/// Fixed weights of kMouthParameters for each viseme.
const std::array<double, 6>& viseme_row(Viseme v);

inline constexpr double kVisemeCrossfade = 0.060;
/// Silence appended after the last event when a timeline becomes a clip.
inline constexpr double kVisemeTail = 0.5;

struct VisemeEvent {
    double t = 0.0;
    Viseme viseme = Viseme::sil;
    double weight = 1.0;
    friend bool operator==(const VisemeEvent&, const VisemeEvent&) = default;
};

struct VisemeTimeline {
    std::vector<VisemeEvent> events;  // non-decreasing t
};

/// Lines "t viseme weight"; '#' comments and blank lines ignored.
VisemeTimeline parse_visemes(std::string_view text);
VisemeTimeline read_visemes(const std::filesystem::path& path);

PoseValues viseme_params(const VisemeTimeline& timeline, double t);

/// Linear clip keyed at k / fps, k = 0 .. floor(duration * fps), with
/// duration = last event + kVisemeTail.
AnimationClip viseme_clip(const VisemeTimeline& timeline, double fps);

}  // namespace toonforge
