#pragma once

#include "toonforge/rig.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace toonforge {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kModelManifest = "model.json";

class ModelIoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct BundleFile {
    std::string path;  // relative, '/' separated
    std::vector<std::uint8_t> bytes;
    friend bool operator==(const BundleFile&, const BundleFile&) = default;
};

/// A character as files: the manifest plus one PNG per layer, sorted by path.
using Bundle = std::vector<BundleFile>;

/// Canonical manifest text: sorted keys, shortest round-trip floats, LF.
std::string model_manifest(const CharacterModel& model);

/// Validates the model and encodes it; throws ModelIoError.
Bundle encode_bundle(const CharacterModel& model);
CharacterModel decode_bundle(const Bundle& bundle);

std::filesystem::path save_model(const CharacterModel& model, const std::filesystem::path& dir);
CharacterModel load_model(const std::filesystem::path& dir);

/// Files of a bundle directory, sorted by relative path.
Bundle read_bundle_dir(const std::filesystem::path& dir);
void write_bundle_dir(const Bundle& bundle, const std::filesystem::path& dir);

/// standard_parameters(), the default validation set for clips.
std::span<const Parameter> default_clip_parameters();

std::string clip_text(const AnimationClip& clip);
AnimationClip parse_clip(std::string_view text, std::span<const Parameter> parameters);

/// Clips are validated against `parameters` (ranges of known ids) on both ends.
void save_clip(const AnimationClip& clip, const std::filesystem::path& path,
               std::span<const Parameter> parameters = default_clip_parameters());
AnimationClip load_clip(const std::filesystem::path& path,
                        std::span<const Parameter> parameters = default_clip_parameters());

}  // namespace toonforge
