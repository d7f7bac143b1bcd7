#pragma once

#include "toonforge/image.hpp"
#include "toonforge/rig.hpp"

#include <filesystem>

namespace toonforge {

enum class Sampling { nearest, bilinear };

struct RasterOptions {
    Sampling sampling = Sampling::nearest;
};

/// Draws posed layers back to front. Coverage uses 26.6 fixed-point edge
/// functions with the top-left rule at pixel centers; texels are fetched by
/// barycentric uv and composited source-over with the layer opacity.
/// Vertices are scaled from canvas to viewport space.
RasterImage rasterize(const PosedModel& posed, Size viewport, Rgba background, RasterOptions options = {});

/// Renders frames at t = k / fps for k = 0 .. floor(duration * fps) into
/// out/frame_%05d.png and returns the count.
std::size_t render_clip(const CharacterModel& model, const AnimationClip& clip, double fps,
                        const std::filesystem::path& out, Size viewport, Rgba background = {});

/// The frame render_clip writes for time t.
RasterImage clip_frame(const CharacterModel& model, const AnimationClip& clip, double t, Size viewport,
                       Rgba background = {});

/// Frame count render_clip produces for a clip duration.
std::size_t frame_count(double duration, double fps);

class RenderError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace toonforge
