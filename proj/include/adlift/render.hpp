// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "adlift/image.hpp"
#include "adlift/scene.hpp"

namespace adlift {

// Rasterizer constants. Tests reference these directly.
inline constexpr double kMaxAlpha = 0.99;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kCovDilation = 0.3;
inline constexpr double kMinTransmittance = 1e-4;
inline constexpr int kTileSize = 16;

/// A Gaussian after projection into a view.
struct Splat2D {
    Eigen::Vector2d mean2d;
    Eigen::Matrix2d cov2d; // pixels^2, dilated
    double depth = 0.0;
    int gaussian_index = -1; // index into raw ++ safeguard
    bool is_safeguard = false;
};

/// EWA projection. Returns nullopt when the camera-space depth is <= znear.
/// gaussian_index/is_safeguard are left for the caller to fill.
std::optional<Splat2D> project_gaussian(const Gaussian& g, const Camera& cam);

struct RenderOptions {
    int threads = 0; // 0: all cores
};

/// Front-to-back alpha compositing of raw and safeguard Gaussians in one
/// depth order (ties broken by joint index).
Image render(const Scene& scene, const Camera& cam, const RenderOptions& opts = {});

/// dL/d(parameter) of one safeguard Gaussian. `rotation` is the gradient with
/// respect to the stored (ambient) quaternion; it is tangent to the unit
/// sphere because the renderer normalizes internally.
struct GaussianGrad {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
    Eigen::Vector4d rotation = Eigen::Vector4d::Zero();
    Eigen::Vector3d color = Eigen::Vector3d::Zero();
    double opacity_logit = 0.0;

    double& operator[](int k);
    double operator[](int k) const;
};

/// One entry per safeguard Gaussian, in safeguard order.
using ParamGrads = std::vector<GaussianGrad>;

/// Exact reverse-mode gradient of render() contracted with dL_dC. Raw
/// Gaussians take part in compositing but receive no gradient.
ParamGrads render_backward(const Scene& scene, const Camera& cam, const Image& dL_dC,
                           const RenderOptions& opts = {});

/// Central differences of loss(render(scene', cam)) for every safeguard
/// parameter, perturbed by +/- step. Test oracle for render_backward.
ParamGrads finite_diff_grads(const Scene& scene, const Camera& cam,
                             const std::function<double(const Image&)>& loss, double step,
                             const RenderOptions& opts = {});

/// Compositing record of a single pixel, for inspecting the blend.
struct PixelTrace {
    struct Entry {
        int gaussian_index;
        double alpha;
        double weight;               // alpha * transmittance before
        double transmittance_before; // product of (1 - alpha) over earlier entries
    };
    std::vector<Entry> entries;
    double final_transmittance = 1.0;
    Eigen::Vector3d color = Eigen::Vector3d::Zero(); // unclamped
};

PixelTrace trace_pixel(const Scene& scene, const Camera& cam, int x, int y);

/// Per-pixel hash of the blend structure: which Gaussians contribute, in what
/// order, and whether their alpha hit the kMaxAlpha clamp. The rendered image
/// is a smooth function of the parameters only while every signature stays
/// fixed, so finite-difference checks use this to spot stencils that straddle
/// the alpha-skip or early-termination thresholds.
std::vector<std::uint64_t> blend_signature(const Scene& scene, const Camera& cam);

} // namespace adlift
