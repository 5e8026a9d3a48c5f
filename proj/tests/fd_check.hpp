// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

// Finite-difference oracle for render_backward shared by the unit and
// acceptance tests.

#pragma once

#include <algorithm>
#include <cmath>

#include "adlift/render.hpp"
#include "adlift/rng.hpp"

namespace adlift::testing {

struct FdReport {
    double max_rel_err = 0.0;
    int checked = 0;
    int excluded = 0; // stencils that crossed a blend-structure change
};

inline double contract(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

/// Compares render_backward with central differences of <adjoint, render>.
/// A parameter is skipped when the blend signature at +step or -step differs
/// from the base one, since the image is not differentiable there.
inline FdReport check_render_gradients(const Scene& scene, const Camera& cam, const Image& adjoint,
                                       double step) {
    FdReport rep;
    const ParamGrads analytic = render_backward(scene, cam, adjoint);
    const auto base_sig = blend_signature(scene, cam);
    for (std::size_t i = 0; i < scene.safeguard.size(); ++i) {
        for (int k = 0; k < kParamsPerGaussian; ++k) {
            Scene plus = scene, minus = scene;
            gaussian_param(plus.safeguard[i], k) += step;
            gaussian_param(minus.safeguard[i], k) -= step;
            if (blend_signature(plus, cam) != base_sig || blend_signature(minus, cam) != base_sig) {
                ++rep.excluded;
                continue;
            }
            const double fd =
                (contract(render(plus, cam), adjoint) - contract(render(minus, cam), adjoint)) / (2 * step);
            const double a = analytic[i][k];
            rep.max_rel_err = std::max(rep.max_rel_err, std::abs(a - fd) / std::max(1e-8, std::abs(a)));
            ++rep.checked;
        }
    }
    return rep;
}

/// Random case: 10 raw + 10 safeguard Gaussians, one camera of a 32x32 ring,
/// adjoint uniform in [-1, 1].
struct GradCase {
    Scene scene;
    Camera cam;
    Image adjoint;
};

inline GradCase make_grad_case(std::uint64_t seed) {
    GradCase c;
    c.scene = make_synthetic_scene(10, seed);
    Scene other = make_synthetic_scene(10, seed + 1000);
    c.scene.safeguard = other.raw;
    SplitMix64 rng(seed * 7919 + 1);
    const auto cams = make_camera_ring(6, 3.0, 1.0, 32, 50.0);
    c.cam = cams[rng.next() % cams.size()];
    c.adjoint = Image(32, 32);
    for (double& v : c.adjoint.data()) v = rng.uniform(-1.0, 1.0);
    return c;
}

} // namespace adlift::testing
