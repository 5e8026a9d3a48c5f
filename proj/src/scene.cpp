// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/scene.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "adlift/rng.hpp"

namespace adlift {

double logistic(double x) noexcept {
    return 1.0 / (1.0 + std::exp(-x));
}

double Gaussian::opacity() const noexcept {
    return logistic(opacity_logit);
}

double& gaussian_param(Gaussian& g, int k) {
    if (k < 3) return g.position[k];
    if (k < 6) return g.log_scale[k - 3];
    if (k < 10) return g.rotation[k - 6];
    if (k < 13) return g.color[k - 10];
    if (k == 13) return g.opacity_logit;
    throw std::out_of_range("gaussian_param index " + std::to_string(k));
}

double gaussian_param(const Gaussian& g, int k) {
    return gaussian_param(const_cast<Gaussian&>(g), k);
}

Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q_in) {
    const Eigen::Vector4d q = q_in / q_in.norm();
    const double w = q[0], x = q[1], y = q[2], z = q[3];
    Eigen::Matrix3d r;
    r << 1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y),
        2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x),
        2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y);
    return r;
}

void validate_camera(const Camera& cam) {
    const Eigen::Matrix3d& r = cam.rotation_wc;
    if (!((r * r.transpose() - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= 1e-9)) {
        throw std::invalid_argument("camera rotation is not orthonormal");
    }
    if (!(std::abs(r.determinant() - 1.0) <= 1e-9)) {
        throw std::invalid_argument("camera rotation has det != +1");
    }
    if (cam.width < 8 || cam.height < 8) {
        throw std::invalid_argument("camera must be at least 8x8 pixels");
    }
    if (!(cam.znear > 0.0)) {
        throw std::invalid_argument("camera znear must be positive");
    }
    if (!(cam.fx > 0.0) || !(cam.fy > 0.0)) {
        throw std::invalid_argument("camera focal lengths must be positive");
    }
}

Scene make_synthetic_scene(int n, std::uint64_t seed, double spread) {
    if (n < 1) {
        throw std::invalid_argument("make_synthetic_scene: n must be >= 1");
    }
    if (!(spread > 0.0)) {
        throw std::invalid_argument("make_synthetic_scene: spread must be positive");
    }
    SplitMix64 rng(seed);
    const double ls_lo = std::log(0.02 * spread);
    const double ls_hi = std::log(0.15 * spread);
    constexpr double two_pi = 2.0 * std::numbers::pi;

    Scene scene;
    scene.raw.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        Gaussian g;
        for (int k = 0; k < 3; ++k) {
            g.position[k] = rng.uniform(-spread, spread);
        }
        for (int k = 0; k < 3; ++k) {
            g.log_scale[k] = rng.uniform(ls_lo, ls_hi);
        }
        const double u1 = rng.uniform();
        const double u2 = rng.uniform();
        const double u3 = rng.uniform();
        const double a = std::sqrt(1.0 - u1);
        const double b = std::sqrt(u1);
        Eigen::Vector4d q(b * std::cos(two_pi * u3), a * std::sin(two_pi * u2),
                          a * std::cos(two_pi * u2), b * std::sin(two_pi * u3));
        g.rotation = q / q.norm();
        for (int k = 0; k < 3; ++k) {
            g.color[k] = rng.uniform(0.1, 0.9);
        }
        g.opacity_logit = rng.uniform(0.0, 3.0);
        scene.raw.push_back(g);
    }
    return scene;
}

std::vector<Camera> make_camera_ring(int n_cams, double radius, double height, int image_size,
                                     double fov_deg) {
    if (n_cams < 2) {
        throw std::invalid_argument("make_camera_ring: need at least 2 cameras");
    }
    if (!(fov_deg >= 10.0 && fov_deg <= 120.0)) {
        throw std::invalid_argument("make_camera_ring: fov must be within [10, 120] degrees");
    }
    if (image_size < 8) {
        throw std::invalid_argument("make_camera_ring: image size must be >= 8");
    }
    if (!(radius > 0.0)) {
        throw std::invalid_argument("make_camera_ring: radius must be positive");
    }
    const double focal =
        (image_size / 2.0) / std::tan(fov_deg / 2.0 * std::numbers::pi / 180.0);
    const Eigen::Vector3d up(0.0, 0.0, 1.0);

    std::vector<Camera> cams;
    cams.reserve(static_cast<std::size_t>(n_cams));
    for (int i = 0; i < n_cams; ++i) {
        const double az = 2.0 * std::numbers::pi * i / n_cams;
        const Eigen::Vector3d eye(radius * std::cos(az), radius * std::sin(az), height);
        const Eigen::Vector3d forward = (-eye).normalized();
        const Eigen::Vector3d right = forward.cross(up).normalized();
        const Eigen::Vector3d down = forward.cross(right);

        Camera cam;
        cam.rotation_wc.row(0) = right.transpose();
        cam.rotation_wc.row(1) = down.transpose();
        cam.rotation_wc.row(2) = forward.transpose();
        cam.translation_wc = -cam.rotation_wc * eye;
        cam.fx = cam.fy = focal;
        cam.cx = cam.cy = image_size / 2.0;
        cam.width = cam.height = image_size;
        cam.znear = 0.01;
        cams.push_back(cam);
    }
    return cams;
}

Scene init_safeguard(const Scene& scene) {
    if (!scene.safeguard.empty()) {
        throw std::invalid_argument("init_safeguard(copy_raw): safeguard list is not empty");
    }
    Scene out = scene;
    out.safeguard = scene.raw;
    for (Gaussian& g : out.safeguard) {
        g.opacity_logit += kSafeguardOpacityShift;
    }
    return out;
}

namespace {

bool same_gaussian(const Gaussian& a, const Gaussian& b) {
    return a.position == b.position && a.log_scale == b.log_scale && a.rotation == b.rotation &&
           a.color == b.color && a.opacity_logit == b.opacity_logit;
}

} // namespace

Scene init_safeguard(const Scene& scene, const Scene& donor) {
    if (donor.raw.size() != scene.raw.size()) {
        throw std::invalid_argument("init_safeguard(from_scene): donor has " +
                                    std::to_string(donor.raw.size()) + " raw Gaussians, scene has " +
                                    std::to_string(scene.raw.size()));
    }
    for (std::size_t i = 0; i < scene.raw.size(); ++i) {
        if (!same_gaussian(scene.raw[i], donor.raw[i])) {
            throw std::invalid_argument("init_safeguard(from_scene): donor raw Gaussian " +
                                        std::to_string(i) + " differs");
        }
    }
    Scene out = scene;
    out.safeguard = donor.safeguard;
    return out;
}

Scene raw_only(const Scene& scene) {
    Scene out;
    out.raw = scene.raw;
    out.background = scene.background;
    return out;
}

Scene bundled_scene(const BundledSceneSpec& spec) {
    return make_synthetic_scene(spec.n, spec.seed, spec.spread);
}

std::vector<Camera> bundled_ring(int n_cams, const BundledSceneSpec& spec) {
    return make_camera_ring(n_cams, spec.ring_radius, spec.ring_height, spec.image_size,
                            spec.fov_deg);
}

} // namespace adlift
