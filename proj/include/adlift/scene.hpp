// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace adlift {

/// One anisotropic splat. Covariance is derived as R S S^T R^T with
/// S = diag(exp(log_scale)) and R the rotation of `rotation` (w, x, y, z).
struct Gaussian {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Vector3d log_scale = Eigen::Vector3d::Zero();
    Eigen::Vector4d rotation{1.0, 0.0, 0.0, 0.0};
    Eigen::Vector3d color = Eigen::Vector3d::Constant(0.5);
    double opacity_logit = 0.0;

    double opacity() const noexcept;
};

inline constexpr int kParamsPerGaussian = 14;

/// Flat view of a Gaussian's parameters in file-record order: position (0-2),
/// log_scale (3-5), rotation w,x,y,z (6-9), color (10-12), opacity logit (13).
double& gaussian_param(Gaussian& g, int k);
double gaussian_param(const Gaussian& g, int k);

/// Frozen raw Gaussians plus the trainable safeguard set composited with them.
struct Scene {
    std::vector<Gaussian> raw;
    std::vector<Gaussian> safeguard;
    Eigen::Vector3d background = Eigen::Vector3d::Constant(0.5);
};

/// Pinhole camera, OpenCV convention (x right, y down, z forward).
struct Camera {
    Eigen::Matrix3d rotation_wc = Eigen::Matrix3d::Identity();
    Eigen::Vector3d translation_wc = Eigen::Vector3d::Zero();
    double fx = 1.0;
    double fy = 1.0;
    double cx = 0.0;
    double cy = 0.0;
    int width = 8;
    int height = 8;
    double znear = 0.01;

    Eigen::Vector3d center_world() const { return -rotation_wc.transpose() * translation_wc; }

    friend bool operator==(const Camera& a, const Camera& b) {
        return a.rotation_wc == b.rotation_wc && a.translation_wc == b.translation_wc &&
               a.fx == b.fx && a.fy == b.fy && a.cx == b.cx && a.cy == b.cy &&
               a.width == b.width && a.height == b.height && a.znear == b.znear;
    }
};

/// Throws std::invalid_argument if the camera breaks its invariants
/// (orthonormal rotation with det +1, size >= 8, znear > 0).
void validate_camera(const Camera& cam);

double logistic(double x) noexcept;

/// Unit quaternion (w, x, y, z) to rotation matrix. The input is normalized
/// first.
Eigen::Matrix3d quaternion_to_rotation(const Eigen::Vector4d& q);

/// n Gaussians in [-spread, spread]^3 drawn from SplitMix64(seed). Per
/// Gaussian the draw order is position (3), log-scale (3), quaternion (3
/// uniforms, Shoemake), color (3), opacity logit (1).
Scene make_synthetic_scene(int n, std::uint64_t seed, double spread = 1.0);

/// Cameras equally spaced in azimuth on a circle around the z axis, all
/// looking at the origin. Camera 0 sits on the +x axis.
std::vector<Camera> make_camera_ring(int n_cams, double radius, double height, int image_size,
                                     double fov_deg);

inline constexpr double kSafeguardOpacityShift = -4.0;

/// copy_raw initialization: safeguard := raw with opacity logits shifted by
/// kSafeguardOpacityShift. Requires an empty safeguard list.
Scene init_safeguard(const Scene& scene);

/// from_scene initialization: safeguard copied from `donor`, whose raw list
/// must match `scene.raw` exactly.
Scene init_safeguard(const Scene& scene, const Scene& donor);

Scene raw_only(const Scene& scene);

/// Parameters of the scene shipped with the tests and the CLI defaults.
struct BundledSceneSpec {
    int n = 50;
    std::uint64_t seed = 7;
    double spread = 1.0;
    double ring_radius = 3.0;
    double ring_height = 1.0;
    int image_size = 64;
    double fov_deg = 60.0;
};

Scene bundled_scene(const BundledSceneSpec& spec = {});
std::vector<Camera> bundled_ring(int n_cams, const BundledSceneSpec& spec = {});

} // namespace adlift
