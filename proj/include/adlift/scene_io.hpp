// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "adlift/image_io.hpp"
#include "adlift/scene.hpp"

namespace adlift {

inline constexpr int kSceneFormatVersion = 1;

struct LoadedScene {
    Scene scene;
    /// Set when at least one stored quaternion was off unit norm by more than
    /// 1e-9 and had to be renormalized.
    bool renormalized_quaternions = false;
};

/// Scene file text: a JSON object with keys `version`, `background`, `raw`
/// and `safeguard`. Each Gaussian is a 14-number record
/// [px, py, pz, lsx, lsy, lsz, qw, qx, qy, qz, r, g, b, opacity_logit]
/// printed with 17 significant digits so that load(save(s)) is bit-exact.
std::string serialize_scene(const Scene& scene);
LoadedScene parse_scene(const std::string& text);

void save_scene(const Scene& scene, const std::filesystem::path& path);
LoadedScene load_scene(const std::filesystem::path& path);

/// Binary little-endian PLY as written by common 3DGS trainers. Reads the
/// vertex properties x y z scale_0..2 rot_0..3 opacity f_dc_0..2 and ignores
/// any others (normals, f_rest_*). Scales are logs, opacity is a logit, and
/// color = clamp(0.5 + C0 * f_dc, 0, 1). The result has an empty safeguard
/// list.
LoadedScene import_ply(const std::vector<std::uint8_t>& bytes);
LoadedScene import_ply(const std::filesystem::path& path);

inline constexpr double kShC0 = 0.28209479177387814;

/// Camera file text: {"version": 1, "cameras": [{...}, ...]}.
std::string serialize_cameras(const std::vector<Camera>& cams);
std::vector<Camera> parse_cameras(const std::string& text);

void save_cameras(const std::vector<Camera>& cams, const std::filesystem::path& path);
std::vector<Camera> load_cameras(const std::filesystem::path& path);

/// "%.17g" formatting shared by every text artifact.
std::string format_double(double v);

} // namespace adlift
