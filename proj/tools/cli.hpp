// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "adlift/lpgd.hpp"

namespace adlift::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitNumerical = 3;

/// Every knob of every subcommand. Defaults, then the --config file, then
/// command-line flags.
struct RunConfig {
    std::string command;
    std::string scene_path;
    std::string cams_path;
    std::string out_dir = ".";

    // gen-scene
    std::optional<int> n;
    std::uint64_t seed = 7;
    double spread = 1.0;
    int n_cams = 8;
    double ring_radius = 3.0;
    double ring_height = 1.0;
    int image_size = 64;
    double fov_deg = 60.0;

    // surrogates and objective
    std::uint64_t surrogate_seed = 0;
    std::string objective = "vu";
    std::string target_image;
    std::string target_mask;
    std::optional<std::array<int, 4>> box;
    double lambda_dice = 1.0;

    // L-PGD
    double eta = 8.0 / 255.0;
    std::optional<double> alpha; // unset: eta / 4
    double beta = kDefaultBeta;
    int k_p = 10;
    int k_l = 50;
    int iters = 400;
    double lambda_ssim = 0.0;
    std::string schedule = "round_robin";
    std::string variant = "adlift";

    // baselines
    std::string kind = "fit2d";
    double soft_w = 1.0;
    double soft_lr = 1e-2;
    int soft_steps = 2000;
    int soft_checkpoint = 100;

    // sweep
    std::string axis = "eta";
    std::vector<double> values;

    int threads = 0;
};

nlohmann::ordered_json to_json(const RunConfig& cfg);

/// Overrides the fields present in `j`. Unknown keys and wrong types throw
/// std::invalid_argument.
void merge_json(RunConfig& cfg, const nlohmann::json& j);

/// Entry point. Returns the process exit code; never throws.
int run(int argc, const char* const* argv);

} // namespace adlift::cli
