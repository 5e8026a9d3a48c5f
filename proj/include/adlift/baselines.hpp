// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "adlift/lpgd.hpp"

namespace adlift {

/// Signed-gradient PGD in image space: `steps` updates, each followed by a
/// clamp into the eta-ball around x_raw and into [0, 1]. x0 is projected
/// first. Kept separate from gradient_truncation so the two can check each
/// other.
Image pgd_2d(const Image& x0, const Image& x_raw, const AdvLossFn& loss, int steps, double alpha,
             double eta);
Image pgd_2d(const Image& x0, const Image& x_raw, const AttackObjective& objective,
             const Surrogates& models, int steps, double alpha, double eta);

struct Fit2dViewLog {
    int view = 0;
    double adv_raw = 0.0;      // L_adv of the raw render
    double adv_target = 0.0;   // L_adv of the per-view PGD image
    double target_linf = 0.0;  // ||x_v^prot - x_raw||_inf
    double adv_rendered = 0.0; // after fitting
    double rendered_linf = 0.0;
};

struct Fit2dResult {
    Scene scene;
    std::vector<Image> targets;
    std::vector<Fit2dViewLog> views;
    TrainLog log; // one record per fitting round of k_l steps
};

/// PGD steps per view in stage 1 when none are given: the AdLift truncation
/// budget k_p * e_total spread over the views.
int fit2d_pgd_steps(const LpgdConfig& cfg, int n_views);

/// Stage 1: independent PGD per view, started from the copy_raw render and
/// projected around the raw render. Stage 2: fresh
/// copy_raw safeguard fitted to those fixed targets, e_total rounds of k_l
/// steps, views taken in cfg's schedule. pgd_steps <= 0 selects
/// fit2d_pgd_steps().
Fit2dResult fit2d(const Scene& scene, const std::vector<Camera>& cameras,
                  const AttackObjective& objective, const Surrogates& models,
                  const LpgdConfig& cfg, int pgd_steps = 0);

struct SoftConfig {
    double weight_w = 1.0;
    double lr = 1e-2;
    int steps = 2000;
    bool train_color = true;
    bool train_opacity = true;
    int checkpoint_every = 100;
    RenderOptions render;

    void validate() const;
};

struct SoftCheckpoint {
    int step = 0;
    double psnr_db = 0.0;  // mean over views, vs raw renders
    double adv_loss = 0.0; // mean over views

    friend bool operator==(const SoftCheckpoint&, const SoftCheckpoint&) = default;
};

struct SoftResult {
    Scene scene;
    std::vector<SoftCheckpoint> log; // step 0, every checkpoint_every steps, and the last step
};

/// Adam on the selected safeguard attributes (color and/or opacity) of
/// L_adv(R(G, v)) + w * (1 - SSIM(R(G, v), R(raw, v))), one view per step in
/// round-robin order. No projection. An empty safeguard list is initialized
/// with copy_raw.
SoftResult soft_constraint_protect(const Scene& scene, const std::vector<Camera>& cameras,
                                   const AttackObjective& objective, const Surrogates& models,
                                   const SoftConfig& cfg);

std::string serialize_soft_log(const std::vector<SoftCheckpoint>& log);
std::vector<SoftCheckpoint> parse_soft_log(const std::string& text);

} // namespace adlift
