// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "adlift/baselines.hpp"
#include "adlift/lpgd.hpp"

namespace adlift {

struct ViewMetrics {
    int camera = 0; // index into the list the view came from
    double psnr_db = 0.0;
    double ssim = 0.0;
    double linf_residual = 0.0;
    double adv_loss = 0.0;     // on the protected render
    double adv_loss_raw = 0.0; // on the raw render

    friend bool operator==(const ViewMetrics&, const ViewMetrics&) = default;
};

struct ViewAggregate {
    double psnr_mean = 0.0;
    double psnr_min = 0.0;
    double ssim_mean = 0.0;
    double linf_median = 0.0;
    double linf_max = 0.0;
    double adv_mean = 0.0;
    double adv_raw_mean = 0.0;

    friend bool operator==(const ViewAggregate&, const ViewAggregate&) = default;
};

struct EvalReport {
    std::string objective;
    std::vector<ViewMetrics> train_views;
    std::vector<ViewMetrics> novel_views;
    ViewAggregate train;
    ViewAggregate novel;
    double adv_train = 0.0; // == train.adv_mean
    double adv_novel = 0.0; // == novel.adv_mean
    double gap = 0.0;       // |adv_train - adv_novel|
    nlohmann::ordered_json config = nlohmann::ordered_json::object();
    double wall_seconds = 0.0;

    friend bool operator==(const EvalReport&, const EvalReport&) = default;
};

nlohmann::ordered_json report_to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);
std::string serialize_report(const EvalReport& report);
EvalReport parse_report(const std::string& text);

/// Median (mean of the two middle values for even sizes). Throws on empty input.
double median(std::vector<double> values);

struct CameraSplit {
    std::vector<Camera> train;
    std::vector<Camera> novel;
};

/// Every third camera (index % 3 == 2) is held out as a novel view.
CameraSplit split_holdout(const std::vector<Camera>& cameras);

/// Renders raw_only(raw_scene) and prot_scene in every view and compares.
/// Both camera lists must be non-empty and share no camera.
EvalReport evaluate(const Scene& raw_scene, const Scene& prot_scene,
                    const std::vector<Camera>& train_cams, const std::vector<Camera>& novel_cams,
                    const AttackObjective& objective, const Surrogates& models,
                    const RenderOptions& opts = {});

nlohmann::ordered_json config_to_json(const LpgdConfig& cfg);
nlohmann::ordered_json config_to_json(const SoftConfig& cfg);

enum class SweepAxis { eta, alpha, k_p, k_l, soft_w };

const char* to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(const std::string& s);

struct SweepRow {
    double value = 0.0;
    EvalReport report;
};

struct SweepTable {
    SweepAxis axis = SweepAxis::eta;
    std::vector<SweepRow> rows;
};

/// LpgdConfig with one field set to `value`. Sweeping eta keeps alpha = eta/4.
LpgdConfig apply_axis(LpgdConfig cfg, SweepAxis axis, double value);

/// One protect (or soft baseline, for soft_w) run per value on the train
/// split of `cameras`, each followed by evaluate on both splits. The scene's
/// safeguard list is ignored; every run starts from copy_raw.
SweepTable sweep(const Scene& scene, const std::vector<Camera>& cameras,
                 const AttackObjective& objective, const Surrogates& models, SweepAxis axis,
                 const std::vector<double>& values, const LpgdConfig& base = {},
                 const SoftConfig& soft = {});

/// Header `value,psnr_db,ssim,linf,adv_train,adv_novel,gap`; psnr_db, ssim
/// and linf are the train-view mean, mean and median.
std::string sweep_csv(const SweepTable& table);

/// JSON lines, one report per row with the swept value.
std::string sweep_jsonl(const SweepTable& table);

} // namespace adlift
