// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/eval.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "adlift/image_io.hpp"
#include "adlift/metrics.hpp"

namespace adlift {

namespace {

nlohmann::ordered_json view_to_json(const ViewMetrics& v) {
    nlohmann::ordered_json j;
    j["camera"] = v.camera;
    j["psnr_db"] = v.psnr_db;
    j["ssim"] = v.ssim;
    j["linf_residual"] = v.linf_residual;
    j["adv_loss"] = v.adv_loss;
    j["adv_loss_raw"] = v.adv_loss_raw;
    return j;
}

ViewMetrics view_from_json(const nlohmann::json& j) {
    ViewMetrics v;
    v.camera = j.at("camera").get<int>();
    v.psnr_db = j.at("psnr_db").get<double>();
    v.ssim = j.at("ssim").get<double>();
    v.linf_residual = j.at("linf_residual").get<double>();
    v.adv_loss = j.at("adv_loss").get<double>();
    v.adv_loss_raw = j.at("adv_loss_raw").get<double>();
    return v;
}

nlohmann::ordered_json aggregate_to_json(const ViewAggregate& a) {
    nlohmann::ordered_json j;
    j["psnr_mean"] = a.psnr_mean;
    j["psnr_min"] = a.psnr_min;
    j["ssim_mean"] = a.ssim_mean;
    j["linf_median"] = a.linf_median;
    j["linf_max"] = a.linf_max;
    j["adv_mean"] = a.adv_mean;
    j["adv_raw_mean"] = a.adv_raw_mean;
    return j;
}

ViewAggregate aggregate_from_json(const nlohmann::json& j) {
    ViewAggregate a;
    a.psnr_mean = j.at("psnr_mean").get<double>();
    a.psnr_min = j.at("psnr_min").get<double>();
    a.ssim_mean = j.at("ssim_mean").get<double>();
    a.linf_median = j.at("linf_median").get<double>();
    a.linf_max = j.at("linf_max").get<double>();
    a.adv_mean = j.at("adv_mean").get<double>();
    a.adv_raw_mean = j.at("adv_raw_mean").get<double>();
    return a;
}

ViewAggregate aggregate(const std::vector<ViewMetrics>& views) {
    ViewAggregate a;
    const double n = static_cast<double>(views.size());
    std::vector<double> linf;
    a.psnr_min = kPsnrCapDb;
    for (const ViewMetrics& v : views) {
        a.psnr_mean += v.psnr_db / n;
        a.psnr_min = std::min(a.psnr_min, v.psnr_db);
        a.ssim_mean += v.ssim / n;
        a.linf_max = std::max(a.linf_max, v.linf_residual);
        a.adv_mean += v.adv_loss / n;
        a.adv_raw_mean += v.adv_loss_raw / n;
        linf.push_back(v.linf_residual);
    }
    a.linf_median = median(std::move(linf));
    return a;
}

std::vector<ViewMetrics> measure(const Scene& raw, const Scene& prot, const std::vector<Camera>& cams,
                                 const AttackObjective& objective, const Surrogates& models,
                                 const RenderOptions& opts) {
    std::vector<ViewMetrics> out;
    for (std::size_t i = 0; i < cams.size(); ++i) {
        const Image xr = render(raw, cams[i], opts);
        const Image xp = render(prot, cams[i], opts);
        ViewMetrics v;
        v.camera = static_cast<int>(i);
        v.psnr_db = psnr(xp, xr);
        v.ssim = ssim(xp, xr);
        v.linf_residual = linf_distance(xp, xr);
        v.adv_loss = adversarial_loss(objective, models, xp, xr).value;
        v.adv_loss_raw = adversarial_loss(objective, models, xr, xr).value;
        if (!std::isfinite(v.adv_loss) || !std::isfinite(v.psnr_db) || !std::isfinite(v.ssim)) {
            throw NumericalError("evaluate: non-finite metric");
        }
        out.push_back(v);
    }
    return out;
}

} // namespace

nlohmann::ordered_json report_to_json(const EvalReport& r) {
    nlohmann::ordered_json j;
    j["objective"] = r.objective;
    j["adv_train"] = r.adv_train;
    j["adv_novel"] = r.adv_novel;
    j["gap"] = r.gap;
    j["train"] = aggregate_to_json(r.train);
    j["novel"] = aggregate_to_json(r.novel);
    j["train_views"] = nlohmann::ordered_json::array();
    for (const auto& v : r.train_views) j["train_views"].push_back(view_to_json(v));
    j["novel_views"] = nlohmann::ordered_json::array();
    for (const auto& v : r.novel_views) j["novel_views"].push_back(view_to_json(v));
    j["config"] = r.config;
    j["wall_seconds"] = r.wall_seconds;
    return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
    EvalReport r;
    r.objective = j.at("objective").get<std::string>();
    r.adv_train = j.at("adv_train").get<double>();
    r.adv_novel = j.at("adv_novel").get<double>();
    r.gap = j.at("gap").get<double>();
    r.train = aggregate_from_json(j.at("train"));
    r.novel = aggregate_from_json(j.at("novel"));
    for (const auto& v : j.at("train_views")) r.train_views.push_back(view_from_json(v));
    for (const auto& v : j.at("novel_views")) r.novel_views.push_back(view_from_json(v));
    r.config = nlohmann::ordered_json::parse(j.at("config").dump());
    r.wall_seconds = j.at("wall_seconds").get<double>();
    return r;
}

std::string serialize_report(const EvalReport& report) {
    return report_to_json(report).dump(2) + "\n";
}

EvalReport parse_report(const std::string& text) {
    try {
        return report_from_json(nlohmann::json::parse(text));
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("report: ") + e.what(), e.byte);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("report: ") + e.what(), 0);
    }
}

double median(std::vector<double> values) {
    if (values.empty()) throw std::invalid_argument("median of an empty list");
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

CameraSplit split_holdout(const std::vector<Camera>& cameras) {
    CameraSplit s;
    for (std::size_t i = 0; i < cameras.size(); ++i) {
        (i % 3 == 2 ? s.novel : s.train).push_back(cameras[i]);
    }
    return s;
}

EvalReport evaluate(const Scene& raw_scene, const Scene& prot_scene,
                    const std::vector<Camera>& train_cams, const std::vector<Camera>& novel_cams,
                    const AttackObjective& objective, const Surrogates& models,
                    const RenderOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    if (train_cams.empty() || novel_cams.empty()) {
        throw std::invalid_argument("evaluate: train and novel camera lists must be non-empty");
    }
    for (const Camera& a : train_cams) {
        validate_camera(a);
        for (const Camera& b : novel_cams) {
            if (a == b) throw std::invalid_argument("evaluate: train and novel cameras overlap");
        }
    }
    for (const Camera& b : novel_cams) validate_camera(b);
    validate_objective(objective, models, train_cams[0].width, train_cams[0].height);

    const Scene raw = raw_only(raw_scene);
    EvalReport r;
    r.objective = objective_name(objective);
    r.train_views = measure(raw, prot_scene, train_cams, objective, models, opts);
    r.novel_views = measure(raw, prot_scene, novel_cams, objective, models, opts);
    r.train = aggregate(r.train_views);
    r.novel = aggregate(r.novel_views);
    r.adv_train = r.train.adv_mean;
    r.adv_novel = r.novel.adv_mean;
    r.gap = std::abs(r.adv_train - r.adv_novel);
    r.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

nlohmann::ordered_json config_to_json(const LpgdConfig& cfg) {
    nlohmann::ordered_json j;
    j["eta"] = cfg.eta;
    j["alpha"] = cfg.alpha;
    j["beta"] = cfg.beta;
    j["k_p"] = cfg.k_p;
    j["k_l"] = cfg.k_l;
    j["e_total"] = cfg.e_total;
    j["lambda_ssim"] = cfg.lambda_ssim;
    j["seed"] = cfg.seed;
    j["init_mode"] = to_string(cfg.init_mode);
    j["schedule"] = to_string(cfg.schedule);
    return j;
}

nlohmann::ordered_json config_to_json(const SoftConfig& cfg) {
    nlohmann::ordered_json j;
    j["weight_w"] = cfg.weight_w;
    j["lr"] = cfg.lr;
    j["steps"] = cfg.steps;
    j["train_color"] = cfg.train_color;
    j["train_opacity"] = cfg.train_opacity;
    j["checkpoint_every"] = cfg.checkpoint_every;
    return j;
}

const char* to_string(SweepAxis axis) {
    switch (axis) {
    case SweepAxis::eta: return "eta";
    case SweepAxis::alpha: return "alpha";
    case SweepAxis::k_p: return "k_p";
    case SweepAxis::k_l: return "k_l";
    case SweepAxis::soft_w: return "soft_w";
    }
    return "?";
}

SweepAxis parse_sweep_axis(const std::string& s) {
    if (s == "eta") return SweepAxis::eta;
    if (s == "alpha") return SweepAxis::alpha;
    if (s == "k_p" || s == "kp") return SweepAxis::k_p;
    if (s == "k_l" || s == "kl") return SweepAxis::k_l;
    if (s == "soft_w" || s == "soft-w") return SweepAxis::soft_w;
    throw std::invalid_argument("unknown sweep axis '" + s + "'");
}

LpgdConfig apply_axis(LpgdConfig cfg, SweepAxis axis, double value) {
    auto as_count = [&](const char* name) {
        if (value != std::floor(value) || value < 1.0 || value > 1e6) {
            throw std::invalid_argument(std::string(name) + " sweep values must be positive integers");
        }
        return static_cast<int>(value);
    };
    switch (axis) {
    case SweepAxis::eta:
        cfg.eta = value;
        cfg.alpha = value / 4.0;
        break;
    case SweepAxis::alpha: cfg.alpha = value; break;
    case SweepAxis::k_p: cfg.k_p = as_count("k_p"); break;
    case SweepAxis::k_l: cfg.k_l = as_count("k_l"); break;
    case SweepAxis::soft_w: break;
    }
    cfg.validate();
    return cfg;
}

SweepTable sweep(const Scene& scene, const std::vector<Camera>& cameras,
                 const AttackObjective& objective, const Surrogates& models, SweepAxis axis,
                 const std::vector<double>& values, const LpgdConfig& base, const SoftConfig& soft) {
    if (values.empty()) throw std::invalid_argument("sweep: no values");
    const CameraSplit split = split_holdout(cameras);
    const Scene start = init_safeguard(raw_only(scene));
    SweepTable table;
    table.axis = axis;
    for (double value : values) {
        const auto t0 = std::chrono::steady_clock::now();
        SweepRow row;
        row.value = value;
        Scene prot;
        nlohmann::ordered_json config;
        if (axis == SweepAxis::soft_w) {
            SoftConfig sc = soft;
            sc.weight_w = value;
            sc.render = base.render;
            prot = soft_constraint_protect(start, split.train, objective, models, sc).scene;
            config["method"] = "soft";
            config["soft"] = config_to_json(sc);
        } else {
            const LpgdConfig cfg = apply_axis(base, axis, value);
            prot = protect(start, split.train, objective, models, cfg).scene;
            config["method"] = "adlift";
            config["lpgd"] = config_to_json(cfg);
        }
        config["axis"] = to_string(axis);
        config["value"] = value;
        row.report = evaluate(scene, prot, split.train, split.novel, objective, models, base.render);
        row.report.config = config;
        row.report.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        table.rows.push_back(std::move(row));
    }
    return table;
}

std::string sweep_csv(const SweepTable& table) {
    std::string out = "value,psnr_db,ssim,linf,adv_train,adv_novel,gap\n";
    char buf[512];
    for (const SweepRow& row : table.rows) {
        const EvalReport& r = row.report;
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", row.value,
                      r.train.psnr_mean, r.train.ssim_mean, r.train.linf_median, r.adv_train,
                      r.adv_novel, r.gap);
        out += buf;
    }
    return out;
}

std::string sweep_jsonl(const SweepTable& table) {
    std::string out;
    for (const SweepRow& row : table.rows) {
        nlohmann::ordered_json j;
        j["axis"] = to_string(table.axis);
        j["value"] = row.value;
        j["report"] = report_to_json(row.report);
        out += j.dump();
        out += '\n';
    }
    return out;
}

} // namespace adlift
