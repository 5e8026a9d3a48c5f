// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/lpgd.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "adlift/image_io.hpp"
#include "adlift/metrics.hpp"
#include "adlift/rng.hpp"

namespace adlift {

const char* to_string(InitMode m) {
    return m == InitMode::copy_raw ? "copy_raw" : "from_fit2d";
}

const char* to_string(ViewSchedule s) {
    return s == ViewSchedule::round_robin ? "round_robin" : "seeded_random";
}

InitMode parse_init_mode(const std::string& s) {
    if (s == "copy_raw") return InitMode::copy_raw;
    if (s == "from_fit2d") return InitMode::from_fit2d;
    throw std::invalid_argument("unknown init mode '" + s + "'");
}

ViewSchedule parse_view_schedule(const std::string& s) {
    if (s == "round_robin") return ViewSchedule::round_robin;
    if (s == "seeded_random") return ViewSchedule::seeded_random;
    throw std::invalid_argument("unknown view schedule '" + s + "'");
}

void LpgdConfig::validate() const {
    if (!(eta > 0.0 && eta <= 0.25)) {
        throw std::invalid_argument("eta must be in (0, 0.25], got " + std::to_string(eta));
    }
    if (!(alpha >= 0.0 && alpha <= eta)) {
        throw std::invalid_argument("alpha must be in [0, eta], got " + std::to_string(alpha));
    }
    if (!(beta >= 0.0) || !std::isfinite(beta)) {
        throw std::invalid_argument("beta must be a finite value >= 0");
    }
    if (k_p < 1 || k_l < 1 || e_total < 1) {
        throw std::invalid_argument("k_p, k_l and e_total must all be >= 1");
    }
    if (!(lambda_ssim >= 0.0 && lambda_ssim < 1.0)) {
        throw std::invalid_argument("lambda_ssim must be in [0, 1)");
    }
}

double lr_multiplier(int k) {
    if (k < 3) return kLrPosition;
    if (k < 6) return kLrLogScale;
    if (k < 10) return kLrRotation;
    if (k < 13) return kLrColor;
    return kLrOpacity;
}

Image project_linf(const Image& x, const Image& center, double eta) {
    require_same_shape(x, center, "project_linf");
    Image out = x;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double c = center[i];
        double lo = c - eta;
        double hi = c + eta;
        while (c - lo > eta) lo = std::nextafter(lo, c);
        while (hi - c > eta) hi = std::nextafter(hi, c);
        out[i] = std::clamp(std::clamp(x[i], lo, hi), 0.0, 1.0);
    }
    return out;
}

namespace {

double sign0(double g) {
    return g > 0.0 ? 1.0 : (g < 0.0 ? -1.0 : 0.0);
}

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw NumericalError(std::string(what) + " is not finite");
}

} // namespace

TruncationResult gradient_truncation(const Image& x_cur, const Image& x_raw, const AdvLossFn& loss,
                                     int k_p, double alpha, double eta) {
    require_same_shape(x_cur, x_raw, "gradient_truncation");
    TruncationResult r;
    r.x = project_linf(x_cur, x_raw, eta);
    r.losses.reserve(static_cast<std::size_t>(k_p) + 1);
    for (int k = 0; k < k_p; ++k) {
        const LossResult l = loss(r.x);
        require_finite(l.value, "adversarial loss");
        r.losses.push_back(l.value);
        Image stepped = r.x;
        for (std::size_t i = 0; i < stepped.size(); ++i) {
            stepped[i] = r.x[i] - alpha * sign0(l.grad[i]);
        }
        r.x = project_linf(stepped, x_raw, eta);
    }
    r.losses.push_back(loss(r.x).value);
    return r;
}

TruncationResult gradient_truncation(const Image& x_cur, const Image& x_raw,
                                     const AttackObjective& objective, const Surrogates& models,
                                     const LpgdConfig& cfg) {
    return gradient_truncation(
        x_cur, x_raw,
        [&](const Image& x) { return adversarial_loss(objective, models, x, x_raw); }, cfg.k_p,
        cfg.alpha, cfg.eta);
}

LossResult recon_loss(const Image& img, const Image& target, double lambda_ssim) {
    require_same_shape(img, target, "recon_loss");
    LossResult r;
    r.grad = Image(img.width(), img.height());
    const double n = static_cast<double>(img.size());
    const double w_mse = 1.0 - lambda_ssim;
    double s = 0.0;
    for (std::size_t i = 0; i < img.size(); ++i) {
        const double d = img[i] - target[i];
        s += d * d;
        r.grad[i] = w_mse * 2.0 * d / n;
    }
    r.value = w_mse * s / n;
    if (lambda_ssim > 0.0) {
        const SsimResult ss = ssim_with_grad(img, target);
        r.value += lambda_ssim * (1.0 - ss.value);
        for (std::size_t i = 0; i < img.size(); ++i) r.grad[i] -= lambda_ssim * ss.grad_a[i];
    }
    return r;
}

void check_finite(const Scene& scene, const std::string& where) {
    for (const Gaussian& g : scene.safeguard) {
        for (int k = 0; k < kParamsPerGaussian; ++k) {
            if (!std::isfinite(gaussian_param(g, k))) {
                throw NumericalError(where + ": safeguard parameter became non-finite");
            }
        }
    }
}

FitTrace image_to_gaussian_fit(Scene& scene, const Camera& cam, const Image& target,
                               const LpgdConfig& cfg, AdamState& state) {
    const std::size_t n_params = scene.safeguard.size() * kParamsPerGaussian;
    if (state.m.size() != n_params) {
        state.m.assign(n_params, 0.0);
        state.v.assign(n_params, 0.0);
        state.step = 0;
    }
    FitTrace trace;
    trace.losses.reserve(static_cast<std::size_t>(cfg.k_l));
    for (int it = 0; it < cfg.k_l; ++it) {
        const Image img = render(scene, cam, cfg.render);
        const LossResult rl = recon_loss(img, target, cfg.lambda_ssim);
        require_finite(rl.value, "reconstruction loss");
        trace.losses.push_back(rl.value);
        const ParamGrads grads = render_backward(scene, cam, rl.grad, cfg.render);
        ++state.step;
        const double bc1 = 1.0 - std::pow(kAdamBeta1, static_cast<double>(state.step));
        const double bc2 = 1.0 - std::pow(kAdamBeta2, static_cast<double>(state.step));
        for (std::size_t gi = 0; gi < scene.safeguard.size(); ++gi) {
            Gaussian& g = scene.safeguard[gi];
            for (int k = 0; k < kParamsPerGaussian; ++k) {
                const std::size_t j = gi * kParamsPerGaussian + static_cast<std::size_t>(k);
                const double grad = grads[gi][k];
                state.m[j] = kAdamBeta1 * state.m[j] + (1.0 - kAdamBeta1) * grad;
                state.v[j] = kAdamBeta2 * state.v[j] + (1.0 - kAdamBeta2) * grad * grad;
                const double mhat = state.m[j] / bc1;
                const double vhat = state.v[j] / bc2;
                gaussian_param(g, k) -= cfg.beta * lr_multiplier(k) * mhat / (std::sqrt(vhat) + kAdamEps);
            }
            const double qn = g.rotation.norm();
            if (!(qn > 0.0) || !std::isfinite(qn)) {
                throw NumericalError("fit: degenerate quaternion");
            }
            g.rotation /= qn;
            g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
        }
    }
    check_finite(scene, "fit");
    return trace;
}

FitTrace image_to_gaussian_fit(Scene& scene, const Camera& cam, const Image& target,
                               const LpgdConfig& cfg) {
    AdamState state;
    return image_to_gaussian_fit(scene, cam, target, cfg, state);
}

std::string serialize_train_log(const TrainLog& log) {
    std::string out;
    for (const TrainRecord& r : log) {
        nlohmann::ordered_json j;
        j["iteration"] = r.iteration;
        j["view"] = r.view;
        j["adv_before"] = r.adv_before;
        j["adv_after"] = r.adv_after;
        j["adv_rendered"] = r.adv_rendered;
        j["fit_loss_initial"] = r.fit_loss_initial;
        j["fit_loss_final"] = r.fit_loss_final;
        j["target_linf"] = r.target_linf;
        j["rendered_linf"] = r.rendered_linf;
        out += j.dump();
        out += '\n';
    }
    return out;
}

TrainLog parse_train_log(const std::string& text) {
    TrainLog log;
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t line_start = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            TrainRecord r;
            r.iteration = j.at("iteration").get<int>();
            r.view = j.at("view").get<int>();
            r.adv_before = j.at("adv_before").get<double>();
            r.adv_after = j.at("adv_after").get<double>();
            r.adv_rendered = j.at("adv_rendered").get<double>();
            r.fit_loss_initial = j.at("fit_loss_initial").get<double>();
            r.fit_loss_final = j.at("fit_loss_final").get<double>();
            r.target_linf = j.at("target_linf").get<double>();
            r.rendered_linf = j.at("rendered_linf").get<double>();
            log.push_back(r);
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("train log: ") + e.what(), line_start);
        }
    }
    return log;
}

std::vector<int> view_schedule(const LpgdConfig& cfg, int n_views) {
    if (n_views < 1) throw std::invalid_argument("view schedule: no cameras");
    std::vector<int> views(static_cast<std::size_t>(cfg.e_total));
    SplitMix64 rng(cfg.seed);
    for (int k = 0; k < cfg.e_total; ++k) {
        views[static_cast<std::size_t>(k)] =
            cfg.schedule == ViewSchedule::round_robin
                ? k % n_views
                : static_cast<int>(rng.next() % static_cast<std::uint64_t>(n_views));
    }
    return views;
}

ProtectResult protect(const Scene& scene, const std::vector<Camera>& cameras,
                      const AttackObjective& objective, const Surrogates& models,
                      const LpgdConfig& cfg, const TrainObserver& observer) {
    cfg.validate();
    if (cameras.empty()) throw std::invalid_argument("protect: empty camera list");
    if (scene.safeguard.empty()) {
        throw std::invalid_argument("protect: safeguard Gaussians are not initialized");
    }
    for (const Camera& c : cameras) validate_camera(c);
    validate_objective(objective, models, cameras[0].width, cameras[0].height);

    const Scene raw = raw_only(scene);
    std::vector<Image> raw_renders;
    raw_renders.reserve(cameras.size());
    for (const Camera& c : cameras) raw_renders.push_back(render(raw, c, cfg.render));

    ProtectResult result{scene, {}};
    result.log.reserve(static_cast<std::size_t>(cfg.e_total));
    AdamState adam;
    const std::vector<int> views = view_schedule(cfg, static_cast<int>(cameras.size()));
    for (int k = 0; k < cfg.e_total; ++k) {
        const int v = views[static_cast<std::size_t>(k)];
        const Camera& cam = cameras[static_cast<std::size_t>(v)];
        const Image& x_raw = raw_renders[static_cast<std::size_t>(v)];
        const Image x_k = render(result.scene, cam, cfg.render);
        const TruncationResult tr = gradient_truncation(x_k, x_raw, objective, models, cfg);
        const FitTrace ft = image_to_gaussian_fit(result.scene, cam, tr.x, cfg, adam);
        const Image x_fit = render(result.scene, cam, cfg.render);

        TrainRecord rec;
        rec.iteration = k;
        rec.view = v;
        rec.adv_before = tr.losses.front();
        rec.adv_after = tr.losses.back();
        rec.adv_rendered = adversarial_loss(objective, models, x_fit, x_raw).value;
        rec.fit_loss_initial = ft.losses.front();
        rec.fit_loss_final = recon_loss(x_fit, tr.x, cfg.lambda_ssim).value;
        rec.target_linf = linf_distance(tr.x, x_raw);
        rec.rendered_linf = linf_distance(x_fit, x_raw);
        require_finite(rec.adv_rendered, "adversarial loss");
        result.log.push_back(rec);
        if (observer) observer(rec);
    }
    return result;
}

} // namespace adlift
