// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <json.hpp>

#include "adlift/image_io.hpp"
#include "adlift/metrics.hpp"
#include "adlift/parallel.hpp"

namespace adlift {

Image pgd_2d(const Image& x0, const Image& x_raw, const AdvLossFn& loss, int steps, double alpha,
             double eta) {
    require_same_shape(x0, x_raw, "pgd_2d");
    const std::size_t n = x0.size();
    std::vector<double> lo(n), hi(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double c = x_raw[i];
        double l = c - eta, h = c + eta;
        for (;;) {
            if (c - l <= eta) break;
            l = std::nextafter(l, c);
        }
        for (;;) {
            if (h - c <= eta) break;
            h = std::nextafter(h, c);
        }
        lo[i] = l;
        hi[i] = h;
    }
    auto clip = [&](double v, std::size_t i) {
        v = std::min(std::max(v, lo[i]), hi[i]);
        return std::min(std::max(v, 0.0), 1.0);
    };
    Image x = x0;
    for (std::size_t i = 0; i < n; ++i) x[i] = clip(x[i], i);
    for (int s = 0; s < steps; ++s) {
        const Image g = loss(x).grad;
        for (std::size_t i = 0; i < n; ++i) {
            double v = x[i];
            if (g[i] > 0.0) {
                v -= alpha;
            } else if (g[i] < 0.0) {
                v += alpha;
            }
            x[i] = clip(v, i);
        }
    }
    return x;
}

Image pgd_2d(const Image& x0, const Image& x_raw, const AttackObjective& objective,
             const Surrogates& models, int steps, double alpha, double eta) {
    return pgd_2d(
        x0, x_raw, [&](const Image& x) { return adversarial_loss(objective, models, x, x_raw); },
        steps, alpha, eta);
}

int fit2d_pgd_steps(const LpgdConfig& cfg, int n_views) {
    if (n_views < 1) throw std::invalid_argument("fit2d: no cameras");
    return std::max(1, cfg.k_p * cfg.e_total / n_views);
}

Fit2dResult fit2d(const Scene& scene, const std::vector<Camera>& cameras,
                  const AttackObjective& objective, const Surrogates& models,
                  const LpgdConfig& cfg, int pgd_steps) {
    cfg.validate();
    if (cameras.empty()) throw std::invalid_argument("fit2d: empty camera list");
    for (const Camera& c : cameras) validate_camera(c);
    validate_objective(objective, models, cameras[0].width, cameras[0].height);
    const int n_views = static_cast<int>(cameras.size());
    const int steps = pgd_steps > 0 ? pgd_steps : fit2d_pgd_steps(cfg, n_views);

    const Scene raw = raw_only(scene);
    std::vector<Image> raw_renders;
    for (const Camera& c : cameras) raw_renders.push_back(render(raw, c, cfg.render));

    // PGD starts from the copy_raw render: at x = x_raw the untargeted
    // gradient vanishes and sign steps would never leave the raw image.
    const Scene init = init_safeguard(raw);
    std::vector<Image> starts;
    for (const Camera& c : cameras) starts.push_back(render(init, c, cfg.render));

    Fit2dResult result;
    result.targets.resize(cameras.size());
    result.views.resize(cameras.size());
    parallel_for(n_views, cfg.render.threads, [&](int v) {
        const auto i = static_cast<std::size_t>(v);
        const Image& xr = raw_renders[i];
        result.targets[i] = pgd_2d(starts[i], xr, objective, models, steps, cfg.alpha, cfg.eta);
        Fit2dViewLog& vl = result.views[i];
        vl.view = v;
        vl.adv_raw = adversarial_loss(objective, models, xr, xr).value;
        vl.adv_target = adversarial_loss(objective, models, result.targets[i], xr).value;
        vl.target_linf = linf_distance(result.targets[i], xr);
    });

    result.scene = init;
    AdamState adam;
    const std::vector<int> views = view_schedule(cfg, n_views);
    for (int k = 0; k < cfg.e_total; ++k) {
        const int v = views[static_cast<std::size_t>(k)];
        const auto i = static_cast<std::size_t>(v);
        const Camera& cam = cameras[i];
        const Image& target = result.targets[i];
        const Image& xr = raw_renders[i];
        const Image before = render(result.scene, cam, cfg.render);
        const FitTrace ft = image_to_gaussian_fit(result.scene, cam, target, cfg, adam);
        const Image after = render(result.scene, cam, cfg.render);
        TrainRecord rec;
        rec.iteration = k;
        rec.view = v;
        rec.adv_before = adversarial_loss(objective, models, before, xr).value;
        rec.adv_after = result.views[i].adv_target;
        rec.adv_rendered = adversarial_loss(objective, models, after, xr).value;
        rec.fit_loss_initial = ft.losses.front();
        rec.fit_loss_final = recon_loss(after, target, cfg.lambda_ssim).value;
        rec.target_linf = result.views[i].target_linf;
        rec.rendered_linf = linf_distance(after, xr);
        result.log.push_back(rec);
    }

    for (int v = 0; v < n_views; ++v) {
        const auto i = static_cast<std::size_t>(v);
        const Image img = render(result.scene, cameras[i], cfg.render);
        result.views[i].adv_rendered = adversarial_loss(objective, models, img, raw_renders[i]).value;
        result.views[i].rendered_linf = linf_distance(img, raw_renders[i]);
    }
    return result;
}

void SoftConfig::validate() const {
    if (!(weight_w >= 0.0) || !std::isfinite(weight_w)) {
        throw std::invalid_argument("soft: weight_w must be a finite value >= 0");
    }
    if (!(lr >= 0.0) || !std::isfinite(lr)) throw std::invalid_argument("soft: lr must be >= 0");
    if (steps < 1) throw std::invalid_argument("soft: steps must be >= 1");
    if (!train_color && !train_opacity) {
        throw std::invalid_argument("soft: at least one trainable attribute is required");
    }
    if (checkpoint_every < 1) throw std::invalid_argument("soft: checkpoint_every must be >= 1");
}

SoftResult soft_constraint_protect(const Scene& scene, const std::vector<Camera>& cameras,
                                   const AttackObjective& objective, const Surrogates& models,
                                   const SoftConfig& cfg) {
    cfg.validate();
    if (cameras.empty()) throw std::invalid_argument("soft: empty camera list");
    for (const Camera& c : cameras) validate_camera(c);
    validate_objective(objective, models, cameras[0].width, cameras[0].height);

    const Scene raw = raw_only(scene);
    std::vector<Image> raw_renders;
    for (const Camera& c : cameras) raw_renders.push_back(render(raw, c, cfg.render));

    SoftResult result{scene.safeguard.empty() ? init_safeguard(scene) : scene, {}};
    Scene& s = result.scene;

    auto checkpoint = [&](int step) {
        SoftCheckpoint cp;
        cp.step = step;
        for (std::size_t v = 0; v < cameras.size(); ++v) {
            const Image img = render(s, cameras[v], cfg.render);
            cp.psnr_db += psnr(img, raw_renders[v]);
            cp.adv_loss += adversarial_loss(objective, models, img, raw_renders[v]).value;
        }
        cp.psnr_db /= static_cast<double>(cameras.size());
        cp.adv_loss /= static_cast<double>(cameras.size());
        result.log.push_back(cp);
    };

    std::vector<int> params;
    if (cfg.train_color) params.insert(params.end(), {10, 11, 12});
    if (cfg.train_opacity) params.push_back(13);
    const std::size_t np = params.size();
    std::vector<double> m(s.safeguard.size() * np, 0.0), v2(m.size(), 0.0);

    checkpoint(0);
    for (int step = 1; step <= cfg.steps; ++step) {
        const std::size_t vi = static_cast<std::size_t>(step - 1) % cameras.size();
        const Image img = render(s, cameras[vi], cfg.render);
        LossResult adv = adversarial_loss(objective, models, img, raw_renders[vi]);
        if (!std::isfinite(adv.value)) throw NumericalError("soft: adversarial loss is not finite");
        if (cfg.weight_w > 0.0) {
            const SsimResult ss = ssim_with_grad(img, raw_renders[vi]);
            for (std::size_t i = 0; i < adv.grad.size(); ++i) {
                adv.grad[i] -= cfg.weight_w * ss.grad_a[i];
            }
        }
        const ParamGrads grads = render_backward(s, cameras[vi], adv.grad, cfg.render);
        const double bc1 = 1.0 - std::pow(kAdamBeta1, step);
        const double bc2 = 1.0 - std::pow(kAdamBeta2, step);
        for (std::size_t gi = 0; gi < s.safeguard.size(); ++gi) {
            Gaussian& g = s.safeguard[gi];
            for (std::size_t p = 0; p < np; ++p) {
                const std::size_t j = gi * np + p;
                const double gr = grads[gi][params[p]];
                m[j] = kAdamBeta1 * m[j] + (1.0 - kAdamBeta1) * gr;
                v2[j] = kAdamBeta2 * v2[j] + (1.0 - kAdamBeta2) * gr * gr;
                gaussian_param(g, params[p]) -= cfg.lr * (m[j] / bc1) / (std::sqrt(v2[j] / bc2) + kAdamEps);
            }
            g.color = g.color.cwiseMax(0.0).cwiseMin(1.0);
        }
        check_finite(s, "soft");
        if (step % cfg.checkpoint_every == 0 || step == cfg.steps) checkpoint(step);
    }
    return result;
}

std::string serialize_soft_log(const std::vector<SoftCheckpoint>& log) {
    std::string out;
    for (const SoftCheckpoint& c : log) {
        nlohmann::ordered_json j;
        j["step"] = c.step;
        j["psnr_db"] = c.psnr_db;
        j["adv_loss"] = c.adv_loss;
        out += j.dump();
        out += '\n';
    }
    return out;
}

std::vector<SoftCheckpoint> parse_soft_log(const std::string& text) {
    std::vector<SoftCheckpoint> log;
    std::istringstream in(text);
    std::string line;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
        const std::size_t start = offset;
        offset += line.size() + 1;
        if (line.empty()) continue;
        try {
            const auto j = nlohmann::json::parse(line);
            log.push_back({j.at("step").get<int>(), j.at("psnr_db").get<double>(),
                           j.at("adv_loss").get<double>()});
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("soft log: ") + e.what(), start);
        }
    }
    return log;
}

} // namespace adlift
