// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include "adlift/baselines.hpp"
#include "adlift/metrics.hpp"
#include "adlift/rng.hpp"
#include "adlift/scene_io.hpp"

namespace adlift {
namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    SplitMix64 rng(seed);
    for (double& v : img.data()) v = rng.uniform();
    return img;
}

struct Fixture {
    Scene raw = make_synthetic_scene(12, 3);
    std::vector<Camera> cams = make_camera_ring(3, 3.0, 0.5, 32, 60.0);
    Surrogates models = build_surrogates(0);
};

LpgdConfig small_config(int iters) {
    LpgdConfig cfg;
    cfg.e_total = iters;
    cfg.k_l = 5;
    cfg.k_p = 3;
    cfg.render.threads = 1;
    return cfg;
}

TEST(Pgd2d, ZeroStepsOnlyProjects) {
    const Surrogates m = build_surrogates(1);
    const Image raw = random_image(16, 16, 1), x0 = random_image(16, 16, 2);
    EXPECT_EQ(pgd_2d(x0, raw, VuObjective{}, m, 0, 0.01, 0.03), project_linf(x0, raw, 0.03));
    EXPECT_THROW(pgd_2d(x0, Image(8, 8), VuObjective{}, m, 1, 0.01, 0.03), std::invalid_argument);
}

TEST(Pgd2d, MatchesTruncationBitForBit) {
    const Surrogates m = build_surrogates(2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const Image raw = random_image(16, 16, 10 + s);
        const Image x0 = random_image(16, 16, 40 + s);
        AttackObjective obj = VuObjective{};
        if (s % 3 == 1) obj = VtObjective{random_image(16, 16, 70 + s)};
        if (s % 3 == 2) obj = make_st_zero_target(m, 16, 16, Box{0, 0, 2, 1});
        LpgdConfig cfg;
        cfg.k_p = 1 + static_cast<int>(s % 5);
        cfg.eta = 0.01 + 0.01 * static_cast<double>(s % 4);
        cfg.alpha = cfg.eta / (1 + static_cast<double>(s % 3));
        const Image a = gradient_truncation(x0, raw, obj, m, cfg).x;
        const Image b = pgd_2d(x0, raw, obj, m, cfg.k_p, cfg.alpha, cfg.eta);
        EXPECT_EQ(a, b) << "case " << s;
        EXPECT_LE(linf_distance(b, raw), cfg.eta);
    }
}

TEST(Fit2d, StepBudget) {
    LpgdConfig cfg;
    cfg.k_p = 10;
    cfg.e_total = 400;
    EXPECT_EQ(fit2d_pgd_steps(cfg, 8), 500);
    EXPECT_EQ(fit2d_pgd_steps(cfg, 3), 1333);
    cfg.e_total = 1;
    EXPECT_EQ(fit2d_pgd_steps(cfg, 30), 1);
}

TEST(Fit2d, SingleViewFitsTowardItsTarget) {
    Fixture s;
    LpgdConfig cfg = small_config(20);
    const Fit2dResult r = fit2d(s.raw, {s.cams[0]}, VuObjective{}, s.models, cfg);
    ASSERT_EQ(r.targets.size(), 1u);
    ASSERT_EQ(r.views.size(), 1u);
    EXPECT_EQ(r.log.size(), 20u);
    const Image raw = render(s.raw, s.cams[0]);
    EXPECT_LE(linf_distance(r.targets[0], raw), cfg.eta);
    EXPECT_EQ(r.views[0].target_linf, linf_distance(r.targets[0], raw));
    EXPECT_LT(r.views[0].adv_target, r.views[0].adv_raw);
    // fitting moves the render toward the attacked image
    const Image start = render(init_safeguard(s.raw), s.cams[0]);
    const Image end = render(r.scene, s.cams[0]);
    EXPECT_LT(mse(end, r.targets[0]), mse(start, r.targets[0]));
    EXPECT_EQ(serialize_scene(raw_only(r.scene)), serialize_scene(s.raw));
}

TEST(Fit2d, Deterministic) {
    Fixture s;
    const LpgdConfig cfg = small_config(6);
    const Fit2dResult a = fit2d(s.raw, s.cams, VuObjective{}, s.models, cfg, 4);
    const Fit2dResult b = fit2d(s.raw, s.cams, VuObjective{}, s.models, cfg, 4);
    EXPECT_EQ(serialize_scene(a.scene), serialize_scene(b.scene));
    EXPECT_EQ(a.log, b.log);
    EXPECT_THROW(fit2d(s.raw, {}, VuObjective{}, s.models, cfg), std::invalid_argument);
}

SoftConfig small_soft(double w, int steps) {
    SoftConfig c;
    c.weight_w = w;
    c.steps = steps;
    c.checkpoint_every = 10;
    c.render.threads = 1;
    return c;
}

TEST(Soft, Validation) {
    EXPECT_NO_THROW(SoftConfig{}.validate());
    SoftConfig c;
    c.steps = 0;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = SoftConfig{};
    c.train_color = c.train_opacity = false;
    EXPECT_THROW(c.validate(), std::invalid_argument);
    c = SoftConfig{};
    c.weight_w = -1;
    EXPECT_THROW(c.validate(), std::invalid_argument);
}

TEST(Soft, TouchesOnlySelectedAttributes) {
    Fixture s;
    const Scene start = init_safeguard(s.raw);
    SoftConfig cfg = small_soft(0.5, 12);
    cfg.train_opacity = false;
    const SoftResult r = soft_constraint_protect(start, s.cams, VuObjective{}, s.models, cfg);
    EXPECT_EQ(serialize_scene(raw_only(r.scene)), serialize_scene(s.raw));
    bool color_moved = false;
    for (std::size_t i = 0; i < start.safeguard.size(); ++i) {
        const Gaussian &a = start.safeguard[i], &b = r.scene.safeguard[i];
        EXPECT_EQ(a.position, b.position);
        EXPECT_EQ(a.log_scale, b.log_scale);
        EXPECT_EQ(a.rotation, b.rotation);
        EXPECT_EQ(a.opacity_logit, b.opacity_logit);
        color_moved |= a.color != b.color;
        EXPECT_GE(b.color.minCoeff(), 0.0);
        EXPECT_LE(b.color.maxCoeff(), 1.0);
    }
    EXPECT_TRUE(color_moved);

    cfg.train_opacity = true;
    cfg.train_color = false;
    const SoftResult o = soft_constraint_protect(start, s.cams, VuObjective{}, s.models, cfg);
    for (std::size_t i = 0; i < start.safeguard.size(); ++i) {
        EXPECT_EQ(start.safeguard[i].color, o.scene.safeguard[i].color);
    }
}

TEST(Soft, DeterministicWithCheckpoints) {
    Fixture s;
    const SoftConfig cfg = small_soft(1.0, 25);
    const SoftResult a = soft_constraint_protect(s.raw, s.cams, VuObjective{}, s.models, cfg);
    const SoftResult b = soft_constraint_protect(s.raw, s.cams, VuObjective{}, s.models, cfg);
    EXPECT_EQ(a.log, b.log);
    EXPECT_EQ(serialize_scene(a.scene), serialize_scene(b.scene));
    std::vector<int> steps;
    for (const auto& c : a.log) steps.push_back(c.step);
    EXPECT_EQ(steps, (std::vector<int>{0, 10, 20, 25}));
    EXPECT_EQ(parse_soft_log(serialize_soft_log(a.log)), a.log);
}

TEST(Soft, HugeWeightStaysAtTheStartingRender) {
    Fixture s;
    const SoftResult r = soft_constraint_protect(s.raw, s.cams, VuObjective{}, s.models, small_soft(1e6, 60));
    ASSERT_GE(r.log.size(), 2u);
    // fidelity never drops; the SSIM term pulls the render back toward raw
    for (const auto& c : r.log) EXPECT_GE(c.psnr_db, r.log.front().psnr_db - 0.5);
    EXPECT_NEAR(r.log.back().adv_loss, r.log.front().adv_loss, 1e-3);
}

TEST(Soft, ZeroWeightDegradesFidelity) {
    Fixture s;
    const SoftResult r = soft_constraint_protect(s.raw, s.cams, VuObjective{}, s.models, small_soft(0.0, 120));
    EXPECT_LT(r.log.back().psnr_db, r.log.front().psnr_db - 3.0);
    EXPECT_LT(r.log.back().adv_loss, r.log.front().adv_loss);
    // monotone up to a little logging noise
    for (std::size_t i = 1; i < r.log.size(); ++i) EXPECT_LT(r.log[i].psnr_db, r.log[i - 1].psnr_db + 0.5);
}

} // namespace
} // namespace adlift
