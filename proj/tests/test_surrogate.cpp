// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "adlift/rng.hpp"
#include "adlift/surrogate.hpp"

namespace adlift {
namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    SplitMix64 rng(seed);
    for (double& v : img.data()) v = rng.uniform();
    return img;
}

Tensor random_tensor(int c, int h, int w, std::uint64_t seed) {
    Tensor t(c, h, w);
    SplitMix64 rng(seed);
    for (double& v : t.data()) v = rng.uniform(-1, 1);
    return t;
}

// Direct definition of a strided, zero-padded correlation.
Tensor naive_conv(const Conv2d& c, const Tensor& x) {
    const int oh = (x.height() + 2 * c.padding - c.kernel) / c.stride + 1;
    const int ow = (x.width() + 2 * c.padding - c.kernel) / c.stride + 1;
    Tensor y(c.out_channels, oh, ow);
    for (int o = 0; o < c.out_channels; ++o) {
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double s = c.bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < c.in_channels; ++i) {
                    for (int ky = 0; ky < c.kernel; ++ky) {
                        for (int kx = 0; kx < c.kernel; ++kx) {
                            const int iy = oy * c.stride - c.padding + ky;
                            const int ix = ox * c.stride - c.padding + kx;
                            if (iy < 0 || ix < 0 || iy >= x.height() || ix >= x.width()) continue;
                            const std::size_t wi =
                                ((static_cast<std::size_t>(o) * c.in_channels + i) * c.kernel + ky) * c.kernel + kx;
                            s += c.weight[wi] * x.at(i, iy, ix);
                        }
                    }
                }
                y.at(o, oy, ox) = s;
            }
        }
    }
    return y;
}

double dot(const Tensor& a, const Tensor& b) {
    double s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

TEST(Encoder, DeterministicAndSeeded) {
    EXPECT_EQ(build_encoder(3), build_encoder(3));
    EXPECT_NE(build_encoder(1).layer(0).weight, build_encoder(2).layer(0).weight);
    const auto enc = build_encoder(3);
    for (double b : enc.layer(1).bias) EXPECT_EQ(b, 0.0);
}

TEST(Encoder, XavierBounds) {
    const auto enc = build_encoder(11);
    const double bounds[3] = {std::sqrt(6.0 / (27 + 72)), std::sqrt(6.0 / (72 + 144)),
                              std::sqrt(6.0 / (144 + 36))};
    for (int l = 0; l < 3; ++l) {
        double mx = 0;
        for (double w : enc.layer(l).weight) mx = std::max(mx, std::abs(w));
        EXPECT_LE(mx, bounds[l]);
        EXPECT_GT(mx, 0.9 * bounds[l]);
    }
}

TEST(Encoder, FirstWeightFollowsSplitMix) {
    SplitMix64 rng(5);
    const double u = rng.uniform();
    const double bound = std::sqrt(6.0 / (27.0 + 72.0));
    EXPECT_EQ(build_encoder(5).layer(0).weight[0], (2.0 * u - 1.0) * bound);
}

TEST(Encoder, LatentShape) {
    const auto enc = build_encoder(0);
    const Tensor z = enc.encode(random_image(64, 64, 1));
    EXPECT_EQ(z.channels(), 4);
    EXPECT_EQ(z.height(), 8);
    EXPECT_EQ(z.width(), 8);
    const Tensor z2 = enc.encode(random_image(30, 17, 1));
    EXPECT_EQ(z2.height(), 3); // ceil(17/8)
    EXPECT_EQ(z2.width(), 4);  // ceil(30/8)
}

TEST(Encoder, ZeroWeightsGiveZeroLatent) {
    const Tensor z = build_zero_encoder().encode(random_image(16, 16, 2));
    for (double v : z.data()) EXPECT_EQ(v, 0.0);
}

TEST(Conv, ForwardMatchesNaive) {
    const auto enc = build_encoder(4);
    const Tensor x = random_tensor(3, 13, 10, 6);
    const Tensor a = enc.layer(0).forward(x);
    const Tensor b = naive_conv(enc.layer(0), x);
    ASSERT_TRUE(a.same_shape(b));
    for (std::size_t i = 0; i < a.size(); ++i) EXPECT_NEAR(a[i], b[i], 1e-14);
    EXPECT_THROW(enc.layer(1).forward(x), std::invalid_argument);
}

TEST(Conv, BackwardIsAdjoint) {
    const auto enc = build_encoder(4);
    for (int l = 0; l < 3; ++l) {
        const Conv2d& c = enc.layer(l);
        const Tensor x = random_tensor(c.in_channels, 11, 9, 10 + l);
        Tensor y = c.forward(x);
        for (std::size_t o = 0; o < static_cast<std::size_t>(c.out_channels); ++o) {
            // remove the bias so forward is linear
            for (int yy = 0; yy < y.height(); ++yy) {
                for (int xx = 0; xx < y.width(); ++xx) y.at(static_cast<int>(o), yy, xx) -= c.bias[o];
            }
        }
        const Tensor g = random_tensor(c.out_channels, y.height(), y.width(), 20 + l);
        const Tensor gx = c.backward_input(g, 11, 9);
        EXPECT_NEAR(dot(y, g), dot(x, gx), 1e-11);
    }
}

TEST(Encoder, ZeroLatentGradientGivesZeroImageGradient) {
    const auto enc = build_encoder(0);
    const Image x = random_image(16, 16, 3);
    const Image g = enc.encode_backward(x, Tensor(4, 2, 2));
    for (double v : g.data()) EXPECT_EQ(v, 0.0);
    EXPECT_THROW(enc.encode_backward(x, Tensor(4, 3, 2)), std::invalid_argument);
}

// dL/dx at a few pixels by central differences.
void expect_grad_matches(const std::function<LossResult(const Image&)>& f, const Image& x,
                         int probes, std::uint64_t seed, double tol) {
    const LossResult r = f(x);
    SplitMix64 rng(seed);
    const double h = 1e-5;
    for (int p = 0; p < probes; ++p) {
        const std::size_t i = rng.next() % x.size();
        Image xp = x, xm = x;
        xp[i] += h;
        xm[i] -= h;
        const double fd = (f(xp).value - f(xm).value) / (2 * h);
        EXPECT_LT(std::abs(fd - r.grad[i]) / std::max(1e-8, std::abs(r.grad[i])), tol)
            << "entry " << i << " analytic " << r.grad[i] << " fd " << fd;
    }
}

TEST(Encoder, BackwardMatchesFiniteDifferences) {
    const auto enc = build_encoder(7);
    const Image x = random_image(16, 16, 4);
    const Tensor w = random_tensor(4, 2, 2, 5);
    auto f = [&](const Image& img) {
        return LossResult{dot(enc.encode(img), w), enc.encode_backward(img, w)};
    };
    expect_grad_matches(f, x, 5, 1, 1e-6);
}

TEST(LossVu, ZeroAtRawAndNonPositive) {
    const auto enc = build_encoder(0);
    const Image raw = random_image(16, 16, 1);
    const LossResult r = loss_vu(raw, raw, enc);
    EXPECT_EQ(r.value, 0.0);
    for (double v : r.grad.data()) EXPECT_EQ(v, 0.0);
    for (std::uint64_t s = 2; s < 6; ++s) EXPECT_LE(loss_vu(random_image(16, 16, s), raw, enc).value, 0.0);
    EXPECT_THROW(loss_vu(raw, Image(16, 15), enc), std::invalid_argument);
}

TEST(LossVu, GradientMatchesFiniteDifferences) {
    const auto enc = build_encoder(1);
    const Image raw = random_image(16, 16, 1);
    const Image x = random_image(16, 16, 2);
    expect_grad_matches([&](const Image& i) { return loss_vu(i, raw, enc); }, x, 10, 3, 1e-6);
}

TEST(LossVt, ZeroAtTargetAndDescends) {
    const auto enc = build_encoder(2);
    const Image t = random_image(16, 16, 1);
    EXPECT_EQ(loss_vt(t, t, enc).value, 0.0);
    const Image x = random_image(16, 16, 2);
    const LossResult r = loss_vt(x, t, enc);
    EXPECT_GE(r.value, 0.0);
    Image y = x;
    for (std::size_t i = 0; i < y.size(); ++i) y[i] -= 1e-3 * r.grad[i];
    EXPECT_LT(loss_vt(y, t, enc).value, r.value);
    expect_grad_matches([&](const Image& i) { return loss_vt(i, t, enc); }, x, 10, 4, 1e-6);
}

TEST(SegHead, MaskShapeRangeDeterminism) {
    const SegHead seg = build_seghead(3);
    const Box box{1, 1, 4, 4};
    const Image img = random_image(64, 64, 3);
    const Tensor m = predict_mask(seg, img, box);
    EXPECT_EQ(m.channels(), 1);
    EXPECT_EQ(m.height(), 8);
    EXPECT_EQ(m.width(), 8);
    for (double v : m.data()) {
        EXPECT_GT(v, 0.0);
        EXPECT_LT(v, 1.0);
    }
    EXPECT_EQ(predict_mask(build_seghead(3), img, box), m);
    EXPECT_THROW(predict_mask(seg, img, Box{5, 5, 4, 4}), std::invalid_argument);
    EXPECT_THROW(predict_mask(seg, img, Box{0, 0, 0, 2}), std::invalid_argument);
}

TEST(SegHead, HeadContinuesEncoderStream) {
    const SegHead seg = build_seghead(9);
    EXPECT_EQ(seg.encoder, build_encoder(9));
    EXPECT_EQ(seg.head.in_channels, 4);
    EXPECT_EQ(seg.head.out_channels, 1);
    EXPECT_EQ(seg.head.kernel, 1);
}

TEST(LossSt, PerfectLogitsGiveNearZeroLoss) {
    const Box box{0, 0, 8, 8};
    Tensor target(1, 8, 8);
    for (int y = 0; y < 8; ++y) {
        for (int x = 0; x < 8; ++x) target.at(0, y, x) = (x + y) % 2;
    }
    Tensor logits(1, 8, 8);
    for (std::size_t i = 0; i < logits.size(); ++i) logits[i] = target[i] > 0.5 ? 20.0 : -20.0;
    EXPECT_LT(st_loss_from_logits(logits, box, target, 1.0).value, 1e-6);
    Tensor zeros(1, 8, 8, 0.0);
    Tensor neg(1, 8, 8, -20.0);
    EXPECT_LT(st_loss_from_logits(neg, box, zeros, 1.0).value, 1e-6);
}

TEST(LossSt, ClosedFormBce) {
    const Box box{1, 2, 3, 4};
    const Tensor ones(1, 8, 8, 1.0);
    for (double z : {-2.0, 0.0, 0.7}) {
        const Tensor logits(1, 8, 8, z);
        const double p = 1.0 / (1.0 + std::exp(-z));
        EXPECT_NEAR(st_loss_from_logits(logits, box, ones, 0.0).value, -std::log(p), 1e-12);
    }
}

TEST(LossSt, DiceClosedForm) {
    const Box box{0, 0, 2, 2};
    Tensor target(1, 4, 4, 0.0);
    target.at(0, 0, 0) = 1.0;
    const Tensor logits(1, 4, 4, 0.0); // p = 0.5 everywhere
    // dice = 1 - (2*0.5 + 1) / (2 + 1 + 1) = 0.5; bce = ln 2
    EXPECT_NEAR(st_loss_from_logits(logits, box, target, 1.0).value, std::log(2.0) + 0.5, 1e-12);
}

TEST(LossSt, LogitClampStopsGradient) {
    const Box box{0, 0, 2, 2};
    const Tensor target(1, 2, 2, 1.0);
    const Tensor far(1, 2, 2, -40.0);
    const Tensor edge(1, 2, 2, -30.0);
    EXPECT_DOUBLE_EQ(st_loss_from_logits(far, box, target, 1.0).value,
                     st_loss_from_logits(edge, box, target, 1.0).value);
    const MaskLoss m = st_loss_from_logits(far, box, target, 1.0);
    for (double g : m.grad_logits.data()) EXPECT_EQ(g, 0.0);
}

TEST(LossSt, LogitGradientMatchesFiniteDifferences) {
    const Box box{1, 1, 5, 4};
    Tensor target(1, 7, 7, 0.0);
    target.at(0, 2, 2) = target.at(0, 3, 4) = 1.0;
    const Tensor logits = random_tensor(1, 7, 7, 3);
    const MaskLoss m = st_loss_from_logits(logits, box, target, 0.7);
    for (std::size_t i = 0; i < logits.size(); ++i) {
        Tensor p = logits, q = logits;
        p[i] += 1e-6;
        q[i] -= 1e-6;
        const double fd = (st_loss_from_logits(p, box, target, 0.7).value -
                           st_loss_from_logits(q, box, target, 0.7).value) / 2e-6;
        EXPECT_NEAR(fd, m.grad_logits[i], 1e-8);
    }
}

TEST(LossSt, InputGradientMatchesFiniteDifferences) {
    const SegHead seg = build_seghead(2);
    const Box box{0, 0, 2, 1};
    Tensor target(1, 2, 2, 0.0);
    target.at(0, 0, 1) = 1.0;
    const Image x = random_image(16, 16, 6);
    expect_grad_matches([&](const Image& i) { return loss_st(i, seg, box, target, 1.0); }, x, 10, 7, 1e-6);
}

TEST(LossSt, RejectsBadTargets) {
    const SegHead seg = build_seghead(2);
    const Image x = random_image(16, 16, 6);
    Tensor target(1, 2, 2, 0.0);
    target[0] = 0.5;
    EXPECT_THROW(loss_st(x, seg, Box{0, 0, 1, 1}, target, 1.0), std::invalid_argument);
    EXPECT_THROW(loss_st(x, seg, Box{0, 0, 1, 1}, Tensor(1, 3, 2), 1.0), std::invalid_argument);
    EXPECT_THROW(loss_st(x, seg, Box{1, 1, 2, 2}, Tensor(1, 2, 2), 1.0), std::invalid_argument);
}

TEST(LossSt, IgnoresPixelsFarOutsideTheBox) {
    // Receptive field of latent cell (0,0) is image rows/cols [0, 14]; pixels at
    // 20+ cannot reach it.
    const SegHead seg = build_seghead(5);
    const Box box{0, 0, 1, 1};
    const Tensor target(1, 4, 4, 0.0);
    const Image x = random_image(32, 32, 8);
    Image y = x;
    for (int yy = 20; yy < 32; ++yy) {
        for (int xx = 20; xx < 32; ++xx) {
            for (int c = 0; c < 3; ++c) y.at(xx, yy, c) = 1.0 - y.at(xx, yy, c);
        }
    }
    EXPECT_NEAR(loss_st(x, seg, box, target, 1.0).value, loss_st(y, seg, box, target, 1.0).value, 1e-12);
}

TEST(Objectives, DispatchAndValidation) {
    const Surrogates m = build_surrogates(4);
    const Image x = random_image(16, 16, 1), raw = random_image(16, 16, 2);
    EXPECT_EQ(adversarial_loss(VuObjective{}, m, x, raw).value, loss_vu(x, raw, m.encoder).value);
    EXPECT_EQ(adversarial_loss(VtObjective{raw}, m, x, x).value, loss_vt(x, raw, m.encoder).value);
    const StObjective st = make_st_zero_target(m, 16, 16, Box{0, 0, 2, 2});
    EXPECT_EQ(adversarial_loss(st, m, x, raw).value, loss_st(x, m.seg, st.box, st.target_mask, 1.0).value);
    EXPECT_STREQ(objective_name(st), "st");
    EXPECT_THROW(validate_objective(VtObjective{Image(8, 8)}, m, 16, 16), std::invalid_argument);
    EXPECT_THROW(validate_objective(StObjective{Tensor(1, 2, 2), Box{1, 1, 2, 2}, 1.0}, m, 16, 16),
                 std::invalid_argument);
    EXPECT_NO_THROW(validate_objective(st, m, 16, 16));
    EXPECT_THROW(make_st_zero_target(m, 16, 16, Box{0, 0, 3, 3}), std::invalid_argument);
}

TEST(Weights, DumpLoadRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "adlift_weights";
    std::filesystem::create_directories(dir);
    const auto enc = build_encoder(12);
    save_encoder_weights(enc, dir);
    EXPECT_TRUE(std::filesystem::exists(dir / "encoder_conv1.lgim"));
    EXPECT_EQ(load_encoder_weights(dir), enc);
    EXPECT_THROW(load_encoder_weights(dir, "nope"), std::runtime_error);
}

} // namespace
} // namespace adlift
