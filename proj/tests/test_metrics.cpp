// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>

#include "adlift/metrics.hpp"
#include "adlift/rng.hpp"

namespace adlift {
namespace {

Image random_image(int w, int h, std::uint64_t seed) {
    Image img(w, h);
    SplitMix64 rng(seed);
    for (double& v : img.data()) v = rng.uniform();
    return img;
}

int reflect101(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -i;
        if (i >= n) i = 2 * (n - 1) - i;
    }
    return i;
}

// Brute-force SSIM: full 2D window at every pixel, no separability.
double reference_ssim(const Image& a, const Image& b) {
    const int r = kSsimWindow / 2;
    double w2[kSsimWindow][kSsimWindow];
    double total = 0;
    for (int i = 0; i < kSsimWindow; ++i) {
        for (int j = 0; j < kSsimWindow; ++j) {
            const double d2 = (i - r) * (i - r) + (j - r) * (j - r);
            w2[i][j] = std::exp(-d2 / (2 * kSsimSigma * kSsimSigma));
            total += w2[i][j];
        }
    }
    double acc = 0;
    for (int c = 0; c < 3; ++c) {
        for (int y = 0; y < a.height(); ++y) {
            for (int x = 0; x < a.width(); ++x) {
                double ma = 0, mb = 0, saa = 0, sbb = 0, sab = 0;
                for (int i = 0; i < kSsimWindow; ++i) {
                    for (int j = 0; j < kSsimWindow; ++j) {
                        const int yy = reflect101(y + i - r, a.height());
                        const int xx = reflect101(x + j - r, a.width());
                        const double w = w2[i][j] / total;
                        const double va = a.at(xx, yy, c), vb = b.at(xx, yy, c);
                        ma += w * va;
                        mb += w * vb;
                        saa += w * va * va;
                        sbb += w * vb * vb;
                        sab += w * va * vb;
                    }
                }
                const double va = saa - ma * ma, vb = sbb - mb * mb, cov = sab - ma * mb;
                acc += (2 * ma * mb + kSsimC1) * (2 * cov + kSsimC2) /
                       ((ma * ma + mb * mb + kSsimC1) * (va + vb + kSsimC2));
            }
        }
    }
    return acc / (3.0 * a.width() * a.height());
}

TEST(Psnr, CapAndKnownValue) {
    const Image a = random_image(16, 16, 1);
    EXPECT_EQ(psnr(a, a), kPsnrCapDb);
    Image g(16, 16), h(16, 16);
    for (double& v : g.data()) v = 0.5;
    for (double& v : h.data()) v = 0.5 + 8.0 / 255.0;
    EXPECT_NEAR(psnr(g, h), 30.07, 0.005);
    EXPECT_NEAR(mse(g, h), (8.0 / 255.0) * (8.0 / 255.0), 1e-15);
    EXPECT_THROW(psnr(g, Image(16, 8)), std::invalid_argument);
}

TEST(Psnr, SymmetricAndBounded) {
    for (std::uint64_t s = 0; s < 5; ++s) {
        const Image a = random_image(12, 9, s), b = random_image(12, 9, s + 100);
        EXPECT_EQ(psnr(a, b), psnr(b, a));
        EXPECT_GE(psnr(a, b), 0.0);
        EXPECT_LE(psnr(a, b), kPsnrCapDb);
    }
}

TEST(Ssim, IdenticalIsOne) {
    const Image a = random_image(20, 24, 3);
    EXPECT_NEAR(ssim(a, a), 1.0, 1e-12);
}

TEST(Ssim, InvertedCheckerboardIsNegative) {
    Image a(16, 16), b(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            for (int c = 0; c < 3; ++c) {
                a.at(x, y, c) = (x + y) % 2;
                b.at(x, y, c) = 1 - a.at(x, y, c);
            }
        }
    }
    EXPECT_LT(ssim(a, b), 0.0);
}

TEST(Ssim, SmallShiftStaysHigh) {
    const Image a = random_image(32, 32, 4);
    Image b = a;
    for (double& v : b.data()) v += 0.01;
    EXPECT_GT(ssim(a, b), 0.99);
}

TEST(Ssim, MatchesBruteForceReference) {
    for (std::uint64_t s = 0; s < 10; ++s) {
        const int w = 11 + static_cast<int>(s % 4) * 3, h = 11 + static_cast<int>(s % 3) * 5;
        const Image a = random_image(w, h, s);
        Image b = random_image(w, h, s + 50);
        for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.7 * a[i] + 0.3 * b[i];
        EXPECT_NEAR(ssim(a, b), reference_ssim(a, b), 1e-9) << "seed " << s;
    }
}

TEST(Ssim, RejectsSmallOrMismatchedImages) {
    EXPECT_THROW(ssim(Image(10, 20), Image(10, 20)), std::invalid_argument);
    EXPECT_THROW(ssim(Image(20, 10), Image(20, 10)), std::invalid_argument);
    EXPECT_THROW(ssim(Image(20, 20), Image(20, 21)), std::invalid_argument);
    EXPECT_NO_THROW(ssim(Image(11, 11), Image(11, 11)));
}

TEST(Ssim, GradientMatchesFiniteDifferences) {
    const Image a = random_image(14, 13, 8);
    Image b = random_image(14, 13, 9);
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = 0.5 * a[i] + 0.5 * b[i];
    const SsimResult r = ssim_with_grad(a, b);
    EXPECT_NEAR(r.value, ssim(a, b), 1e-14);
    SplitMix64 rng(1);
    for (int p = 0; p < 20; ++p) {
        const std::size_t i = rng.next() % a.size();
        Image ap = a, am = a;
        ap[i] += 1e-6;
        am[i] -= 1e-6;
        const double fd = (ssim(ap, b) - ssim(am, b)) / 2e-6;
        EXPECT_NEAR(fd, r.grad_a[i], 1e-7 + 1e-6 * std::abs(fd)) << "entry " << i;
    }
}

} // namespace
} // namespace adlift
