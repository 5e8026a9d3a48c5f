// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "adlift/image.hpp"

namespace adlift {

inline constexpr double kPsnrCapDb = 99.0;
inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 1e-4;
inline constexpr double kSsimC2 = 9e-4;

/// 10*log10(1/MSE), peak 1.0. Returns kPsnrCapDb when MSE < 1e-10.
double psnr(const Image& a, const Image& b);

double mse(const Image& a, const Image& b);

/// Channel-averaged single-scale SSIM: 11x11 Gaussian window (sigma 1.5),
/// reflect-101 borders. Throws std::invalid_argument if min(H, W) < 11.
double ssim(const Image& a, const Image& b);

struct SsimResult {
    double value = 0.0;
    Image grad_a; // dSSIM/da
};

SsimResult ssim_with_grad(const Image& a, const Image& b);

} // namespace adlift
