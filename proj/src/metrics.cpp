// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/metrics.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace adlift {

double mse(const Image& a, const Image& b) {
    require_same_shape(a, b, "mse");
    if (a.empty()) throw std::invalid_argument("mse: empty image");
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s / static_cast<double>(a.size());
}

double psnr(const Image& a, const Image& b) {
    const double m = mse(a, b);
    if (m < 1e-10) return kPsnrCapDb;
    const double db = 10.0 * std::log10(1.0 / m);
    return std::clamp(db, 0.0, kPsnrCapDb);
}

namespace {

constexpr int kRadius = kSsimWindow / 2;

std::array<double, kSsimWindow> gaussian_taps() {
    std::array<double, kSsimWindow> g{};
    double sum = 0.0;
    for (int i = 0; i < kSsimWindow; ++i) {
        const double d = i - kRadius;
        g[static_cast<std::size_t>(i)] = std::exp(-d * d / (2.0 * kSsimSigma * kSsimSigma));
        sum += g[static_cast<std::size_t>(i)];
    }
    for (double& v : g) v /= sum;
    return g;
}

int reflect101(int i, int n) {
    if (i < 0) return -i;
    if (i >= n) return 2 * n - 2 - i;
    return i;
}

// Separable Gaussian blur of one H x W plane, and its adjoint.
class Blur {
public:
    Blur(int w, int h) : w_(w), h_(h), taps_(gaussian_taps()), tmp_(static_cast<std::size_t>(w) * h) {}

    void apply(const std::vector<double>& src, std::vector<double>& dst) {
        dst.assign(src.size(), 0.0);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                double s = 0.0;
                for (int k = -kRadius; k <= kRadius; ++k) {
                    s += taps_[static_cast<std::size_t>(k + kRadius)] * src[idx(reflect101(x + k, w_), y)];
                }
                tmp_[idx(x, y)] = s;
            }
        }
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                double s = 0.0;
                for (int k = -kRadius; k <= kRadius; ++k) {
                    s += taps_[static_cast<std::size_t>(k + kRadius)] * tmp_[idx(x, reflect101(y + k, h_))];
                }
                dst[idx(x, y)] = s;
            }
        }
    }

    void adjoint(const std::vector<double>& src, std::vector<double>& dst) {
        std::fill(tmp_.begin(), tmp_.end(), 0.0);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                const double g = src[idx(x, y)];
                for (int k = -kRadius; k <= kRadius; ++k) {
                    tmp_[idx(x, reflect101(y + k, h_))] += taps_[static_cast<std::size_t>(k + kRadius)] * g;
                }
            }
        }
        dst.assign(src.size(), 0.0);
        for (int y = 0; y < h_; ++y) {
            for (int x = 0; x < w_; ++x) {
                const double g = tmp_[idx(x, y)];
                for (int k = -kRadius; k <= kRadius; ++k) {
                    dst[idx(reflect101(x + k, w_), y)] += taps_[static_cast<std::size_t>(k + kRadius)] * g;
                }
            }
        }
    }

private:
    std::size_t idx(int x, int y) const { return static_cast<std::size_t>(y) * w_ + x; }

    int w_, h_;
    std::array<double, kSsimWindow> taps_;
    std::vector<double> tmp_;
};

double ssim_impl(const Image& a, const Image& b, Image* grad) {
    require_same_shape(a, b, "ssim");
    const int w = a.width(), h = a.height();
    if (std::min(w, h) < kSsimWindow) {
        throw std::invalid_argument("ssim: image " + std::to_string(w) + "x" + std::to_string(h) +
                                    " is smaller than the " + std::to_string(kSsimWindow) +
                                    "x" + std::to_string(kSsimWindow) + " window");
    }
    const std::size_t n = static_cast<std::size_t>(w) * h;
    const double norm = 1.0 / static_cast<double>(n * Image::kChannels);
    Blur blur(w, h);
    std::vector<double> pa(n), pb(n), tmp(n), mu_a, mu_b, m_aa, m_bb, m_ab;
    std::vector<double> map_a(n), map_b(n), map_c(n), adj;
    if (grad) *grad = Image(w, h);
    double total = 0.0;
    for (int c = 0; c < Image::kChannels; ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            pa[i] = a[i * Image::kChannels + c];
            pb[i] = b[i * Image::kChannels + c];
        }
        blur.apply(pa, mu_a);
        blur.apply(pb, mu_b);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = pa[i] * pa[i];
        blur.apply(tmp, m_aa);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = pb[i] * pb[i];
        blur.apply(tmp, m_bb);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = pa[i] * pb[i];
        blur.apply(tmp, m_ab);
        for (std::size_t i = 0; i < n; ++i) {
            const double ma = mu_a[i], mb = mu_b[i];
            const double n1 = 2.0 * ma * mb + kSsimC1;
            const double d1 = ma * ma + mb * mb + kSsimC1;
            const double n2 = 2.0 * (m_ab[i] - ma * mb) + kSsimC2;
            const double d2 = (m_aa[i] - ma * ma) + (m_bb[i] - mb * mb) + kSsimC2;
            const double den = d1 * d2;
            total += n1 * n2 / den;
            if (grad) {
                // partials w.r.t. mu_a, E[a^2], E[ab]
                map_a[i] = (2.0 * mb * n2 - 2.0 * mb * n1) / den - n1 * n2 * 2.0 * ma / (d1 * den) +
                           n1 * n2 * 2.0 * ma / (d2 * den);
                map_b[i] = -n1 * n2 / (d2 * den);
                map_c[i] = 2.0 * n1 / den;
            }
        }
        if (grad) {
            std::vector<double> ga(n, 0.0);
            blur.adjoint(map_a, adj);
            for (std::size_t i = 0; i < n; ++i) ga[i] += adj[i];
            blur.adjoint(map_b, adj);
            for (std::size_t i = 0; i < n; ++i) ga[i] += 2.0 * pa[i] * adj[i];
            blur.adjoint(map_c, adj);
            for (std::size_t i = 0; i < n; ++i) ga[i] += pb[i] * adj[i];
            for (std::size_t i = 0; i < n; ++i) (*grad)[i * Image::kChannels + c] = ga[i] * norm;
        }
    }
    return total * norm;
}

} // namespace

double ssim(const Image& a, const Image& b) {
    return ssim_impl(a, b, nullptr);
}

SsimResult ssim_with_grad(const Image& a, const Image& b) {
    SsimResult r;
    r.value = ssim_impl(a, b, &r.grad_a);
    return r;
}

} // namespace adlift
