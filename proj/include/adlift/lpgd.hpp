// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "adlift/image.hpp"
#include "adlift/render.hpp"
#include "adlift/scene.hpp"
#include "adlift/surrogate.hpp"

namespace adlift {

/// Raised when a loss, gradient or parameter becomes NaN or infinite.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class InitMode { copy_raw, from_fit2d };
enum class ViewSchedule { round_robin, seeded_random };

const char* to_string(InitMode m);
const char* to_string(ViewSchedule s);
InitMode parse_init_mode(const std::string& s);
ViewSchedule parse_view_schedule(const std::string& s);

// Defaults.
inline constexpr double kDefaultEta = 8.0 / 255.0;
inline constexpr double kDefaultBeta = 1e-3;
inline constexpr int kDefaultKp = 10;
inline constexpr int kDefaultKl = 50;
inline constexpr int kDefaultIters = 400;

struct LpgdConfig {
    double eta = kDefaultEta;
    double alpha = kDefaultEta / 4.0;
    double beta = kDefaultBeta;
    int k_p = kDefaultKp;
    int k_l = kDefaultKl;
    int e_total = kDefaultIters;
    double lambda_ssim = 0.0;
    std::uint64_t seed = 0; // only used by ViewSchedule::seeded_random
    InitMode init_mode = InitMode::copy_raw;
    ViewSchedule schedule = ViewSchedule::round_robin;
    RenderOptions render;

    /// Throws std::invalid_argument on out-of-range fields.
    void validate() const;
};

// Adam hyperparameters and per-attribute learning-rate multipliers.
inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-8;
inline constexpr double kLrPosition = 1.0;
inline constexpr double kLrLogScale = 0.5;
inline constexpr double kLrRotation = 0.5;
inline constexpr double kLrColor = 2.0;
inline constexpr double kLrOpacity = 2.0;

/// Multiplier for parameter k of a Gaussian record (0 <= k < 14).
double lr_multiplier(int k);

/// Per-entry clamp into [center - eta, center + eta], then into [0, 1]. The
/// ball bounds are nudged inward by an ulp where rounding would otherwise let
/// |x - center| exceed eta.
Image project_linf(const Image& x, const Image& center, double eta);

/// dL/dx for the adversarial loss. Used directly by tests to plug in
/// hand-built losses.
using AdvLossFn = std::function<LossResult(const Image&)>;

struct TruncationResult {
    Image x;
    std::vector<double> losses; // k_p + 1 entries: before each step, then at the output
};

/// k_p signed steps x <- project(x - alpha * sign(dL/dx)), starting from
/// project(x_cur). sign(0) = 0.
TruncationResult gradient_truncation(const Image& x_cur, const Image& x_raw, const AdvLossFn& loss,
                                     int k_p, double alpha, double eta);
TruncationResult gradient_truncation(const Image& x_cur, const Image& x_raw,
                                     const AttackObjective& objective, const Surrogates& models,
                                     const LpgdConfig& cfg);

/// (1 - lambda_ssim) * MSE + lambda_ssim * (1 - SSIM), with its gradient.
LossResult recon_loss(const Image& img, const Image& target, double lambda_ssim);

/// Adam moments over every safeguard parameter, 14 per Gaussian.
struct AdamState {
    std::vector<double> m;
    std::vector<double> v;
    std::int64_t step = 0;
};

struct FitTrace {
    std::vector<double> losses; // recon loss before each update
};

/// k_l Adam steps on the safeguard parameters of `scene` toward `target`.
/// Quaternions are renormalized and colors clamped to [0, 1] after each step.
FitTrace image_to_gaussian_fit(Scene& scene, const Camera& cam, const Image& target,
                               const LpgdConfig& cfg, AdamState& state);

/// Fresh optimizer state.
FitTrace image_to_gaussian_fit(Scene& scene, const Camera& cam, const Image& target,
                               const LpgdConfig& cfg);

struct TrainRecord {
    int iteration = 0;
    int view = 0;
    double adv_before = 0.0;   // L_adv(x_k), current render
    double adv_after = 0.0;    // L_adv(x_{k+1}), truncated target
    double adv_rendered = 0.0; // L_adv of the render after fitting
    double fit_loss_initial = 0.0;
    double fit_loss_final = 0.0;
    double target_linf = 0.0;   // ||x_{k+1} - x_raw||_inf
    double rendered_linf = 0.0; // ||render after fit - x_raw||_inf

    friend bool operator==(const TrainRecord&, const TrainRecord&) = default;
};

using TrainLog = std::vector<TrainRecord>;

/// One JSON object per line.
std::string serialize_train_log(const TrainLog& log);
TrainLog parse_train_log(const std::string& text);

struct ProtectResult {
    Scene scene;
    TrainLog log;
};

using TrainObserver = std::function<void(const TrainRecord&)>;

/// View index for each of the cfg.e_total outer iterations.
std::vector<int> view_schedule(const LpgdConfig& cfg, int n_views);

/// Alternates gradient truncation and image-to-Gaussian fitting for
/// cfg.e_total outer iterations. The safeguard list must already be
/// initialized.
ProtectResult protect(const Scene& scene, const std::vector<Camera>& cameras,
                      const AttackObjective& objective, const Surrogates& models,
                      const LpgdConfig& cfg, const TrainObserver& observer = {});

/// Throws NumericalError if any safeguard parameter is not finite.
void check_finite(const Scene& scene, const std::string& where);

} // namespace adlift
