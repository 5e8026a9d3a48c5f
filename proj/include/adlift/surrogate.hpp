// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "adlift/image.hpp"

namespace adlift {

/// Square-kernel 2D convolution with zero padding. Weights are stored
/// [out][in][ky][kx].
struct Conv2d {
    int in_channels = 0;
    int out_channels = 0;
    int kernel = 3;
    int stride = 1;
    int padding = 0;
    std::vector<double> weight;
    std::vector<double> bias;

    int output_size(int input) const noexcept {
        return (input + 2 * padding - kernel) / stride + 1;
    }

    Tensor forward(const Tensor& x) const;
    /// Adjoint with respect to the input: dL/dx given dL/dy.
    Tensor backward_input(const Tensor& grad_out, int in_height, int in_width) const;

    friend bool operator==(const Conv2d&, const Conv2d&) = default;
};

/// Fixed-weight stand-in for a latent-diffusion VAE encoder: three 3x3
/// stride-2 convolutions (3->8->16->4) with tanh after the first two. A
/// (3, H, W) image maps to a (4, ceil(H/8), ceil(W/8)) latent.
class SurrogateEncoder {
public:
    static constexpr int kLatentChannels = 4;

    explicit SurrogateEncoder(std::array<Conv2d, 3> layers);

    const Conv2d& layer(int i) const { return layers_.at(static_cast<std::size_t>(i)); }

    Tensor encode(const Image& image) const;
    Image encode_backward(const Image& image, const Tensor& dL_dz) const;

    int latent_height(int image_height) const;
    int latent_width(int image_width) const;

    friend bool operator==(const SurrogateEncoder&, const SurrogateEncoder&) = default;

private:
    std::array<Conv2d, 3> layers_;
};

/// Xavier-uniform weights from SplitMix64(seed), layer by layer in
/// [out][in][ky][kx] order; zero biases.
SurrogateEncoder build_encoder(std::uint64_t seed);

/// Same architecture with every weight zeroed.
SurrogateEncoder build_zero_encoder();

Tensor encode(const SurrogateEncoder& enc, const Image& image);
Image encode_backward(const SurrogateEncoder& enc, const Image& image, const Tensor& dL_dz);

/// Promptable-segmenter stand-in: encoder, then a 1x1 conv (4->1), then a
/// logistic. The head's weights continue the encoder's random stream.
struct SegHead {
    SurrogateEncoder encoder;
    Conv2d head;
};

SegHead build_seghead(std::uint64_t seed);

/// Axis-aligned rectangle on the latent grid.
struct Box {
    int x = 0;
    int y = 0;
    int w = 0;
    int h = 0;

    friend bool operator==(const Box&, const Box&) = default;
};

Tensor mask_logits(const SegHead& seg, const Image& image);

/// Mask probabilities on the full latent grid; `box` must lie inside it.
Tensor predict_mask(const SegHead& seg, const Image& image, const Box& box);

/// Mean of the mask probabilities inside `box`.
double mask_mean_in_box(const Tensor& mask, const Box& box);

struct LossResult {
    double value = 0.0;
    Image grad;
};

/// -||E(image) - E(raw_image)||^2.
LossResult loss_vu(const Image& image, const Image& raw_image, const SurrogateEncoder& enc);

/// ||E(image) - E(target_image)||^2.
LossResult loss_vt(const Image& image, const Image& target_image, const SurrogateEncoder& enc);

inline constexpr double kDiceSmoothing = 1.0;
inline constexpr double kLogitClamp = 30.0;

struct MaskLoss {
    double value = 0.0;
    Tensor grad_logits;
};

/// BCE (mean over the box) + lambda_dice * Dice, both on the box only,
/// evaluated from logits clamped to +/-kLogitClamp.
MaskLoss st_loss_from_logits(const Tensor& logits, const Box& box, const Tensor& target_mask,
                             double lambda_dice);

LossResult loss_st(const Image& image, const SegHead& seg, const Box& box,
                   const Tensor& target_mask, double lambda_dice);

// ---------------------------------------------------------------------------
// Attack objectives

struct VuObjective {};

struct VtObjective {
    Image target_image;
};

struct StObjective {
    Tensor target_mask; // (1, h, w), entries in {0, 1}
    Box box;
    double lambda_dice = 1.0;
};

using AttackObjective = std::variant<VuObjective, VtObjective, StObjective>;

const char* objective_name(const AttackObjective& objective);

struct Surrogates {
    SurrogateEncoder encoder;
    SegHead seg;
};

/// Encoder and segmenter built from the same seed.
Surrogates build_surrogates(std::uint64_t seed);

/// Throws std::invalid_argument if the objective cannot be evaluated on
/// width x height views.
void validate_objective(const AttackObjective& objective, const Surrogates& models, int width,
                        int height);

/// L_adv(x) and dL_adv/dx. `x_raw` is the raw render of the same view, used
/// by the untargeted objective.
LossResult adversarial_loss(const AttackObjective& objective, const Surrogates& models,
                            const Image& x, const Image& x_raw);

/// ST target that asks for an all-zero mask inside `box`.
StObjective make_st_zero_target(const Surrogates& models, int width, int height, const Box& box,
                                double lambda_dice = 1.0);

/// One LGIM file per layer, `<stem>_conv<i>.lgim`: height = out channels,
/// width = in*k*k + 1 (the last column is the bias), 1 channel.
void save_encoder_weights(const SurrogateEncoder& enc, const std::filesystem::path& dir,
                          const std::string& stem = "encoder");
SurrogateEncoder load_encoder_weights(const std::filesystem::path& dir,
                                      const std::string& stem = "encoder");

} // namespace adlift
