// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/surrogate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "adlift/image_io.hpp"
#include "adlift/rng.hpp"

namespace adlift {

Tensor Conv2d::forward(const Tensor& x) const {
    if (x.channels() != in_channels) {
        throw std::invalid_argument("Conv2d: expected " + std::to_string(in_channels) +
                                    " input channels, got " + std::to_string(x.channels()));
    }
    const int oh = output_size(x.height());
    const int ow = output_size(x.width());
    Tensor y(out_channels, oh, ow);
    const int k2 = kernel * kernel;
    for (int o = 0; o < out_channels; ++o) {
        const double* wo = weight.data() + static_cast<std::size_t>(o) * in_channels * k2;
        for (int oy = 0; oy < oh; ++oy) {
            for (int ox = 0; ox < ow; ++ox) {
                double acc = bias[static_cast<std::size_t>(o)];
                for (int i = 0; i < in_channels; ++i) {
                    const double* wi = wo + static_cast<std::size_t>(i) * k2;
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int iy = oy * stride + ky - padding;
                        if (iy < 0 || iy >= x.height()) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride + kx - padding;
                            if (ix < 0 || ix >= x.width()) continue;
                            acc += wi[ky * kernel + kx] * x.at(i, iy, ix);
                        }
                    }
                }
                y.at(o, oy, ox) = acc;
            }
        }
    }
    return y;
}

Tensor Conv2d::backward_input(const Tensor& grad_out, int in_height, int in_width) const {
    if (grad_out.channels() != out_channels || grad_out.height() != output_size(in_height) ||
        grad_out.width() != output_size(in_width)) {
        throw std::invalid_argument("Conv2d::backward_input: gradient shape mismatch");
    }
    Tensor gx(in_channels, in_height, in_width);
    const int k2 = kernel * kernel;
    for (int o = 0; o < out_channels; ++o) {
        const double* wo = weight.data() + static_cast<std::size_t>(o) * in_channels * k2;
        for (int oy = 0; oy < grad_out.height(); ++oy) {
            for (int ox = 0; ox < grad_out.width(); ++ox) {
                const double g = grad_out.at(o, oy, ox);
                if (g == 0.0) continue;
                for (int i = 0; i < in_channels; ++i) {
                    const double* wi = wo + static_cast<std::size_t>(i) * k2;
                    for (int ky = 0; ky < kernel; ++ky) {
                        const int iy = oy * stride + ky - padding;
                        if (iy < 0 || iy >= in_height) continue;
                        for (int kx = 0; kx < kernel; ++kx) {
                            const int ix = ox * stride + kx - padding;
                            if (ix < 0 || ix >= in_width) continue;
                            gx.at(i, iy, ix) += wi[ky * kernel + kx] * g;
                        }
                    }
                }
            }
        }
    }
    return gx;
}

namespace {

Conv2d make_conv(int in, int out, int kernel, int stride, int padding) {
    Conv2d c;
    c.in_channels = in;
    c.out_channels = out;
    c.kernel = kernel;
    c.stride = stride;
    c.padding = padding;
    c.weight.assign(static_cast<std::size_t>(in) * out * kernel * kernel, 0.0);
    c.bias.assign(static_cast<std::size_t>(out), 0.0);
    return c;
}

void xavier_fill(Conv2d& c, SplitMix64& rng) {
    const double k2 = static_cast<double>(c.kernel) * c.kernel;
    const double bound = std::sqrt(6.0 / (c.in_channels * k2 + c.out_channels * k2));
    for (double& w : c.weight) {
        w = (2.0 * rng.uniform() - 1.0) * bound;
    }
}

std::array<Conv2d, 3> encoder_layers() {
    return {make_conv(3, 8, 3, 2, 1), make_conv(8, 16, 3, 2, 1), make_conv(16, 4, 3, 2, 1)};
}

void tanh_inplace(Tensor& t) {
    for (double& v : t.data()) v = std::tanh(v);
}

void tanh_backward_inplace(Tensor& grad, const Tensor& activated) {
    for (std::size_t i = 0; i < grad.size(); ++i) {
        grad[i] *= 1.0 - activated[i] * activated[i];
    }
}

SurrogateEncoder build_encoder_from(SplitMix64& rng) {
    auto layers = encoder_layers();
    for (auto& l : layers) xavier_fill(l, rng);
    return SurrogateEncoder(std::move(layers));
}

void check_box(const Box& box, int grid_h, int grid_w) {
    if (box.w < 1 || box.h < 1 || box.x < 0 || box.y < 0 || box.x + box.w > grid_w ||
        box.y + box.h > grid_h) {
        throw std::invalid_argument("box (" + std::to_string(box.x) + "," + std::to_string(box.y) +
                                    "," + std::to_string(box.w) + "," + std::to_string(box.h) +
                                    ") is outside the " + std::to_string(grid_w) + "x" +
                                    std::to_string(grid_h) + " latent grid");
    }
}

double softplus(double x) {
    return std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x)));
}

} // namespace

SurrogateEncoder::SurrogateEncoder(std::array<Conv2d, 3> layers) : layers_(std::move(layers)) {
    if (layers_[0].in_channels != 3 || layers_[2].out_channels != kLatentChannels ||
        layers_[0].out_channels != layers_[1].in_channels ||
        layers_[1].out_channels != layers_[2].in_channels) {
        throw std::invalid_argument("SurrogateEncoder: inconsistent layer shapes");
    }
}

int SurrogateEncoder::latent_height(int image_height) const {
    int h = image_height;
    for (const auto& l : layers_) h = l.output_size(h);
    return h;
}

int SurrogateEncoder::latent_width(int image_width) const {
    int w = image_width;
    for (const auto& l : layers_) w = l.output_size(w);
    return w;
}

Tensor SurrogateEncoder::encode(const Image& image) const {
    Tensor h1 = layers_[0].forward(to_chw(image));
    tanh_inplace(h1);
    Tensor h2 = layers_[1].forward(h1);
    tanh_inplace(h2);
    return layers_[2].forward(h2);
}

Image SurrogateEncoder::encode_backward(const Image& image, const Tensor& dL_dz) const {
    const Tensor x = to_chw(image);
    Tensor h1 = layers_[0].forward(x);
    tanh_inplace(h1);
    Tensor h2 = layers_[1].forward(h1);
    tanh_inplace(h2);
    if (dL_dz.channels() != kLatentChannels || dL_dz.height() != layers_[2].output_size(h2.height()) ||
        dL_dz.width() != layers_[2].output_size(h2.width())) {
        throw std::invalid_argument("encode_backward: latent gradient shape mismatch");
    }
    Tensor g2 = layers_[2].backward_input(dL_dz, h2.height(), h2.width());
    tanh_backward_inplace(g2, h2);
    Tensor g1 = layers_[1].backward_input(g2, h1.height(), h1.width());
    tanh_backward_inplace(g1, h1);
    return from_chw(layers_[0].backward_input(g1, x.height(), x.width()));
}

SurrogateEncoder build_encoder(std::uint64_t seed) {
    SplitMix64 rng(seed);
    return build_encoder_from(rng);
}

SurrogateEncoder build_zero_encoder() {
    return SurrogateEncoder(encoder_layers());
}

Tensor encode(const SurrogateEncoder& enc, const Image& image) {
    return enc.encode(image);
}

Image encode_backward(const SurrogateEncoder& enc, const Image& image, const Tensor& dL_dz) {
    return enc.encode_backward(image, dL_dz);
}

SegHead build_seghead(std::uint64_t seed) {
    SplitMix64 rng(seed);
    SurrogateEncoder enc = build_encoder_from(rng);
    Conv2d head = make_conv(SurrogateEncoder::kLatentChannels, 1, 1, 1, 0);
    xavier_fill(head, rng);
    return SegHead{std::move(enc), std::move(head)};
}

Tensor mask_logits(const SegHead& seg, const Image& image) {
    return seg.head.forward(seg.encoder.encode(image));
}

Tensor predict_mask(const SegHead& seg, const Image& image, const Box& box) {
    Tensor m = mask_logits(seg, image);
    check_box(box, m.height(), m.width());
    for (double& v : m.data()) v = 1.0 / (1.0 + std::exp(-v));
    return m;
}

double mask_mean_in_box(const Tensor& mask, const Box& box) {
    check_box(box, mask.height(), mask.width());
    double s = 0.0;
    for (int y = box.y; y < box.y + box.h; ++y) {
        for (int x = box.x; x < box.x + box.w; ++x) s += mask.at(0, y, x);
    }
    return s / (static_cast<double>(box.w) * box.h);
}

namespace {

LossResult latent_distance(const Image& image, const Tensor& reference, const SurrogateEncoder& enc,
                           double sign) {
    const Tensor z = enc.encode(image);
    if (!z.same_shape(reference)) {
        throw std::invalid_argument("latent shape mismatch");
    }
    Tensor dz(z.channels(), z.height(), z.width());
    double value = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        const double d = z[i] - reference[i];
        value += d * d;
        dz[i] = sign * 2.0 * d;
    }
    return {sign * value, enc.encode_backward(image, dz)};
}

} // namespace

LossResult loss_vu(const Image& image, const Image& raw_image, const SurrogateEncoder& enc) {
    require_same_shape(image, raw_image, "loss_vu");
    return latent_distance(image, enc.encode(raw_image), enc, -1.0);
}

LossResult loss_vt(const Image& image, const Image& target_image, const SurrogateEncoder& enc) {
    require_same_shape(image, target_image, "loss_vt");
    return latent_distance(image, enc.encode(target_image), enc, 1.0);
}

MaskLoss st_loss_from_logits(const Tensor& logits, const Box& box, const Tensor& target_mask,
                             double lambda_dice) {
    if (logits.channels() != 1 || !logits.same_shape(target_mask)) {
        throw std::invalid_argument("st loss: target mask shape does not match the mask grid");
    }
    if (!(lambda_dice >= 0.0)) {
        throw std::invalid_argument("st loss: lambda_dice must be >= 0");
    }
    for (double m : target_mask.data()) {
        if (m != 0.0 && m != 1.0) {
            throw std::invalid_argument("st loss: target mask must be binary");
        }
    }
    check_box(box, logits.height(), logits.width());

    const double n = static_cast<double>(box.w) * box.h;
    double bce = 0.0, inter = 0.0, p_sum = 0.0, m_sum = 0.0;
    for (int y = box.y; y < box.y + box.h; ++y) {
        for (int x = box.x; x < box.x + box.w; ++x) {
            const double z = std::clamp(logits.at(0, y, x), -kLogitClamp, kLogitClamp);
            const double m = target_mask.at(0, y, x);
            bce += softplus(z) - z * m;
            const double p = 1.0 / (1.0 + std::exp(-z));
            inter += p * m;
            p_sum += p;
            m_sum += m;
        }
    }
    const double denom = p_sum + m_sum + kDiceSmoothing;
    const double numer = 2.0 * inter + kDiceSmoothing;
    MaskLoss out;
    out.value = bce / n + lambda_dice * (1.0 - numer / denom);
    out.grad_logits = Tensor(1, logits.height(), logits.width());
    for (int y = box.y; y < box.y + box.h; ++y) {
        for (int x = box.x; x < box.x + box.w; ++x) {
            const double raw = logits.at(0, y, x);
            if (raw <= -kLogitClamp || raw >= kLogitClamp) continue;
            const double p = 1.0 / (1.0 + std::exp(-raw));
            const double m = target_mask.at(0, y, x);
            const double d_dice_dp = -(2.0 * m * denom - numer) / (denom * denom);
            out.grad_logits.at(0, y, x) =
                (p - m) / n + lambda_dice * d_dice_dp * p * (1.0 - p);
        }
    }
    return out;
}

LossResult loss_st(const Image& image, const SegHead& seg, const Box& box,
                   const Tensor& target_mask, double lambda_dice) {
    const Tensor z = seg.encoder.encode(image);
    const Tensor logits = seg.head.forward(z);
    const MaskLoss ml = st_loss_from_logits(logits, box, target_mask, lambda_dice);
    const Tensor dz = seg.head.backward_input(ml.grad_logits, z.height(), z.width());
    return {ml.value, seg.encoder.encode_backward(image, dz)};
}

const char* objective_name(const AttackObjective& objective) {
    switch (objective.index()) {
    case 0: return "vu";
    case 1: return "vt";
    default: return "st";
    }
}

Surrogates build_surrogates(std::uint64_t seed) {
    return Surrogates{build_encoder(seed), build_seghead(seed)};
}

void validate_objective(const AttackObjective& objective, const Surrogates& models, int width,
                        int height) {
    if (const auto* vt = std::get_if<VtObjective>(&objective)) {
        if (vt->target_image.width() != width || vt->target_image.height() != height) {
            throw std::invalid_argument("VT target image must match the view size");
        }
    } else if (const auto* st = std::get_if<StObjective>(&objective)) {
        const int gh = models.seg.encoder.latent_height(height);
        const int gw = models.seg.encoder.latent_width(width);
        if (st->target_mask.channels() != 1 || st->target_mask.height() != gh ||
            st->target_mask.width() != gw) {
            throw std::invalid_argument("ST target mask must be 1x" + std::to_string(gh) + "x" +
                                        std::to_string(gw));
        }
        for (double m : st->target_mask.data()) {
            if (m != 0.0 && m != 1.0) {
                throw std::invalid_argument("ST target mask must be binary");
            }
        }
        check_box(st->box, gh, gw);
        if (!(st->lambda_dice >= 0.0)) {
            throw std::invalid_argument("lambda_dice must be >= 0");
        }
    }
}

LossResult adversarial_loss(const AttackObjective& objective, const Surrogates& models,
                            const Image& x, const Image& x_raw) {
    return std::visit(
        [&](const auto& obj) -> LossResult {
            using T = std::decay_t<decltype(obj)>;
            if constexpr (std::is_same_v<T, VuObjective>) {
                return loss_vu(x, x_raw, models.encoder);
            } else if constexpr (std::is_same_v<T, VtObjective>) {
                return loss_vt(x, obj.target_image, models.encoder);
            } else {
                return loss_st(x, models.seg, obj.box, obj.target_mask, obj.lambda_dice);
            }
        },
        objective);
}

StObjective make_st_zero_target(const Surrogates& models, int width, int height, const Box& box,
                                double lambda_dice) {
    StObjective st;
    st.target_mask = Tensor(1, models.seg.encoder.latent_height(height),
                            models.seg.encoder.latent_width(width), 0.0);
    st.box = box;
    st.lambda_dice = lambda_dice;
    check_box(box, st.target_mask.height(), st.target_mask.width());
    return st;
}

void save_encoder_weights(const SurrogateEncoder& enc, const std::filesystem::path& dir,
                          const std::string& stem) {
    for (int i = 0; i < 3; ++i) {
        const Conv2d& c = enc.layer(i);
        const int row = c.in_channels * c.kernel * c.kernel;
        LgimArray a;
        a.width = static_cast<std::uint32_t>(row + 1);
        a.height = static_cast<std::uint32_t>(c.out_channels);
        a.channels = 1;
        for (int o = 0; o < c.out_channels; ++o) {
            for (int k = 0; k < row; ++k) {
                a.values.push_back(c.weight[static_cast<std::size_t>(o * row + k)]);
            }
            a.values.push_back(c.bias[static_cast<std::size_t>(o)]);
        }
        write_lgim(dir / (stem + "_conv" + std::to_string(i + 1) + ".lgim"), a);
    }
}

SurrogateEncoder load_encoder_weights(const std::filesystem::path& dir, const std::string& stem) {
    auto layers = encoder_layers();
    for (int i = 0; i < 3; ++i) {
        Conv2d& c = layers[static_cast<std::size_t>(i)];
        const auto path = dir / (stem + "_conv" + std::to_string(i + 1) + ".lgim");
        const LgimArray a = read_lgim(path);
        const int row = c.in_channels * c.kernel * c.kernel;
        if (a.channels != 1 || a.width != static_cast<std::uint32_t>(row + 1) ||
            a.height != static_cast<std::uint32_t>(c.out_channels)) {
            throw ParseError(path.string() + ": layer shape does not match the encoder", 4);
        }
        for (int o = 0; o < c.out_channels; ++o) {
            for (int k = 0; k < row; ++k) {
                c.weight[static_cast<std::size_t>(o * row + k)] =
                    a.values[static_cast<std::size_t>(o * (row + 1) + k)];
            }
            c.bias[static_cast<std::size_t>(o)] = a.values[static_cast<std::size_t>(o * (row + 1) + row)];
        }
    }
    return SurrogateEncoder(std::move(layers));
}

} // namespace adlift
