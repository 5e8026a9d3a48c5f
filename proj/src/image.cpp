// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/image.hpp"

#include <algorithm>
#include <cmath>

namespace adlift {

Image::Image(int width, int height, double fill)
    : width_(width), height_(height) {
    if (width < 0 || height < 0) {
        throw std::invalid_argument("Image: negative dimensions");
    }
    data_.assign(static_cast<std::size_t>(width) * height * kChannels, fill);
}

Tensor::Tensor(int channels, int height, int width, double fill)
    : channels_(channels), height_(height), width_(width) {
    if (channels < 0 || height < 0 || width < 0) {
        throw std::invalid_argument("Tensor: negative dimensions");
    }
    data_.assign(static_cast<std::size_t>(channels) * height * width, fill);
}

Tensor to_chw(const Image& image) {
    Tensor t(Image::kChannels, image.height(), image.width());
    for (int c = 0; c < Image::kChannels; ++c) {
        for (int y = 0; y < image.height(); ++y) {
            for (int x = 0; x < image.width(); ++x) {
                t.at(c, y, x) = image.at(x, y, c);
            }
        }
    }
    return t;
}

Image from_chw(const Tensor& tensor) {
    if (tensor.channels() != Image::kChannels) {
        throw std::invalid_argument("from_chw: tensor must have 3 channels");
    }
    Image img(tensor.width(), tensor.height());
    for (int c = 0; c < Image::kChannels; ++c) {
        for (int y = 0; y < tensor.height(); ++y) {
            for (int x = 0; x < tensor.width(); ++x) {
                img.at(x, y, c) = tensor.at(c, y, x);
            }
        }
    }
    return img;
}

double linf_distance(const Image& a, const Image& b) {
    require_same_shape(a, b, "linf_distance");
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        m = std::max(m, std::abs(a[i] - b[i]));
    }
    return m;
}

void require_same_shape(const Image& a, const Image& b, const std::string& what) {
    if (!a.same_shape(b)) {
        throw std::invalid_argument(what + ": image shape mismatch (" +
                                    std::to_string(a.width()) + "x" +
                                    std::to_string(a.height()) + " vs " +
                                    std::to_string(b.width()) + "x" +
                                    std::to_string(b.height()) + ")");
    }
}

} // namespace adlift
