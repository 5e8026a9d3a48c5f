// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace adlift {

/// Row-major H x W x 3 buffer of doubles.
///
/// The same type carries two roles: rendered/target images, whose entries
/// stay in [0, 1], and gradient images (dL/dC), which are unbounded.
class Image {
public:
    static constexpr int kChannels = 3;

    Image() = default;
    Image(int width, int height, double fill = 0.0);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& at(int x, int y, int c) noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
    }
    double at(int x, int y, int c) const noexcept {
        return data_[(static_cast<std::size_t>(y) * width_ + x) * kChannels + c];
    }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const Image& other) const noexcept {
        return width_ == other.width_ && height_ == other.height_;
    }

    friend bool operator==(const Image&, const Image&) = default;

private:
    int width_ = 0;
    int height_ = 0;
    std::vector<double> data_;
};

/// Channel-major C x H x W tensor used for latents, masks and conv activations.
class Tensor {
public:
    Tensor() = default;
    Tensor(int channels, int height, int width, double fill = 0.0);

    int channels() const noexcept { return channels_; }
    int height() const noexcept { return height_; }
    int width() const noexcept { return width_; }
    std::size_t size() const noexcept { return data_.size(); }

    double& at(int c, int y, int x) noexcept {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }
    double at(int c, int y, int x) const noexcept {
        return data_[(static_cast<std::size_t>(c) * height_ + y) * width_ + x];
    }

    double& operator[](std::size_t i) noexcept { return data_[i]; }
    double operator[](std::size_t i) const noexcept { return data_[i]; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    bool same_shape(const Tensor& other) const noexcept {
        return channels_ == other.channels_ && height_ == other.height_ &&
               width_ == other.width_;
    }

    friend bool operator==(const Tensor&, const Tensor&) = default;

private:
    int channels_ = 0;
    int height_ = 0;
    int width_ = 0;
    std::vector<double> data_;
};

Tensor to_chw(const Image& image);
Image from_chw(const Tensor& tensor);

/// max_i |a_i - b_i|.
double linf_distance(const Image& a, const Image& b);

/// Throws std::invalid_argument naming `what` when shapes differ.
void require_same_shape(const Image& a, const Image& b, const std::string& what);

} // namespace adlift
