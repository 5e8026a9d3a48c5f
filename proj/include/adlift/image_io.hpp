// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "adlift/image.hpp"

namespace adlift {

/// Thrown by every file reader in the library. `offset` is the byte position
/// at which the input stopped making sense.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t offset)
        : std::runtime_error(what + " (at byte " + std::to_string(offset) + ")"),
          offset_(offset) {}

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Contents of an LGIM file: a 16-byte header (magic "LGIM", then width,
/// height and channels as little-endian u32) followed by width*height*channels
/// little-endian f64 values in row-major order.
struct LgimArray {
    std::uint32_t width = 0;
    std::uint32_t height = 0;
    std::uint32_t channels = 0;
    std::vector<double> values;
};

std::vector<std::uint8_t> encode_lgim(const LgimArray& array);
LgimArray decode_lgim(const std::vector<std::uint8_t>& bytes);

void write_lgim(const std::filesystem::path& path, const LgimArray& array);
LgimArray read_lgim(const std::filesystem::path& path);

void write_lgim(const std::filesystem::path& path, const Image& image);
Image read_lgim_image(const std::filesystem::path& path);

/// 8-bit binary PPM (P6), values quantized with round-to-nearest.
void write_ppm(const std::filesystem::path& path, const Image& image);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes);

} // namespace adlift
