// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include "adlift/image_io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

namespace adlift {

namespace {

constexpr char kMagic[4] = {'L', 'G', 'I', 'M'};

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) {
        out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
}

void put_f64(std::vector<std::uint8_t>& out, double d) {
    const auto bits = std::bit_cast<std::uint64_t>(d);
    for (int i = 0; i < 8; ++i) {
        out.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
    }
}

std::uint64_t get_le(const std::uint8_t* p, int n) {
    std::uint64_t v = 0;
    for (int i = 0; i < n; ++i) {
        v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    }
    return v;
}

} // namespace

std::vector<std::uint8_t> encode_lgim(const LgimArray& array) {
    const std::size_t expected =
        static_cast<std::size_t>(array.width) * array.height * array.channels;
    if (array.values.size() != expected) {
        throw std::invalid_argument("encode_lgim: value count does not match header");
    }
    std::vector<std::uint8_t> out;
    out.reserve(16 + 8 * expected);
    out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
    put_u32(out, array.width);
    put_u32(out, array.height);
    put_u32(out, array.channels);
    for (double d : array.values) {
        put_f64(out, d);
    }
    return out;
}

LgimArray decode_lgim(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 16) {
        throw ParseError("LGIM: truncated header", bytes.size());
    }
    if (std::memcmp(bytes.data(), kMagic, 4) != 0) {
        throw ParseError("LGIM: bad magic", 0);
    }
    LgimArray a;
    a.width = static_cast<std::uint32_t>(get_le(bytes.data() + 4, 4));
    a.height = static_cast<std::uint32_t>(get_le(bytes.data() + 8, 4));
    a.channels = static_cast<std::uint32_t>(get_le(bytes.data() + 12, 4));
    const std::size_t count = static_cast<std::size_t>(a.width) * a.height * a.channels;
    const std::size_t payload = bytes.size() - 16;
    if (payload != count * 8) {
        throw ParseError("LGIM: payload is " + std::to_string(payload) + " bytes, header implies " +
                             std::to_string(count * 8),
                         16 + std::min(payload, count * 8));
    }
    a.values.resize(count);
    for (std::size_t i = 0; i < count; ++i) {
        a.values[i] = std::bit_cast<double>(get_le(bytes.data() + 16 + 8 * i, 8));
    }
    return a;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw std::runtime_error("cannot write " + path.string());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) {
        throw std::runtime_error("write failed: " + path.string());
    }
}

void write_lgim(const std::filesystem::path& path, const LgimArray& array) {
    write_file_bytes(path, encode_lgim(array));
}

LgimArray read_lgim(const std::filesystem::path& path) {
    return decode_lgim(read_file_bytes(path));
}

void write_lgim(const std::filesystem::path& path, const Image& image) {
    LgimArray a;
    a.width = static_cast<std::uint32_t>(image.width());
    a.height = static_cast<std::uint32_t>(image.height());
    a.channels = Image::kChannels;
    a.values.assign(image.data().begin(), image.data().end());
    write_lgim(path, a);
}

Image read_lgim_image(const std::filesystem::path& path) {
    LgimArray a = read_lgim(path);
    if (a.channels != Image::kChannels) {
        throw ParseError("LGIM: expected 3 channels, found " + std::to_string(a.channels), 12);
    }
    Image img(static_cast<int>(a.width), static_cast<int>(a.height));
    std::copy(a.values.begin(), a.values.end(), img.data().begin());
    return img;
}

void write_ppm(const std::filesystem::path& path, const Image& image) {
    std::string header = "P6\n" + std::to_string(image.width()) + " " +
                         std::to_string(image.height()) + "\n255\n";
    std::vector<std::uint8_t> bytes(header.begin(), header.end());
    bytes.reserve(bytes.size() + image.size());
    for (double v : image.data()) {
        const double q = std::round(std::clamp(v, 0.0, 1.0) * 255.0);
        bytes.push_back(static_cast<std::uint8_t>(q));
    }
    write_file_bytes(path, bytes);
}

} // namespace adlift
