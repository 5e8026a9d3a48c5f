// Copyright 2026 The adlift Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>

#include "adlift/image_io.hpp"
#include "adlift/rng.hpp"

namespace adlift {
namespace {

TEST(Image, LayoutIsRowMajorHwc) {
    Image img(3, 2);
    img.at(2, 1, 1) = 0.25;
    EXPECT_EQ(img[(1 * 3 + 2) * 3 + 1], 0.25);
    EXPECT_EQ(img.size(), 18u);
}

TEST(Image, ChwRoundTrip) {
    Image img(5, 4);
    SplitMix64 rng(1);
    for (double& v : img.data()) v = rng.uniform();
    const Tensor t = to_chw(img);
    EXPECT_EQ(t.channels(), 3);
    EXPECT_EQ(t.at(2, 3, 4), img.at(4, 3, 2));
    EXPECT_EQ(from_chw(t), img);
}

TEST(Image, LinfAndShapeCheck) {
    Image a(4, 4, 0.5), b(4, 4, 0.5);
    b.at(1, 2, 0) = 0.2;
    EXPECT_DOUBLE_EQ(linf_distance(a, b), 0.3);
    EXPECT_THROW(linf_distance(a, Image(4, 5)), std::invalid_argument);
    EXPECT_THROW(require_same_shape(a, Image(3, 4), "x"), std::invalid_argument);
}

TEST(Lgim, HeaderLayout) {
    LgimArray a{2, 1, 1, {1.0, -2.5}};
    const auto bytes = encode_lgim(a);
    ASSERT_EQ(bytes.size(), 16u + 16u);
    EXPECT_EQ(std::memcmp(bytes.data(), "LGIM", 4), 0);
    EXPECT_EQ(bytes[4], 2);
    EXPECT_EQ(bytes[8], 1);
    EXPECT_EQ(bytes[12], 1);
    // 1.0 little-endian: 00 .. 00 f0 3f
    EXPECT_EQ(bytes[16 + 7], 0x3f);
    EXPECT_EQ(bytes[16 + 6], 0xf0);
}

TEST(Lgim, RoundTripIsBitExact) {
    LgimArray a{7, 3, 3, {}};
    SplitMix64 rng(9);
    for (int i = 0; i < 63; ++i) a.values.push_back(rng.uniform(-1e3, 1e3));
    a.values[5] = -0.0;
    const LgimArray b = decode_lgim(encode_lgim(a));
    EXPECT_EQ(b.width, 7u);
    EXPECT_EQ(b.height, 3u);
    EXPECT_EQ(b.channels, 3u);
    ASSERT_EQ(b.values.size(), a.values.size());
    EXPECT_EQ(std::memcmp(b.values.data(), a.values.data(), a.values.size() * 8), 0);
}

TEST(Lgim, RejectsBadMagic) {
    auto bytes = encode_lgim(LgimArray{1, 1, 1, {0.5}});
    bytes[0] = 'X';
    try {
        decode_lgim(bytes);
        FAIL();
    } catch (const ParseError& e) {
        EXPECT_EQ(e.offset(), 0u);
    }
}

TEST(Lgim, RejectsTruncatedPayload) {
    auto bytes = encode_lgim(LgimArray{2, 2, 1, {1, 2, 3, 4}});
    bytes.resize(bytes.size() - 3);
    EXPECT_THROW(decode_lgim(bytes), ParseError);
    bytes.resize(10);
    EXPECT_THROW(decode_lgim(bytes), ParseError);
}

TEST(Lgim, ImageFileRoundTrip) {
    const auto dir = std::filesystem::temp_directory_path() / "adlift_test_lgim";
    std::filesystem::create_directories(dir);
    Image img(6, 5);
    SplitMix64 rng(3);
    for (double& v : img.data()) v = rng.uniform();
    write_lgim(dir / "a.lgim", img);
    EXPECT_EQ(read_lgim_image(dir / "a.lgim"), img);
    write_lgim(dir / "m.lgim", LgimArray{2, 2, 1, {0, 1, 1, 0}});
    EXPECT_THROW(read_lgim_image(dir / "m.lgim"), ParseError);
    EXPECT_THROW(read_lgim(dir / "missing.lgim"), std::runtime_error);
}

TEST(Ppm, QuantizesWithRounding) {
    const auto path = std::filesystem::temp_directory_path() / "adlift_test.ppm";
    Image img(2, 1);
    img.at(0, 0, 0) = 1.0;
    img.at(0, 0, 1) = 0.5;     // 127.5 -> 128
    img.at(0, 0, 2) = 0.25;    // 63.75 -> 64
    img.at(1, 0, 0) = 1.7;     // clamped
    img.at(1, 0, 1) = -0.2;    // clamped
    write_ppm(path, img);
    const auto bytes = read_file_bytes(path);
    const std::string header = "P6\n2 1\n255\n";
    ASSERT_EQ(bytes.size(), header.size() + 6);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + static_cast<long>(header.size())), header);
    const std::size_t o = header.size();
    EXPECT_EQ(bytes[o + 0], 255);
    EXPECT_EQ(bytes[o + 1], 128);
    EXPECT_EQ(bytes[o + 2], 64);
    EXPECT_EQ(bytes[o + 3], 255);
    EXPECT_EQ(bytes[o + 4], 0);
}

} // namespace
} // namespace adlift
