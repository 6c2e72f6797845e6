#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "qksvm/error.hpp"
#include "qksvm/raster.hpp"
#include "qksvm/synth.hpp"

using namespace qksvm;

namespace {

std::filesystem::path temp_path(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("qksvm_raster_" + std::to_string(::getpid()) + "_" + name);
}

}  // namespace

TEST(Qpr, LayoutAndRoundTrip) {
    RasterPatch p(3, 2);
    for (std::size_t i = 0; i < 6; ++i) {
        for (int b = 0; b < kBandCount; ++b) p.bands[static_cast<std::size_t>(b)][i] = 0.1f * static_cast<float>(i) + static_cast<float>(b);
        p.ground_truth[i] = i % 2;
    }
    const auto bytes = encode_qpr(p);
    EXPECT_EQ(bytes.size(), 12u + 6 * 17);
    EXPECT_EQ(bytes.substr(0, 4), "QPR1");
    EXPECT_EQ(static_cast<unsigned char>(bytes[4]), 3);
    EXPECT_EQ(static_cast<unsigned char>(bytes[8]), 2);
    // Last byte is the label of the last pixel.
    EXPECT_EQ(static_cast<unsigned char>(bytes.back()), 1);
    EXPECT_EQ(decode_qpr(bytes), p);
    EXPECT_EQ(encode_qpr(decode_qpr(bytes)), bytes);
}

TEST(Qpr, FileRoundTripIsBitExact) {
    SceneSpec spec;
    spec.width = 64;
    spec.height = 48;
    spec.seed = 3;
    const auto scene = generate_scene(spec);
    const auto path = temp_path("scene.qpr");
    write_qpr(path.string(), scene);
    EXPECT_EQ(read_qpr(path.string()), scene);
    std::ifstream in(path, std::ios::binary);
    const std::string disk((std::istreambuf_iterator<char>(in)), {});
    EXPECT_EQ(disk, encode_qpr(scene));
    std::filesystem::remove(path);
}

TEST(Qpr, Rejections) {
    auto bytes = encode_qpr(RasterPatch(2, 2));
    auto bad = bytes;
    bad[0] = 'X';
    EXPECT_THROW(decode_qpr(bad), FormatError);
    EXPECT_THROW(decode_qpr(bytes.substr(0, bytes.size() - 1)), FormatError);
    EXPECT_THROW(decode_qpr(bytes + "x"), FormatError);
    bad = bytes;
    bad.back() = 2;
    EXPECT_THROW(decode_qpr(bad), FormatError);
    EXPECT_THROW(read_qpr(temp_path("missing.qpr").string()), FormatError);
}

TEST(RasterPatch, MarginAndValidation) {
    RasterPatch p(2, 1);
    p.bands[kNir][1] = 0.5f;
    EXPECT_TRUE(p.is_margin(0));
    EXPECT_FALSE(p.is_margin(1));
    p.ground_truth[0] = 3;
    EXPECT_THROW(p.validate(), ValidationError);
    p.ground_truth[0] = 0;
    p.bands[kRed].pop_back();
    EXPECT_THROW(p.validate(), ShapeError);
}

TEST(Synth, DeterministicBytes) {
    SceneSpec spec;
    spec.width = 96;
    spec.height = 96;
    spec.seed = 17;
    EXPECT_EQ(encode_qpr(generate_scene(spec)), encode_qpr(generate_scene(spec)));
    spec.seed = 18;
    SceneSpec other = spec;
    other.seed = 19;
    EXPECT_NE(encode_qpr(generate_scene(spec)), encode_qpr(generate_scene(other)));
}

TEST(Synth, CloudFractionZero) {
    SceneSpec spec;
    spec.cloud_fraction = 0.0;
    spec.seed = 4;
    const auto s = generate_scene(spec);
    for (auto v : s.ground_truth) EXPECT_EQ(v, 0);
}

TEST(Synth, CloudFractionHalf) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        SceneSpec spec;
        spec.seed = seed;
        const auto s = generate_scene(spec);
        ASSERT_EQ(s.width, 384u);
        double mean = 0.0;
        for (auto v : s.ground_truth) mean += v;
        mean /= static_cast<double>(s.pixel_count());
        EXPECT_NEAR(mean, 0.5, 0.05) << "seed " << seed;
        s.validate();
        // Margin pixels are never cloud.
        for (std::size_t i = 0; i < s.pixel_count(); ++i)
            if (s.is_margin(i)) EXPECT_EQ(s.ground_truth[i], 0);
    }
}

TEST(Synth, Rejections) {
    SceneSpec spec;
    spec.cloud_fraction = 1.5;
    EXPECT_THROW(generate_scene(spec), ValidationError);
    spec.cloud_fraction = 0.5;
    spec.width = 0;
    EXPECT_THROW(generate_scene(spec), ValidationError);
}

TEST(Synth, ToyDataset) {
    const auto t = make_toy_dataset(20, 2);
    ASSERT_EQ(t.X.rows(), 20);
    ASSERT_EQ(t.X.cols(), 2);
    int pos = 0;
    for (int v : t.y) pos += v == 1;
    EXPECT_EQ(pos, 10);
    EXPECT_GE(t.X.minCoeff(), 0.0);
    EXPECT_LE(t.X.maxCoeff(), 1.0);
}
