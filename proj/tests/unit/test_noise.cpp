#include <gtest/gtest.h>

#include <cmath>

#include "nsrkit/noise/noise.hpp"

using namespace nsr;
using namespace nsr::noise;
using imaging::ImageF;

namespace {

ImageF random_image(std::size_t h, std::size_t w, std::uint64_t seed) {
    Rng rng(seed);
    ImageF img(h, w);
    for (float& v : img.data) v = static_cast<float>(0.2 + 0.6 * rng.uniform());
    return img;
}

}  // namespace

TEST(NoiseSpec, ParseAndFormat) {
    const auto spec = NoiseSpec::parse("gaussian:0.1:42");
    EXPECT_EQ(spec.kind, NoiseKind::gaussian);
    EXPECT_EQ(spec.param, 0.1);
    EXPECT_EQ(spec.seed, 42u);
    EXPECT_EQ(spec.str(), "gaussian:0.1:42");
    EXPECT_EQ(NoiseSpec::parse(spec.str()), spec);
    EXPECT_EQ(NoiseSpec::parse("none").kind, NoiseKind::none);
    EXPECT_EQ(NoiseSpec::parse("salt_pepper:0.2").label(), "salt_pepper 0.2");
}

TEST(NoiseSpec, RejectsBadInput) {
    EXPECT_THROW(NoiseSpec::parse("pink:0.1:1"), std::invalid_argument);
    EXPECT_THROW(NoiseSpec::parse("gaussian"), std::invalid_argument);
    EXPECT_THROW(NoiseSpec::parse("gaussian:-0.1:1"), std::invalid_argument);
    EXPECT_THROW(NoiseSpec::parse("gaussian:abc:1"), std::invalid_argument);
    EXPECT_THROW(NoiseSpec::parse("gaussian:0.1:1:2"), std::invalid_argument);
    EXPECT_THROW(NoiseSpec::parse("salt_pepper:1.5:1"), std::invalid_argument);
    EXPECT_THROW(corrupt(ImageF(2, 2), {NoiseKind::speckle, -1.0, 0}), std::invalid_argument);
}

TEST(Corrupt, NoneIsBitIdentical) {
    const ImageF img = random_image(6, 7, 1);
    EXPECT_EQ(corrupt(img, {NoiseKind::none, 5.0, 3}), img);
}

TEST(Corrupt, MultiplicativeAndPoissonKeepZeros) {
    const ImageF zero(32, 32, 0.0f);
    EXPECT_EQ(corrupt(zero, {NoiseKind::speckle, 0.1, 4}), zero);
    EXPECT_EQ(corrupt(zero, {NoiseKind::poisson, 0.1, 4}), zero);
}

TEST(Corrupt, GaussianSampleStatistics) {
    const ImageF img(1000, 1000, 0.5f);
    // Single channel of 10^6 pixels.
    const ImageF out = corrupt(img, {NoiseKind::gaussian, 0.04, 2024});
    double s = 0, s2 = 0;
    const std::size_t n = img.height * img.width;
    for (std::size_t p = 0; p < n; ++p) {
        const double d = double(out.data[p * 3]) - 0.5;
        s += d;
        s2 += d * d;
    }
    const double mean = s / n;
    const double var = s2 / n - mean * mean;
    EXPECT_NEAR(mean, 0.0, 0.001);
    EXPECT_GE(var, 0.038);
    EXPECT_LE(var, 0.042);
}

TEST(Corrupt, SaltPepperCounts) {
    const ImageF img(1000, 1000, 0.5f);
    const ImageF out = corrupt(img, {NoiseKind::salt_pepper, 0.2, 99});
    std::size_t salt = 0, pepper = 0;
    const std::size_t n = img.height * img.width;
    for (std::size_t p = 0; p < n; ++p) {
        const float r = out.data[p * 3], g = out.data[p * 3 + 1], b = out.data[p * 3 + 2];
        ASSERT_TRUE(r == g && g == b);
        if (r == 1.0f) ++salt;
        if (r == 0.0f) ++pepper;
    }
    const double changed = double(salt + pepper) / n;
    EXPECT_GE(changed, 0.195);
    EXPECT_LE(changed, 0.205);
    const double ratio = double(salt) / double(salt + pepper);
    EXPECT_GE(ratio, 0.48);
    EXPECT_LE(ratio, 0.52);
}

TEST(Corrupt, PoissonIsUnbiasedAndQuantized) {
    const ImageF img(200, 200, 0.35f);
    const double lambda = 0.1;
    const ImageF out = corrupt(img, {NoiseKind::poisson, lambda, 5});
    double s = 0;
    for (float v : out.data) {
        const double k = v / lambda;
        if (v < 1.0f) {
            EXPECT_NEAR(k, std::round(k), 1e-5);
        }
        s += v;
    }
    // Clamping at 1 only trims the far tail at this mean.
    EXPECT_NEAR(s / out.data.size(), 0.35, 0.005);
}

TEST(Corrupt, OutputStaysInUnitRange) {
    const ImageF img = random_image(40, 40, 2);
    for (const char* text : {"gaussian:1:1", "speckle:2:1", "poisson:0.5:1", "salt_pepper:1:1"})
        for (float v : corrupt(img, NoiseSpec::parse(text)).data) ASSERT_TRUE(v >= 0.0f && v <= 1.0f) << text;
}

TEST(Corrupt, SameSeedIsBitIdentical) {
    const ImageF img = random_image(30, 30, 3);
    for (const char* text : {"gaussian:0.1:8", "speckle:0.1:8", "poisson:0.1:8", "salt_pepper:0.2:8"})
        EXPECT_EQ(corrupt(img, NoiseSpec::parse(text)), corrupt(img, NoiseSpec::parse(text))) << text;
}

TEST(Corrupt, DistinctSeedsDifferAlmostEverywhere) {
    const ImageF img(100, 100, 0.5f);
    const ImageF a = corrupt(img, {NoiseKind::gaussian, 0.01, 1});
    const ImageF b = corrupt(img, {NoiseKind::gaussian, 0.01, 2});
    std::size_t differ = 0;
    for (std::size_t i = 0; i < a.data.size(); ++i) differ += a.data[i] != b.data[i];
    EXPECT_GE(double(differ) / a.data.size(), 0.99);
}

TEST(Corrupt, PsnrFallsAsVarianceGrows) {
    const ImageF img = random_image(64, 64, 4);
    double prev = std::numeric_limits<double>::infinity();
    for (double var : {0.05, 0.1, 0.2}) {
        double total = 0;
        for (std::uint64_t seed = 0; seed < 5; ++seed)
            total += imaging::psnr(img, corrupt(img, {NoiseKind::gaussian, var, seed}));
        EXPECT_LT(total / 5, prev);
        prev = total / 5;
    }
}

TEST(CorruptBatch, OnlyLrChangesAndSeedsAreDerived) {
    const ImageF src = random_image(32, 32, 5);
    Rng rng(6);
    const auto pairs = imaging::sample_patches(src, 4, 8, 2, rng);
    const NoiseSpec spec{NoiseKind::gaussian, 0.1, 77};
    const auto a = corrupt_batch(pairs, spec);
    const auto b = corrupt_batch(pairs, spec);
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        EXPECT_EQ(a[i].hr, pairs[i].hr);
        EXPECT_NE(a[i].lr, pairs[i].lr);
        EXPECT_EQ(a[i].lr, b[i].lr);
        EXPECT_EQ(a[i].lr, corrupt(pairs[i].lr, {NoiseKind::gaussian, 0.1, derive_seed(77, i)}));
    }
    const auto none = corrupt_batch(pairs, {NoiseKind::none, 0, 0});
    for (std::size_t i = 0; i < pairs.size(); ++i) EXPECT_EQ(none[i].lr, pairs[i].lr);
}
