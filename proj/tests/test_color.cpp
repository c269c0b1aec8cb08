#include <doctest.h>

#include <cmath>

#include "metafas/common.hpp"
#include "metafas/data/color.hpp"
#include "metafas/rng.hpp"
#include "support/testutil.hpp"

using namespace metafas;
using namespace metafas::data;

namespace {
Tensor pixel(double r, double g, double b) {
    Tensor t(3, 1, 1);
    t.v = {r, g, b};
    return t;
}
}  // namespace

TEST_CASE("rgb_to_hsv hue origin and zero saturation") {
    const Tensor red = rgb_to_hsv(pixel(1, 0, 0));
    CHECK(red.v[0] == doctest::Approx(0.0));
    CHECK(red.v[1] == doctest::Approx(1.0));
    CHECK(red.v[2] == doctest::Approx(1.0));

    const Tensor gray = rgb_to_hsv(pixel(0.5, 0.5, 0.5));
    CHECK(gray.v[0] == doctest::Approx(0.0));
    CHECK(gray.v[1] == doctest::Approx(0.0));
    CHECK(gray.v[2] == doctest::Approx(0.5));
}

TEST_CASE("hsv -> rgb -> hsv roundtrip within 1e-6") {
    // Oracle: hsv_to_rgb is the inverse conversion; hue is only defined away
    // from zero saturation/value, so those are bounded below.
    Rng rng(11);
    for (int i = 0; i < 500; ++i) {
        Tensor hsv(3, 1, 1);
        hsv.v = {rng.uniform(0.0, 0.999), rng.uniform(0.1, 1.0), rng.uniform(0.1, 1.0)};
        const Tensor back = rgb_to_hsv(hsv_to_rgb(hsv));
        for (int k = 0; k < 3; ++k) {
            double diff = std::abs(back.v[k] - hsv.v[k]);
            if (k == 0) diff = std::min(diff, 1.0 - diff);  // hue wraps
            CHECK(diff < 1e-6);
        }
    }
}

TEST_CASE("rgb -> hsv -> rgb roundtrip within 1e-6") {
    Rng rng(12);
    for (int i = 0; i < 500; ++i) {
        const Tensor rgb = testutil::random_tensor(3, 1, 1, rng);
        const Tensor back = hsv_to_rgb(rgb_to_hsv(rgb));
        for (int k = 0; k < 3; ++k) CHECK(std::abs(back.v[k] - rgb.v[k]) < 1e-6);
    }
}

TEST_CASE("out-of-range inputs are rejected") {
    CHECK_THROWS_AS(rgb_to_hsv(pixel(1.2, 0, 0)), DataError);
    CHECK_THROWS_AS(rgb_to_hsv(pixel(-0.1, 0, 0)), DataError);
    CHECK_THROWS_AS(hsv_to_rgb(pixel(0.5, 2.0, 0.5)), DataError);
}

TEST_CASE("make_model_input at native size keeps RGB channels") {
    Rng rng(13);
    ImageSample s = testutil::random_sample(64, 1, rng);
    const Tensor in = make_model_input(s, 64);
    CHECK(in.c == 6);
    CHECK(in.h == 64);
    CHECK(in.w == 64);
    for (int i = 0; i < 3 * 64 * 64; ++i) CHECK(in.v[i] == s.rgb.v[i]);
}

TEST_CASE("make_model_input resizes to the full-scale side") {
    Rng rng(14);
    ImageSample s = testutil::random_sample(64, 1, rng);
    const Tensor in = make_model_input(s, 256);
    CHECK(in.c == 6);
    CHECK(in.h == 256);
    CHECK(in.w == 256);
}

TEST_CASE("constant gray input zeroes hue and saturation channels") {
    ImageSample s;
    s.rgb = Tensor(3, 16, 16);
    s.rgb.fill(0.4);
    s.label = 1;
    s.depth_gt = Tensor(1, 32, 32);
    s.parsing_gt = Mask(16, 16);
    const Tensor in = make_model_input(s, 16);
    for (int i = 0; i < 16 * 16; ++i) {
        CHECK(in.channel(3)[i] == 0.0);
        CHECK(in.channel(4)[i] == 0.0);
        CHECK(in.channel(5)[i] == doctest::Approx(0.4));
    }
}

TEST_CASE("HSV channels equal rgb_to_hsv of the resized RGB channels") {
    Rng rng(15);
    ImageSample s = testutil::random_sample(48, 1, rng);
    for (int side : {48, 64}) {
        const Tensor in = make_model_input(s, side);
        Tensor rgb(3, side, side);
        std::copy(in.v.begin(), in.v.begin() + rgb.size(), rgb.v.begin());
        const Tensor hsv = rgb_to_hsv(rgb);
        for (int i = 0; i < hsv.size(); ++i)
            CHECK(std::abs(in.v[rgb.size() + i] - hsv.v[i]) < 1e-12);
    }
}

TEST_CASE("nearest-neighbour mask resize preserves label values") {
    Mask m(4, 4);
    for (int i = 0; i < 16; ++i) m.v[i] = static_cast<std::uint8_t>(i % 13);
    const Mask up = resize_nearest(m, 8, 8);
    for (auto v : up.v) CHECK(v <= 12);
    CHECK(resize_nearest(m, 4, 4).v == m.v);
}
