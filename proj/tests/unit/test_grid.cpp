#include <doctest.h>

#include <random>

#include "convpers/error.hpp"
#include "convpers/grid.hpp"
#include "support.hpp"

using namespace convpers;

namespace {

std::vector<double> as_vector(const Image& f) { return {f.values().begin(), f.values().end()}; }

// Fixed 4x4 image shared with the oracle script.
Image oracle_image() {
    return Image::from_rows({{0.3, 0.9, 0.1, 0.5}, {0.7, 0.2, 0.8, 0.4}, {0.6, 0.05, 0.95, 0.25}, {0.15, 0.85, 0.35, 0.75}});
}

}  // namespace

TEST_SUITE("grid") {

TEST_CASE("region_shape arithmetic") {
    CHECK(region_shape({4, 3}, {2, 2}, {2, 1}) == GridShape{2, 2});
    CHECK(region_shape({5, 5}, {1, 1}, {1, 1}) == GridShape{5, 5});
    CHECK(region_shape({7}, {3}, {2}) == GridShape{3});
}

TEST_CASE("region_shape rejects oversized filters") {
    try {
        region_shape({2, 3}, {3, 1}, {1, 1});
        FAIL("expected EmptyRegion");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyRegion);
    }
}

TEST_CASE("region_shape is monotone in filter extent and stride") {
    for (std::size_t p = 1; p <= 9; ++p) {
        for (std::size_t b = 1; b <= p; ++b) {
            for (std::size_t k = 1; k <= 4; ++k) {
                const auto base = region_shape({p}, {b}, {k}).extent(0);
                if (b < p) CHECK(region_shape({p}, {b + 1}, {k}).extent(0) <= base);
                CHECK(region_shape({p}, {b}, {k + 1}).extent(0) <= base);
            }
        }
    }
}

TEST_CASE("shape helpers") {
    const GridShape s{4, 3};
    CHECK(s.size() == 12);
    CHECK(s.to_string() == "4x3");
    CHECK(GridShape::parse("4x3") == s);
    for (std::size_t i = 0; i < s.size(); ++i) CHECK(s.flatten(s.unflatten(i)) == i);
    const std::vector<std::size_t> c{2, 1};
    CHECK(s.flatten(c) == 7);
    CHECK(s.axis_strides() == std::vector<std::size_t>{3, 1});
    CHECK(Stride{2, 3}.kappa() == 6);
}

TEST_CASE("convolve small cases") {
    const Image f = Image::from_rows({{1, 2}, {3, 4}});
    CHECK(as_vector(convolve(f, ConvFilter::from_rows({{1}}), Stride::unit(2))) == std::vector<double>{1, 2, 3, 4});
    const Image s = convolve(f, ConvFilter::from_rows({{1, 1}, {1, 1}}), Stride::unit(2));
    CHECK(s.shape() == GridShape{1, 1});
    CHECK(s.at(0) == 10.0);
    const Image z = convolve(oracle_image(), ConvFilter::from_rows({{0, 0}, {0, 0}}), Stride::unit(2));
    for (double v : z.values()) CHECK(v == 0.0);
}

TEST_CASE("convolve matches independent correlation") {
    const ConvFilter g = ConvFilter::from_rows({{1.0, -2.0}, {0.5, 1.0}});
    const Image a = convolve(oracle_image(), g, Stride::unit(2));
    const std::vector<double> expect{-0.95, 1.6, -0.09999999999999998, 0.6499999999999999, -0.42500000000000027,
                                     0.725, 1.4249999999999998, -1.0749999999999997, 1.375};
    REQUIRE(a.shape() == GridShape{3, 3});
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(a.at(i) == doctest::Approx(expect[i]).epsilon(1e-14));

    const Image b = convolve(oracle_image(), g, Stride{2, 1});
    REQUIRE(b.shape() == GridShape{2, 3});
    const std::vector<double> expect_b{-0.95, 1.6, -0.09999999999999998, 1.4249999999999998, -1.0749999999999997, 1.375};
    for (std::size_t i = 0; i < expect_b.size(); ++i) CHECK(b.at(i) == doctest::Approx(expect_b[i]).epsilon(1e-14));
}

TEST_CASE("multi-channel convolution is a dot product over channels") {
    // 2x2 image with 2 channels, 1x1 filter weights (2, -1).
    const Image f(GridShape{2, 2}, 2, {1, 10, 2, 20, 3, 30, 4, 40});
    const ConvFilter g(GridShape{1, 1}, 2, {2, -1});
    CHECK(as_vector(convolve(f, g, Stride::unit(2))) == std::vector<double>{-8, -16, -24, -32});
    try {
        convolve(f, ConvFilter::from_rows({{1}}), Stride::unit(2));
        FAIL("expected ChannelMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ChannelMismatch);
    }
}

TEST_CASE("three-dimensional convolution") {
    std::mt19937_64 rng(3);
    const Image f = testing::random_image(rng, GridShape{3, 4, 5});
    const ConvFilter g(GridShape{1, 1, 1}, 1, {1.0});
    CHECK(convolve(f, g, Stride::unit(3)) == f);
    const ConvFilter box(GridShape{3, 4, 5}, 1, std::vector<double>(60, 1.0));
    double total = 0;
    for (double v : f.values()) total += v;
    CHECK(convolve(f, box, Stride::unit(3)).at(0) == doctest::Approx(total).epsilon(1e-14));
}

TEST_CASE("linear_combination") {
    const ConvFilter g = ConvFilter::from_rows({{1, -2}, {3, 0.5}});
    const ConvFilter ones = ConvFilter::from_rows({{1, 1}, {1, 1}});
    const std::vector<ConvFilter> one{g};
    CHECK(linear_combination(one, std::vector<double>{1.0}).values().size() == 4);
    const auto same = linear_combination(one, std::vector<double>{1.0});
    CHECK(std::equal(same.values().begin(), same.values().end(), g.values().begin()));
    const std::vector<ConvFilter> twice{g, g};
    const ConvFilter cancelled = linear_combination(twice, std::vector<double>{1.0, -1.0});
    for (double v : cancelled.values()) CHECK(v == 0.0);
    const std::vector<ConvFilter> ones2{ones, ones};
    const ConvFilter averaged = linear_combination(ones2, std::vector<double>{0.5, 0.5});
    for (double v : averaged.values()) CHECK(v == 1.0);
    const std::vector<ConvFilter> mixed{g, ConvFilter::from_rows({{1}})};
    try {
        linear_combination(mixed, std::vector<double>{1, 1});
        FAIL("expected ShapeMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::ShapeMismatch);
    }
}

TEST_CASE("extract_patches") {
    const Image f = Image::from_rows({{1, 2}, {3, 4}});
    const auto singles = extract_patches(f, {1, 1}, Stride::unit(2));
    CHECK(singles == std::vector<std::vector<double>>{{1}, {2}, {3}, {4}});
    CHECK(extract_patches(f, {2, 2}, Stride::unit(2)) == std::vector<std::vector<double>>{{1, 2, 3, 4}});
}

TEST_CASE("patches agree with convolution") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Image f = testing::random_image(rng, {7, 6});
        const ConvFilter g = testing::random_filter(rng, {3, 2});
        const Stride k{2, 1};
        const Image out = convolve(f, g, k);
        const auto patches = extract_patches(f, g.shape(), k);
        REQUIRE(patches.size() == out.shape().size());
        for (std::size_t r = 0; r < patches.size(); ++r) {
            double s = 0.0;
            for (std::size_t i = 0; i < patches[r].size(); ++i) s += patches[r][i] * g.values()[i];
            CHECK(s == out.at(r));
        }
    }
}

TEST_CASE("convolution is linear in the filter") {
    std::mt19937_64 rng(12);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int t = 0; t < 20; ++t) {
        const Image f = testing::random_image(rng, {6, 6});
        const ConvFilter g = testing::random_filter(rng, {3, 3});
        const ConvFilter h = testing::random_filter(rng, {3, 3});
        const double a = u(rng), b = u(rng);
        const std::vector<ConvFilter> gh{g, h};
        const Image lhs = convolve(f, linear_combination(gh, std::vector<double>{a, b}), Stride::unit(2));
        const Image cg = convolve(f, g, Stride::unit(2));
        const Image ch = convolve(f, h, Stride::unit(2));
        for (std::size_t i = 0; i < lhs.shape().size(); ++i) {
            CHECK(std::abs(lhs.at(i) - (a * cg.at(i) + b * ch.at(i))) <= 1e-12);
        }
    }
}

TEST_CASE("unit filter reproduces the image") {
    std::mt19937_64 rng(13);
    for (int t = 0; t < 10; ++t) {
        const Image f = testing::random_image(rng, {5, 7});
        CHECK(convolve(f, ConvFilter::from_rows({{1}}), Stride::unit(2)) == f);
    }
}

TEST_CASE("young inequality in sup norm") {
    std::mt19937_64 rng(14);
    for (int t = 0; t < 50; ++t) {
        const Image f = testing::random_image(rng, {8, 8});
        const ConvFilter g = testing::random_filter(rng, {3, 3});
        double fmax = 0;
        for (double v : f.values()) fmax = std::max(fmax, std::abs(v));
        const Image out = convolve(f, g, Stride::unit(2));
        for (double v : out.values()) CHECK(std::abs(v) <= g.l1_norm() * fmax + 1e-12);
    }
}

TEST_CASE("max_pool") {
    const Image f = Image::from_rows({{1, 5, 2}, {3, 4, 9}, {7, 0, 1}});
    const Image p = max_pool(f, {2, 2});
    CHECK(p.shape() == GridShape{1, 1});
    CHECK(p.at(0) == 5.0);
}

TEST_CASE("images reject non-finite values") {
    CHECK_THROWS_AS(Image::from_rows({{1, std::numeric_limits<double>::quiet_NaN()}}), Error);
}

}  // TEST_SUITE
