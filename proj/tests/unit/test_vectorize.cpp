#include <doctest.h>

#include <numeric>
#include <random>

#include "convpers/error.hpp"
#include "convpers/metrics.hpp"
#include "convpers/vectorize.hpp"
#include "support.hpp"

using namespace convpers;

namespace {

PersistenceDiagram diagram(std::initializer_list<DiagramPoint> pts, double cap = 0.0) {
    PersistenceDiagram d;
    d.points = pts;
    d.cap = cap;
    return d;
}

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

}  // namespace

TEST_SUITE("vectorize") {

TEST_CASE("persistence image of an empty diagram") {
    PersistenceImageSpec spec;
    const auto v = persistence_image(diagram({}), 0, spec);
    CHECK(v.size() == 100);
    for (double x : v) CHECK(x == 0.0);
}

TEST_CASE("persistence image matches independent integration") {
    // Reference from scipy.stats.norm.cdf differences.
    PersistenceImageSpec spec;
    spec.birth_pixels = 3;
    spec.pers_pixels = 2;
    spec.sigma = 0.2;
    spec.bounds = {0.0, 1.0, 0.0, 1.0};
    const auto v = persistence_image(diagram({{0.2, 0.5, 0}, {0.6, 0.9, 0}, {0.1, 0.4, 1}}), 0, spec);
    const std::vector<double> expect{0.15770673339471517, 0.18171223548526233, 0.08283095016012589,
                                     0.03225707369389485, 0.03716711927866806, 0.01694210517164924};
    REQUIRE(v.size() == 6);
    for (std::size_t i = 0; i < 6; ++i) CHECK(v[i] == doctest::Approx(expect[i]).epsilon(1e-12));
}

TEST_CASE("single point mass equals its weight") {
    PersistenceImageSpec spec;
    spec.birth_pixels = 40;
    spec.pers_pixels = 40;
    spec.sigma = 0.05;
    const double b = 0.3, pers = 0.5;
    spec.bounds = {b - 6 * spec.sigma, b + 6 * spec.sigma, pers - 6 * spec.sigma, pers + 6 * spec.sigma};
    const auto v = persistence_image(diagram({{b, b + pers, 0}}), 0, spec);
    CHECK(std::abs(sum(v) - pers / spec.bounds.pers_max) <= 1e-3);
}

TEST_CASE("persistence image is translation equivariant in birth") {
    PersistenceImageSpec spec;
    spec.sigma = 0.1;
    spec.bounds = {0.0, 1.0, 0.0, 1.0};
    PersistenceImageSpec shifted = spec;
    const double dx = 0.37;
    shifted.bounds.birth_min += dx;
    shifted.bounds.birth_max += dx;
    const auto a = persistence_image(diagram({{0.2, 0.6, 0}, {0.5, 0.7, 0}}), 0, spec);
    const auto b = persistence_image(diagram({{0.2 + dx, 0.6 + dx, 0}, {0.5 + dx, 0.7 + dx, 0}}), 0, shifted);
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-12);
}

TEST_CASE("persistence image is stable under small moves") {
    PersistenceImageSpec spec;
    spec.sigma = 0.1;
    spec.bounds = {0.0, 1.0, 0.0, 1.0};
    std::mt19937_64 rng(51);
    std::uniform_real_distribution<double> u(0.1, 0.5);
    double worst = 0.0;
    for (int t = 0; t < 50; ++t) {
        const double b = u(rng), d = b + u(rng), delta = spec.sigma / 10;
        const auto x = persistence_image(diagram({{b, d, 0}}), 0, spec);
        const auto y = persistence_image(diagram({{b + delta, d + delta, 0}}), 0, spec);
        for (std::size_t i = 0; i < x.size(); ++i) worst = std::max(worst, std::abs(x[i] - y[i]) / delta);
    }
    CHECK(worst <= 1.0);
}

TEST_CASE("bad persistence image specs") {
    PersistenceImageSpec spec;
    spec.sigma = 0.0;
    try {
        persistence_image(diagram({}), 0, spec);
        FAIL("expected BadSpec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadSpec);
    }
    spec.sigma = 0.1;
    spec.bounds = {1.0, 1.0, 0.0, 1.0};
    CHECK_THROWS_AS(persistence_image(diagram({}), 0, spec), Error);
}

TEST_CASE("fit_image_spec covers the training points") {
    const auto a = diagram({{0.1, 0.5, 0}, {0.2, kInfinity, 0}}, 0.9);
    const auto b = diagram({{-0.3, 0.2, 1}});
    const auto spec = fit_image_spec({&a, &b}, {0, 1});
    CHECK(spec.bounds.birth_min == -0.3);
    CHECK(spec.bounds.birth_max == 0.2);
    CHECK(spec.bounds.pers_max == doctest::Approx(0.7));
    CHECK(spec.sigma == doctest::Approx(0.07));
}

TEST_CASE("total persistence") {
    CHECK(total_persistence(diagram({{0, 1, 0}, {0, 2, 0}}), 0) == 3.0);
    CHECK(total_persistence(diagram({}), 0) == 0.0);
    CHECK(total_persistence(diagram({{0, kInfinity, 0}}, 5.0), 0) == 5.0);
    CHECK(total_persistence(diagram({{0, 1, 0}, {0, 2, 1}}), 1) == 2.0);
}

TEST_CASE("total persistence is twice W1 to the empty diagram") {
    std::mt19937_64 rng(52);
    for (int t = 0; t < 30; ++t) {
        const auto d = testing::random_diagram(rng, 6);
        CHECK(total_persistence(d, 0) == doctest::Approx(2.0 * wasserstein(d, PersistenceDiagram{}, 1)).epsilon(1e-12));
    }
}

TEST_CASE("combine") {
    const std::vector<std::vector<double>> blocks{{1, 2}, {3, 4}, {5, 6}};
    const auto c = combine(blocks, CombineMode::Concat);
    CHECK(c.values == std::vector<double>{1, 2, 3, 4, 5, 6});
    CHECK(c.blocks == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(std::equal(blocks[i].begin(), blocks[i].end(), c.values.begin() + static_cast<std::ptrdiff_t>(2 * i)));
    }
    CHECK(combine(blocks, CombineMode::Average).values == std::vector<double>{3, 4});
    const std::vector<std::vector<double>> same{{1.5, 2}, {1.5, 2}};
    CHECK(combine(same, CombineMode::Average).values == std::vector<double>{1.5, 2});
    try {
        combine({{1}, {1, 2}}, CombineMode::Concat);
        FAIL("expected LengthMismatch");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::LengthMismatch);
    }
}

TEST_CASE("feature lengths") {
    std::vector<PersistenceDiagram> ds(5, diagram({{0, 1, 0}, {0.2, 0.4, 1}}));
    std::vector<const PersistenceDiagram*> ptrs;
    for (const auto& d : ds) ptrs.push_back(&d);
    FeaturizeSpec image;
    image.method = Vectorization::PersistenceImage;
    image.image.bounds = {0, 1, 0, 1};
    CHECK(featurize(ptrs, image).values.size() == 1000);
    FeaturizeSpec total;
    const auto f = featurize(ptrs, total);
    CHECK(f.values.size() == 10);
    CHECK(f.values[0] == 1.0);
    CHECK(f.values[1] == doctest::Approx(0.2));
    const std::vector<std::string> ids{"a", "b", "c", "d", "e"};
    const auto labels = feature_labels(ids, total);
    CHECK(labels.size() == 10);
    CHECK(labels[1] == "a:H1:0");
    total.mode = CombineMode::Average;
    CHECK(featurize(ptrs, total).values.size() == 2);
}

}  // TEST_SUITE
