#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "convpers/error.hpp"
#include "convpers/io.hpp"
#include "convpers/learn.hpp"
#include "convpers/vectorize.hpp"

using namespace convpers;

namespace {

Dataset points(std::initializer_list<std::pair<std::vector<double>, std::size_t>> rows, std::size_t classes) {
    Dataset d;
    for (const auto& [x, y] : rows) d.samples.push_back({x, y});
    for (std::size_t c = 0; c < classes; ++c) d.class_names.push_back(std::string(1, static_cast<char>('A' + c)));
    return d;
}

LabeledImages small_stripes(std::size_t count, std::uint64_t seed = 3) {
    SyntheticSpec spec;
    spec.size = 8;
    spec.count = count;
    spec.seed = seed;
    return generate_synthetic(spec);
}

ExperimentConfig small_config() {
    ExperimentConfig c;
    c.filter_count = 4;
    c.seed_list = {0, 1, 2};
    return c;
}

}  // namespace

TEST_SUITE("learn") {

TEST_CASE("split sizes") {
    const auto s = split_indices(10, 0.2, 7);
    CHECK(s.train.size() == 8);
    CHECK(s.test.size() == 2);
    CHECK(split_indices(3, 0.01, 1).test.size() == 1);
    CHECK(split_indices(3, 0.99, 1).train.size() == 1);
}

TEST_CASE("split is deterministic and partitions the samples") {
    for (std::uint64_t seed : {0u, 1u, 99u}) {
        const auto a = split_indices(37, 0.3, seed);
        const auto b = split_indices(37, 0.3, seed);
        CHECK(a.train == b.train);
        CHECK(a.test == b.test);
        std::vector<std::size_t> all = a.train;
        all.insert(all.end(), a.test.begin(), a.test.end());
        std::sort(all.begin(), all.end());
        for (std::size_t i = 0; i < all.size(); ++i) CHECK(all[i] == i);
    }
    CHECK(split_indices(37, 0.3, 0).test != split_indices(37, 0.3, 1).test);
}

TEST_CASE("split errors") {
    try {
        split_indices(1, 0.2, 0);
        FAIL("expected TooFewSamples");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::TooFewSamples);
    }
    CHECK_THROWS_AS(split_indices(10, 0.0, 0), Error);
    CHECK_THROWS_AS(split_indices(10, 1.0, 0), Error);
}

TEST_CASE("knn examples") {
    const auto exact = points({{{0, 0}, 0}, {{5, 5}, 1}}, 2);
    CHECK(knn_predict(exact, std::vector<double>{5, 5}, 1) == 1);

    const auto majority = points({{{1}, 0}, {{2}, 0}, {{1.5}, 1}, {{9}, 1}}, 2);
    CHECK(knn_predict(majority, std::vector<double>{0}, 3) == 0);

    const auto tie = points({{{1}, 0}, {{2}, 1}, {{3}, 2}}, 3);
    CHECK(knn_predict(tie, std::vector<double>{0}, 3) == 0);
    const auto tie_rev = points({{{3}, 0}, {{2}, 1}, {{1}, 2}}, 3);
    CHECK(knn_predict(tie_rev, std::vector<double>{0}, 3) == 2);
}

TEST_CASE("knn errors") {
    Dataset empty;
    empty.class_names = {"A"};
    try {
        knn_predict(empty, std::vector<double>{0}, 1);
        FAIL("expected EmptyTrain");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::EmptyTrain);
    }
    const auto d = points({{{0, 0}, 0}}, 1);
    CHECK_THROWS_AS(knn_predict(d, std::vector<double>{0}, 1), Error);
}

TEST_CASE("accuracy") {
    const auto train = points({{{0}, 0}, {{10}, 1}}, 2);
    const auto test = points({{{1}, 0}, {{9}, 1}, {{2}, 1}, {{8}, 0}}, 2);
    CHECK(accuracy(train, test, 1) == 0.5);
}

TEST_CASE("parse_config") {
    std::istringstream in(
        "# comment\n"
        "dataset_dir = data/x\n"
        "construction = lower\n"
        "bank = trivial\n"
        "filter_count = 7\n"
        "vectorization = image\n"
        "combine = average\n"
        "dims = 0\n"
        "test_fraction = 0.25\n"
        "seed_list = 3,4\n"
        "seed = 11\n");
    const auto c = parse_config(in);
    CHECK(c.dataset_dir == "data/x");
    CHECK(c.construction == Construction::LowerStar);
    CHECK(c.bank == BankKind::Trivial);
    CHECK(c.filter_count == 7);
    CHECK(c.vectorization == Vectorization::PersistenceImage);
    CHECK(c.combine == CombineMode::Average);
    CHECK(c.dims == std::vector<std::size_t>{0});
    CHECK(c.test_fraction == 0.25);
    CHECK(c.seed_list == std::vector<std::uint64_t>{3, 4});
    CHECK(c.master_seed == 11);

    std::istringstream bad("colour = blue\n");
    try {
        parse_config(bad);
        FAIL("expected BadSpec");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::BadSpec);
    }
    std::istringstream bad_value("bank = fancy\n");
    CHECK_THROWS_AS(parse_config(bad_value), Error);
}

TEST_CASE("derive_seed separates streams") {
    std::set<std::uint64_t> seen;
    for (std::uint64_t s = 0; s < 10; ++s) {
        for (std::uint64_t k = 0; k < 3; ++k) seen.insert(derive_seed(0, s, k));
    }
    CHECK(seen.size() == 30);
    CHECK(derive_seed(1, 0, 0) != derive_seed(0, 0, 0));
}

TEST_CASE("single-class dataset is trivially classified") {
    auto data = small_stripes(12);
    data.labels.assign(data.images.size(), 0);
    data.class_names = {"only"};
    const auto r = run_experiment(small_config(), data);
    for (double a : r.accuracies) CHECK(a == 1.0);
    CHECK(r.mean == 1.0);
}

TEST_CASE("trivial bank features equal ordinary persistence features") {
    const auto data = small_stripes(4);
    ExperimentConfig c;
    c.bank = BankKind::Trivial;
    std::vector<std::size_t> all(data.images.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
    const auto features = featurize_images(data.images, trivial_filter(), c, all);
    TransformOptions o;
    o.construction = c.construction;
    o.max_dim = c.max_dim;
    for (std::size_t i = 0; i < data.images.size(); ++i) {
        const auto d = image_persistence(data.images[i], o);
        const std::vector<double> expect{total_persistence(d, 0), total_persistence(d, 1)};
        CHECK(features[i] == expect);
    }
}

TEST_CASE("experiments are reproducible") {
    const auto data = small_stripes(10);
    const auto a = run_experiment(small_config(), data);
    const auto b = run_experiment(small_config(), data);
    CHECK(a.accuracies == b.accuracies);
    CHECK(a.to_json() == b.to_json());
    auto other = small_config();
    other.master_seed = 5;
    CHECK(run_experiment(other, data).to_json() != a.to_json());
}

TEST_CASE("report statistics") {
    const auto r = run_experiment(small_config(), small_stripes(10));
    REQUIRE(r.accuracies.size() == 3);
    double mean = 0;
    for (double a : r.accuracies) {
        CHECK(a >= 0.0);
        CHECK(a <= 1.0);
        mean += a / 3;
    }
    CHECK(r.mean == doctest::Approx(mean));
    CHECK(r.table().find("mean") != std::string::npos);
    CHECK(r.to_json().find("\"accuracies\"") != std::string::npos);
}

TEST_CASE("shuffled labels fall to chance") {
    // 3 classes, 40 per class, 24 test images per seed, 10 seeds.
    const auto data = small_stripes(40, 8);
    ExperimentConfig c;
    c.filter_count = 5;
    c.shuffle_labels = true;
    const auto r = run_experiment(c, data);
    const double sigma = std::sqrt((1.0 / 3) * (2.0 / 3) / 24.0 / 10.0);
    CHECK(std::abs(r.mean - 1.0 / 3) <= 3 * sigma);
}

TEST_CASE("features fit on training indices only") {
    const auto data = small_stripes(4);
    ExperimentConfig c;
    c.vectorization = Vectorization::PersistenceImage;
    const auto bank = random_filters({3, 3}, 1, 2, 1);
    const auto a = featurize_images(data.images, bank, c, {0, 1, 2});
    const auto b = featurize_images(data.images, bank, c, {0, 1, 2, 3, 4, 5, 6, 7});
    CHECK(a.size() == data.images.size());
    CHECK(a.front().size() == 2 * 2 * 100);
    CHECK(a != b);
}

}  // TEST_SUITE
