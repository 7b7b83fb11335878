#include "convpers/learn.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

#include <json.hpp>

#include "convpers/parallel.hpp"

namespace convpers {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::size_t parse_count(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(value, &used);
        if (used == value.size() && v >= 0) return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
    }
    fail(ErrorKind::BadSpec, "config key '" + key + "' expects a non-negative integer, got '" + value + "'");
}

bool parse_bool(const std::string& key, const std::string& value) {
    if (value == "true" || value == "1" || value == "yes") return true;
    if (value == "false" || value == "0" || value == "no") return false;
    fail(ErrorKind::BadSpec, "config key '" + key + "' expects a boolean");
}

template <typename T>
std::vector<T> parse_list(const std::string& key, const std::string& value) {
    std::vector<T> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(static_cast<T>(parse_count(key, item)));
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    return v.empty() ? 0.0 : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

FilterBank build_bank(const ExperimentConfig& config, const std::vector<Image>& train_images, std::uint64_t seed) {
    const std::size_t dim = train_images.front().shape().dim();
    const std::size_t channels = train_images.front().channels();
    const GridShape shape(std::vector<std::size_t>(dim, config.filter_size));
    switch (config.bank) {
        case BankKind::Trivial: return trivial_filter(dim, channels);
        case BankKind::Standard: return standard_filters();
        case BankKind::Random: return random_filters(shape, channels, config.filter_count, seed);
        case BankKind::Eigen:
            return eigenfilters(train_images, shape, config.eigen_components, config.filter_count, seed);
    }
    fail(ErrorKind::BadSpec, "unknown bank kind");
}

}  // namespace

void Dataset::validate() const {
    if (samples.empty()) return;
    const std::size_t len = samples.front().features.size();
    for (const auto& s : samples) {
        if (s.features.size() != len) fail(ErrorKind::LengthMismatch, "samples differ in feature length");
        if (!class_names.empty() && s.label >= class_names.size()) {
            fail(ErrorKind::InvalidArgument, "sample label outside class list");
        }
    }
}

SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        fail(ErrorKind::InvalidArgument, "test fraction must lie strictly between 0 and 1");
    }
    if (n < 2) fail(ErrorKind::TooFewSamples, "need at least two samples to split");
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(order.begin(), order.end(), rng);
    auto n_test = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    n_test = std::clamp<std::size_t>(n_test, 1, n - 1);
    SplitIndices out;
    out.test.assign(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_test));
    out.train.assign(order.begin() + static_cast<std::ptrdiff_t>(n_test), order.end());
    return out;
}

std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed) {
    const auto idx = split_indices(data.size(), test_fraction, seed);
    Dataset train{{}, data.class_names};
    Dataset test{{}, data.class_names};
    for (std::size_t i : idx.train) train.samples.push_back(data.samples[i]);
    for (std::size_t i : idx.test) test.samples.push_back(data.samples[i]);
    return {std::move(train), std::move(test)};
}

std::size_t knn_predict(const Dataset& train, std::span<const double> query, std::size_t k) {
    if (train.samples.empty()) fail(ErrorKind::EmptyTrain, "kNN needs a non-empty training set");
    if (k == 0 || k > train.size()) fail(ErrorKind::InvalidArgument, "k must lie in [1, |train|]");

    std::vector<std::pair<double, std::size_t>> dist;
    dist.reserve(train.size());
    for (std::size_t i = 0; i < train.size(); ++i) {
        const auto& f = train.samples[i].features;
        if (f.size() != query.size()) fail(ErrorKind::LengthMismatch, "query length differs from training features");
        double s = 0.0;
        for (std::size_t j = 0; j < f.size(); ++j) s += (f[j] - query[j]) * (f[j] - query[j]);
        dist.emplace_back(std::sqrt(s), i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k), dist.end());

    struct Tally {
        std::size_t votes = 0;
        double distance = 0.0;
    };
    std::map<std::size_t, Tally> tally;  // ordered by class id for the final tie-break
    for (std::size_t i = 0; i < k; ++i) {
        auto& t = tally[train.samples[dist[i].second].label];
        ++t.votes;
        t.distance += dist[i].first;
    }
    auto best = tally.begin();
    for (auto it = std::next(tally.begin()); it != tally.end(); ++it) {
        const auto& a = it->second;
        const auto& b = best->second;
        if (a.votes > b.votes || (a.votes == b.votes && a.distance < b.distance)) best = it;
    }
    return best->first;
}

double accuracy(const Dataset& train, const Dataset& test, std::size_t k) {
    if (test.samples.empty()) return 1.0;
    std::size_t correct = 0;
    for (const auto& s : test.samples) correct += knn_predict(train, s.features, k) == s.label;
    return static_cast<double>(correct) / static_cast<double>(test.size());
}

std::string to_string(BankKind kind) {
    switch (kind) {
        case BankKind::Trivial: return "trivial";
        case BankKind::Standard: return "standard";
        case BankKind::Random: return "random";
        case BankKind::Eigen: return "eigen";
    }
    return "random";
}

ExperimentConfig parse_config(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) fail(ErrorKind::BadSpec, "config line " + std::to_string(lineno) + " lacks '='");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "dataset_dir") c.dataset_dir = value;
        else if (key == "construction") {
            if (value == "upper") c.construction = Construction::UpperStar;
            else if (value == "lower") c.construction = Construction::LowerStar;
            else fail(ErrorKind::BadSpec, "construction must be upper or lower");
        } else if (key == "bank") {
            if (value == "trivial") c.bank = BankKind::Trivial;
            else if (value == "standard") c.bank = BankKind::Standard;
            else if (value == "random") c.bank = BankKind::Random;
            else if (value == "eigen") c.bank = BankKind::Eigen;
            else fail(ErrorKind::BadSpec, "bank must be trivial, standard, random or eigen");
        } else if (key == "filter_count") c.filter_count = parse_count(key, value);
        else if (key == "filter_size") c.filter_size = parse_count(key, value);
        else if (key == "eigen_components") c.eigen_components = parse_count(key, value);
        else if (key == "stride") c.stride = parse_count(key, value);
        else if (key == "max_dim") c.max_dim = parse_count(key, value);
        else if (key == "dims") c.dims = parse_list<std::size_t>(key, value);
        else if (key == "vectorization") {
            if (value == "total") c.vectorization = Vectorization::TotalPersistence;
            else if (value == "image") c.vectorization = Vectorization::PersistenceImage;
            else fail(ErrorKind::BadSpec, "vectorization must be total or image");
        } else if (key == "combine") {
            if (value == "concat") c.combine = CombineMode::Concat;
            else if (value == "average") c.combine = CombineMode::Average;
            else fail(ErrorKind::BadSpec, "combine must be concat or average");
        } else if (key == "test_fraction") {
            try {
                c.test_fraction = std::stod(value);
            } catch (const std::exception&) {
                fail(ErrorKind::BadSpec, "test_fraction must be a number");
            }
        } else if (key == "k") c.k = parse_count(key, value);
        else if (key == "seed_list") c.seed_list = parse_list<std::uint64_t>(key, value);
        else if (key == "master_seed" || key == "seed") c.master_seed = parse_count(key, value);
        else if (key == "max_pool") c.max_pool = parse_bool(key, value);
        else if (key == "shuffle_labels") c.shuffle_labels = parse_bool(key, value);
        else if (key == "threads") c.threads = parse_count(key, value);
        else fail(ErrorKind::BadSpec, "unknown config key '" + key + "'");
    }
    if (c.seed_list.empty()) fail(ErrorKind::BadSpec, "seed_list must not be empty");
    if (c.filter_count == 0 || c.filter_size == 0 || c.stride == 0 || c.k == 0) {
        fail(ErrorKind::BadSpec, "filter_count, filter_size, stride and k must be positive");
    }
    return c;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 finalizer over a combined key.
    std::uint64_t z = master * 0x9E3779B97F4A7C15ULL ^ (seed + 0x632BE59BD9B4E019ULL) * 0xBF58476D1CE4E5B9ULL ^
                      (stream + 1) * 0x94D049BB133111EBULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

std::vector<std::vector<double>> featurize_images(const std::vector<Image>& images, const FilterBank& bank,
                                                  const ExperimentConfig& config,
                                                  const std::vector<std::size_t>& fit_indices) {
    TransformOptions options;
    options.construction = config.construction;
    options.max_dim = config.max_dim;
    options.threads = 1;
    const Stride stride(std::vector<std::size_t>(images.front().shape().dim(), config.stride));

    std::vector<CPTResult> cpts;
    cpts.reserve(images.size());
    for (const Image& img : images) cpts.push_back(cpt_image(img, bank, stride, options));

    FeaturizeSpec spec;
    spec.method = config.vectorization;
    spec.mode = config.combine;
    spec.dims = config.dims;
    if (spec.method == Vectorization::PersistenceImage) {
        std::vector<const PersistenceDiagram*> fit;
        for (std::size_t i : fit_indices) {
            for (const auto& e : cpts[i].entries) fit.push_back(&e.diagram);
        }
        spec.image = fit_image_spec(fit, spec.dims);
    }
    std::vector<std::vector<double>> features;
    features.reserve(images.size());
    for (const auto& cpt : cpts) features.push_back(featurize(cpt, spec).values);
    return features;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledImages& data) {
    if (data.images.size() != data.labels.size()) fail(ErrorKind::LengthMismatch, "images and labels differ in count");
    if (data.images.empty()) fail(ErrorKind::TooFewSamples, "experiment needs images");

    std::vector<Image> images = data.images;
    if (config.max_pool) {
        const GridShape window(std::vector<std::size_t>(images.front().shape().dim(), 2));
        for (auto& img : images) img = max_pool(img, window);
    }

    const std::size_t n_seeds = config.seed_list.size();
    std::vector<double> acc(n_seeds, 0.0);
    std::vector<std::string> errors(n_seeds);
    const std::size_t threads = config.threads ? config.threads : default_thread_count();

    parallel_for(n_seeds, threads, [&](std::size_t s) {
        try {
            const std::uint64_t seed = config.seed_list[s];
            std::vector<std::size_t> labels = data.labels;
            if (config.shuffle_labels) {
                std::mt19937_64 rng(derive_seed(config.master_seed, seed, 2));
                std::shuffle(labels.begin(), labels.end(), rng);
            }
            const auto idx = split_indices(images.size(), config.test_fraction, derive_seed(config.master_seed, seed, 0));
            std::vector<Image> train_images;
            for (std::size_t i : idx.train) train_images.push_back(images[i]);
            const FilterBank bank = build_bank(config, train_images, derive_seed(config.master_seed, seed, 1));
            const auto features = featurize_images(images, bank, config, idx.train);

            Dataset train{{}, data.class_names};
            Dataset test{{}, data.class_names};
            for (std::size_t i : idx.train) train.samples.push_back({features[i], labels[i]});
            for (std::size_t i : idx.test) test.samples.push_back({features[i], labels[i]});
            acc[s] = accuracy(train, test, std::min(config.k, train.size()));
        } catch (const std::exception& e) {
            errors[s] = e.what();
        }
    });

    ExperimentReport report;
    report.config = config;
    for (std::size_t s = 0; s < n_seeds; ++s) {
        if (errors[s].empty()) {
            report.seeds.push_back(config.seed_list[s]);
            report.accuracies.push_back(acc[s]);
        } else {
            report.errors.push_back("seed " + std::to_string(config.seed_list[s]) + ": " + errors[s]);
        }
    }
    report.mean = mean_of(report.accuracies);
    if (report.accuracies.size() > 1) {
        double ss = 0.0;
        for (double a : report.accuracies) ss += (a - report.mean) * (a - report.mean);
        report.stddev = std::sqrt(ss / static_cast<double>(report.accuracies.size() - 1));
    }
    if (!report.errors.empty()) throw ExperimentError(report.errors.front(), report);
    return report;
}

std::string ExperimentReport::to_json() const {
    nlohmann::json j;
    j["config"] = {
        {"dataset_dir", config.dataset_dir},
        {"construction", config.construction == Construction::UpperStar ? "upper" : "lower"},
        {"bank", to_string(config.bank)},
        {"filter_count", config.filter_count},
        {"filter_size", config.filter_size},
        {"eigen_components", config.eigen_components},
        {"stride", config.stride},
        {"max_dim", config.max_dim},
        {"dims", config.dims},
        {"vectorization", to_string(config.vectorization)},
        {"combine", to_string(config.combine)},
        {"test_fraction", config.test_fraction},
        {"k", config.k},
        {"seed_list", config.seed_list},
        {"master_seed", config.master_seed},
        {"max_pool", config.max_pool},
        {"shuffle_labels", config.shuffle_labels},
    };
    j["seeds"] = seeds;
    j["accuracies"] = accuracies;
    j["mean"] = mean;
    j["std"] = stddev;
    j["errors"] = errors;
    return j.dump(2);
}

std::string ExperimentReport::table() const {
    std::ostringstream out;
    out << "bank=" << to_string(config.bank) << " filters=" << config.filter_count
        << " vectorization=" << to_string(config.vectorization) << " combine=" << to_string(config.combine) << '\n';
    out << "seed        accuracy\n";
    out << std::fixed << std::setprecision(4);
    for (std::size_t i = 0; i < accuracies.size(); ++i) {
        out << std::left << std::setw(12) << seeds[i] << accuracies[i] << '\n';
    }
    out << "mean        " << mean << '\n' << "std         " << stddev << '\n';
    for (const auto& e : errors) out << "error: " << e << '\n';
    return out.str();
}

}  // namespace convpers
