#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "convpers/error.hpp"
#include "convpers/grid.hpp"
#include "convpers/transforms.hpp"
#include "convpers/vectorize.hpp"

namespace convpers {

struct Sample {
    std::vector<double> features;
    std::size_t label = 0;
};

struct Dataset {
    std::vector<Sample> samples;
    std::vector<std::string> class_names;

    std::size_t size() const noexcept { return samples.size(); }
    /// Uniform feature length and labels inside class_names.
    void validate() const;
};

struct SplitIndices {
    std::vector<std::size_t> train;
    std::vector<std::size_t> test;
};

/// Seeded shuffle, then the first round(n·fraction) indices (clamped to
/// [1, n−1]) become the test set. No stratification.
SplitIndices split_indices(std::size_t n, double test_fraction, std::uint64_t seed);
std::pair<Dataset, Dataset> split(const Dataset& data, double test_fraction, std::uint64_t seed);

/// Majority vote among the k nearest training samples (Euclidean). Ties go to
/// the smallest summed neighbor distance, then the smallest class id.
std::size_t knn_predict(const Dataset& train, std::span<const double> query, std::size_t k = 3);

double accuracy(const Dataset& train, const Dataset& test, std::size_t k = 3);

/// Images with class labels, as loaded from a manifest.
struct LabeledImages {
    std::vector<Image> images;
    std::vector<std::size_t> labels;
    std::vector<std::string> class_names;
};

enum class BankKind { Trivial, Standard, Random, Eigen };

struct ExperimentConfig {
    std::string dataset_dir;
    Construction construction = Construction::UpperStar;
    BankKind bank = BankKind::Random;
    std::size_t filter_count = 25;
    std::size_t filter_size = 3;
    std::size_t eigen_components = 3;
    std::size_t stride = 1;
    std::size_t max_dim = 2;
    Vectorization vectorization = Vectorization::TotalPersistence;
    CombineMode combine = CombineMode::Concat;
    std::vector<std::size_t> dims{0, 1};
    double test_fraction = 0.2;
    std::size_t k = 3;
    std::vector<std::uint64_t> seed_list{0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
    std::uint64_t master_seed = 0;
    bool max_pool = false;         // 2×2 max pooling before everything else
    bool shuffle_labels = false;   // label-permutation canary
    std::size_t threads = 0;
};

/// Flat `key = value` lines; `#` starts a comment. Unknown keys are errors.
ExperimentConfig parse_config(std::istream& in);
std::string to_string(BankKind kind);

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<double> accuracies;  // per completed seed
    double mean = 0.0;
    double stddev = 0.0;             // sample standard deviation
    std::vector<std::string> errors;

    std::string to_json() const;
    std::string table() const;
};

class ExperimentError : public Error {
public:
    ExperimentError(const std::string& message, ExperimentReport partial)
        : Error(ErrorKind::ExperimentFailed, message), partial_(std::move(partial)) {}
    const ExperimentReport& partial() const noexcept { return partial_; }

private:
    ExperimentReport partial_;
};

/// Independent stream seed for (master, seed value, index).
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t seed, std::uint64_t stream);

/// Per-image feature vectors for one bank; exposed so pipelines can be
/// compared feature-for-feature.
std::vector<std::vector<double>> featurize_images(const std::vector<Image>& images, const FilterBank& bank,
                                                  const ExperimentConfig& config,
                                                  const std::vector<std::size_t>& fit_indices);

/// filters → CPT → vectorize → split → 3-NN, once per seed. Throws
/// ExperimentError carrying the completed seeds if any seed fails.
ExperimentReport run_experiment(const ExperimentConfig& config, const LabeledImages& data);

}  // namespace convpers
