#include "convpers/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <thread>

#include "convpers/error.hpp"
#include "convpers/parallel.hpp"

namespace convpers {

namespace {

constexpr double kUnitTolerance = 1e-12;

std::vector<double> normalized(std::vector<double> v) {
    double s = 0.0;
    for (double x : v) s += x * x;
    const double norm = std::sqrt(s);
    if (norm == 0.0) fail(ErrorKind::DegenerateData, "cannot normalize a zero vector");
    for (double& x : v) x /= norm;
    return v;
}

std::vector<double> gaussian_unit_vector(std::size_t n, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> v(n);
    for (double& x : v) x = normal(rng);
    return normalized(std::move(v));
}

Image negated(const Image& f) {
    std::vector<double> values(f.values().begin(), f.values().end());
    for (double& v : values) v = -v;
    return Image(f.shape(), f.channels(), std::move(values));
}

std::size_t worker_count(const TransformOptions& options) {
    return options.threads ? options.threads : default_thread_count();
}

FilteredComplex convolved_complex(const Image& f, const ConvFilter& g, const Stride& k,
                                  const TransformOptions& options) {
    Image conv = convolve(f, g, k);
    if (options.level == Level::Superlevel) conv = negated(conv);
    return cubical_complex(conv, options.max_dim, options.construction);
}

}  // namespace

std::string to_string(BankProvenance p) {
    switch (p) {
        case BankProvenance::Trivial: return "trivial";
        case BankProvenance::Standard: return "standard";
        case BankProvenance::Random: return "random";
        case BankProvenance::Eigen: return "eigen";
        case BankProvenance::File: return "file";
    }
    return "file";
}

std::string to_string(Normalization n) { return n == Normalization::L2Unit ? "l2" : "raw"; }

std::size_t default_thread_count() {
    if (const char* env = std::getenv("CONVPERS_THREADS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0) return static_cast<std::size_t>(v);
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void FilterBank::validate() const {
    if (filters.empty()) fail(ErrorKind::InvalidArgument, "filter bank is empty");
    const auto& first = filters.front();
    for (const auto& g : filters) {
        if (g.channels() != first.channels()) fail(ErrorKind::ChannelMismatch, "filter bank mixes channel counts");
        if (g.shape().dim() != first.shape().dim()) fail(ErrorKind::DimMismatch, "filter bank mixes dimensions");
        if (normalization == Normalization::L2Unit && std::abs(g.l2_norm() - 1.0) > kUnitTolerance) {
            fail(ErrorKind::InvalidArgument, "filter '" + g.id() + "' is not L2-normalized");
        }
    }
}

CPTResult cpt_image(const Image& f, const FilterBank& bank, const Stride& k, const TransformOptions& options) {
    bank.validate();
    CPTResult result;
    result.image_shape = f.shape();
    result.stride = k;
    result.max_dim = options.max_dim;
    result.entries.resize(bank.size());
    parallel_for(bank.size(), worker_count(options), [&](std::size_t i) {
        const ConvFilter& g = bank.filters[i];
        const FilteredComplex complex = convolved_complex(f, g, k, options);
        CPTEntry& entry = result.entries[i];
        entry.filter_id = g.id();
        entry.region = region_shape(f.shape(), g.shape(), k);
        entry.diagram = reduce_and_pair(complex, {.keep_diagonal = options.keep_diagonal});
    });
    return result;
}

std::vector<CECTEntry> cect_image(const Image& f, const FilterBank& bank, const Stride& k,
                                  std::span<const double> thresholds, const TransformOptions& options) {
    bank.validate();
    std::vector<CECTEntry> out(bank.size());
    parallel_for(bank.size(), worker_count(options), [&](std::size_t i) {
        const ConvFilter& g = bank.filters[i];
        out[i].filter_id = g.id();
        out[i].curve = euler_curve(convolved_complex(f, g, k, options), thresholds);
    });
    return out;
}

PersistenceDiagram image_persistence(const Image& f, const TransformOptions& options) {
    const Image input = options.level == Level::Superlevel ? negated(f) : f;
    return reduce_and_pair(cubical_complex(input, options.max_dim, options.construction),
                           {.keep_diagonal = options.keep_diagonal});
}

void SimplicialConvInput::validate() const {
    const std::size_t n = complex.vertex_count();
    if (adjacency.rows() != n || adjacency.cols() != n) {
        fail(ErrorKind::DimMismatch, "A must be " + std::to_string(n) + "x" + std::to_string(n));
    }
    if (features.rows() != n) fail(ErrorKind::DimMismatch, "X must have one row per vertex");
}

std::vector<double> simplicial_convolve(const SimplicialConvInput& input, std::span<const double> w) {
    input.validate();
    if (w.size() != input.features.cols()) {
        fail(ErrorKind::DimMismatch, "weight vector has length " + std::to_string(w.size()) + ", X has " +
                                         std::to_string(input.features.cols()) + " columns");
    }
    return input.adjacency.apply(input.features.apply(w));
}

std::vector<WeightedDiagram> cpt_simplicial(const SimplicialConvInput& input,
                                            const std::vector<std::vector<double>>& weights,
                                            const TransformOptions& options) {
    input.validate();
    for (const auto& w : weights) {
        if (std::abs(std::sqrt(dot(w, w)) - 1.0) > 1e-9) {
            fail(ErrorKind::InvalidArgument, "weight vectors must have unit L2 norm");
        }
    }
    std::vector<WeightedDiagram> out(weights.size());
    parallel_for(weights.size(), worker_count(options), [&](std::size_t i) {
        std::vector<double> values = simplicial_convolve(input, weights[i]);
        if (options.level == Level::Superlevel) {
            for (double& v : values) v = -v;
        }
        out[i].weight_id = "w" + std::to_string(i);
        out[i].diagram = reduce_and_pair(input.complex.lower_star(values), {.keep_diagonal = options.keep_diagonal});
    });
    return out;
}

FilterBank random_filters(const GridShape& shape, std::size_t channels, std::size_t count, std::uint64_t seed) {
    if (count == 0) fail(ErrorKind::InvalidArgument, "random_filters needs count >= 1");
    FilterBank bank;
    bank.provenance = BankProvenance::Random;
    bank.normalization = Normalization::L2Unit;
    bank.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        bank.filters.emplace_back(shape, channels, gaussian_unit_vector(shape.size() * channels, rng),
                                  "r" + std::to_string(i));
    }
    return bank;
}

std::vector<std::vector<double>> random_weights(std::size_t d, std::size_t count, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::vector<std::vector<double>> out;
    for (std::size_t i = 0; i < count; ++i) out.push_back(gaussian_unit_vector(d, rng));
    return out;
}

FilterBank standard_filters() {
    FilterBank bank;
    bank.provenance = BankProvenance::Standard;
    bank.normalization = Normalization::Raw;
    bank.filters.push_back(ConvFilter::from_rows({{1.0}}, "trivial"));
    bank.filters.push_back(ConvFilter::from_rows({{0, -1, 0}, {-1, 5, -1}, {0, -1, 0}}, "sharpen"));
    const double ninth = 1.0 / 9.0;
    bank.filters.push_back(ConvFilter::from_rows({{ninth, ninth, ninth}, {ninth, ninth, ninth}, {ninth, ninth, ninth}},
                                                 "blur"));
    bank.filters.push_back(ConvFilter::from_rows(
        {{1 / 16.0, 2 / 16.0, 1 / 16.0}, {2 / 16.0, 4 / 16.0, 2 / 16.0}, {1 / 16.0, 2 / 16.0, 1 / 16.0}}, "gaussian"));
    return bank;
}

FilterBank trivial_filter(std::size_t dim, std::size_t channels) {
    FilterBank bank;
    bank.provenance = BankProvenance::Trivial;
    bank.normalization = channels == 1 ? Normalization::L2Unit : Normalization::Raw;
    bank.filters.emplace_back(GridShape(std::vector<std::size_t>(dim, 1)), channels,
                              std::vector<double>(channels, 1.0), "trivial");
    return bank;
}

PatchPCA patch_pca(const std::vector<Image>& images, const GridShape& shape) {
    if (images.empty()) fail(ErrorKind::DegenerateData, "no training images for eigenfilters");
    const std::size_t channels = images.front().channels();
    const std::size_t m = shape.size() * channels;
    const Stride unit = Stride::unit(shape.dim());

    PatchPCA pca;
    pca.mean.assign(m, 0.0);
    std::vector<std::vector<double>> patches;
    for (const Image& img : images) {
        if (img.channels() != channels) fail(ErrorKind::ChannelMismatch, "training images differ in channels");
        for (auto& p : extract_patches(img, shape, unit)) patches.push_back(std::move(p));
    }
    pca.patch_count = patches.size();
    if (patches.size() < 10 * shape.size()) {
        fail(ErrorKind::DegenerateData, "need at least " + std::to_string(10 * shape.size()) + " patches, got " +
                                            std::to_string(patches.size()));
    }
    for (const auto& p : patches) {
        for (std::size_t i = 0; i < m; ++i) pca.mean[i] += p[i];
    }
    for (double& v : pca.mean) v /= static_cast<double>(patches.size());

    Matrix cov(m, m);
    for (const auto& p : patches) {
        for (std::size_t i = 0; i < m; ++i) {
            const double di = p[i] - pca.mean[i];
            for (std::size_t j = i; j < m; ++j) cov(i, j) += di * (p[j] - pca.mean[j]);
        }
    }
    const double denom = static_cast<double>(patches.size() - 1);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i; j < m; ++j) {
            cov(i, j) /= denom;
            cov(j, i) = cov(i, j);
        }
    }
    auto eig = symmetric_eigen(cov);
    pca.eigenvalues = std::move(eig.values);
    pca.components = std::move(eig.vectors);
    return pca;
}

FilterBank eigenfilters(const std::vector<Image>& images, const GridShape& shape, std::size_t n_components,
                        std::size_t count, std::uint64_t seed) {
    if (count == 0 || n_components == 0) fail(ErrorKind::InvalidArgument, "eigenfilters needs count and components >= 1");
    const PatchPCA pca = patch_pca(images, shape);
    const std::size_t m = pca.mean.size();
    if (n_components > m) fail(ErrorKind::InvalidArgument, "more components requested than patch dimensions");

    const double top = pca.eigenvalues.empty() ? 0.0 : std::max(pca.eigenvalues.front(), 0.0);
    std::size_t rank = 0;
    for (double v : pca.eigenvalues) rank += v > 1e-10 * std::max(top, 1.0);
    if (rank == 0) fail(ErrorKind::DegenerateData, "training patches have zero variance");

    FilterBank bank;
    bank.provenance = BankProvenance::Eigen;
    bank.normalization = Normalization::L2Unit;
    bank.seed = seed;
    if (rank < n_components) {
        bank.warnings.push_back("covariance rank " + std::to_string(rank) + " < " + std::to_string(n_components) +
                                " requested components; using " + std::to_string(rank));
        n_components = rank;
    }
    bank.n_components = n_components;

    std::mt19937_64 rng(seed);
    const std::size_t channels = images.front().channels();
    for (std::size_t f = 0; f < count; ++f) {
        const auto coeffs = gaussian_unit_vector(n_components, rng);
        std::vector<double> values(m, 0.0);
        for (std::size_t c = 0; c < n_components; ++c) {
            for (std::size_t i = 0; i < m; ++i) values[i] += coeffs[c] * pca.components[c][i];
        }
        bank.filters.emplace_back(shape, channels, normalized(std::move(values)), "e" + std::to_string(f));
    }
    return bank;
}

Embedding embedding_iota(const Image& f, const GridShape& b, const Stride& k) {
    return {region_shape(f.shape(), b, k), extract_patches(f, b, k)};
}

std::vector<std::vector<double>> orthogonal_filter_basis(const Image& f, const GridShape& b, const Stride& k) {
    const auto patches = extract_patches(f, b, k);
    return null_space(Matrix::from_rows(patches));
}

bool general_position_check(const std::vector<std::vector<double>>& points, double tolerance) {
    if (points.size() > 15) fail(ErrorKind::TooManyPoints, "general_position_check supports at most 15 points");
    if (points.empty()) return true;
    const std::size_t m = points.front().size();
    for (const auto& p : points) {
        if (p.size() != m) fail(ErrorKind::DimMismatch, "points differ in dimension");
    }
    const std::size_t subset = m + 1;
    if (points.size() < subset) return true;

    std::vector<std::size_t> idx(subset);
    for (std::size_t i = 0; i < subset; ++i) idx[i] = i;
    const std::size_t n = points.size();
    for (;;) {
        Matrix diff(m, m);
        for (std::size_t r = 1; r < subset; ++r) {
            for (std::size_t c = 0; c < m; ++c) diff(r - 1, c) = points[idx[r]][c] - points[idx[0]][c];
        }
        if (numerical_rank(diff, tolerance) < m) return false;
        // Next combination in lexicographic order.
        std::size_t i = subset;
        while (i > 0 && idx[i - 1] == n - subset + i - 1) --i;
        if (i == 0) break;
        ++idx[i - 1];
        for (std::size_t j = i; j < subset; ++j) idx[j] = idx[j - 1] + 1;
    }
    return true;
}

}  // namespace convpers
