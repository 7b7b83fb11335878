#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "convpers/complex.hpp"
#include "convpers/grid.hpp"
#include "convpers/linalg.hpp"
#include "convpers/persistence.hpp"

namespace convpers {

enum class BankProvenance { Trivial, Standard, Random, Eigen, File };
enum class Normalization { L2Unit, Raw };

std::string to_string(BankProvenance p);
std::string to_string(Normalization n);

/// An ordered list of filters sharing dimensionality and channel count.
/// Filter shapes may differ (the standard bank mixes 1×1 and 3×3 kernels).
struct FilterBank {
    std::vector<ConvFilter> filters;
    BankProvenance provenance = BankProvenance::File;
    Normalization normalization = Normalization::Raw;
    std::uint64_t seed = 0;
    std::size_t n_components = 0;   // eigen banks only
    std::vector<std::string> warnings;

    std::size_t size() const noexcept { return filters.size(); }
    /// Throws if empty, if channels/dims differ, or if an L2-unit bank holds a
    /// filter whose norm is off by more than 1e-12.
    void validate() const;
};

/// Which side of the convolved function is filtered.
enum class Level { Sublevel, Superlevel };

struct TransformOptions {
    Construction construction = Construction::UpperStar;
    std::size_t max_dim = 2;            // skeleton dimension m
    Level level = Level::Sublevel;      // superlevel negates f∗g
    bool keep_diagonal = false;
    std::size_t threads = 0;            // 0: default_thread_count()
};

struct CPTEntry {
    std::string filter_id;
    GridShape region;
    PersistenceDiagram diagram;
};

struct CPTResult {
    std::vector<CPTEntry> entries;  // bank order
    GridShape image_shape;
    Stride stride;
    std::size_t max_dim = 0;
};

/// Persistence of f∗g on the cubical complex of R, for every g in the bank.
CPTResult cpt_image(const Image& f, const FilterBank& bank, const Stride& k,
                    const TransformOptions& options = {});

struct CECTEntry {
    std::string filter_id;
    EulerCurve curve;
};

std::vector<CECTEntry> cect_image(const Image& f, const FilterBank& bank, const Stride& k,
                                  std::span<const double> thresholds, const TransformOptions& options = {});

/// Ordinary persistence of a single-channel image under the same options
/// (no convolution); the reference for the trivial-filter identity.
PersistenceDiagram image_persistence(const Image& f, const TransformOptions& options = {});

/// (K, A, X): K supplies the cells (its values are ignored), A is n×n with
/// n = vertex_count(K), X is n×d.
struct SimplicialConvInput {
    FilteredComplex complex;
    Matrix adjacency;
    Matrix features;

    void validate() const;
};

/// A·X·w as a vertex function.
std::vector<double> simplicial_convolve(const SimplicialConvInput& input, std::span<const double> w);

struct WeightedDiagram {
    std::string weight_id;
    PersistenceDiagram diagram;
};

/// Lower-star persistence of A·X·w on K for each unit weight vector.
std::vector<WeightedDiagram> cpt_simplicial(const SimplicialConvInput& input,
                                            const std::vector<std::vector<double>>& weights,
                                            const TransformOptions& options = {});

/// Gaussian entries normalized to unit L2 norm (uniform on the sphere).
FilterBank random_filters(const GridShape& shape, std::size_t channels, std::size_t count, std::uint64_t seed);

/// Unit-norm random weight vectors in R^d, sampled like random_filters.
std::vector<std::vector<double>> random_weights(std::size_t d, std::size_t count, std::uint64_t seed);

/// Trivial [1], sharpen, box blur and Gaussian (3×3), single channel, 2D.
FilterBank standard_filters();

/// The 1×1 unit filter for a d-dimensional, n-channel image (all channel
/// weights 1 when n = 1).
FilterBank trivial_filter(std::size_t dim = 2, std::size_t channels = 1);

struct PatchPCA {
    std::vector<double> mean;
    std::vector<double> eigenvalues;              // non-increasing
    std::vector<std::vector<double>> components;  // orthonormal, paired with eigenvalues
    std::size_t patch_count = 0;
};

/// PCA of all unit-stride patches of the given shape over the images.
PatchPCA patch_pca(const std::vector<Image>& images, const GridShape& shape);

/// `count` filters, each an L2-normalized Gaussian combination of the top
/// n_components principal patches. Reduces n_components (with a warning in
/// the bank) when the covariance rank is smaller.
FilterBank eigenfilters(const std::vector<Image>& images, const GridShape& shape, std::size_t n_components,
                        std::size_t count, std::uint64_t seed);

/// ι_f: the patch vector of each point of R, with R's shape attached.
struct Embedding {
    GridShape region;
    std::vector<std::vector<double>> points;
};

Embedding embedding_iota(const Image& f, const GridShape& b, const Stride& k);

/// Orthonormal basis of filters g (flattened) with f∗g ≡ 0.
std::vector<std::vector<double>> orthogonal_filter_basis(const Image& f, const GridShape& b, const Stride& k);

/// True iff every (M+1)-subset of the points is affinely independent, M
/// being the ambient dimension. Test diagnostic; at most 15 points.
bool general_position_check(const std::vector<std::vector<double>>& points, double tolerance = 1e-9);

/// Worker count from CONVPERS_THREADS, else hardware concurrency.
std::size_t default_thread_count();

}  // namespace convpers
