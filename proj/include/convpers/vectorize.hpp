#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "convpers/persistence.hpp"
#include "convpers/transforms.hpp"

namespace convpers {

/// Rectangle in (birth, persistence) coordinates covered by a persistence
/// image.
struct ImageBounds {
    double birth_min = 0.0;
    double birth_max = 1.0;
    double pers_min = 0.0;
    double pers_max = 1.0;
};

/// Persistence-image parameters. The raster has `birth_pixels` columns and
/// `pers_pixels` rows; pixel (row, col) lands at index row * birth_pixels + col.
/// Each point contributes a Gaussian of bandwidth sigma weighted by
/// min(1, persistence / bounds.pers_max).
struct PersistenceImageSpec {
    std::size_t birth_pixels = 10;
    std::size_t pers_pixels = 10;
    double sigma = 0.1;
    ImageBounds bounds;

    std::size_t size() const noexcept { return birth_pixels * pers_pixels; }
    void validate() const;
};

/// Bounds covering every (capped) point of the given dimensions across the
/// diagrams, with sigma = 0.1 × persistence-range width. Fit this on training
/// data only and reuse it.
PersistenceImageSpec fit_image_spec(const std::vector<const PersistenceDiagram*>& diagrams,
                                    const std::vector<std::size_t>& dims, std::size_t birth_pixels = 10,
                                    std::size_t pers_pixels = 10);

std::vector<double> persistence_image(const PersistenceDiagram& d, std::size_t q, const PersistenceImageSpec& spec);

/// Σ (death − birth) over dim-q points; essential points count up to d.cap.
double total_persistence(const PersistenceDiagram& d, std::size_t q);

enum class CombineMode { Concat, Average };
enum class Vectorization { PersistenceImage, TotalPersistence };

std::string to_string(CombineMode m);
std::string to_string(Vectorization v);

struct FeatureVector {
    std::vector<double> values;
    std::size_t blocks = 0;       // number of per-filter blocks combined
    std::size_t block_size = 0;
    CombineMode mode = CombineMode::Concat;
};

FeatureVector combine(const std::vector<std::vector<double>>& blocks, CombineMode mode);

/// One block per filter: H_dims[0] features, then H_dims[1], ...
struct FeaturizeSpec {
    Vectorization method = Vectorization::TotalPersistence;
    CombineMode mode = CombineMode::Concat;
    std::vector<std::size_t> dims{0, 1};
    PersistenceImageSpec image;  // used for PersistenceImage
};

std::vector<double> diagram_block(const PersistenceDiagram& d, const FeaturizeSpec& spec);
FeatureVector featurize(const std::vector<const PersistenceDiagram*>& per_filter, const FeaturizeSpec& spec);
FeatureVector featurize(const CPTResult& cpt, const FeaturizeSpec& spec);

/// Column labels "<filter>:H<dim>:<index>" (concat) or "avg:H<dim>:<index>".
std::vector<std::string> feature_labels(const std::vector<std::string>& filter_ids, const FeaturizeSpec& spec);

}  // namespace convpers
