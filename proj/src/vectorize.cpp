#include "convpers/vectorize.hpp"

#include <algorithm>
#include <cmath>

#include "convpers/error.hpp"

namespace convpers {

namespace {

double lifetime_end(const DiagramPoint& p, double cap) { return p.essential() ? std::max(cap, p.birth) : p.death; }

// Gaussian mass of N(center, sigma²) on [lo, hi].
double interval_mass(double lo, double hi, double center, double sigma) {
    const double s = sigma * std::sqrt(2.0);
    return 0.5 * (std::erf((hi - center) / s) - std::erf((lo - center) / s));
}

}  // namespace

void PersistenceImageSpec::validate() const {
    if (birth_pixels == 0 || pers_pixels == 0) fail(ErrorKind::BadSpec, "persistence image resolution must be >= 1");
    if (!(sigma > 0.0) || !std::isfinite(sigma)) fail(ErrorKind::BadSpec, "persistence image sigma must be > 0");
    if (!(bounds.birth_max > bounds.birth_min) || !(bounds.pers_max > bounds.pers_min)) {
        fail(ErrorKind::BadSpec, "persistence image bounds must have positive width");
    }
    if (!(bounds.pers_max > 0.0)) fail(ErrorKind::BadSpec, "persistence upper bound must be positive");
}

PersistenceImageSpec fit_image_spec(const std::vector<const PersistenceDiagram*>& diagrams,
                                    const std::vector<std::size_t>& dims, std::size_t birth_pixels,
                                    std::size_t pers_pixels) {
    double bmin = kInfinity, bmax = -kInfinity, pmax = 0.0;
    for (const auto* d : diagrams) {
        for (const auto& p : d->points) {
            if (std::find(dims.begin(), dims.end(), p.dim) == dims.end()) continue;
            bmin = std::min(bmin, p.birth);
            bmax = std::max(bmax, p.birth);
            pmax = std::max(pmax, lifetime_end(p, d->cap) - p.birth);
        }
    }
    PersistenceImageSpec spec;
    spec.birth_pixels = birth_pixels;
    spec.pers_pixels = pers_pixels;
    if (bmin > bmax) {
        bmin = 0.0;
        bmax = 1.0;
    }
    if (bmax - bmin <= 0.0) {
        bmin -= 0.5;
        bmax += 0.5;
    }
    if (pmax <= 0.0) pmax = 1.0;
    spec.bounds = {bmin, bmax, 0.0, pmax};
    spec.sigma = 0.1 * pmax;
    return spec;
}

std::vector<double> persistence_image(const PersistenceDiagram& d, std::size_t q, const PersistenceImageSpec& spec) {
    spec.validate();
    const auto& b = spec.bounds;
    std::vector<double> out(spec.size(), 0.0);
    const double bw = (b.birth_max - b.birth_min) / static_cast<double>(spec.birth_pixels);
    const double pw = (b.pers_max - b.pers_min) / static_cast<double>(spec.pers_pixels);
    std::vector<double> birth_mass(spec.birth_pixels), pers_mass(spec.pers_pixels);
    for (const auto& p : d.points) {
        if (p.dim != q) continue;
        const double pers = lifetime_end(p, d.cap) - p.birth;
        const double weight = std::min(1.0, pers / b.pers_max);
        if (weight <= 0.0) continue;
        for (std::size_t i = 0; i < spec.birth_pixels; ++i) {
            const double lo = b.birth_min + bw * static_cast<double>(i);
            birth_mass[i] = interval_mass(lo, lo + bw, p.birth, spec.sigma);
        }
        for (std::size_t j = 0; j < spec.pers_pixels; ++j) {
            const double lo = b.pers_min + pw * static_cast<double>(j);
            pers_mass[j] = interval_mass(lo, lo + pw, pers, spec.sigma);
        }
        for (std::size_t j = 0; j < spec.pers_pixels; ++j) {
            for (std::size_t i = 0; i < spec.birth_pixels; ++i) {
                out[j * spec.birth_pixels + i] += weight * pers_mass[j] * birth_mass[i];
            }
        }
    }
    return out;
}

double total_persistence(const PersistenceDiagram& d, std::size_t q) {
    double total = 0.0;
    for (const auto& p : d.points) {
        if (p.dim == q) total += lifetime_end(p, d.cap) - p.birth;
    }
    return total;
}

std::string to_string(CombineMode m) { return m == CombineMode::Concat ? "concat" : "average"; }

std::string to_string(Vectorization v) { return v == Vectorization::PersistenceImage ? "image" : "total"; }

FeatureVector combine(const std::vector<std::vector<double>>& blocks, CombineMode mode) {
    FeatureVector fv;
    fv.mode = mode;
    fv.blocks = blocks.size();
    if (blocks.empty()) return fv;
    fv.block_size = blocks.front().size();
    for (const auto& b : blocks) {
        if (b.size() != fv.block_size) fail(ErrorKind::LengthMismatch, "feature blocks differ in length");
    }
    if (mode == CombineMode::Concat) {
        fv.values.reserve(fv.blocks * fv.block_size);
        for (const auto& b : blocks) fv.values.insert(fv.values.end(), b.begin(), b.end());
    } else {
        fv.values.assign(fv.block_size, 0.0);
        for (const auto& b : blocks) {
            for (std::size_t i = 0; i < b.size(); ++i) fv.values[i] += b[i];
        }
        for (double& v : fv.values) v /= static_cast<double>(blocks.size());
    }
    return fv;
}

std::vector<double> diagram_block(const PersistenceDiagram& d, const FeaturizeSpec& spec) {
    std::vector<double> block;
    for (std::size_t q : spec.dims) {
        if (spec.method == Vectorization::TotalPersistence) {
            block.push_back(total_persistence(d, q));
        } else {
            const auto img = persistence_image(d, q, spec.image);
            block.insert(block.end(), img.begin(), img.end());
        }
    }
    return block;
}

FeatureVector featurize(const std::vector<const PersistenceDiagram*>& per_filter, const FeaturizeSpec& spec) {
    std::vector<std::vector<double>> blocks;
    blocks.reserve(per_filter.size());
    for (const auto* d : per_filter) blocks.push_back(diagram_block(*d, spec));
    return combine(blocks, spec.mode);
}

FeatureVector featurize(const CPTResult& cpt, const FeaturizeSpec& spec) {
    std::vector<const PersistenceDiagram*> diagrams;
    for (const auto& e : cpt.entries) diagrams.push_back(&e.diagram);
    return featurize(diagrams, spec);
}

std::vector<std::string> feature_labels(const std::vector<std::string>& filter_ids, const FeaturizeSpec& spec) {
    const std::size_t per_dim = spec.method == Vectorization::TotalPersistence ? 1 : spec.image.size();
    std::vector<std::string> prefixes;
    if (spec.mode == CombineMode::Concat) prefixes = filter_ids;
    else prefixes = {"avg"};
    std::vector<std::string> labels;
    for (const auto& prefix : prefixes) {
        for (std::size_t q : spec.dims) {
            for (std::size_t i = 0; i < per_dim; ++i) {
                labels.push_back(prefix + ":H" + std::to_string(q) + ":" + std::to_string(i));
            }
        }
    }
    return labels;
}

}  // namespace convpers
