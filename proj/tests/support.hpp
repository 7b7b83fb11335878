#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include "convpers/complex.hpp"
#include "convpers/grid.hpp"
#include "convpers/persistence.hpp"

namespace convpers::testing {

inline Image random_image(std::mt19937_64& rng, const GridShape& shape, std::size_t channels = 1) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(shape.size() * channels);
    for (double& x : v) x = u(rng);
    return Image(shape, channels, std::move(v));
}

inline Image random_integer_image(std::mt19937_64& rng, const GridShape& shape, int lo, int hi) {
    std::uniform_int_distribution<int> u(lo, hi);
    std::vector<double> v(shape.size());
    for (double& x : v) x = u(rng);
    return Image(shape, 1, std::move(v));
}

inline ConvFilter random_filter(std::mt19937_64& rng, const GridShape& shape) {
    std::normal_distribution<double> n(0.0, 1.0);
    std::vector<double> v(shape.size());
    for (double& x : v) x = n(rng);
    return ConvFilter(shape, 1, std::move(v), "g");
}

/// Random closed complex on up to 8 vertices with edges and triangles, at most
/// `max_cells` cells, values on a coarse grid so ties are common. Each cell
/// takes max(faces) plus a non-negative step.
inline FilteredComplex random_monotone_complex(std::mt19937_64& rng, std::size_t max_cells = 40) {
    std::uniform_int_distribution<std::size_t> nv(3, 8);
    std::uniform_int_distribution<int> step(0, 2);
    std::uniform_int_distribution<int> base(0, 4);
    std::bernoulli_distribution keep_edge(0.6), keep_tri(0.5);
    const std::size_t n = nv(rng);

    std::vector<Cell> cells;
    for (std::size_t v = 0; v < n; ++v) cells.push_back({v, 0, {}, {v}, 0.5 * base(rng)});

    std::vector<std::vector<std::int64_t>> edge(n, std::vector<std::int64_t>(n, -1));
    for (std::size_t a = 0; a < n && cells.size() < max_cells; ++a) {
        for (std::size_t b = a + 1; b < n && cells.size() < max_cells; ++b) {
            if (!keep_edge(rng)) continue;
            const double v = std::max(cells[a].value, cells[b].value) + 0.5 * step(rng);
            edge[a][b] = static_cast<std::int64_t>(cells.size());
            cells.push_back({cells.size(), 1, {a, b}, {a, b}, v});
        }
    }
    for (std::size_t a = 0; a < n && cells.size() < max_cells; ++a) {
        for (std::size_t b = a + 1; b < n && cells.size() < max_cells; ++b) {
            for (std::size_t c = b + 1; c < n && cells.size() < max_cells; ++c) {
                if (edge[a][b] < 0 || edge[a][c] < 0 || edge[b][c] < 0 || !keep_tri(rng)) continue;
                std::vector<CellId> faces{static_cast<CellId>(edge[a][b]), static_cast<CellId>(edge[a][c]),
                                          static_cast<CellId>(edge[b][c])};
                double v = 0.0;
                for (CellId f : faces) v = std::max(v, cells[f].value);
                cells.push_back({cells.size(), 2, faces, {a, b, c}, v + 0.5 * step(rng)});
            }
        }
    }
    return FilteredComplex(std::move(cells), ComplexKind::Simplicial, n);
}

/// Random vertex-labelled simplicial complex (edges and triangles) on n vertices.
inline std::vector<std::vector<std::size_t>> random_simplices(std::mt19937_64& rng, std::size_t n) {
    std::bernoulli_distribution keep_edge(0.45), keep_tri(0.4);
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::vector<bool>> e(n, std::vector<bool>(n, false));
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            if (keep_edge(rng)) {
                e[a][b] = true;
                out.push_back({a, b});
            }
        }
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            for (std::size_t c = b + 1; c < n; ++c) {
                if (e[a][b] && e[a][c] && e[b][c] && keep_tri(rng)) out.push_back({a, b, c});
            }
        }
    }
    return out;
}

inline PersistenceDiagram random_diagram(std::mt19937_64& rng, std::size_t max_points, std::size_t dims = 1) {
    std::uniform_int_distribution<std::size_t> count(0, max_points);
    std::uniform_int_distribution<std::size_t> dim(0, dims - 1);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    PersistenceDiagram d;
    const std::size_t n = count(rng);
    for (std::size_t i = 0; i < n; ++i) {
        const double b = u(rng);
        d.points.push_back({b, b + u(rng), dim(rng)});
    }
    d.max_dim = dims - 1;
    d.cap = 2.0;
    return d;
}

/// Sorted copy of the (dim, birth, death) triples for exact comparisons.
inline std::vector<DiagramPoint> sorted_points(PersistenceDiagram d) {
    d.canonicalize();
    return d.points;
}

}  // namespace convpers::testing
