#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "convpers/grid.hpp"

namespace convpers {

using CellId = std::size_t;

struct Cell {
    CellId id = 0;
    std::size_t dim = 0;
    std::vector<CellId> faces;     // codimension-1 faces, sorted
    std::vector<std::size_t> vertices;  // vertex labels spanned by the cell
    double value = 0.0;
};

enum class ComplexKind { Cubical, Simplicial, Generic };

enum class Construction {
    LowerStar,  // pixels are vertices, cubes take the max of their vertices
    UpperStar,  // pixels are top cubes, faces take the min of their cofaces
};

/// A finite cell complex with a monotone real filtration. Cells are kept in
/// ascending id order; ids need not be contiguous (skeleta keep the ids of the
/// parent complex).
class FilteredComplex {
public:
    FilteredComplex() = default;

    /// Validates face references, face dimensions, ∂∂ = 0 over Z/2 and
    /// monotonicity. Throws MalformedComplex / NonMonotone.
    FilteredComplex(std::vector<Cell> cells, ComplexKind kind, std::size_t vertex_count);

    std::span<const Cell> cells() const noexcept { return cells_; }
    std::size_t size() const noexcept { return cells_.size(); }
    std::size_t max_dim() const noexcept { return max_dim_; }
    ComplexKind kind() const noexcept { return kind_; }
    std::size_t vertex_count() const noexcept { return vertex_count_; }

    bool contains(CellId id) const noexcept;
    const Cell& cell(CellId id) const;
    /// Position of a cell in cells(). Throws if absent.
    std::size_t index_of(CellId id) const;

    std::vector<double> values() const;
    double max_value() const;

    /// Same cells with new filtration values (in cells() order). Monotonicity
    /// is re-checked.
    FilteredComplex with_values(std::vector<double> values) const;

    /// Lower-star extension of a vertex function: each cell gets the maximum
    /// over the vertices it spans. vertex_values is indexed by vertex label.
    FilteredComplex lower_star(std::span<const double> vertex_values) const;

private:
    std::vector<Cell> cells_;
    std::vector<std::int64_t> slot_;  // id -> position, -1 when absent
    std::size_t max_dim_ = 0;
    ComplexKind kind_ = ComplexKind::Generic;
    std::size_t vertex_count_ = 0;
};

/// Cubical complex on the lattice points of f's domain (pixels as vertices),
/// cubes up to dimension m valued by the max over their vertices. Cell ids
/// follow (lexicographic anchor, spanned-axes mask).
FilteredComplex cubical_lower_star(const Image& f, std::size_t m);

/// Cubical complex whose top cubes are the pixels (voxels), truncated to
/// dimension m. Every cell takes the min over the voxels containing it.
FilteredComplex cubical_upper_star(const Image& f, std::size_t m);

FilteredComplex cubical_complex(const Image& f, std::size_t m, Construction construction);

/// Closes a list of simplices under faces, dedupes, and extends vertex values
/// by the max rule. Every vertex 0..values.size()-1 is included as a 0-cell.
/// Ids follow (dimension, sorted vertex tuple) lexicographically.
FilteredComplex simplicial_lower_star(const std::vector<std::vector<std::size_t>>& simplices,
                                      std::span<const double> vertex_values);

/// Drops all cells of dimension > m; ids are preserved.
FilteredComplex skeleton(const FilteredComplex& k, std::size_t m);

/// Structural self-check used by tests: returns a description of the first
/// violated invariant, or nullopt.
std::optional<std::string> check_invariants(const FilteredComplex& k);

}  // namespace convpers
