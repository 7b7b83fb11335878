#include "convpers/complex.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "convpers/error.hpp"

namespace convpers {

namespace {

constexpr std::size_t kMaxCubicalDim = 16;

struct Violation {
    ErrorKind kind;
    std::string message;
};

std::optional<Violation> find_violation(std::span<const Cell> cells,
                                        const std::vector<std::int64_t>& slot) {
    auto lookup = [&](CellId id) -> const Cell* {
        if (id >= slot.size() || slot[id] < 0) return nullptr;
        return &cells[static_cast<std::size_t>(slot[id])];
    };
    std::vector<CellId> second;
    for (const Cell& c : cells) {
        if (c.dim == 0 && !c.faces.empty()) {
            return Violation{ErrorKind::MalformedComplex, "vertex " + std::to_string(c.id) + " has faces"};
        }
        if (c.dim > 0 && c.faces.size() < 2) {
            return Violation{ErrorKind::MalformedComplex,
                             "cell " + std::to_string(c.id) + " has fewer than two faces"};
        }
        second.clear();
        for (CellId fid : c.faces) {
            const Cell* face = lookup(fid);
            if (face == nullptr) {
                return Violation{ErrorKind::MalformedComplex,
                                 "cell " + std::to_string(c.id) + " references missing face " +
                                     std::to_string(fid)};
            }
            if (face->dim + 1 != c.dim) {
                return Violation{ErrorKind::MalformedComplex,
                                 "face " + std::to_string(fid) + " of cell " + std::to_string(c.id) +
                                     " has wrong dimension"};
            }
            if (face->value > c.value) {
                return Violation{ErrorKind::NonMonotone,
                                 "face " + std::to_string(fid) + " appears after cell " +
                                     std::to_string(c.id)};
            }
            second.insert(second.end(), face->faces.begin(), face->faces.end());
        }
        // ∂∂ = 0 over Z/2: every codim-2 face is hit an even number of times.
        std::sort(second.begin(), second.end());
        for (std::size_t i = 0; i < second.size();) {
            std::size_t j = i;
            while (j < second.size() && second[j] == second[i]) ++j;
            if ((j - i) % 2 != 0) {
                return Violation{ErrorKind::MalformedComplex,
                                 "boundary of boundary of cell " + std::to_string(c.id) + " is nonzero"};
            }
            i = j;
        }
    }
    return std::nullopt;
}

std::vector<std::int64_t> build_slots(std::span<const Cell> cells) {
    CellId max_id = 0;
    for (const Cell& c : cells) max_id = std::max(max_id, c.id);
    std::vector<std::int64_t> slot(cells.empty() ? 0 : max_id + 1, -1);
    for (std::size_t i = 0; i < cells.size(); ++i) slot[cells[i].id] = static_cast<std::int64_t>(i);
    return slot;
}

// Labels vertices of cells that arrive without them: a 0-cell gets its rank
// among 0-cells, higher cells the union over their faces.
void derive_vertices(std::vector<Cell>& cells, const std::vector<std::int64_t>& slot) {
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return cells[a].dim < cells[b].dim; });
    std::size_t next_vertex = 0;
    for (std::size_t i : order) {
        Cell& c = cells[i];
        if (c.dim == 0) {
            if (c.vertices.empty()) c.vertices = {next_vertex};
            ++next_vertex;
            continue;
        }
        if (!c.vertices.empty()) continue;
        for (CellId fid : c.faces) {
            const Cell& face = cells[static_cast<std::size_t>(slot[fid])];
            c.vertices.insert(c.vertices.end(), face.vertices.begin(), face.vertices.end());
        }
        std::sort(c.vertices.begin(), c.vertices.end());
        c.vertices.erase(std::unique(c.vertices.begin(), c.vertices.end()), c.vertices.end());
    }
}

// Enumerates the 2^|mask| corners of a cube anchored at `anchor` in a lattice
// with the given axis strides.
template <typename Fn>
void for_each_corner(std::size_t anchor, unsigned mask, const std::vector<std::size_t>& strides, Fn&& fn) {
    const std::size_t d = strides.size();
    for (unsigned sub = mask;; sub = (sub - 1) & mask) {
        std::size_t off = anchor;
        for (std::size_t a = 0; a < d; ++a) {
            if (sub & (1u << a)) off += strides[a];
        }
        fn(off);
        if (sub == 0) break;
    }
}

// Shared skeleton of both cubical constructions: cells (anchor, mask) on a
// lattice of the given shape, restricted to dim <= m. Values are filled by
// the caller.
std::vector<Cell> cubical_cells(const GridShape& lattice, std::size_t m) {
    const std::size_t d = lattice.dim();
    if (d > kMaxCubicalDim) fail(ErrorKind::InvalidArgument, "cubical complexes support at most 16 axes");
    if (m > d) fail(ErrorKind::InvalidArgument, "skeleton dimension exceeds lattice dimension");
    const std::size_t masks = std::size_t{1} << d;
    const auto strides = lattice.axis_strides();

    std::vector<Cell> cells;
    std::vector<std::size_t> coord(d, 0);
    for (std::size_t anchor = 0; anchor < lattice.size(); ++anchor) {
        for (unsigned mask = 0; mask < masks; ++mask) {
            const auto cdim = static_cast<std::size_t>(std::popcount(mask));
            if (cdim > m) continue;
            bool fits = true;
            for (std::size_t a = 0; a < d && fits; ++a) {
                if ((mask & (1u << a)) && coord[a] + 1 >= lattice.extent(a)) fits = false;
            }
            if (!fits) continue;
            Cell c;
            c.id = anchor * masks + mask;
            c.dim = cdim;
            for (std::size_t a = 0; a < d; ++a) {
                if (!(mask & (1u << a))) continue;
                const unsigned lower = mask & ~(1u << a);
                c.faces.push_back(anchor * masks + lower);
                c.faces.push_back((anchor + strides[a]) * masks + lower);
            }
            std::sort(c.faces.begin(), c.faces.end());
            for_each_corner(anchor, mask, strides, [&](std::size_t v) { c.vertices.push_back(v); });
            std::sort(c.vertices.begin(), c.vertices.end());
            cells.push_back(std::move(c));
        }
        for (std::size_t a = d; a-- > 0;) {
            if (++coord[a] < lattice.extent(a)) break;
            coord[a] = 0;
        }
    }
    return cells;
}

}  // namespace

FilteredComplex::FilteredComplex(std::vector<Cell> cells, ComplexKind kind, std::size_t vertex_count)
    : cells_(std::move(cells)), kind_(kind), vertex_count_(vertex_count) {
    std::sort(cells_.begin(), cells_.end(), [](const Cell& a, const Cell& b) { return a.id < b.id; });
    for (std::size_t i = 1; i < cells_.size(); ++i) {
        if (cells_[i].id == cells_[i - 1].id) {
            fail(ErrorKind::MalformedComplex, "duplicate cell id " + std::to_string(cells_[i].id));
        }
    }
    for (Cell& c : cells_) {
        std::sort(c.faces.begin(), c.faces.end());
        if (std::adjacent_find(c.faces.begin(), c.faces.end()) != c.faces.end()) {
            fail(ErrorKind::MalformedComplex, "cell " + std::to_string(c.id) + " lists a face twice");
        }
        if (!std::isfinite(c.value)) fail(ErrorKind::InvalidArgument, "non-finite filtration value");
        max_dim_ = std::max(max_dim_, c.dim);
    }
    slot_ = build_slots(cells_);
    if (auto v = find_violation(cells_, slot_)) fail(v->kind, v->message);

    const bool need_vertices =
        std::any_of(cells_.begin(), cells_.end(), [](const Cell& c) { return c.vertices.empty(); });
    if (need_vertices) {
        derive_vertices(cells_, slot_);
        std::size_t zero_cells = 0;
        for (const Cell& c : cells_) zero_cells += c.dim == 0;
        vertex_count_ = std::max(vertex_count_, zero_cells);
    }
}

bool FilteredComplex::contains(CellId id) const noexcept {
    return id < slot_.size() && slot_[id] >= 0;
}

std::size_t FilteredComplex::index_of(CellId id) const {
    if (!contains(id)) fail(ErrorKind::InvalidArgument, "no cell with id " + std::to_string(id));
    return static_cast<std::size_t>(slot_[id]);
}

const Cell& FilteredComplex::cell(CellId id) const { return cells_[index_of(id)]; }

std::vector<double> FilteredComplex::values() const {
    std::vector<double> out;
    out.reserve(cells_.size());
    for (const Cell& c : cells_) out.push_back(c.value);
    return out;
}

double FilteredComplex::max_value() const {
    double m = -std::numeric_limits<double>::infinity();
    for (const Cell& c : cells_) m = std::max(m, c.value);
    return m;
}

FilteredComplex FilteredComplex::with_values(std::vector<double> values) const {
    if (values.size() != cells_.size()) {
        fail(ErrorKind::LengthMismatch, "with_values expects one value per cell");
    }
    FilteredComplex out = *this;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) fail(ErrorKind::InvalidArgument, "non-finite filtration value");
        out.cells_[i].value = values[i];
    }
    if (auto v = find_violation(out.cells_, out.slot_)) fail(v->kind, v->message);
    return out;
}

FilteredComplex FilteredComplex::lower_star(std::span<const double> vertex_values) const {
    if (vertex_values.size() < vertex_count_) {
        fail(ErrorKind::LengthMismatch, "lower_star needs " + std::to_string(vertex_count_) +
                                            " vertex values, got " + std::to_string(vertex_values.size()));
    }
    FilteredComplex out = *this;
    for (Cell& c : out.cells_) {
        double v = -std::numeric_limits<double>::infinity();
        for (std::size_t label : c.vertices) v = std::max(v, vertex_values[label]);
        if (!std::isfinite(v)) fail(ErrorKind::InvalidArgument, "non-finite vertex value");
        c.value = v;
    }
    return out;
}

FilteredComplex cubical_lower_star(const Image& f, std::size_t m) {
    if (f.channels() != 1) fail(ErrorKind::ChannelMismatch, "cubical complexes need a 1-channel image");
    std::vector<Cell> cells = cubical_cells(f.shape(), m);
    for (Cell& c : cells) {
        double v = -std::numeric_limits<double>::infinity();
        for (std::size_t label : c.vertices) v = std::max(v, f.at(label));
        c.value = v;
    }
    return FilteredComplex(std::move(cells), ComplexKind::Cubical, f.shape().size());
}

FilteredComplex cubical_upper_star(const Image& f, std::size_t m) {
    if (f.channels() != 1) fail(ErrorKind::ChannelMismatch, "cubical complexes need a 1-channel image");
    const GridShape& pixels = f.shape();
    const std::size_t d = pixels.dim();
    std::vector<std::size_t> corner_extents(d);
    for (std::size_t a = 0; a < d; ++a) corner_extents[a] = pixels.extent(a) + 1;
    const GridShape lattice(corner_extents);
    const std::size_t masks = std::size_t{1} << d;

    std::vector<Cell> cells = cubical_cells(lattice, m);
    std::vector<std::size_t> voxel(d);
    for (Cell& c : cells) {
        const std::size_t anchor = c.id / masks;
        const auto mask = static_cast<unsigned>(c.id % masks);
        const auto coord = lattice.unflatten(anchor);
        // Containing voxels: along spanned axes the voxel coordinate equals the
        // anchor; along free axes it is anchor-1 or anchor, clipped to P.
        const unsigned free = static_cast<unsigned>(masks - 1) & ~mask;
        double v = std::numeric_limits<double>::infinity();
        for (unsigned sub = free;; sub = (sub - 1) & free) {
            bool inside = true;
            for (std::size_t a = 0; a < d && inside; ++a) {
                if (sub & (1u << a)) {
                    if (coord[a] == 0) inside = false;
                    else voxel[a] = coord[a] - 1;
                } else {
                    if (coord[a] >= pixels.extent(a)) inside = false;
                    else voxel[a] = coord[a];
                }
            }
            if (inside) v = std::min(v, f.at(pixels.flatten(voxel)));
            if (sub == 0) break;
        }
        c.value = v;
    }
    return FilteredComplex(std::move(cells), ComplexKind::Cubical, lattice.size());
}

FilteredComplex cubical_complex(const Image& f, std::size_t m, Construction construction) {
    return construction == Construction::LowerStar ? cubical_lower_star(f, m) : cubical_upper_star(f, m);
}

FilteredComplex simplicial_lower_star(const std::vector<std::vector<std::size_t>>& simplices,
                                      std::span<const double> vertex_values) {
    const std::size_t n = vertex_values.size();
    std::map<std::vector<std::size_t>, CellId> closure;
    for (std::size_t v = 0; v < n; ++v) closure.emplace(std::vector<std::size_t>{v}, 0);

    for (const auto& raw : simplices) {
        if (raw.empty()) fail(ErrorKind::EmptySimplex, "empty simplex in input");
        std::vector<std::size_t> s = raw;
        std::sort(s.begin(), s.end());
        s.erase(std::unique(s.begin(), s.end()), s.end());
        if (s.back() >= n) {
            fail(ErrorKind::InvalidArgument, "simplex references vertex " + std::to_string(s.back()) +
                                                 " but only " + std::to_string(n) + " vertices have values");
        }
        if (s.size() > 20) fail(ErrorKind::TooLarge, "simplices with more than 20 vertices are not supported");
        const std::size_t subsets = std::size_t{1} << s.size();
        for (std::size_t bits = 1; bits < subsets; ++bits) {
            std::vector<std::size_t> face;
            for (std::size_t i = 0; i < s.size(); ++i) {
                if (bits & (std::size_t{1} << i)) face.push_back(s[i]);
            }
            closure.emplace(std::move(face), 0);
        }
    }

    std::vector<const std::vector<std::size_t>*> ordered;
    ordered.reserve(closure.size());
    for (const auto& entry : closure) ordered.push_back(&entry.first);
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const auto* a, const auto* b) { return a->size() < b->size(); });
    for (std::size_t i = 0; i < ordered.size(); ++i) closure[*ordered[i]] = i;

    std::vector<Cell> cells(ordered.size());
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto& verts = *ordered[i];
        Cell& c = cells[i];
        c.id = i;
        c.dim = verts.size() - 1;
        c.vertices = verts;
        c.value = vertex_values[verts.front()];
        for (std::size_t v : verts) c.value = std::max(c.value, vertex_values[v]);
        if (verts.size() > 1) {
            for (std::size_t drop = 0; drop < verts.size(); ++drop) {
                std::vector<std::size_t> face;
                for (std::size_t j = 0; j < verts.size(); ++j) {
                    if (j != drop) face.push_back(verts[j]);
                }
                c.faces.push_back(closure.at(face));
            }
        }
    }
    return FilteredComplex(std::move(cells), ComplexKind::Simplicial, n);
}

FilteredComplex skeleton(const FilteredComplex& k, std::size_t m) {
    std::vector<Cell> kept;
    for (const Cell& c : k.cells()) {
        if (c.dim <= m) kept.push_back(c);
    }
    return FilteredComplex(std::move(kept), k.kind(), k.vertex_count());
}

std::optional<std::string> check_invariants(const FilteredComplex& k) {
    std::vector<std::int64_t> slot = build_slots(k.cells());
    if (auto v = find_violation(k.cells(), slot)) return v->message;
    return std::nullopt;
}

}  // namespace convpers
