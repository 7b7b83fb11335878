#include "convpers/persistence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <sstream>

#include "convpers/error.hpp"

namespace convpers {

namespace {

using Column = std::vector<std::size_t>;

// In-place Z/2 addition of two sorted index lists.
void add_column(Column& target, const Column& source, Column& scratch) {
    scratch.clear();
    std::set_symmetric_difference(target.begin(), target.end(), source.begin(), source.end(),
                                  std::back_inserter(scratch));
    target.swap(scratch);
}

std::size_t rank_gf2(std::vector<std::vector<std::uint64_t>> rows, std::size_t width) {
    std::size_t rank = 0;
    const std::size_t words = (width + 63) / 64;
    for (std::size_t col = 0; col < width && rank < rows.size(); ++col) {
        const std::size_t w = col / 64;
        const std::uint64_t bit = std::uint64_t{1} << (col % 64);
        std::size_t pivot = rank;
        while (pivot < rows.size() && !(rows[pivot][w] & bit)) ++pivot;
        if (pivot == rows.size()) continue;
        std::swap(rows[pivot], rows[rank]);
        for (std::size_t r = 0; r < rows.size(); ++r) {
            if (r != rank && (rows[r][w] & bit)) {
                for (std::size_t k = 0; k < words; ++k) rows[r][k] ^= rows[rank][k];
            }
        }
        ++rank;
    }
    return rank;
}

// Rank of ∂_q restricted to the sublevel complex at α.
std::size_t boundary_rank(const FilteredComplex& k, double alpha, std::size_t q) {
    if (q == 0) return 0;
    std::vector<std::int64_t> local(k.size(), -1);
    std::size_t width = 0;
    for (std::size_t i = 0; i < k.size(); ++i) {
        const Cell& c = k.cells()[i];
        if (c.dim == q - 1 && c.value <= alpha) local[i] = static_cast<std::int64_t>(width++);
    }
    std::vector<std::vector<std::uint64_t>> rows;
    const std::size_t words = (width + 63) / 64;
    for (const Cell& c : k.cells()) {
        if (c.dim != q || c.value > alpha) continue;
        std::vector<std::uint64_t> row(words, 0);
        for (CellId fid : c.faces) {
            const auto col = static_cast<std::size_t>(local[k.index_of(fid)]);
            row[col / 64] ^= std::uint64_t{1} << (col % 64);
        }
        rows.push_back(std::move(row));
    }
    return rank_gf2(std::move(rows), width);
}

}  // namespace

bool diagram_point_less(const DiagramPoint& a, const DiagramPoint& b) noexcept {
    if (a.dim != b.dim) return a.dim < b.dim;
    if (a.birth != b.birth) return a.birth < b.birth;
    return a.death < b.death;
}

std::vector<DiagramPoint> PersistenceDiagram::in_dim(std::size_t dim) const {
    std::vector<DiagramPoint> out;
    for (const auto& p : points) {
        if (p.dim == dim) out.push_back(p);
    }
    return out;
}

void PersistenceDiagram::canonicalize() {
    std::stable_sort(points.begin(), points.end(), diagram_point_less);
}

bool PersistenceDiagram::same_points(const PersistenceDiagram& other) const {
    if (points.size() != other.points.size()) return false;
    auto a = points;
    auto b = other.points;
    std::sort(a.begin(), a.end(), diagram_point_less);
    std::sort(b.begin(), b.end(), diagram_point_less);
    return a == b;
}

std::size_t PersistenceDiagram::persistent_betti(double alpha, std::size_t q) const {
    std::size_t count = 0;
    for (const auto& p : points) {
        if (p.dim == q && p.birth <= alpha && alpha < p.death) ++count;
    }
    return count;
}

std::vector<std::size_t> filtration_order(const FilteredComplex& k) {
    const auto cells = k.cells();
    std::vector<std::size_t> order(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const Cell& x = cells[a];
        const Cell& y = cells[b];
        if (x.value != y.value) return x.value < y.value;
        if (x.dim != y.dim) return x.dim < y.dim;
        return x.id < y.id;
    });
    std::vector<std::size_t> rank(cells.size());
    for (std::size_t i = 0; i < order.size(); ++i) rank[order[i]] = i;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        for (CellId fid : cells[i].faces) {
            if (rank[k.index_of(fid)] >= rank[i]) {
                fail(ErrorKind::NonMonotone, "face " + std::to_string(fid) + " does not precede cell " +
                                                 std::to_string(cells[i].id));
            }
        }
    }
    return order;
}

PersistenceDiagram reduce_and_pair(const FilteredComplex& k, const ReductionOptions& options) {
    const auto cells = k.cells();
    const auto order = filtration_order(k);
    const std::size_t n = order.size();

    std::vector<std::size_t> rank(n);
    for (std::size_t i = 0; i < n; ++i) rank[order[i]] = i;

    constexpr std::size_t kNone = static_cast<std::size_t>(-1);
    std::vector<Column> reduced(n);
    std::vector<std::size_t> pivot_owner(n, kNone);
    std::vector<bool> cleared(n, false);
    Column scratch;

    auto reduce_column = [&](std::size_t j) {
        const Cell& c = cells[order[j]];
        Column col;
        col.reserve(c.faces.size());
        for (CellId fid : c.faces) col.push_back(rank[k.index_of(fid)]);
        std::sort(col.begin(), col.end());
        while (!col.empty() && pivot_owner[col.back()] != kNone) {
            add_column(col, reduced[pivot_owner[col.back()]], scratch);
        }
        if (!col.empty()) {
            pivot_owner[col.back()] = j;
            if (options.clearing) cleared[col.back()] = true;
            reduced[j] = std::move(col);
        }
    };

    if (options.clearing) {
        // Twist order: high dimensions first so their pivots clear columns below.
        for (std::size_t q = k.max_dim(); q >= 1; --q) {
            for (std::size_t j = 0; j < n; ++j) {
                if (cells[order[j]].dim == q && !cleared[j]) reduce_column(j);
            }
        }
    } else {
        for (std::size_t j = 0; j < n; ++j) {
            if (cells[order[j]].dim > 0) reduce_column(j);
        }
    }

    PersistenceDiagram diagram;
    diagram.max_dim = k.max_dim();
    diagram.cap = n ? k.max_value() : 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        const Cell& c = cells[order[j]];
        if (!reduced[j].empty()) {
            const Cell& birth_cell = cells[order[reduced[j].back()]];
            if (options.keep_diagonal || birth_cell.value != c.value) {
                diagram.points.push_back({birth_cell.value, c.value, birth_cell.dim});
            }
        } else if (pivot_owner[j] == kNone) {
            diagram.points.push_back({c.value, kInfinity, c.dim});
        }
    }
    diagram.canonicalize();
    return diagram;
}

std::size_t betti_bruteforce(const FilteredComplex& k, double alpha, std::size_t q) {
    std::size_t cells_q = 0;
    for (const Cell& c : k.cells()) cells_q += (c.dim == q && c.value <= alpha);
    const std::size_t nullity = cells_q - boundary_rank(k, alpha, q);
    return nullity - boundary_rank(k, alpha, q + 1);
}

EulerCurve euler_curve(const FilteredComplex& k, std::span<const double> thresholds) {
    if (!std::is_sorted(thresholds.begin(), thresholds.end())) {
        fail(ErrorKind::InvalidArgument, "euler_curve thresholds must be sorted");
    }
    std::vector<std::pair<double, int>> signed_cells;
    signed_cells.reserve(k.size());
    for (const Cell& c : k.cells()) signed_cells.emplace_back(c.value, c.dim % 2 == 0 ? 1 : -1);
    std::sort(signed_cells.begin(), signed_cells.end());

    EulerCurve curve;
    curve.thresholds.assign(thresholds.begin(), thresholds.end());
    curve.values.reserve(thresholds.size());
    long long chi = 0;
    std::size_t next = 0;
    for (double alpha : thresholds) {
        while (next < signed_cells.size() && signed_cells[next].first <= alpha) chi += signed_cells[next++].second;
        curve.values.push_back(chi);
    }
    return curve;
}

std::vector<double> filtration_values(const FilteredComplex& k) {
    std::vector<double> values = k.values();
    std::sort(values.begin(), values.end());
    values.erase(std::unique(values.begin(), values.end()), values.end());
    return values;
}

double lp_norm(std::span<const double> values, double p) {
    if (std::isnan(p) || p < 1.0) fail(ErrorKind::BadP, "p must be >= 1 or infinity");
    if (p == kInfinity) {
        double m = 0.0;
        for (double v : values) m = std::max(m, std::abs(v));
        return m;
    }
    double s = 0.0;
    for (double v : values) s += std::pow(std::abs(v), p);
    return std::pow(s, 1.0 / p);
}

std::string format_real(double value) {
    if (value == kInfinity) return "inf";
    if (value == -kInfinity) return "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, end);
}

void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram) {
    auto points = diagram.points;
    std::stable_sort(points.begin(), points.end(), diagram_point_less);
    out << "dim,birth,death\n";
    for (const auto& p : points) {
        out << p.dim << ',' << format_real(p.birth) << ',' << format_real(p.death) << '\n';
    }
}

namespace {

double parse_real(const std::string& token, std::size_t line) {
    if (token == "inf" || token == "+inf" || token == "Infinity") return kInfinity;
    double v = 0.0;
    const char* first = token.data();
    const char* last = first + token.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) {
        fail(ErrorKind::MalformedHeader, "line " + std::to_string(line) + ": bad number '" + token + "'");
    }
    return v;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

}  // namespace

PersistenceDiagram read_diagram_csv(std::istream& in) {
    PersistenceDiagram diagram;
    std::string line;
    std::size_t lineno = 0;
    bool header = false;
    bool any_point = false;
    while (std::getline(in, line)) {
        ++lineno;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        if (!header) {
            if (line != "dim,birth,death") {
                fail(ErrorKind::MalformedHeader, "diagram CSV must start with 'dim,birth,death'");
            }
            header = true;
            continue;
        }
        std::stringstream ss(line);
        std::string dim_s, birth_s, death_s, extra;
        if (!std::getline(ss, dim_s, ',') || !std::getline(ss, birth_s, ',') ||
            !std::getline(ss, death_s, ',') || std::getline(ss, extra, ',')) {
            fail(ErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": expected 3 fields");
        }
        const double dim = parse_real(trim(dim_s), lineno);
        if (dim < 0 || dim != std::floor(dim)) {
            fail(ErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": bad dimension");
        }
        DiagramPoint p{parse_real(trim(birth_s), lineno), parse_real(trim(death_s), lineno),
                       static_cast<std::size_t>(dim)};
        if (!std::isfinite(p.birth) || p.death < p.birth) {
            fail(ErrorKind::MalformedHeader, "line " + std::to_string(lineno) + ": invalid point");
        }
        diagram.max_dim = std::max(diagram.max_dim, p.dim);
        const double top = p.essential() ? p.birth : p.death;
        diagram.cap = any_point ? std::max(diagram.cap, top) : top;
        any_point = true;
        diagram.points.push_back(p);
    }
    if (!header) fail(ErrorKind::MalformedHeader, "empty diagram file");
    diagram.canonicalize();
    return diagram;
}

}  // namespace convpers
