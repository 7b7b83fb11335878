#pragma once

#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "convpers/complex.hpp"

namespace convpers {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

struct DiagramPoint {
    double birth = 0.0;
    double death = kInfinity;
    std::size_t dim = 0;

    bool essential() const noexcept { return death == kInfinity; }
    double persistence() const noexcept { return death - birth; }

    friend bool operator==(const DiagramPoint&, const DiagramPoint&) = default;
};

/// Orders by (dim, birth, death).
bool diagram_point_less(const DiagramPoint& a, const DiagramPoint& b) noexcept;

/// Multiset of diagram points across homology dimensions. `cap` is the
/// largest filtration value of the complex the diagram came from; essential
/// classes are truncated there when a finite lifetime is needed.
struct PersistenceDiagram {
    std::vector<DiagramPoint> points;
    std::size_t max_dim = 0;
    double cap = 0.0;

    /// Points of one homology dimension, in stored order.
    std::vector<DiagramPoint> in_dim(std::size_t dim) const;
    /// Sorts points into canonical (dim, birth, death) order.
    void canonicalize();
    /// Multiset equality on (dim, birth, death); ignores order and cap.
    bool same_points(const PersistenceDiagram& other) const;
    /// Number of dim-q points alive at α: birth ≤ α < death.
    std::size_t persistent_betti(double alpha, std::size_t q) const;
};

struct EulerCurve {
    std::vector<double> thresholds;
    std::vector<long long> values;
};

struct ReductionOptions {
    bool keep_diagonal = false;  // keep points with birth == death
    bool clearing = true;        // zero columns whose index is already a pivot
};

/// Total order for reduction: (value asc, dim asc, id asc). Returns positions
/// into K.cells(). Throws NonMonotone if a face would follow its coface.
std::vector<std::size_t> filtration_order(const FilteredComplex& k);

/// Sublevel-set persistence by Z/2 column reduction with lowest-one pairing.
PersistenceDiagram reduce_and_pair(const FilteredComplex& k, const ReductionOptions& options = {});

/// Betti_q of the sublevel complex {σ : value(σ) ≤ α}, by dense Gaussian
/// elimination over Z/2. Independent of the reduction path; used as an oracle.
std::size_t betti_bruteforce(const FilteredComplex& k, double alpha, std::size_t q);

/// χ(α) = Σ_q (−1)^q #{dim-q cells with value ≤ α}. Thresholds must be sorted.
EulerCurve euler_curve(const FilteredComplex& k, std::span<const double> thresholds);

/// Sorted distinct filtration values of K.
std::vector<double> filtration_values(const FilteredComplex& k);

/// (Σ|v|^p)^{1/p}, or max|v| for p = ∞. Throws BadP for p < 1.
double lp_norm(std::span<const double> values, double p);

/// CSV with header `dim,birth,death`; essential deaths written as `inf`.
/// Rows in canonical order; values printed with round-trip precision.
void write_diagram_csv(std::ostream& out, const PersistenceDiagram& diagram);
PersistenceDiagram read_diagram_csv(std::istream& in);

std::string format_real(double value);

}  // namespace convpers
