#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "convpers/linalg.hpp"
#include "convpers/persistence.hpp"

namespace convpers {

/// Planar ground metric between diagram points.
enum class Ground { LInf, L2 };

/// Distance between two diagram points. An infinite death against an
/// infinite death contributes 0 along that axis; finite vs infinite is +∞.
double ground_distance(const DiagramPoint& a, const DiagramPoint& b, Ground ground = Ground::LInf);

/// Distance to the nearest point of the diagonal: (death − birth)/2 under L∞,
/// (death − birth)/√2 under L2. Throws InfinitePoint for essential points.
double diagonal_distance(const DiagramPoint& a, Ground ground = Ground::LInf);

inline constexpr std::size_t kDiagonal = static_cast<std::size_t>(-1);

struct TransportPlan {
    /// (source index, target index) into the per-dimension point lists of the
    /// two diagrams; kDiagonal marks a diagonal match.
    struct Match {
        std::size_t dim;
        std::size_t source;
        std::size_t target;
    };
    std::vector<Match> matches;
    double cost = 0.0;  // Σ ground^p over matches
};

/// Exact bottleneck distance, computed per homology dimension and maximized.
double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, Ground ground = Ground::LInf);

/// Exact p-Wasserstein distance (Hungarian algorithm on the diagonal-augmented
/// assignment problem). Per-dimension costs are summed before the p-th root.
/// Returns +∞ if the essential counts differ in some dimension.
double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                   Ground ground = Ground::LInf, TransportPlan* plan = nullptr);

/// Exhaustive matching enumeration; p may be +∞ (bottleneck). At most eight
/// finite points across both diagrams.
double wasserstein_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                              Ground ground = Ground::LInf);

struct SinkhornResult {
    double value = 0.0;   // (cost of the rounded plan)^{1/p}
    bool converged = false;
    std::size_t iterations = 0;
};

/// Entropic transport on the same augmented cost matrix as `wasserstein`.
/// epsilon is absolute in units of the ground cost raised to p.
SinkhornResult wasserstein_sinkhorn(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                                    double epsilon, std::size_t max_iter = 100000,
                                    Ground ground = Ground::LInf);

/// Largest entry of the augmented cost matrix over all dimensions; a natural
/// unit for choosing Sinkhorn's epsilon.
double transport_scale(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                       Ground ground = Ground::LInf);

/// Square assignment minimizing Σ cost[i][assignment[i]], O(n³).
std::vector<std::size_t> hungarian(const Matrix& cost);

/// Induced p-norm for p ∈ {1, 2, ∞}.
double operator_norm(const Matrix& a, double p);

}  // namespace convpers
