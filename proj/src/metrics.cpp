#include "convpers/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "convpers/error.hpp"

namespace convpers {

namespace {

constexpr std::size_t kMaxAssignmentPoints = 2000;

struct DimSplit {
    std::vector<DiagramPoint> finite_a, finite_b;
    std::vector<double> essential_a, essential_b;  // births, sorted
};

std::vector<DimSplit> split_by_dim(const PersistenceDiagram& a, const PersistenceDiagram& b) {
    std::size_t top = 0;
    for (const auto& p : a.points) top = std::max(top, p.dim);
    for (const auto& p : b.points) top = std::max(top, p.dim);
    std::vector<DimSplit> dims(top + 1);
    for (const auto& p : a.points) {
        if (p.essential()) dims[p.dim].essential_a.push_back(p.birth);
        else dims[p.dim].finite_a.push_back(p);
    }
    for (const auto& p : b.points) {
        if (p.essential()) dims[p.dim].essential_b.push_back(p.birth);
        else dims[p.dim].finite_b.push_back(p);
    }
    for (auto& d : dims) {
        std::sort(d.essential_a.begin(), d.essential_a.end());
        std::sort(d.essential_b.begin(), d.essential_b.end());
    }
    return dims;
}

// d^p, with the common exponents computed without pow so that every solver
// sees bit-identical terms.
double power(double d, double p) {
    if (p == 1.0) return d;
    if (p == 2.0) return d * d;
    return std::pow(d, p);
}

void require_p(double p, bool allow_infinity) {
    if (std::isnan(p) || p < 1.0 || (!allow_infinity && p == kInfinity)) {
        fail(ErrorKind::BadP, "p must be >= 1" + std::string(allow_infinity ? "" : " and finite"));
    }
}

Matrix augmented_cost(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b, double p,
                      Ground ground) {
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    Matrix cost(n1 + n2, n1 + n2, 0.0);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) cost(i, j) = power(ground_distance(a[i], b[j], ground), p);
        const double to_diag = power(diagonal_distance(a[i], ground), p);
        for (std::size_t j = 0; j < n1; ++j) cost(i, n2 + j) = to_diag;
    }
    for (std::size_t j = 0; j < n2; ++j) {
        const double to_diag = power(diagonal_distance(b[j], ground), p);
        for (std::size_t i = 0; i < n2; ++i) cost(n1 + i, j) = to_diag;
    }
    return cost;
}

// Kuhn's augmenting-path matching; true iff a perfect matching exists.
bool has_perfect_matching(const std::vector<std::vector<std::size_t>>& adj, std::size_t right_size) {
    constexpr std::size_t kFree = static_cast<std::size_t>(-1);
    std::vector<std::size_t> match_right(right_size, kFree);
    std::vector<char> seen;
    std::vector<std::size_t> stack_left, stack_edge;

    for (std::size_t root = 0; root < adj.size(); ++root) {
        seen.assign(right_size, 0);
        // Iterative DFS over alternating paths.
        std::vector<std::size_t> parent_right;  // right vertex used to reach stack frame
        stack_left = {root};
        stack_edge = {0};
        parent_right.clear();
        bool augmented = false;
        while (!stack_left.empty() && !augmented) {
            const std::size_t u = stack_left.back();
            std::size_t& e = stack_edge.back();
            if (e == adj[u].size()) {
                stack_left.pop_back();
                stack_edge.pop_back();
                if (!parent_right.empty()) parent_right.pop_back();
                continue;
            }
            const std::size_t v = adj[u][e++];
            if (seen[v]) continue;
            seen[v] = 1;
            if (match_right[v] == kFree) {
                // Flip the path: each left vertex on the stack takes the right
                // vertex that led out of it.
                parent_right.push_back(v);
                for (std::size_t k = 0; k < stack_left.size(); ++k) match_right[parent_right[k]] = stack_left[k];
                augmented = true;
            } else {
                parent_right.push_back(v);
                stack_left.push_back(match_right[v]);
                stack_edge.push_back(0);
            }
        }
        if (!augmented) return false;
    }
    return true;
}

bool bottleneck_feasible(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b,
                         double r, Ground ground) {
    const std::size_t n1 = a.size();
    const std::size_t n2 = b.size();
    std::vector<std::vector<std::size_t>> adj(n1 + n2);
    for (std::size_t i = 0; i < n1; ++i) {
        for (std::size_t j = 0; j < n2; ++j) {
            if (ground_distance(a[i], b[j], ground) <= r) adj[i].push_back(j);
        }
        if (diagonal_distance(a[i], ground) <= r) adj[i].push_back(n2 + i);
    }
    for (std::size_t j = 0; j < n2; ++j) {
        if (diagonal_distance(b[j], ground) <= r) adj[n1 + j].push_back(j);
        for (std::size_t i = 0; i < n1; ++i) adj[n1 + j].push_back(n2 + i);
    }
    return has_perfect_matching(adj, n1 + n2);
}

double finite_bottleneck(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b, Ground ground) {
    if (a.empty() && b.empty()) return 0.0;
    std::vector<double> candidates{0.0};
    for (const auto& x : a) {
        candidates.push_back(diagonal_distance(x, ground));
        for (const auto& y : b) candidates.push_back(ground_distance(x, y, ground));
    }
    for (const auto& y : b) candidates.push_back(diagonal_distance(y, ground));
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

    std::size_t lo = 0;
    std::size_t hi = candidates.size() - 1;  // always feasible: everything to the diagonal
    while (lo < hi) {
        const std::size_t mid = lo + (hi - lo) / 2;
        if (bottleneck_feasible(a, b, candidates[mid], ground)) hi = mid;
        else lo = mid + 1;
    }
    return candidates[lo];
}

void enumerate_matchings(const std::vector<DiagramPoint>& a, const std::vector<DiagramPoint>& b, double p,
                         Ground ground, std::size_t i, std::vector<char>& used, double acc, double& best) {
    const bool is_max = p == kInfinity;
    auto combine = [&](double total, double d) { return is_max ? std::max(total, d) : total + power(d, p); };
    if (i == a.size()) {
        double total = acc;
        for (std::size_t j = 0; j < b.size(); ++j) {
            if (!used[j]) total = combine(total, diagonal_distance(b[j], ground));
        }
        best = std::min(best, total);
        return;
    }
    enumerate_matchings(a, b, p, ground, i + 1, used, combine(acc, diagonal_distance(a[i], ground)), best);
    for (std::size_t j = 0; j < b.size(); ++j) {
        if (used[j]) continue;
        used[j] = 1;
        enumerate_matchings(a, b, p, ground, i + 1, used, combine(acc, ground_distance(a[i], b[j], ground)), best);
        used[j] = 0;
    }
}

// Row-normalize, column-normalize, then add back the rank-one correction so
// the plan has exact unit marginals.
Matrix round_to_feasible(Matrix plan) {
    const std::size_t n = plan.rows();
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < n; ++j) r += plan(i, j);
        const double scale = r > 1.0 ? 1.0 / r : 1.0;
        for (std::size_t j = 0; j < n; ++j) plan(i, j) *= scale;
    }
    for (std::size_t j = 0; j < n; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += plan(i, j);
        const double scale = c > 1.0 ? 1.0 / c : 1.0;
        for (std::size_t i = 0; i < n; ++i) plan(i, j) *= scale;
    }
    std::vector<double> err_r(n), err_c(n);
    double mass = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double r = 0.0;
        for (std::size_t j = 0; j < n; ++j) r += plan(i, j);
        err_r[i] = std::max(0.0, 1.0 - r);
        mass += err_r[i];
    }
    for (std::size_t j = 0; j < n; ++j) {
        double c = 0.0;
        for (std::size_t i = 0; i < n; ++i) c += plan(i, j);
        err_c[j] = std::max(0.0, 1.0 - c);
    }
    if (mass > 0.0) {
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) plan(i, j) += err_r[i] * err_c[j] / mass;
        }
    }
    return plan;
}

struct SinkhornDim {
    double cost = 0.0;
    bool converged = true;
    std::size_t iterations = 0;
};

SinkhornDim sinkhorn_dim(const Matrix& cost, double epsilon, std::size_t max_iter) {
    const std::size_t n = cost.rows();
    SinkhornDim out;
    if (n == 0) return out;
    std::vector<double> f(n, 0.0), g(n, 0.0), buf(n);

    auto logsumexp = [](std::vector<double>& x) {
        const double m = *std::max_element(x.begin(), x.end());
        double s = 0.0;
        for (double v : x) s += std::exp(v - m);
        return m + std::log(s);
    };

    // Geometric epsilon schedule from the cost scale down to the target,
    // warm-starting the potentials at each level.
    double cmax = 0.0;
    for (double c : cost.data()) cmax = std::max(cmax, c);
    std::vector<double> schedule;
    for (double e = cmax; e > epsilon; e *= 0.5) schedule.push_back(e);
    schedule.push_back(epsilon);

    out.converged = false;
    std::size_t it = 0;
    for (std::size_t level = 0; level < schedule.size() && it < max_iter; ++level) {
        const double eps = schedule[level];
        const bool last = level + 1 == schedule.size();
        const double target = last ? 1e-6 : 1e-3;
        for (; it < max_iter; ++it) {
            for (std::size_t i = 0; i < n; ++i) {
                for (std::size_t j = 0; j < n; ++j) buf[j] = (g[j] - cost(i, j)) / eps;
                f[i] = -eps * logsumexp(buf);
            }
            for (std::size_t j = 0; j < n; ++j) {
                for (std::size_t i = 0; i < n; ++i) buf[i] = (f[i] - cost(i, j)) / eps;
                g[j] = -eps * logsumexp(buf);
            }
            // Columns are exact after the g-update; measure the row violation.
            double violation = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                double r = 0.0;
                for (std::size_t j = 0; j < n; ++j) r += std::exp((f[i] + g[j] - cost(i, j)) / eps);
                violation += std::abs(r - 1.0);
            }
            if (violation < target) {
                ++it;
                if (last) out.converged = true;
                break;
            }
        }
    }
    out.iterations = it;

    Matrix plan(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) plan(i, j) = std::exp((f[i] + g[j] - cost(i, j)) / epsilon);
    }
    plan = round_to_feasible(std::move(plan));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) out.cost += plan(i, j) * cost(i, j);
    }
    return out;
}

double essential_cost(const DimSplit& d, double p, bool& mismatch) {
    if (d.essential_a.size() != d.essential_b.size()) {
        mismatch = true;
        return kInfinity;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < d.essential_a.size(); ++i) {
        const double gap = std::abs(d.essential_a[i] - d.essential_b[i]);
        total = p == kInfinity ? std::max(total, gap) : total + power(gap, p);
    }
    return total;
}

}  // namespace

double ground_distance(const DiagramPoint& a, const DiagramPoint& b, Ground ground) {
    const double db = std::abs(a.birth - b.birth);
    double dd = 0.0;
    if (a.essential() != b.essential()) return kInfinity;
    if (!a.essential()) dd = std::abs(a.death - b.death);
    return ground == Ground::LInf ? std::max(db, dd) : std::hypot(db, dd);
}

double diagonal_distance(const DiagramPoint& a, Ground ground) {
    if (a.essential()) fail(ErrorKind::InfinitePoint, "essential points cannot be matched to the diagonal");
    const double gap = a.death - a.birth;
    return ground == Ground::LInf ? gap / 2.0 : gap / std::sqrt(2.0);
}

double bottleneck(const PersistenceDiagram& a, const PersistenceDiagram& b, Ground ground) {
    double result = 0.0;
    for (const auto& d : split_by_dim(a, b)) {
        bool mismatch = false;
        result = std::max(result, essential_cost(d, kInfinity, mismatch));
        if (mismatch) return kInfinity;
        result = std::max(result, finite_bottleneck(d.finite_a, d.finite_b, ground));
    }
    return result;
}

std::vector<std::size_t> hungarian(const Matrix& cost) {
    const std::size_t n = cost.rows();
    if (n != cost.cols()) fail(ErrorKind::DimMismatch, "assignment needs a square cost matrix");
    if (n == 0) return {};
    constexpr double kInf = std::numeric_limits<double>::infinity();
    // 1-based potentials formulation; p[j] is the row assigned to column j.
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0), minv(n + 1);
    std::vector<std::size_t> p(n + 1, 0), way(n + 1, 0);
    std::vector<char> used(n + 1);
    for (std::size_t i = 1; i <= n; ++i) {
        p[0] = i;
        std::size_t j0 = 0;
        std::fill(minv.begin(), minv.end(), kInf);
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            const std::size_t i0 = p[j0];
            double delta = kInf;
            std::size_t j1 = 0;
            for (std::size_t j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (std::size_t j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const std::size_t j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<std::size_t> assignment(n);
    for (std::size_t j = 1; j <= n; ++j) assignment[p[j] - 1] = j - 1;
    return assignment;
}

double wasserstein(const PersistenceDiagram& a, const PersistenceDiagram& b, double p, Ground ground,
                   TransportPlan* plan) {
    require_p(p, false);
    if (plan) *plan = {};
    double total = 0.0;
    const auto dims = split_by_dim(a, b);
    for (std::size_t dim = 0; dim < dims.size(); ++dim) {
        const auto& d = dims[dim];
        bool mismatch = false;
        total += essential_cost(d, p, mismatch);
        if (mismatch) return kInfinity;
        if (d.finite_a.size() > kMaxAssignmentPoints || d.finite_b.size() > kMaxAssignmentPoints) {
            fail(ErrorKind::TooLarge, "exact Wasserstein is limited to 2000 points per dimension; use Sinkhorn");
        }
        const std::size_t n1 = d.finite_a.size();
        const std::size_t n2 = d.finite_b.size();
        const Matrix cost = augmented_cost(d.finite_a, d.finite_b, p, ground);
        const auto assignment = hungarian(cost);
        for (std::size_t i = 0; i < assignment.size(); ++i) {
            const std::size_t j = assignment[i];
            total += cost(i, j);
            if (!plan) continue;
            if (i < n1) {
                plan->matches.push_back({dim, i, j < n2 ? j : kDiagonal});
            } else if (j < n2) {
                plan->matches.push_back({dim, kDiagonal, j});
            }
        }
        for (std::size_t i = 0; plan && i < d.essential_a.size(); ++i) {
            // Essential points are matched by sorted birth; indices refer to
            // the sorted essential lists placed after the finite points.
            plan->matches.push_back({dim, n1 + i, n2 + i});
        }
    }
    if (plan) plan->cost = total;
    return std::pow(total, 1.0 / p);
}

double wasserstein_bruteforce(const PersistenceDiagram& a, const PersistenceDiagram& b, double p, Ground ground) {
    require_p(p, true);
    const auto dims = split_by_dim(a, b);
    std::size_t finite = 0;
    for (const auto& d : dims) finite += d.finite_a.size() + d.finite_b.size();
    if (finite > 8) fail(ErrorKind::TooLarge, "brute-force transport supports at most 8 finite points");

    double total = 0.0;
    for (const auto& d : dims) {
        bool mismatch = false;
        const double ess = essential_cost(d, p, mismatch);
        if (mismatch) return kInfinity;
        double best = kInfinity;
        std::vector<char> used(d.finite_b.size(), 0);
        enumerate_matchings(d.finite_a, d.finite_b, p, ground, 0, used, 0.0, best);
        if (p == kInfinity) total = std::max({total, ess, best});
        else total += ess + best;
    }
    return p == kInfinity ? total : std::pow(total, 1.0 / p);
}

double transport_scale(const PersistenceDiagram& a, const PersistenceDiagram& b, double p, Ground ground) {
    require_p(p, false);
    double scale = 0.0;
    for (const auto& d : split_by_dim(a, b)) {
        const Matrix cost = augmented_cost(d.finite_a, d.finite_b, p, ground);
        for (double c : cost.data()) scale = std::max(scale, c);
    }
    return scale;
}

SinkhornResult wasserstein_sinkhorn(const PersistenceDiagram& a, const PersistenceDiagram& b, double p,
                                    double epsilon, std::size_t max_iter, Ground ground) {
    require_p(p, false);
    if (!(epsilon > 0.0)) fail(ErrorKind::InvalidArgument, "Sinkhorn epsilon must be positive");
    SinkhornResult result;
    result.converged = true;
    double total = 0.0;
    for (const auto& d : split_by_dim(a, b)) {
        bool mismatch = false;
        total += essential_cost(d, p, mismatch);
        if (mismatch) {
            result.value = kInfinity;
            return result;
        }
        const auto sd = sinkhorn_dim(augmented_cost(d.finite_a, d.finite_b, p, ground), epsilon, max_iter);
        total += sd.cost;
        result.converged = result.converged && sd.converged;
        result.iterations = std::max(result.iterations, sd.iterations);
    }
    result.value = std::pow(total, 1.0 / p);
    return result;
}

double operator_norm(const Matrix& a, double p) {
    if (a.empty()) fail(ErrorKind::EmptyMatrix, "operator norm of an empty matrix");
    if (p == 1.0) {
        double best = 0.0;
        for (std::size_t c = 0; c < a.cols(); ++c) {
            double s = 0.0;
            for (std::size_t r = 0; r < a.rows(); ++r) s += std::abs(a(r, c));
            best = std::max(best, s);
        }
        return best;
    }
    if (p == kInfinity) {
        double best = 0.0;
        for (std::size_t r = 0; r < a.rows(); ++r) {
            double s = 0.0;
            for (double v : a.row(r)) s += std::abs(v);
            best = std::max(best, s);
        }
        return best;
    }
    if (p == 2.0) {
        const Matrix gram = a.transpose() * a;
        std::vector<double> x(a.cols());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = 1.0 + 0.1 * std::sin(static_cast<double>(i) + 1.0);
        double lambda = 0.0;
        for (std::size_t it = 0; it < 10000; ++it) {
            std::vector<double> y = gram.apply(x);
            double norm = std::sqrt(dot(y, y));
            if (norm == 0.0) return 0.0;
            for (double& v : y) v /= norm;
            const double prev = lambda;
            lambda = norm;
            x = std::move(y);
            if (it > 0 && std::abs(lambda - prev) <= 1e-10 * lambda) break;
        }
        return std::sqrt(lambda);
    }
    fail(ErrorKind::BadP, "operator norm supports p in {1, 2, inf}");
}

}  // namespace convpers
