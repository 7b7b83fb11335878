// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

#include <boost/rational.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "convpers/complex.hpp"
#include "convpers/grid.hpp"
#include "convpers/io.hpp"
#include "convpers/learn.hpp"
#include "convpers/metrics.hpp"
#include "convpers/persistence.hpp"
#include "convpers/transforms.hpp"
#include "support.hpp"

using namespace convpers;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::size_t max_dim_of(const FilteredComplex& k) { return k.size() == 0 ? 0 : k.max_dim(); }

Outcome betti_oracle() {
    std::mt19937_64 rng(1001);
    std::size_t checks = 0;
    for (int t = 0; t < 30; ++t) {
        const auto k = testing::random_monotone_complex(rng, 40);
        const auto d = reduce_and_pair(k);
        for (double a : filtration_values(k)) {
            for (std::size_t q = 0; q <= max_dim_of(k); ++q) {
                ++checks;
                if (d.persistent_betti(a, q) != betti_bruteforce(k, a, q)) {
                    return {false, "complex " + std::to_string(t) + " alpha " + format_real(a) + " q " + std::to_string(q)};
                }
            }
        }
    }
    return {true, std::to_string(checks) + " threshold/dimension checks"};
}

// Four vertices at 0; edges 01, 23 at 1; edges 12, 03, 02, 13 at 2; the
// square 01-12-23-30 at 3.
Outcome barcode_narrative() {
    std::vector<Cell> cells;
    for (std::size_t v = 0; v < 4; ++v) cells.push_back({v, 0, {}, {v}, 0.0});
    auto edge = [&](std::size_t a, std::size_t b, double value) {
        cells.push_back({cells.size(), 1, {a, b}, {a, b}, value});
        return cells.back().id;
    };
    const CellId e01 = edge(0, 1, 1), e23 = edge(2, 3, 1);
    const CellId e12 = edge(1, 2, 2), e03 = edge(0, 3, 2);
    edge(0, 2, 2);
    edge(1, 3, 2);
    std::vector<CellId> square{e01, e12, e23, e03};
    std::sort(square.begin(), square.end());
    cells.push_back({cells.size(), 2, square, {0, 1, 2, 3}, 3.0});
    const auto d = reduce_and_pair(FilteredComplex(std::move(cells), ComplexKind::Generic, 4));

    std::vector<std::pair<double, double>> h0;
    for (const auto& p : d.in_dim(0)) h0.emplace_back(p.birth, p.death);
    std::sort(h0.begin(), h0.end());
    const std::vector<std::pair<double, double>> expect_h0{{0, 1}, {0, 1}, {0, 2}, {0, kInfinity}};
    if (h0 != expect_h0) return {false, "H0 bars differ"};

    std::size_t born_at_2 = 0, die_at_3 = 0;
    for (const auto& p : d.in_dim(1)) {
        born_at_2 += p.birth == 2.0;
        die_at_3 += p.death == 3.0;
    }
    if (born_at_2 != 3 || die_at_3 != 1) return {false, "H1 births/deaths differ"};
    return {true, "H0 {(0,1)x2,(0,2),(0,inf)}, H1 three births at 2, one death at 3"};
}

Outcome trivial_identity() {
    std::mt19937_64 rng(1003);
    const auto bank = trivial_filter();
    for (int t = 0; t < 20; ++t) {
        const Image f = testing::random_image(rng, {6 + static_cast<std::size_t>(t % 4), 7});
        const auto r = cpt_image(f, bank, Stride::unit(2));
        const auto& a = r.entries.front().diagram;
        const auto b = image_persistence(f);
        if (a.points != b.points || a.cap != b.cap) return {false, "image " + std::to_string(t)};
    }
    return {true, "20 images bit-exact"};
}

double linf(const Image& a, const Image& b) {
    double m = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) m = std::max(m, std::abs(a.values()[i] - b.values()[i]));
    return m;
}

double l1(const Image& a, const Image& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.values().size(); ++i) s += std::abs(a.values()[i] - b.values()[i]);
    return s;
}

Outcome image_stability() {
    std::mt19937_64 rng(1004);
    std::uniform_real_distribution<double> scale(0.0, 0.3);
    const double factor = std::pow(3.0, 2) - std::pow(2.0, 2);
    double worst_inf = -kInfinity, worst_one = -kInfinity;
    for (int t = 0; t < 200; ++t) {
        const Image f1 = testing::random_image(rng, {8, 8});
        Image noise = testing::random_image(rng, {8, 8});
        const double s = scale(rng);
        std::vector<double> v(f1.values().begin(), f1.values().end());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += s * (noise.values()[i] - 0.5);
        const Image f2(f1.shape(), 1, std::move(v));
        const ConvFilter g = testing::random_filter(rng, {3, 3});
        FilterBank bank;
        bank.filters = {g};
        const auto d1 = cpt_image(f1, bank, Stride::unit(2)).entries.front().diagram;
        const auto d2 = cpt_image(f2, bank, Stride::unit(2)).entries.front().diagram;
        const double w_inf = bottleneck(d1, d2);
        const double w_one = wasserstein(d1, d2, 1);
        const double bound_inf = g.l1_norm() * linf(f1, f2);
        const double bound_one = factor * g.l1_norm() * l1(f1, f2);
        worst_inf = std::max(worst_inf, w_inf - bound_inf);
        worst_one = std::max(worst_one, w_one - bound_one);
        if (w_inf > bound_inf + 1e-9) return {false, "W_inf bound violated in trial " + std::to_string(t)};
        if (w_one > bound_one + 1e-9) return {false, "W_1 bound violated in trial " + std::to_string(t)};
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "max slack W_inf %.3g, W_1 %.3g", worst_inf, worst_one);
    return {true, buf};
}

Outcome simplicial_stability() {
    std::mt19937_64 rng(1005);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> eps(0.0, 0.5);
    const std::size_t nv = 10, d = 3;
    double worst = -kInfinity;
    for (int t = 0; t < 200; ++t) {
        const auto simplices = testing::random_simplices(rng, nv);
        const std::vector<double> zeros(nv, 0.0);
        SimplicialConvInput in1{simplicial_lower_star(simplices, zeros), Matrix(nv, nv), Matrix(nv, d)};
        for (std::size_t i = 0; i < nv; ++i) {
            for (std::size_t j = 0; j < nv; ++j) in1.adjacency(i, j) = n(rng);
            for (std::size_t j = 0; j < d; ++j) in1.features(i, j) = n(rng);
        }
        SimplicialConvInput in2 = in1;
        const double e = eps(rng);
        for (std::size_t i = 0; i < nv; ++i) {
            for (std::size_t j = 0; j < d; ++j) in2.features(i, j) += e * n(rng);
        }
        const auto weights = random_weights(d, 1, 7000 + static_cast<std::uint64_t>(t));
        const auto d1 = cpt_simplicial(in1, weights).front().diagram;
        const auto d2 = cpt_simplicial(in2, weights).front().diagram;
        double w_inf = 0.0;
        for (double x : weights.front()) w_inf = std::max(w_inf, std::abs(x));
        const double bound =
            operator_norm(in1.adjacency, kInfinity) * operator_norm(in1.features - in2.features, kInfinity) * w_inf;
        const double w = bottleneck(d1, d2);
        worst = std::max(worst, w - bound);
        if (w > bound + 1e-9) return {false, "bound violated in trial " + std::to_string(t)};
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "max slack %.3g", worst);
    return {true, buf};
}

Outcome transport_oracle() {
    std::mt19937_64 rng(1006);
    double worst_exact = 0.0;
    for (int t = 0; t < 100; ++t) {
        const auto a = testing::random_diagram(rng, 4, 2);
        const auto b = testing::random_diagram(rng, 4, 2);
        worst_exact = std::max(worst_exact, std::abs(bottleneck(a, b) - wasserstein_bruteforce(a, b, kInfinity)));
        worst_exact = std::max(worst_exact, std::abs(wasserstein(a, b, 1) - wasserstein_bruteforce(a, b, 1)));
        worst_exact = std::max(worst_exact, std::abs(wasserstein(a, b, 2) - wasserstein_bruteforce(a, b, 2)));
    }
    if (worst_exact > 1e-12) return {false, "exact solvers off by " + format_real(worst_exact)};
    double worst_rel = 0.0;
    int pairs = 0;
    while (pairs < 20) {
        const auto a = testing::random_diagram(rng, 6);
        const auto b = testing::random_diagram(rng, 6);
        const double exact = wasserstein(a, b, 2);
        if (exact == 0.0) continue;
        const auto s = wasserstein_sinkhorn(a, b, 2, 0.01 * transport_scale(a, b, 2));
        worst_rel = std::max(worst_rel, std::abs(s.value - exact) / exact);
        ++pairs;
    }
    char buf[128];
    std::snprintf(buf, sizeof buf, "exact max error %.2g, sinkhorn max relative error %.4f", worst_exact, worst_rel);
    return {worst_rel <= 0.05, buf};
}

using Q = boost::rational<long long>;

// Null space of an integer matrix by exact Gauss-Jordan elimination; each basis
// vector is scaled to integers.
std::vector<std::vector<long long>> integer_null_space(const std::vector<std::vector<double>>& rows, std::size_t cols) {
    std::vector<std::vector<Q>> m;
    for (const auto& r : rows) {
        std::vector<Q> qr;
        for (double x : r) qr.emplace_back(static_cast<long long>(x));
        m.push_back(std::move(qr));
    }
    std::vector<std::size_t> pivots;
    std::size_t rank = 0;
    for (std::size_t c = 0; c < cols && rank < m.size(); ++c) {
        std::size_t p = rank;
        while (p < m.size() && m[p][c] == Q(0)) ++p;
        if (p == m.size()) continue;
        std::swap(m[p], m[rank]);
        const Q lead = m[rank][c];
        for (auto& x : m[rank]) x /= lead;
        for (std::size_t r = 0; r < m.size(); ++r) {
            if (r == rank || m[r][c] == Q(0)) continue;
            const Q f = m[r][c];
            for (std::size_t j = 0; j < cols; ++j) m[r][j] -= f * m[rank][j];
        }
        pivots.push_back(c);
        ++rank;
    }
    std::vector<std::vector<long long>> basis;
    for (std::size_t free = 0; free < cols; ++free) {
        if (std::find(pivots.begin(), pivots.end(), free) != pivots.end()) continue;
        std::vector<Q> v(cols, Q(0));
        v[free] = Q(1);
        for (std::size_t i = 0; i < pivots.size(); ++i) v[pivots[i]] = -m[i][free];
        long long lcm = 1;
        for (const auto& x : v) lcm = std::lcm(lcm, x.denominator());
        std::vector<long long> iv;
        for (const auto& x : v) iv.push_back(boost::rational_cast<long long>(x * lcm));
        basis.push_back(std::move(iv));
    }
    return basis;
}

// Small integer images and filters keep every product and sum exact in double.
Outcome orthogonality() {
    std::mt19937_64 rng(1007);
    std::uniform_int_distribution<int> coef(-2, 2), gval(-3, 3);
    const GridShape b{3, 3};
    const Stride k{2, 2};
    for (int t = 0; t < 20; ++t) {
        const Image f = testing::random_integer_image(rng, {5, 5}, 0, 9);
        const auto basis = integer_null_space(extract_patches(f, b, k), b.size());
        if (basis.empty()) return {false, "empty null space in trial " + std::to_string(t)};
        std::vector<double> h(b.size(), 0.0), g(b.size());
        for (const auto& v : basis) {
            const int c = coef(rng);
            for (std::size_t i = 0; i < v.size(); ++i) h[i] += static_cast<double>(c * v[i]);
        }
        for (double& x : g) x = gval(rng);
        std::vector<double> gh(b.size());
        for (std::size_t i = 0; i < gh.size(); ++i) gh[i] = g[i] + h[i];
        const Image fh = convolve(f, ConvFilter(b, 1, h), k);
        for (double x : fh.values()) {
            if (x != 0.0) return {false, "f*h nonzero in trial " + std::to_string(t)};
        }
        FilterBank bank;
        bank.filters = {ConvFilter(b, 1, g), ConvFilter(b, 1, gh)};
        const auto r = cpt_image(f, bank, k);
        if (r.entries[0].diagram.points != r.entries[1].diagram.points) {
            return {false, "diagrams differ in trial " + std::to_string(t)};
        }
    }
    return {true, "20 trials, exact null-space filters"};
}

bool separated(const Image& a, const Image& b, const FilterBank& bank) {
    const auto ra = cpt_image(a, bank, Stride::unit(2));
    const auto rb = cpt_image(b, bank, Stride::unit(2));
    for (std::size_t i = 0; i < bank.size(); ++i) {
        if (bottleneck(ra.entries[i].diagram, rb.entries[i].diagram) > 1e-9) return true;
    }
    return false;
}

Outcome injectivity() {
    std::mt19937_64 rng(1008);
    const auto bank = random_filters({3, 3}, 1, 25, 1008);
    int hits = 0;
    for (int t = 0; t < 50; ++t) {
        const Image a = testing::random_image(rng, {6, 6});
        const Image b = testing::random_image(rng, {6, 6});
        hits += separated(a, b, bank);
    }
    // Transposed pair: both have finite H0 = {(0,1)} plus the essential class.
    const Image p = Image::from_rows({{0, 1, 0}, {1, 1, 1}, {1, 1, 1}});
    const Image q = Image::from_rows({{0, 1, 1}, {1, 1, 1}, {0, 1, 1}});
    const auto dp = image_persistence(p), dq = image_persistence(q);
    const bool same = dp.same_points(dq) && dp.in_dim(0).size() == 2;
    const bool split = separated(p, q, bank);
    const std::string detail = std::to_string(hits) + "/50 random pairs separated; constructed pair " +
                               (same ? "has equal diagrams" : "DIFFERS") + " and is " + (split ? "separated" : "NOT separated");
    return {hits >= 49 && same && split, detail};
}

Outcome region_arithmetic() {
    const auto r = region_shape({4, 3}, {2, 2}, {2, 1});
    return {r == GridShape{2, 2}, "region " + r.to_string()};
}

Outcome euler_consistency() {
    std::mt19937_64 rng(1010);
    for (int t = 0; t < 20; ++t) {
        const auto k = testing::random_monotone_complex(rng, 40);
        const auto thresholds = filtration_values(k);
        const auto curve = euler_curve(k, thresholds);
        for (std::size_t i = 0; i < thresholds.size(); ++i) {
            long long chi = 0;
            for (std::size_t q = 0; q <= max_dim_of(k); ++q) {
                const auto b = static_cast<long long>(betti_bruteforce(k, thresholds[i], q));
                chi += q % 2 == 0 ? b : -b;
            }
            if (chi != curve.values[i]) return {false, "complex " + std::to_string(t)};
        }
    }
    return {true, "20 complexes exact"};
}

Outcome classification() {
    const auto data = load_dataset(std::filesystem::path(CONVPERS_DATA_DIR) / "stripes12" / "manifest.csv");
    if (data.images.size() != 300) return {false, "dataset has " + std::to_string(data.images.size()) + " images"};
    ExperimentConfig random;
    random.seed_list = {0, 1, 2, 3, 4};
    ExperimentConfig trivial = random;
    trivial.bank = BankKind::Trivial;
    const auto a = run_experiment(random, data);
    const auto b = run_experiment(trivial, data);
    char buf[128];
    std::snprintf(buf, sizeof buf, "random %.3f vs trivial %.3f", a.mean, b.mean);
    return {a.mean - b.mean >= 0.05, buf};
}

Outcome performance() {
    std::mt19937_64 rng(1012);
    const Image f = testing::random_image(rng, {8, 8});
    const auto bank = random_filters({3, 3}, 1, 25, 12);
    TransformOptions one, many;
    one.threads = 1;
    many.threads = 4;
    const auto t0 = Clock::now();
    const auto a = cpt_image(f, bank, Stride::unit(2), many);
    const double elapsed = seconds_since(t0);
    const auto b = cpt_image(f, bank, Stride::unit(2), one);
    for (std::size_t i = 0; i < a.entries.size(); ++i) {
        if (a.entries[i].diagram.points != b.entries[i].diagram.points || a.entries[i].diagram.cap != b.entries[i].diagram.cap) {
            return {false, "thread counts disagree at filter " + std::to_string(i)};
        }
    }
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.4f s with 4 threads, identical to 1 thread", elapsed);
    return {elapsed < 1.0, buf};
}

struct Criterion {
    const char* name;
    double budget;  // seconds; 0 for none
    std::function<Outcome()> run;
};

}  // namespace

int main() {
    const std::vector<Criterion> criteria{
        {"persistence oracle", 10.0, betti_oracle},
        {"barcode narrative", 0.0, barcode_narrative},
        {"trivial filter identity", 0.0, trivial_identity},
        {"image stability", 60.0, image_stability},
        {"simplicial stability", 0.0, simplicial_stability},
        {"transport oracle", 0.0, transport_oracle},
        {"convolutional orthogonality", 0.0, orthogonality},
        {"injectivity sampling", 0.0, injectivity},
        {"region arithmetic", 0.0, region_arithmetic},
        {"euler consistency", 0.0, euler_consistency},
        {"classification uplift", 300.0, classification},
        {"determinism and performance", 0.0, performance},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto& c = criteria[i];
        const auto t0 = Clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double s = seconds_since(t0);
        if (c.budget > 0.0 && s >= c.budget) {
            o.pass = false;
            o.detail += "; over time budget";
        }
        failures += !o.pass;
        std::printf("%s %2zu %-28s %8.3fs  %s\n", o.pass ? "PASS" : "FAIL", i + 1, c.name, s, o.detail.c_str());
        std::fflush(stdout);
    }
    std::fflush(stdout);
    return failures == 0 ? 0 : 1;
}
