#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"
#include "merw/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <numeric>
#include <optional>
#include <utility>
#include <vector>

namespace merw {

/// Per-site path counts at time t (exact integers).
struct CountVector {
    std::vector<BigInt> counts;
    long long t = 0;
};

inline CountVector delta_start(const FlipGraph& graph, int site) {
    graph.ordering().check_site(site);
    CountVector n;
    n.counts.assign(static_cast<size_t>(graph.num_sites()), BigInt(0));
    n.counts[static_cast<size_t>(site - 1)] = 1;
    return n;
}

inline CountVector start_counts(const WalkConfig& config) {
    if (std::holds_alternative<int>(config.start)) return delta_start(config.graph, std::get<int>(config.start));
    CountVector n;
    n.counts = std::get<std::vector<BigInt>>(config.start);
    return n;
}

inline BigInt total_paths(const CountVector& n) {
    BigInt s = 0;
    for (const auto& c : n.counts) s += c;
    return s;
}

/// Exact per-site probabilities; entries sum to exactly 1.
struct Distribution {
    std::vector<Rational> probs;

    explicit Distribution(std::vector<Rational> p) : probs(std::move(p)) {
        Rational sum = 0;
        for (const auto& q : probs) {
            if (q < 0) throw PreconditionError("Distribution: negative entry");
            sum += q;
        }
        if (sum != 1) throw PreconditionError("Distribution: entries sum to " + merw::to_string(sum) + ", not 1");
    }

    static Distribution normalized(std::vector<Rational> weights) {
        Rational sum = 0;
        for (const auto& q : weights) {
            if (q < 0) throw PreconditionError("Distribution: negative weight");
            sum += q;
        }
        if (sum == 0) throw PreconditionError("Distribution: zero total weight");
        for (auto& q : weights) q /= sum;
        return Distribution(std::move(weights));
    }
};

namespace detail {

inline void check_length(const FlipGraph& graph, const CountVector& n, const char* op) {
    if (static_cast<int>(n.counts.size()) != graph.num_sites())
        throw PreconditionError(std::string(op) + ": count vector length " + std::to_string(n.counts.size()) +
                                " does not match graph with " + std::to_string(graph.num_sites()) + " sites");
    for (const auto& c : n.counts)
        if (c < 0) throw PreconditionError(std::string(op) + ": negative path count");
}

inline std::vector<BigInt> mat_vec(const FlipGraph& graph, const std::vector<BigInt>& v) {
    const int m = graph.num_sites();
    std::vector<BigInt> w(static_cast<size_t>(m), BigInt(0));
    for (int i = 1; i <= m; ++i) {
        BigInt acc = 0;
        for (int j : graph.neighbors(i)) acc += v[static_cast<size_t>(j - 1)];
        w[static_cast<size_t>(i - 1)] = std::move(acc);
    }
    return w;
}

inline std::vector<Rational> mat_vec(const FlipGraph& graph, const std::vector<Rational>& v) {
    const int m = graph.num_sites();
    std::vector<Rational> w(static_cast<size_t>(m), Rational(0));
    for (int i = 1; i <= m; ++i) {
        Rational acc = 0;
        for (int j : graph.neighbors(i)) acc += v[static_cast<size_t>(j - 1)];
        w[static_cast<size_t>(i - 1)] = std::move(acc);
    }
    return w;
}

// 1-based sites reachable from the given start sites (undirected BFS).
inline std::vector<int> reachable_sites(const FlipGraph& graph, const std::vector<int>& starts) {
    std::vector<char> seen(static_cast<size_t>(graph.num_sites()) + 1, 0);
    std::deque<int> queue;
    for (int s : starts)
        if (!seen[static_cast<size_t>(s)]) {
            seen[static_cast<size_t>(s)] = 1;
            queue.push_back(s);
        }
    while (!queue.empty()) {
        const int i = queue.front();
        queue.pop_front();
        for (int j : graph.neighbors(i))
            if (!seen[static_cast<size_t>(j)]) {
                seen[static_cast<size_t>(j)] = 1;
                queue.push_back(j);
            }
    }
    std::vector<int> out;
    for (int i = 1; i <= graph.num_sites(); ++i)
        if (seen[static_cast<size_t>(i)]) out.push_back(i);
    return out;
}

// Connected components (undirected; adjacency is symmetric) of a site subset.
inline std::vector<std::vector<int>> connected_components(const FlipGraph& graph, const std::vector<int>& sites) {
    std::vector<char> in_set(static_cast<size_t>(graph.num_sites()) + 1, 0);
    for (int s : sites) in_set[static_cast<size_t>(s)] = 1;
    std::vector<char> seen(static_cast<size_t>(graph.num_sites()) + 1, 0);
    std::vector<std::vector<int>> comps;
    for (int s : sites) {
        if (seen[static_cast<size_t>(s)]) continue;
        std::vector<int> comp;
        std::deque<int> queue{s};
        seen[static_cast<size_t>(s)] = 1;
        while (!queue.empty()) {
            const int i = queue.front();
            queue.pop_front();
            comp.push_back(i);
            for (int j : graph.neighbors(i))
                if (in_set[static_cast<size_t>(j)] && !seen[static_cast<size_t>(j)]) {
                    seen[static_cast<size_t>(j)] = 1;
                    queue.push_back(j);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

struct FloatIteration {
    std::vector<double> probs; // full length, L1-normalized
    double growth = 0.0;
    int iterations = 0;
    bool converged = false;
};

// Normalized power iteration v <- Mv / |Mv|_1 restricted to the given sites.
inline FloatIteration power_iteration(const FlipGraph& graph, const std::vector<int>& sites,
                                      const std::vector<double>& start, double tolerance, int max_iter) {
    const int m = graph.num_sites();
    std::vector<char> in_set(static_cast<size_t>(m) + 1, 0);
    for (int s : sites) in_set[static_cast<size_t>(s)] = 1;

    FloatIteration it;
    it.probs.assign(static_cast<size_t>(m), 0.0);
    double total = 0.0;
    for (int s : sites) total += start[static_cast<size_t>(s - 1)];
    if (total <= 0.0) throw PreconditionError("power iteration: start vector has no mass on the reachable set");
    for (int s : sites) it.probs[static_cast<size_t>(s - 1)] = start[static_cast<size_t>(s - 1)] / total;

    std::vector<double> next(static_cast<size_t>(m), 0.0);
    for (int k = 1; k <= max_iter; ++k) {
        double sum = 0.0;
        for (int i : sites) {
            double acc = 0.0;
            for (int j : graph.neighbors(i))
                if (in_set[static_cast<size_t>(j)]) acc += it.probs[static_cast<size_t>(j - 1)];
            next[static_cast<size_t>(i - 1)] = acc;
            sum += acc;
        }
        if (sum <= 0.0) throw ConvergenceError("power iteration: all mass vanished (no admitted transitions)");
        double delta = 0.0;
        for (int i : sites) {
            const size_t idx = static_cast<size_t>(i - 1);
            const double v = next[idx] / sum;
            delta = std::max(delta, std::abs(v - it.probs[idx]));
            it.probs[idx] = v;
        }
        it.growth = sum;
        it.iterations = k;
        if (delta < tolerance) {
            it.converged = true;
            break;
        }
    }
    return it;
}

// Nullspace basis of a square rational matrix by Gauss-Jordan elimination.
inline std::vector<std::vector<Rational>> rational_nullspace(std::vector<std::vector<Rational>> a) {
    const size_t m = a.size();
    if (m == 0) return {};
    const size_t cols = a[0].size();
    std::vector<size_t> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < cols && row < m; ++col) {
        size_t sel = row;
        while (sel < m && a[sel][col] == 0) ++sel;
        if (sel == m) continue;
        std::swap(a[sel], a[row]);
        const Rational inv = a[row][col];
        for (size_t c = col; c < cols; ++c) a[row][c] /= inv;
        for (size_t r = 0; r < m; ++r) {
            if (r == row || a[r][col] == 0) continue;
            const Rational f = a[r][col];
            for (size_t c = col; c < cols; ++c) a[r][c] -= f * a[row][c];
        }
        pivot_col.push_back(col);
        ++row;
    }
    std::vector<char> is_pivot(cols, 0);
    for (size_t c : pivot_col) is_pivot[c] = 1;
    std::vector<std::vector<Rational>> basis;
    for (size_t free_col = 0; free_col < cols; ++free_col) {
        if (is_pivot[free_col]) continue;
        std::vector<Rational> v(cols, Rational(0));
        v[free_col] = 1;
        for (size_t r = 0; r < pivot_col.size(); ++r) v[pivot_col[r]] = -a[r][free_col];
        basis.push_back(std::move(v));
    }
    return basis;
}

struct ComponentEigen {
    std::vector<int> sites;
    bool exact = false;
    BigInt growth_int;                 // valid when exact
    std::vector<Rational> eigenvector; // indexed like sites, strictly positive, when exact
    double growth_float = 0.0;
    int iterations = 0;
    bool float_converged = false;
};

// Try to certify the Perron pair of one connected component exactly. The
// adjacency matrix is an integer symmetric 0/1 matrix, so any rational
// eigenvalue is an integer; a 1-dimensional strictly-positive kernel of
// (M - L*I) identifies L as the Perron root.
inline ComponentEigen component_eigen(const FlipGraph& graph, const std::vector<int>& comp,
                                      const std::vector<double>& start, double tolerance, int max_iter) {
    ComponentEigen ce;
    ce.sites = comp;
    FloatIteration it = power_iteration(graph, comp, start, tolerance, max_iter);
    ce.growth_float = it.growth;
    ce.iterations = it.iterations;
    ce.float_converged = it.converged;

    const double rounded = std::round(it.growth);
    if (std::abs(it.growth - rounded) > 1e-6 || rounded < 0) return ce;
    const BigInt L = static_cast<long long>(rounded);

    const size_t k = comp.size();
    std::vector<int> local(static_cast<size_t>(graph.num_sites()) + 1, -1);
    for (size_t a = 0; a < k; ++a) local[static_cast<size_t>(comp[a])] = static_cast<int>(a);
    std::vector<std::vector<Rational>> mat(k, std::vector<Rational>(k, Rational(0)));
    for (size_t a = 0; a < k; ++a) {
        for (int j : graph.neighbors(comp[a])) {
            const int b = local[static_cast<size_t>(j)];
            if (b >= 0) mat[a][static_cast<size_t>(b)] += 1;
        }
        mat[a][a] -= Rational(L);
    }
    auto basis = rational_nullspace(std::move(mat));
    if (basis.size() != 1) return ce;
    std::vector<Rational>& v = basis[0];
    bool all_pos = true, all_neg = true;
    for (const auto& q : v) {
        if (q <= 0) all_pos = false;
        if (q >= 0) all_neg = false;
    }
    if (!all_pos && !all_neg) return ce;
    if (all_neg)
        for (auto& q : v) q = -q;

    // Certify M*psi = L*psi explicitly on the component.
    for (size_t a = 0; a < k; ++a) {
        Rational acc = 0;
        for (int j : graph.neighbors(comp[a])) {
            const int b = local[static_cast<size_t>(j)];
            if (b >= 0) acc += v[static_cast<size_t>(b)];
        }
        if (acc != Rational(L) * v[a]) return ce;
    }
    ce.exact = true;
    ce.growth_int = L;
    ce.eigenvector = std::move(v);
    return ce;
}

} // namespace detail

/// Exact application of t adjacency-matrix steps: result = M^t * n0.
/// Single-step composition equals multi-step (the walk is Markov).
inline CountVector evolve(const FlipGraph& graph, const CountVector& n0, long long steps) {
    detail::check_length(graph, n0, "evolve");
    if (steps < 0) throw PreconditionError("evolve: negative step count");
    CountVector n = n0;
    for (long long s = 0; s < steps; ++s) n.counts = detail::mat_vec(graph, n.counts);
    n.t = n0.t + steps;
    return n;
}

enum class ArrivalMode { kExact, kFloat };

struct ArrivalOptions {
    ArrivalMode mode = ArrivalMode::kExact;
    double tolerance = 1e-13;
    int max_iter = 500;
};

/// The limit of normalize(M^t n0): the probability that a path that started
/// infinitely long ago arrives at each site.
struct ArrivalResult {
    SiteOrdering ordering;
    Distribution distribution;
    Rational growth_rate;     // dominant eigenvalue; exact when `exact`, else the converged float
    std::vector<int> support; // 1-based sites with nonzero probability, ascending
    bool exact = false;       // eigen-equation certified in rational arithmetic
    bool converged = false;
    int iterations = 0;

    const Rational& prob(int site) const {
        ordering.check_site(site);
        return distribution.probs[static_cast<size_t>(site - 1)];
    }
    bool in_support(int site) const { return std::binary_search(support.begin(), support.end(), site); }
};

namespace detail {

inline std::vector<int> support_of(const std::vector<Rational>& probs) {
    std::vector<int> s;
    for (size_t i = 0; i < probs.size(); ++i)
        if (probs[i] != 0) s.push_back(static_cast<int>(i) + 1);
    return s;
}

inline ArrivalResult make_float_result(const FlipGraph& graph, const std::vector<int>& reachable,
                                       const std::vector<double>& start, double tolerance, int max_iter) {
    FloatIteration it = power_iteration(graph, reachable, start, tolerance, max_iter);
    if (!it.converged)
        throw ConvergenceError("arrival_distribution: no convergence within " + std::to_string(max_iter) +
                               " iterations (periodic or ill-conditioned structure)");
    constexpr double kSupportEps = 1e-9;
    std::vector<Rational> probs(it.probs.size(), Rational(0));
    for (size_t i = 0; i < it.probs.size(); ++i)
        if (it.probs[i] > kSupportEps) probs[i] = rational_from_double(it.probs[i]);
    ArrivalResult r{graph.ordering(), Distribution::normalized(std::move(probs)),
                    rational_from_double(it.growth), {}, false, true, it.iterations};
    r.support = support_of(r.distribution.probs);
    return r;
}

} // namespace detail

inline ArrivalResult arrival_distribution(const FlipGraph& graph, const CountVector& n0,
                                          const ArrivalOptions& options = {}) {
    detail::check_length(graph, n0, "arrival_distribution");
    if (options.max_iter < 1) throw PreconditionError("arrival_distribution: max_iter must be >= 1");
    if (!(options.tolerance > 0)) throw PreconditionError("arrival_distribution: tolerance must be > 0");

    std::vector<int> start_sites;
    for (int i = 1; i <= graph.num_sites(); ++i)
        if (n0.counts[static_cast<size_t>(i - 1)] > 0) start_sites.push_back(i);
    if (start_sites.empty()) throw PreconditionError("arrival_distribution: zero start vector");

    const std::vector<int> reachable = detail::reachable_sites(graph, start_sites);
    const auto comps = detail::connected_components(graph, reachable);
    for (const auto& comp : comps) {
        bool has_loop = false;
        for (int i : comp)
            if (graph.has_self_loop(i)) {
                has_loop = true;
                break;
            }
        if (!has_loop)
            throw PreconditionError(
                "arrival_distribution: reachable component without a self-loop is periodic; no limit exists");
    }

    std::vector<double> start_float(static_cast<size_t>(graph.num_sites()), 0.0);
    {
        // Scale counts into doubles for the iteration seed; exact magnitudes
        // are irrelevant after normalization, only support and ratios matter.
        BigInt max_c = 0;
        for (const auto& c : n0.counts) max_c = std::max(max_c, c);
        const Rational scale(1, max_c);
        for (size_t i = 0; i < n0.counts.size(); ++i)
            if (n0.counts[i] > 0) start_float[i] = to_double(Rational(n0.counts[i]) * scale);
    }

    if (options.mode == ArrivalMode::kFloat)
        return detail::make_float_result(graph, reachable, start_float, options.tolerance, options.max_iter);

    // Fast path: the start is already an exact fixed point of one step.
    {
        std::vector<Rational> v(n0.counts.size());
        Rational vt = 0;
        for (size_t i = 0; i < n0.counts.size(); ++i) {
            v[i] = Rational(n0.counts[i]);
            vt += v[i];
        }
        std::vector<Rational> w = detail::mat_vec(graph, v);
        Rational wt = 0;
        for (const auto& q : w) wt += q;
        if (wt != 0) {
            bool fixed = true;
            for (size_t i = 0; i < v.size() && fixed; ++i) fixed = (w[i] * vt == v[i] * wt);
            if (fixed) {
                for (auto& q : v) q /= vt;
                ArrivalResult r{graph.ordering(), Distribution(std::move(v)), wt / vt, {}, true, true, 0};
                r.support = detail::support_of(r.distribution.probs);
                return r;
            }
        }
    }

    std::vector<detail::ComponentEigen> eigens;
    eigens.reserve(comps.size());
    for (const auto& comp : comps)
        eigens.push_back(detail::component_eigen(graph, comp, start_float, options.tolerance, options.max_iter));

    bool have_exact = false;
    BigInt exact_max = 0;
    double float_max = -1.0;
    int iterations = 0;
    for (const auto& ce : eigens) {
        iterations = std::max(iterations, ce.iterations);
        if (ce.exact) {
            if (!have_exact || ce.growth_int > exact_max) exact_max = ce.growth_int;
            have_exact = true;
        } else {
            float_max = std::max(float_max, ce.growth_float);
        }
        if (!ce.exact && !ce.float_converged)
            throw ConvergenceError("arrival_distribution: no convergence within " + std::to_string(options.max_iter) +
                                   " iterations (periodic or ill-conditioned structure)");
    }

    // The exact path applies when every component with maximal growth is
    // certified; an uncertified (irrational Perron root) component may only
    // be ignored if it demonstrably grows slower.
    const double exact_max_f = have_exact ? exact_max.convert_to<double>() : -1.0;
    if (!have_exact || float_max > exact_max_f - 1e-6)
        return detail::make_float_result(graph, reachable, start_float, options.tolerance, options.max_iter);

    std::vector<Rational> limit(static_cast<size_t>(graph.num_sites()), Rational(0));
    for (const auto& ce : eigens) {
        if (!ce.exact || ce.growth_int != exact_max) continue;
        // Orthogonal projection of n0 onto the component's Perron direction:
        // coefficient <n0, psi> / <psi, psi>. Scale-free in psi.
        Rational dot_n0 = 0, dot_psi = 0;
        for (size_t a = 0; a < ce.sites.size(); ++a) {
            const Rational& p = ce.eigenvector[a];
            dot_n0 += Rational(n0.counts[static_cast<size_t>(ce.sites[a] - 1)]) * p;
            dot_psi += p * p;
        }
        const Rational alpha = dot_n0 / dot_psi;
        for (size_t a = 0; a < ce.sites.size(); ++a)
            limit[static_cast<size_t>(ce.sites[a] - 1)] = alpha * ce.eigenvector[a];
    }
    ArrivalResult r{graph.ordering(), Distribution::normalized(std::move(limit)), Rational(exact_max),
                    {},              true,
                    true,            iterations};
    r.support = detail::support_of(r.distribution.probs);
    return r;
}

/// Row-stochastic one-step transition probabilities of the equal-path-weight
/// walk: P(i->j) = M_ij * psi_j / (lambda * psi_i) on the arrival support.
class TransitionMatrix {
public:
    TransitionMatrix(SiteOrdering ordering, std::vector<int> support,
                     std::vector<std::vector<std::pair<int, Rational>>> rows)
        : ordering_(std::move(ordering)), support_(std::move(support)), rows_(std::move(rows)) {}

    const std::vector<int>& support() const { return support_; }
    const SiteOrdering& ordering() const { return ordering_; }

    bool defined(int site) const { return std::binary_search(support_.begin(), support_.end(), site); }

    /// Nonzero entries of row i as (target site, probability), ascending targets.
    const std::vector<std::pair<int, Rational>>& row(int i) const {
        require_support(i);
        return rows_[static_cast<size_t>(i - 1)];
    }

    Rational prob(int i, int j) const {
        require_support(i);
        ordering_.check_site(j);
        for (const auto& [target, p] : rows_[static_cast<size_t>(i - 1)])
            if (target == j) return p;
        return Rational(0);
    }

private:
    void require_support(int i) const {
        ordering_.check_site(i);
        if (!defined(i))
            throw PreconditionError("transition matrix requested outside the arrival support: site " +
                                    std::to_string(i));
    }

    SiteOrdering ordering_;
    std::vector<int> support_;
    std::vector<std::vector<std::pair<int, Rational>>> rows_;
};

inline TransitionMatrix merw_transition_matrix(const FlipGraph& graph, const ArrivalResult& arrival) {
    if (!arrival.converged) throw PreconditionError("merw_transition_matrix: arrival distribution not converged");
    if (graph.ordering() != arrival.ordering)
        throw PreconditionError("merw_transition_matrix: arrival belongs to a different site ordering");
    std::vector<std::vector<std::pair<int, Rational>>> rows(static_cast<size_t>(graph.num_sites()));
    for (int i : arrival.support) {
        Rational row_total = 0;
        std::vector<std::pair<int, Rational>> row;
        for (int j : graph.neighbors(i)) {
            const Rational& pj = arrival.prob(j);
            if (pj != 0) {
                row.emplace_back(j, pj);
                row_total += pj;
            }
        }
        if (row_total == 0)
            throw PreconditionError("merw_transition_matrix: support site " + std::to_string(i) +
                                    " has no admitted transitions");
        for (auto& [j, p] : row) p /= row_total;
        rows[static_cast<size_t>(i - 1)] = std::move(row);
    }
    return TransitionMatrix(graph.ordering(), arrival.support, std::move(rows));
}

/// Continuation counts before a horizon: N_T = 1, N_k = M * N_{k+1}, so
/// N_k(j) is the number of length-(T-k) path extensions from site j.
inline std::vector<CountVector> suffix_continuation_counts(const FlipGraph& graph, long long horizon) {
    if (horizon < 0) throw PreconditionError("suffix_continuation_counts: negative horizon");
    std::vector<CountVector> seq(static_cast<size_t>(horizon) + 1);
    seq[static_cast<size_t>(horizon)].counts.assign(static_cast<size_t>(graph.num_sites()), BigInt(1));
    seq[static_cast<size_t>(horizon)].t = horizon;
    for (long long k = horizon - 1; k >= 0; --k) {
        seq[static_cast<size_t>(k)].counts = detail::mat_vec(graph, seq[static_cast<size_t>(k + 1)].counts);
        seq[static_cast<size_t>(k)].t = k;
    }
    return seq;
}

} // namespace merw
