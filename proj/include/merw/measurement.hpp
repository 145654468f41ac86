#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/statespace.hpp"

#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace merw {

/// Two distinct property positions measured together. Measuring all n
/// properties at once is not representable: the model only ever freezes a
/// pair, leaving the remaining properties free to flip.
struct MeasurementPair {
    int a;
    int b;

    MeasurementPair(int a_, int b_) : a(a_), b(b_) {
        if (a == b) throw PreconditionError("MeasurementPair: positions must be distinct");
        if (a < 0 || b < 0) throw PreconditionError("MeasurementPair: negative property position");
    }

    void check_dimension(int n) const {
        if (a >= n || b >= n)
            throw PreconditionError("MeasurementPair: position out of range for " + std::to_string(n) +
                                    " properties");
    }

    std::string name() const {
        auto prop = [](int k) {
            return k < 3 ? std::string(1, "xyz"[static_cast<size_t>(k)]) : "p" + std::to_string(k);
        };
        return prop(a) + prop(b);
    }

    friend bool operator==(const MeasurementPair& l, const MeasurementPair& r) { return l.a == r.a && l.b == r.b; }
};

/// The three canonical test pairs (x,y), (y,z), (z,x) of the 3-property model.
inline std::vector<MeasurementPair> canonical_pairs() { return {{0, 1}, {1, 2}, {2, 0}}; }

/// Retain a transition iff its endpoints agree on both measured properties.
/// Self-loops always survive; masking twice with the same pair is idempotent.
inline FlipGraph mask_graph(const FlipGraph& graph, const MeasurementPair& pair) {
    pair.check_dimension(graph.dimension());
    std::vector<std::pair<int, int>> edges;
    std::vector<int> loops;
    for (int i = 1; i <= graph.num_sites(); ++i) {
        const PropertyState& si = graph.ordering().state_of_index(i);
        for (int j : graph.neighbors(i)) {
            if (j == i) {
                loops.push_back(i);
                continue;
            }
            if (j < i) continue;
            const PropertyState& sj = graph.ordering().state_of_index(j);
            if (si.bit(pair.a) == sj.bit(pair.a) && si.bit(pair.b) == sj.bit(pair.b)) edges.emplace_back(i, j);
        }
    }
    return FlipGraph(graph.ordering(), edges, loops);
}

/// One-step transitions admitted while the walk's arrival ensemble is in
/// place: all (from, to) with from in the arrival support, weighted flat over
/// the admitted continuations of each arriving path (weight proportional to
/// the arrival probability of the from-site), normalized to total 1.
struct TrajectoryEnsemble {
    std::vector<std::pair<int, int>> transitions; // 1-based (from, to)
    std::vector<Rational> weights;                // aligned with transitions, sums to exactly 1
    std::optional<MeasurementPair> pair;          // absent for the unmasked ensemble
    SiteOrdering ordering;

    int trajectory_count() const { return static_cast<int>(transitions.size()); }
};

inline TrajectoryEnsemble enumerate_trajectories(const FlipGraph& masked, const ArrivalResult& arrival,
                                                 std::optional<MeasurementPair> pair = std::nullopt) {
    if (!arrival.converged) throw PreconditionError("enumerate_trajectories: arrival distribution not converged");
    if (masked.ordering() != arrival.ordering)
        throw PreconditionError("enumerate_trajectories: arrival belongs to a different site ordering");
    if (pair) pair->check_dimension(masked.dimension());

    TrajectoryEnsemble ens{{}, {}, pair, masked.ordering()};
    Rational total = 0;
    for (int i : arrival.support) {
        const PropertyState& si = masked.ordering().state_of_index(i);
        for (int j : masked.neighbors(i)) {
            if (pair) {
                const PropertyState& sj = masked.ordering().state_of_index(j);
                if (si.bit(pair->a) != sj.bit(pair->a) || si.bit(pair->b) != sj.bit(pair->b))
                    throw PreconditionError("enumerate_trajectories: graph admits a transition that changes a "
                                            "measured property; mask the graph first");
            }
            ens.transitions.emplace_back(i, j);
            ens.weights.push_back(arrival.prob(i));
            total += arrival.prob(i);
        }
    }
    if (ens.transitions.empty())
        throw DegenerateEnsembleError("enumerate_trajectories: measurement admits no trajectories");
    for (auto& w : ens.weights) w /= total;
    return ens;
}

/// Convenience: mask, then enumerate, for one measured pair.
inline TrajectoryEnsemble measure(const FlipGraph& graph, const ArrivalResult& arrival, const MeasurementPair& pair) {
    return enumerate_trajectories(mask_graph(graph, pair), arrival, pair);
}

struct MeasurementOutcome {
    MeasurementPair pair;
    Rational p_equal;
    int trajectory_count = 0;
    int favorable_count = 0;
};

/// Probability that the two measured (frozen) properties are read out equal:
/// the weight mass of trajectories whose endpoints carry bit a == bit b.
inline MeasurementOutcome equality_probability(const TrajectoryEnsemble& ensemble) {
    if (!ensemble.pair) throw PreconditionError("equality_probability: ensemble carries no measured pair");
    if (ensemble.transitions.empty()) throw PreconditionError("equality_probability: empty ensemble");
    const MeasurementPair pair = *ensemble.pair;
    MeasurementOutcome out{pair, Rational(0), ensemble.trajectory_count(), 0};
    for (size_t k = 0; k < ensemble.transitions.size(); ++k) {
        const PropertyState& from = ensemble.ordering.state_of_index(ensemble.transitions[k].first);
        if (from.bit(pair.a) == from.bit(pair.b)) {
            out.p_equal += ensemble.weights[k];
            ++out.favorable_count;
        }
    }
    return out;
}

struct BellMeasuredResult {
    std::vector<MeasurementOutcome> per_pair;
    Rational total;
};

/// Sum of measured equality probabilities over the given pairs, each on its
/// own masked one-step ensemble. Defaults to the three canonical pairs
/// (requires 3 properties).
inline BellMeasuredResult bell_sum_measured(const FlipGraph& graph, const ArrivalResult& arrival,
                                            std::vector<MeasurementPair> pairs = {}) {
    if (pairs.empty()) {
        if (graph.dimension() != 3)
            throw PreconditionError("bell_sum_measured: default pairs require 3 properties; pass an explicit list");
        pairs = canonical_pairs();
    }
    BellMeasuredResult result{{}, Rational(0)};
    for (const auto& pair : pairs) {
        MeasurementOutcome out = equality_probability(measure(graph, arrival, pair));
        result.total += out.p_equal;
        result.per_pair.push_back(std::move(out));
    }
    return result;
}

struct BellUnmeasuredResult {
    std::vector<std::pair<MeasurementPair, Rational>> per_pair;
    Rational total;
};

/// Pairwise equality probabilities read directly off the arrival ensemble
/// (no measurement step, no masking).
inline BellUnmeasuredResult bell_sum_unmeasured(const ArrivalResult& arrival,
                                                std::vector<MeasurementPair> pairs = {}) {
    if (!arrival.converged) throw PreconditionError("bell_sum_unmeasured: arrival distribution not converged");
    const int n = arrival.ordering.dimension();
    if (pairs.empty()) {
        if (n != 3)
            throw PreconditionError("bell_sum_unmeasured: default pairs require 3 properties; pass an explicit list");
        pairs = canonical_pairs();
    }
    BellUnmeasuredResult result{{}, Rational(0)};
    for (const auto& pair : pairs) {
        pair.check_dimension(n);
        Rational p = 0;
        for (int i = 1; i <= arrival.ordering.num_sites(); ++i) {
            const PropertyState& s = arrival.ordering.state_of_index(i);
            if (s.bit(pair.a) == s.bit(pair.b)) p += arrival.prob(i);
        }
        result.total += p;
        result.per_pair.emplace_back(pair, std::move(p));
    }
    return result;
}

/// Exact probabilities over the corners of the n-cube, indexed by the
/// corner's bit value (corner "101" is index 5).
struct JointDistribution {
    int n;
    std::vector<Rational> probs;

    JointDistribution(int n_, std::vector<Rational> p) : n(n_), probs(std::move(p)) {
        if (n < kMinProperties || n > kMaxProperties)
            throw PreconditionError("JointDistribution: property count must be in [2, 12]");
        if (probs.size() != (size_t{1} << n))
            throw PreconditionError("JointDistribution: need 2^n corner probabilities");
        Rational sum = 0;
        for (const auto& q : probs) {
            if (q < 0) throw PreconditionError("JointDistribution: negative probability");
            sum += q;
        }
        if (sum != 1) throw PreconditionError("JointDistribution: probabilities sum to " + merw::to_string(sum));
    }

    static JointDistribution from_arrival(const ArrivalResult& arrival) {
        const int n = arrival.ordering.dimension();
        std::vector<Rational> p(size_t{1} << n, Rational(0));
        for (int i = 1; i <= arrival.ordering.num_sites(); ++i)
            p[arrival.ordering.state_of_index(i).value()] += arrival.prob(i);
        return JointDistribution(n, std::move(p));
    }

    const Rational& prob(const PropertyState& corner) const {
        if (corner.size() != n) throw PreconditionError("JointDistribution: corner has wrong property count");
        return probs[corner.value()];
    }
};

struct MerminCheck {
    Rational sum;
    bool satisfied = false; // sum >= 1; a theorem for any joint distribution over 3 binary properties
};

inline MerminCheck mermin_bound_check(const JointDistribution& joint) {
    if (joint.n != 3) throw PreconditionError("mermin_bound_check: defined for 3 properties");
    Rational sum = 0;
    for (const auto& pair : canonical_pairs())
        for (unsigned c = 0; c < 8; ++c) {
            const PropertyState corner(c, 3);
            if (corner.bit(pair.a) == corner.bit(pair.b)) sum += joint.probs[c];
        }
    const bool ok = sum >= 1;
    return MerminCheck{std::move(sum), ok};
}

} // namespace merw
