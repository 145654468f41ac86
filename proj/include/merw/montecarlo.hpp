#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"
#include "merw/measurement.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/rng.hpp"
#include "merw/statespace.hpp"

#include <boost/math/distributions/chi_squared.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <utility>
#include <vector>

namespace merw {

// Statistical acceptance thresholds, fixed project-wide: point estimates must
// sit within 4 standard errors of the exact value, distribution fits must
// reach a chi-square p-value above 1e-3.
inline constexpr double kMaxAbsZ = 4.0;
inline constexpr double kMinChiSquareP = 1e-3;

inline constexpr int kMaxWorkers = 1024;
// Stream layout inside consolidated runs: stream = kStreamsPerTask * task + worker.
inline constexpr std::uint64_t kStreamsPerTask = 1024;

struct SamplerConfig {
    std::uint64_t seed = 0;
    std::uint64_t samples = 100000;
    int workers = 1;

    void validate() const {
        if (samples < 1) throw PreconditionError("SamplerConfig: samples must be >= 1");
        if (workers < 1 || workers > kMaxWorkers)
            throw PreconditionError("SamplerConfig: workers must be in [1, " + std::to_string(kMaxWorkers) + "]");
    }
};

struct ReportRow {
    std::string name;
    Rational exact;
    double estimate = 0.0;
    double std_error = 0.0;
    double z = 0.0;
    bool pass = false;
};

struct ChiSquareRow {
    std::string name;
    double statistic = 0.0;
    long long dof = 0;
    double p_value = 0.0;
    bool pass = false;
};

struct EstimateReport {
    std::string label;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;
    int workers = 1;
    std::vector<ReportRow> rows;
    std::vector<ChiSquareRow> chi_squares;

    bool ok() const {
        for (const auto& r : rows)
            if (!r.pass) return false;
        for (const auto& c : chi_squares)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline std::uint64_t worker_samples(std::uint64_t samples, int workers, int w) {
    const std::uint64_t base = samples / static_cast<std::uint64_t>(workers);
    const std::uint64_t extra = samples % static_cast<std::uint64_t>(workers);
    return base + (static_cast<std::uint64_t>(w) < extra ? 1 : 0);
}

template <typename Fn>
void run_workers(int workers, Fn&& fn) {
    if (workers == 1) {
        fn(0);
        return;
    }
    std::vector<std::thread> threads;
    threads.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) threads.emplace_back([&fn, w] { fn(w); });
    for (auto& t : threads) t.join();
}

// Smoothed binomial standard error: (k+1)/(n+2) in place of k/n keeps the
// error strictly positive even for constant estimators.
inline double smoothed_std_error(std::uint64_t hits, std::uint64_t n) {
    const double p = (static_cast<double>(hits) + 1.0) / (static_cast<double>(n) + 2.0);
    return std::sqrt(p * (1.0 - p) / static_cast<double>(n));
}

inline ReportRow make_row(std::string name, Rational exact, std::uint64_t hits, std::uint64_t n) {
    ReportRow row;
    row.name = std::move(name);
    row.exact = std::move(exact);
    row.estimate = static_cast<double>(hits) / static_cast<double>(n);
    row.std_error = smoothed_std_error(hits, n);
    row.z = (row.estimate - to_double(row.exact)) / row.std_error;
    row.pass = std::abs(row.z) < kMaxAbsZ;
    return row;
}

} // namespace detail

/// Exact sampling from a rational weight table: weights are brought to a
/// common denominator D and an integer draw in [0, D) selects the index by
/// cumulative comparison. No float boundaries.
class WeightedIndexSampler {
public:
    explicit WeightedIndexSampler(const std::vector<Rational>& weights) {
        if (weights.empty()) throw PreconditionError("WeightedIndexSampler: empty weight table");
        BigInt common = 1;
        Rational sum = 0;
        for (const auto& w : weights) {
            if (w < 0) throw PreconditionError("WeightedIndexSampler: negative weight");
            sum += w;
            common = boost::multiprecision::lcm(common, boost::multiprecision::denominator(w));
        }
        if (sum != 1) throw PreconditionError("WeightedIndexSampler: weights sum to " + merw::to_string(sum));
        cumulative_.reserve(weights.size());
        BigInt acc = 0;
        for (const auto& w : weights) {
            acc += boost::multiprecision::numerator(w) * (common / boost::multiprecision::denominator(w));
            cumulative_.push_back(acc);
        }
        denominator_ = common;
    }

    size_t sample(Xoshiro256StarStar& rng) const {
        const BigInt u = rng.uniform_below(denominator_);
        return static_cast<size_t>(std::upper_bound(cumulative_.begin(), cumulative_.end(), u) -
                                   cumulative_.begin());
    }

    const BigInt& denominator() const { return denominator_; }

private:
    BigInt denominator_;
    std::vector<BigInt> cumulative_;
};

/// Draws one-step transitions i.i.d. from the ensemble and reports the
/// estimated equality probability against the exact value.
inline EstimateReport sample_measurement(const TrajectoryEnsemble& ensemble, const SamplerConfig& cfg,
                                         std::uint64_t stream_base = 0) {
    cfg.validate();
    const MeasurementOutcome exact = equality_probability(ensemble);
    std::vector<char> favorable(ensemble.transitions.size(), 0);
    for (size_t k = 0; k < ensemble.transitions.size(); ++k) {
        const PropertyState& from = ensemble.ordering.state_of_index(ensemble.transitions[k].first);
        favorable[k] = from.bit(exact.pair.a) == from.bit(exact.pair.b) ? 1 : 0;
    }
    const WeightedIndexSampler sampler(ensemble.weights);

    std::vector<std::uint64_t> hits(static_cast<size_t>(cfg.workers), 0);
    detail::run_workers(cfg.workers, [&](int w) {
        auto rng = Xoshiro256StarStar::stream(cfg.seed, stream_base + static_cast<std::uint64_t>(w));
        const std::uint64_t n = detail::worker_samples(cfg.samples, cfg.workers, w);
        std::uint64_t h = 0;
        for (std::uint64_t s = 0; s < n; ++s)
            if (favorable[sampler.sample(rng)]) ++h;
        hits[static_cast<size_t>(w)] = h;
    });
    std::uint64_t total_hits = 0;
    for (auto h : hits) total_hits += h;

    EstimateReport report;
    report.seed = cfg.seed;
    report.samples = cfg.samples;
    report.workers = cfg.workers;
    report.rows.push_back(
        detail::make_row("p_equal[" + exact.pair.name() + "]", exact.p_equal, total_hits, cfg.samples));
    return report;
}

struct SampledPath {
    std::vector<int> sites;  // length horizon+1, 1-based
    Rational probability;    // exact sampling probability; 1 / (path count) for a delta start
};

/// One exactly-uniform path draw: forward transition weights are the suffix
/// continuation counts N_{k+1}(j), whose telescoping product makes every
/// length-T path from the start equally likely.
inline SampledPath sample_one_path(const FlipGraph& graph, const std::vector<CountVector>& suffix, int start_site,
                                   Xoshiro256StarStar& rng) {
    graph.ordering().check_site(start_site);
    if (suffix.empty()) throw PreconditionError("sample_one_path: empty suffix count sequence");
    const long long horizon = static_cast<long long>(suffix.size()) - 1;
    if (suffix[0].counts[static_cast<size_t>(start_site - 1)] == 0)
        throw PreconditionError("sample_one_path: no length-" + std::to_string(horizon) + " paths from site " +
                                std::to_string(start_site));
    SampledPath path{{start_site}, Rational(1)};
    int cur = start_site;
    for (long long k = 0; k < horizon; ++k) {
        const BigInt& total = suffix[static_cast<size_t>(k)].counts[static_cast<size_t>(cur - 1)];
        BigInt u = rng.uniform_below(total);
        int chosen = -1;
        for (int j : graph.neighbors(cur)) {
            const BigInt& w = suffix[static_cast<size_t>(k + 1)].counts[static_cast<size_t>(j - 1)];
            if (u < w) {
                chosen = j;
                path.probability *= Rational(w, total);
                break;
            }
            u -= w;
        }
        if (chosen < 0) throw std::logic_error("sample_one_path: continuation counts inconsistent with graph");
        cur = chosen;
        path.sites.push_back(cur);
    }
    return path;
}

struct UniformPathResult {
    std::vector<int> first_path; // sites of the first path drawn by worker 0
    std::vector<std::uint64_t> endpoint_tally;
    std::uint64_t samples = 0;
    long long horizon = 0;
};

/// Uniform-path sampling from a weighted start: a start site is drawn with
/// integer weight n0(i) * N_0(i), then the path extends as in
/// sample_one_path. Endpoint tallies are multinomial with mean proportional
/// to evolve(n0, horizon).
inline UniformPathResult sample_uniform_path(const FlipGraph& graph, const CountVector& n0, long long horizon,
                                             const SamplerConfig& cfg, std::uint64_t stream_base = 0) {
    detail::check_length(graph, n0, "sample_uniform_path");
    cfg.validate();
    if (horizon < 0) throw PreconditionError("sample_uniform_path: negative horizon");
    const auto suffix = suffix_continuation_counts(graph, horizon);

    const int m = graph.num_sites();
    std::vector<BigInt> cum_start;
    cum_start.reserve(static_cast<size_t>(m));
    BigInt total_weight = 0;
    int only_site = 0, positive_sites = 0;
    for (int i = 1; i <= m; ++i) {
        const BigInt w = n0.counts[static_cast<size_t>(i - 1)] * suffix[0].counts[static_cast<size_t>(i - 1)];
        if (w > 0) {
            ++positive_sites;
            only_site = i;
        }
        total_weight += w;
        cum_start.push_back(total_weight);
    }
    if (total_weight == 0)
        throw PreconditionError("sample_uniform_path: no length-" + std::to_string(horizon) +
                                " paths from the start");

    std::vector<std::vector<std::uint64_t>> tallies(static_cast<size_t>(cfg.workers),
                                                    std::vector<std::uint64_t>(static_cast<size_t>(m), 0));
    std::vector<int> first_path;
    detail::run_workers(cfg.workers, [&](int w) {
        auto rng = Xoshiro256StarStar::stream(cfg.seed, stream_base + static_cast<std::uint64_t>(w));
        const std::uint64_t n = detail::worker_samples(cfg.samples, cfg.workers, w);
        auto& tally = tallies[static_cast<size_t>(w)];
        for (std::uint64_t s = 0; s < n; ++s) {
            int start = only_site;
            if (positive_sites > 1) {
                const BigInt u = rng.uniform_below(total_weight);
                start = static_cast<int>(std::upper_bound(cum_start.begin(), cum_start.end(), u) -
                                         cum_start.begin()) +
                        1;
            }
            if (w == 0 && s == 0) {
                auto rec = sample_one_path(graph, suffix, start, rng);
                first_path = rec.sites;
                ++tally[static_cast<size_t>(first_path.back() - 1)];
                continue;
            }
            int cur = start;
            for (long long k = 0; k < horizon; ++k) {
                const BigInt& total = suffix[static_cast<size_t>(k)].counts[static_cast<size_t>(cur - 1)];
                BigInt u = rng.uniform_below(total);
                for (int j : graph.neighbors(cur)) {
                    const BigInt& wj = suffix[static_cast<size_t>(k + 1)].counts[static_cast<size_t>(j - 1)];
                    if (u < wj) {
                        cur = j;
                        break;
                    }
                    u -= wj;
                }
            }
            ++tally[static_cast<size_t>(cur - 1)];
        }
    });

    UniformPathResult result;
    result.first_path = std::move(first_path);
    result.endpoint_tally.assign(static_cast<size_t>(m), 0);
    for (const auto& tally : tallies)
        for (size_t i = 0; i < tally.size(); ++i) result.endpoint_tally[i] += tally[i];
    result.samples = cfg.samples;
    result.horizon = horizon;
    return result;
}

inline UniformPathResult sample_uniform_path(const FlipGraph& graph, int start_site, long long horizon,
                                             const SamplerConfig& cfg, std::uint64_t stream_base = 0) {
    return sample_uniform_path(graph, delta_start(graph, start_site), horizon, cfg, stream_base);
}

/// Pearson goodness-of-fit of integer tallies against an exact distribution.
inline ChiSquareRow chi_square_gof(std::string name, const std::vector<std::uint64_t>& observed,
                                   const std::vector<Rational>& expected_probs, std::uint64_t samples) {
    if (observed.size() != expected_probs.size())
        throw PreconditionError("chi_square_gof: tally and distribution sizes differ");
    ChiSquareRow row;
    row.name = std::move(name);
    long long bins = 0;
    bool impossible = false;
    for (size_t i = 0; i < observed.size(); ++i) {
        if (expected_probs[i] == 0) {
            if (observed[i] != 0) impossible = true;
            continue;
        }
        ++bins;
        const double e = to_double(expected_probs[i]) * static_cast<double>(samples);
        const double d = static_cast<double>(observed[i]) - e;
        row.statistic += d * d / e;
    }
    row.dof = bins - 1;
    if (impossible) {
        row.statistic = std::numeric_limits<double>::infinity();
        row.p_value = 0.0;
    } else if (row.dof <= 0) {
        row.p_value = row.statistic == 0.0 ? 1.0 : 0.0;
    } else {
        boost::math::chi_squared_distribution<double> dist(static_cast<double>(row.dof));
        row.p_value = boost::math::cdf(boost::math::complement(dist, row.statistic));
    }
    row.pass = row.p_value > kMinChiSquareP;
    return row;
}

namespace detail {

inline std::vector<Rational> normalized_counts(const CountVector& n) {
    std::vector<Rational> probs(n.counts.size());
    const BigInt total = total_paths(n);
    if (total == 0) throw PreconditionError("normalized_counts: zero total");
    for (size_t i = 0; i < n.counts.size(); ++i) probs[i] = Rational(n.counts[i], total);
    return probs;
}

} // namespace detail

/// Runs both samplers against the exact quantities of the experiment and
/// emits one consolidated report. Stream layout (documented for
/// reproducibility): task 0..2 = measured pairs, task 3 = endpoint run at
/// horizon 5, task 4 = arrival run at horizon 30; each task uses streams
/// task*kStreamsPerTask + worker.
///
/// `tamper_exact` is a test hook: it shifts every exact reference value after
/// sampling, forcing the statistical-failure path.
inline EstimateReport validate_all(const WalkConfig& config, const SamplerConfig& cfg, bool tamper_exact = false) {
    cfg.validate();
    const FlipGraph& graph = config.graph;
    const CountVector n0 = start_counts(config);
    const ArrivalResult arrival = arrival_distribution(graph, n0);

    EstimateReport report;
    report.label = config.label;
    report.seed = cfg.seed;
    report.samples = cfg.samples;
    report.workers = cfg.workers;

    std::uint64_t task = 0;
    if (graph.dimension() == 3) {
        Rational bell_exact = 0;
        double bell_estimate = 0.0, bell_var = 0.0;
        for (const auto& pair : canonical_pairs()) {
            const TrajectoryEnsemble ensemble = measure(graph, arrival, pair);
            EstimateReport part = sample_measurement(ensemble, cfg, task * kStreamsPerTask);
            ++task;
            const ReportRow& row = part.rows.front();
            bell_exact += row.exact;
            bell_estimate += row.estimate;
            bell_var += row.std_error * row.std_error;
            report.rows.push_back(row);
        }
        ReportRow bell;
        bell.name = "bell_sum_measured";
        bell.exact = bell_exact;
        bell.estimate = bell_estimate;
        bell.std_error = std::sqrt(bell_var);
        bell.z = (bell.estimate - to_double(bell.exact)) / bell.std_error;
        bell.pass = std::abs(bell.z) < kMaxAbsZ;
        report.rows.push_back(std::move(bell));
    }

    constexpr long long kShortHorizon = 5;
    const UniformPathResult short_run = sample_uniform_path(graph, n0, kShortHorizon, cfg, 3 * kStreamsPerTask);
    report.chi_squares.push_back(chi_square_gof("endpoint[T=5]", short_run.endpoint_tally,
                                                detail::normalized_counts(evolve(graph, n0, kShortHorizon)),
                                                cfg.samples));

    constexpr long long kLongHorizon = 30;
    const UniformPathResult long_run = sample_uniform_path(graph, n0, kLongHorizon, cfg, 4 * kStreamsPerTask);
    report.chi_squares.push_back(
        chi_square_gof("endpoint[T=30]", long_run.endpoint_tally, arrival.distribution.probs, cfg.samples));
    for (int i : arrival.support) {
        const PropertyState& s = graph.ordering().state_of_index(i);
        report.rows.push_back(detail::make_row("arrival[" + std::to_string(i) + ":" + s.to_string() + "]",
                                               arrival.prob(i),
                                               long_run.endpoint_tally[static_cast<size_t>(i - 1)], cfg.samples));
    }

    if (tamper_exact) {
        for (auto& row : report.rows) {
            row.exact += Rational(1, 20);
            row.z = (row.estimate - to_double(row.exact)) / row.std_error;
            row.pass = std::abs(row.z) < kMaxAbsZ;
        }
    }
    return report;
}

} // namespace merw
