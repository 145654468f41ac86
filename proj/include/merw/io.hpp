#pragma once

#include "merw/arith.hpp"
#include "merw/config.hpp"
#include "merw/measurement.hpp"
#include "merw/montecarlo.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/statespace.hpp"

#include <json.hpp>

#include <cstdio>
#include <sstream>
#include <string>
#include <vector>

// Report rendering. One human format (text) and two machine formats: jsonl
// (line-delimited records, exact values as "p/q" / decimal-digit strings)
// and csv for the tabular commands. Exact quantities are never serialized
// as floats; decimal columns are additional, clearly-named views.

namespace merw {

namespace io_detail {

using ojson = nlohmann::ordered_json;

inline std::string fixed12(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12f", x);
    return buf;
}

inline std::string sig9(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

inline std::string site_label(const SiteOrdering& ordering, int i) {
    return std::to_string(i) + ":" + ordering.state_of_index(i).to_string();
}

inline std::string join_counts(const CountVector& n) {
    std::string s = "(";
    for (size_t i = 0; i < n.counts.size(); ++i) {
        if (i) s += ", ";
        s += n.counts[i].str();
    }
    s += ")";
    return s;
}

} // namespace io_detail

inline std::string render_evolve(const FlipGraph& graph, const std::vector<CountVector>& rows, OutputFormat format,
                                 const std::string& label) {
    using namespace io_detail;
    const SiteOrdering& ord = graph.ordering();
    std::ostringstream out;
    switch (format) {
    case OutputFormat::kText: {
        out << "# evolve: " << label << "\n# sites:";
        for (int i = 1; i <= ord.num_sites(); ++i) out << " " << site_label(ord, i);
        out << "\n";
        for (const auto& n : rows)
            out << "t=" << n.t << "  n = " << join_counts(n) << "  total = " << total_paths(n).str() << "\n";
        break;
    }
    case OutputFormat::kCsv: {
        out << "t";
        for (int i = 1; i <= ord.num_sites(); ++i) out << "," << site_label(ord, i);
        out << ",total\n";
        for (const auto& n : rows) {
            out << n.t;
            for (const auto& c : n.counts) out << "," << c.str();
            out << "," << total_paths(n).str() << "\n";
        }
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "evolve_meta"}, {"label", label}};
        ojson sites = ojson::array();
        for (int i = 1; i <= ord.num_sites(); ++i) sites.push_back(ord.state_of_index(i).to_string());
        meta["sites"] = sites;
        out << meta.dump() << "\n";
        for (const auto& n : rows) {
            ojson rec{{"record", "evolve_row"}, {"t", n.t}};
            ojson counts = ojson::array();
            for (const auto& c : n.counts) counts.push_back(c.str());
            rec["counts"] = counts;
            rec["total"] = total_paths(n).str();
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

inline std::string render_stationary(const ArrivalResult& arrival, OutputFormat format, const std::string& label) {
    using namespace io_detail;
    const SiteOrdering& ord = arrival.ordering;
    const std::string mode_desc =
        arrival.exact ? "exact (eigen-equation certified)" : "float (power iteration to tolerance)";
    std::ostringstream out;
    auto support_str = [&] {
        std::string s = "{";
        for (size_t k = 0; k < arrival.support.size(); ++k) {
            if (k) s += ", ";
            s += std::to_string(arrival.support[k]);
        }
        return s + "}";
    };
    switch (format) {
    case OutputFormat::kText: {
        out << "# stationary: " << label << "\n# mode: " << mode_desc << "\n";
        for (int i = 1; i <= ord.num_sites(); ++i) {
            const Rational& p = arrival.prob(i);
            out << "site " << i << " (" << ord.state_of_index(i).to_string() << "): p = ";
            if (arrival.exact)
                out << merw::to_string(p) << " = " << fixed12(to_double(p));
            else
                out << fixed12(to_double(p));
            out << "\n";
        }
        out << "growth_rate = "
            << (arrival.exact ? merw::to_string(arrival.growth_rate) : fixed12(to_double(arrival.growth_rate)))
            << "\n";
        out << "support = " << support_str() << "\n";
        out << "converged = " << (arrival.converged ? "yes" : "no") << " (iterations = " << arrival.iterations
            << ")\n";
        break;
    }
    case OutputFormat::kCsv: {
        out << "site,state,p,p_decimal\n";
        for (int i = 1; i <= ord.num_sites(); ++i) {
            const Rational& p = arrival.prob(i);
            out << i << "," << ord.state_of_index(i).to_string() << "," << merw::to_string(p) << ","
                << fixed12(to_double(p)) << "\n";
        }
        out << "# growth_rate = " << merw::to_string(arrival.growth_rate) << "\n";
        out << "# support = " << support_str() << "\n";
        out << "# mode = " << mode_desc << "\n";
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "stationary_meta"},
                   {"label", label},
                   {"exact", arrival.exact},
                   {"growth_rate", merw::to_string(arrival.growth_rate)},
                   {"growth_rate_decimal", to_double(arrival.growth_rate)},
                   {"support", arrival.support},
                   {"converged", arrival.converged},
                   {"iterations", arrival.iterations}};
        out << meta.dump() << "\n";
        for (int i = 1; i <= ord.num_sites(); ++i) {
            const Rational& p = arrival.prob(i);
            ojson rec{{"record", "stationary_site"},
                      {"site", i},
                      {"state", ord.state_of_index(i).to_string()},
                      {"p", merw::to_string(p)},
                      {"p_decimal", to_double(p)}};
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

inline std::string render_measure(const TrajectoryEnsemble& ensemble, const MeasurementOutcome& outcome,
                                  OutputFormat format, const std::string& label) {
    using namespace io_detail;
    const SiteOrdering& ord = ensemble.ordering;
    const MeasurementPair pair = outcome.pair;
    auto is_equal = [&](int site) {
        const PropertyState& s = ord.state_of_index(site);
        return s.bit(pair.a) == s.bit(pair.b);
    };
    const bool flat = Rational(outcome.favorable_count, outcome.trajectory_count) == outcome.p_equal;
    std::ostringstream out;
    switch (format) {
    case OutputFormat::kText: {
        out << "# measure " << pair.name() << ": " << label << "\n";
        out << "trajectories = " << outcome.trajectory_count << "\n";
        out << "favorable = " << outcome.favorable_count << "\n";
        out << "p_equal = ";
        if (flat) out << outcome.favorable_count << "/" << outcome.trajectory_count << " = ";
        out << merw::to_string(outcome.p_equal) << " = " << fixed12(to_double(outcome.p_equal)) << "\n";
        for (size_t k = 0; k < ensemble.transitions.size(); ++k) {
            const auto [i, j] = ensemble.transitions[k];
            out << "  (" << ord.state_of_index(i).to_string() << ") -> (" << ord.state_of_index(j).to_string()
                << ")  [" << i << " -> " << j << "]  w = " << merw::to_string(ensemble.weights[k])
                << (is_equal(i) ? "  equal" : "") << "\n";
        }
        break;
    }
    case OutputFormat::kCsv: {
        out << "from_state,from_site,to_state,to_site,weight,equal\n";
        for (size_t k = 0; k < ensemble.transitions.size(); ++k) {
            const auto [i, j] = ensemble.transitions[k];
            out << ord.state_of_index(i).to_string() << "," << i << "," << ord.state_of_index(j).to_string() << ","
                << j << "," << merw::to_string(ensemble.weights[k]) << "," << (is_equal(i) ? "1" : "0") << "\n";
        }
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "measure_meta"},
                   {"label", label},
                   {"pair", pair.name()},
                   {"trajectories", outcome.trajectory_count},
                   {"favorable", outcome.favorable_count},
                   {"p_equal", merw::to_string(outcome.p_equal)},
                   {"p_equal_decimal", to_double(outcome.p_equal)}};
        out << meta.dump() << "\n";
        for (size_t k = 0; k < ensemble.transitions.size(); ++k) {
            const auto [i, j] = ensemble.transitions[k];
            ojson rec{{"record", "trajectory"},
                      {"from", ord.state_of_index(i).to_string()},
                      {"from_site", i},
                      {"to", ord.state_of_index(j).to_string()},
                      {"to_site", j},
                      {"weight", merw::to_string(ensemble.weights[k])},
                      {"equal", static_cast<bool>(is_equal(i))}};
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

namespace io_detail {

// "6/10" style unreduced total when every pair was a flat count over the
// same trajectory number; empty otherwise.
inline std::string unreduced_total(const BellMeasuredResult& bell) {
    if (bell.per_pair.empty()) return {};
    int favorable = 0;
    const int count = bell.per_pair.front().trajectory_count;
    for (const auto& out : bell.per_pair) {
        if (out.trajectory_count != count ||
            Rational(out.favorable_count, out.trajectory_count) != out.p_equal)
            return {};
        favorable += out.favorable_count;
    }
    if (Rational(favorable, count) != bell.total) return {};
    return std::to_string(favorable) + "/" + std::to_string(count);
}

} // namespace io_detail

inline std::string render_bell_measured(const BellMeasuredResult& bell, OutputFormat format,
                                        const std::string& label) {
    using namespace io_detail;
    const bool violated = bell.total < 1;
    const std::string unreduced = unreduced_total(bell);
    std::ostringstream out;
    switch (format) {
    case OutputFormat::kText: {
        out << "# bell measured: " << label << "\n";
        for (const auto& o : bell.per_pair)
            out << "pair " << o.pair.name() << ": p_equal = " << merw::to_string(o.p_equal) << " (favorable "
                << o.favorable_count << " of " << o.trajectory_count << ")\n";
        out << "total = ";
        if (!unreduced.empty()) out << unreduced << " = ";
        out << merw::to_string(bell.total) << " = " << fixed12(to_double(bell.total)) << "\n";
        out << "verdict: " << (violated ? "VIOLATED" : "SATISFIED") << " (Mermin bound requires total >= 1)\n";
        break;
    }
    case OutputFormat::kCsv: {
        out << "pair,p_equal,favorable,trajectories\n";
        for (const auto& o : bell.per_pair)
            out << o.pair.name() << "," << merw::to_string(o.p_equal) << "," << o.favorable_count << ","
                << o.trajectory_count << "\n";
        out << "total," << merw::to_string(bell.total) << ",,\n";
        out << "# verdict = " << (violated ? "violated" : "satisfied") << "\n";
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "bell_meta"},
                   {"label", label},
                   {"mode", "measured"},
                   {"total", merw::to_string(bell.total)},
                   {"total_decimal", to_double(bell.total)},
                   {"violated", violated}};
        if (!unreduced.empty()) meta["total_unreduced"] = unreduced;
        out << meta.dump() << "\n";
        for (const auto& o : bell.per_pair) {
            ojson rec{{"record", "bell_pair"},
                      {"pair", o.pair.name()},
                      {"p_equal", merw::to_string(o.p_equal)},
                      {"favorable", o.favorable_count},
                      {"trajectories", o.trajectory_count}};
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

inline std::string render_bell_unmeasured(const BellUnmeasuredResult& bell, OutputFormat format,
                                          const std::string& label) {
    using namespace io_detail;
    const bool violated = bell.total < 1;
    std::ostringstream out;
    switch (format) {
    case OutputFormat::kText: {
        out << "# bell unmeasured: " << label << "\n";
        for (const auto& [pair, p] : bell.per_pair)
            out << "pair " << pair.name() << ": p_equal = " << merw::to_string(p) << "\n";
        out << "total = " << merw::to_string(bell.total) << " = " << fixed12(to_double(bell.total)) << "\n";
        out << "verdict: " << (violated ? "VIOLATED" : "SATISFIED") << " (Mermin bound requires total >= 1)\n";
        break;
    }
    case OutputFormat::kCsv: {
        out << "pair,p_equal\n";
        for (const auto& [pair, p] : bell.per_pair) out << pair.name() << "," << merw::to_string(p) << "\n";
        out << "total," << merw::to_string(bell.total) << "\n";
        out << "# verdict = " << (violated ? "violated" : "satisfied") << "\n";
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "bell_meta"},
                   {"label", label},
                   {"mode", "unmeasured"},
                   {"total", merw::to_string(bell.total)},
                   {"total_decimal", to_double(bell.total)},
                   {"violated", violated}};
        out << meta.dump() << "\n";
        for (const auto& [pair, p] : bell.per_pair) {
            ojson rec{{"record", "bell_pair"}, {"pair", pair.name()}, {"p_equal", merw::to_string(p)}};
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

inline std::string render_report(const EstimateReport& report, OutputFormat format) {
    using namespace io_detail;
    std::ostringstream out;
    switch (format) {
    case OutputFormat::kText: {
        out << "# simulate: " << report.label << "\n";
        out << "# rng: xoshiro256** seed = " << report.seed << ", samples = " << report.samples
            << ", workers = " << report.workers << "\n";
        for (const auto& r : report.rows)
            out << r.name << ": exact = " << merw::to_string(r.exact) << "  estimate = " << fixed12(r.estimate)
                << "  se = " << sig9(r.std_error) << "  z = " << sig9(r.z) << "  " << (r.pass ? "pass" : "FAIL")
                << "\n";
        for (const auto& c : report.chi_squares)
            out << c.name << ": chi2 = " << sig9(c.statistic) << "  dof = " << c.dof << "  p = " << sig9(c.p_value)
                << "  " << (c.pass ? "pass" : "FAIL") << "\n";
        out << "overall: " << (report.ok() ? "PASS" : "FAIL") << "\n";
        break;
    }
    case OutputFormat::kCsv: {
        out << "kind,name,exact,estimate,std_error,z,statistic,dof,p_value,pass\n";
        for (const auto& r : report.rows)
            out << "row," << r.name << "," << merw::to_string(r.exact) << "," << sig9(r.estimate) << ","
                << sig9(r.std_error) << "," << sig9(r.z) << ",,,," << (r.pass ? "1" : "0") << "\n";
        for (const auto& c : report.chi_squares)
            out << "chi2," << c.name << ",,,,," << sig9(c.statistic) << "," << c.dof << "," << sig9(c.p_value) << ","
                << (c.pass ? "1" : "0") << "\n";
        break;
    }
    case OutputFormat::kJsonl: {
        ojson meta{{"record", "simulate_meta"}, {"label", report.label},       {"rng", "xoshiro256**"},
                   {"seed", report.seed},       {"samples", report.samples},   {"workers", report.workers},
                   {"ok", report.ok()}};
        out << meta.dump() << "\n";
        for (const auto& r : report.rows) {
            ojson rec{{"record", "estimate"},        {"name", r.name}, {"exact", merw::to_string(r.exact)},
                      {"estimate", r.estimate},      {"std_error", r.std_error},
                      {"z", r.z},                    {"pass", r.pass}};
            out << rec.dump() << "\n";
        }
        for (const auto& c : report.chi_squares) {
            ojson rec{{"record", "chi_square"}, {"name", c.name},       {"statistic", c.statistic},
                      {"dof", c.dof},           {"p_value", c.p_value}, {"pass", c.pass}};
            out << rec.dump() << "\n";
        }
        break;
    }
    }
    return out.str();
}

} // namespace merw
