#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"
#include "merw/montecarlo.hpp"
#include "merw/path_ensemble.hpp"
#include "merw/statespace.hpp"

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace merw {

enum class OutputFormat { kText, kJsonl, kCsv };

inline OutputFormat parse_format(const std::string& s) {
    if (s == "text") return OutputFormat::kText;
    if (s == "jsonl") return OutputFormat::kJsonl;
    if (s == "csv") return OutputFormat::kCsv;
    throw ParseError("unknown output format \"" + s + "\" (expected text, jsonl or csv)");
}

struct OutputSpec {
    OutputFormat format = OutputFormat::kText;
    std::optional<std::string> path; // stdout when absent
};

/// A parsed experiment file: graph + start + arithmetic mode + sampler +
/// output preferences. Unknown keys are rejected at every level.
struct ExperimentFile {
    WalkConfig walk;
    ArrivalMode mode = ArrivalMode::kExact;
    SamplerConfig sampler;
    OutputSpec output;
};

namespace detail {

using nlohmann::json;

inline void reject_unknown_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key())) throw ParseError("unknown key \"" + it.key() + "\" in " + where);
}

inline PropertyState state_from_json(const json& v, const std::string& where) {
    if (!v.is_string()) throw ParseError(where + ": expected a bit-string");
    try {
        return PropertyState::from_string(v.get<std::string>());
    } catch (const PreconditionError& e) {
        throw ParseError(where + ": " + e.what());
    }
}

inline FlipGraph graph_from_json(const json& g) {
    if (g.is_string()) {
        if (g.get<std::string>() == "standard") return FlipGraph::standard();
        throw ParseError("graph: unknown designation \"" + g.get<std::string>() +
                         "\" (expected \"standard\" or an explicit edge/self-loop object)");
    }
    if (!g.is_object()) throw ParseError("graph: expected \"standard\" or an object");
    reject_unknown_keys(g, {"edges", "self_loops", "ordering"}, "graph");

    std::vector<PropertyState> edge_states; // flattened pairs
    std::vector<PropertyState> loop_states;
    if (g.contains("edges")) {
        if (!g["edges"].is_array()) throw ParseError("graph.edges: expected an array of bit-string pairs");
        for (const auto& e : g["edges"]) {
            if (!e.is_array() || e.size() != 2) throw ParseError("graph.edges: each edge is a pair of bit-strings");
            edge_states.push_back(state_from_json(e[0], "graph.edges"));
            edge_states.push_back(state_from_json(e[1], "graph.edges"));
        }
    }
    if (g.contains("self_loops")) {
        if (!g["self_loops"].is_array()) throw ParseError("graph.self_loops: expected an array of bit-strings");
        for (const auto& s : g["self_loops"]) loop_states.push_back(state_from_json(s, "graph.self_loops"));
    }

    std::optional<SiteOrdering> ordering;
    if (g.contains("ordering")) {
        if (!g["ordering"].is_array()) throw ParseError("graph.ordering: expected an array of bit-strings");
        std::vector<PropertyState> sites;
        for (const auto& s : g["ordering"]) sites.push_back(state_from_json(s, "graph.ordering"));
        try {
            ordering.emplace(std::move(sites));
        } catch (const PreconditionError& e) {
            throw ParseError(std::string("graph.ordering: ") + e.what());
        }
    }
    if (!ordering) {
        int n = -1;
        if (!edge_states.empty())
            n = edge_states.front().size();
        else if (!loop_states.empty())
            n = loop_states.front().size();
        if (n < 0) throw ParseError("graph: cannot infer the property count; give an ordering, edges or self_loops");
        ordering.emplace(n == 3 ? SiteOrdering::standard3() : SiteOrdering::gray(n));
    }

    std::vector<std::pair<int, int>> edges;
    for (size_t k = 0; k + 1 < edge_states.size(); k += 2)
        edges.emplace_back(ordering->index_of_state(edge_states[k]), ordering->index_of_state(edge_states[k + 1]));
    std::vector<int> loops;
    for (const auto& s : loop_states) loops.push_back(ordering->index_of_state(s));
    return FlipGraph(std::move(*ordering), edges, loops);
}

inline std::variant<int, std::vector<BigInt>> start_from_json(const json& s, const FlipGraph& graph) {
    if (s.is_string()) return graph.ordering().index_of_state(state_from_json(s, "start"));
    if (s.is_object()) {
        reject_unknown_keys(s, {"counts"}, "start");
        if (!s.contains("counts") || !s["counts"].is_array())
            throw ParseError("start: expected a bit-string or {\"counts\": [...]}");
        std::vector<BigInt> counts;
        for (const auto& c : s["counts"]) {
            if (c.is_string())
                counts.push_back(parse_bigint(c.get<std::string>()));
            else if (c.is_number_unsigned())
                counts.push_back(BigInt(c.get<std::uint64_t>()));
            else
                throw ParseError("start.counts: entries must be decimal strings or non-negative integers");
        }
        return counts;
    }
    throw ParseError("start: expected a bit-string or {\"counts\": [...]}");
}

} // namespace detail

inline ExperimentFile parse_experiment(const std::string& text) {
    detail::json root;
    try {
        root = detail::json::parse(text);
    } catch (const detail::json::exception& e) {
        throw ParseError(std::string("experiment file is not valid JSON: ") + e.what());
    }
    if (!root.is_object()) throw ParseError("experiment file: top level must be an object");
    detail::reject_unknown_keys(root, {"label", "graph", "start", "mode", "sampler", "output"}, "experiment file");
    if (!root.contains("graph")) throw ParseError("experiment file: missing \"graph\"");
    if (!root.contains("start")) throw ParseError("experiment file: missing \"start\"");

    std::string label;
    if (root.contains("label")) {
        if (!root["label"].is_string()) throw ParseError("label: expected a string");
        label = root["label"].get<std::string>();
    }

    FlipGraph graph = detail::graph_from_json(root["graph"]);
    auto start = detail::start_from_json(root["start"], graph);

    ArrivalMode mode = ArrivalMode::kExact;
    if (root.contains("mode")) {
        if (!root["mode"].is_string()) throw ParseError("mode: expected \"exact\" or \"float\"");
        const std::string m = root["mode"].get<std::string>();
        if (m == "exact")
            mode = ArrivalMode::kExact;
        else if (m == "float")
            mode = ArrivalMode::kFloat;
        else
            throw ParseError("mode: expected \"exact\" or \"float\", got \"" + m + "\"");
    }

    SamplerConfig sampler;
    if (root.contains("sampler")) {
        const auto& s = root["sampler"];
        if (!s.is_object()) throw ParseError("sampler: expected an object");
        detail::reject_unknown_keys(s, {"seed", "samples", "workers"}, "sampler");
        if (s.contains("seed")) {
            if (!s["seed"].is_number_unsigned()) throw ParseError("sampler.seed: expected an unsigned integer");
            sampler.seed = s["seed"].get<std::uint64_t>();
        }
        if (s.contains("samples")) {
            if (!s["samples"].is_number_unsigned() || s["samples"].get<std::uint64_t>() < 1)
                throw ParseError("sampler.samples: expected an integer >= 1");
            sampler.samples = s["samples"].get<std::uint64_t>();
        }
        if (s.contains("workers")) {
            if (!s["workers"].is_number_unsigned() || s["workers"].get<std::uint64_t>() < 1 ||
                s["workers"].get<std::uint64_t>() > static_cast<std::uint64_t>(kMaxWorkers))
                throw ParseError("sampler.workers: expected an integer in [1, " + std::to_string(kMaxWorkers) + "]");
            sampler.workers = static_cast<int>(s["workers"].get<std::uint64_t>());
        }
    }

    OutputSpec output;
    if (root.contains("output")) {
        const auto& o = root["output"];
        if (!o.is_object()) throw ParseError("output: expected an object");
        detail::reject_unknown_keys(o, {"format", "path"}, "output");
        if (o.contains("format")) {
            if (!o["format"].is_string()) throw ParseError("output.format: expected a string");
            output.format = parse_format(o["format"].get<std::string>());
        }
        if (o.contains("path")) {
            if (!o["path"].is_string()) throw ParseError("output.path: expected a string");
            output.path = o["path"].get<std::string>();
        }
    }

    try {
        return ExperimentFile{WalkConfig(std::move(graph), std::move(start), std::move(label)), mode, sampler,
                              std::move(output)};
    } catch (const PreconditionError&) {
        throw; // start/graph semantic violations keep their own error class
    }
}

inline ExperimentFile load_experiment(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open experiment file: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment(ss.str());
}

} // namespace merw
