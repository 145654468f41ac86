#pragma once

#include "merw/arith.hpp"
#include "merw/error.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace merw {

inline constexpr int kMinProperties = 2;
inline constexpr int kMaxProperties = 12; // 2^12 sites; larger walks are out of scope

/// One corner of the n-cube: an ordered tuple of n binary properties.
/// Position 0 is the first property (x for n = 3), matching the left-most
/// character of the bit-string rendering, so "101" means x=1, y=0, z=1.
class PropertyState {
public:
    PropertyState(unsigned value, int n) : value_(value), n_(n) {
        if (n < kMinProperties || n > kMaxProperties)
            throw PreconditionError("PropertyState: property count must be in [2, 12], got " + std::to_string(n));
        if (value >> n)
            throw PreconditionError("PropertyState: value has bits beyond property count");
    }

    static PropertyState from_string(std::string_view bits) {
        if (bits.size() < static_cast<size_t>(kMinProperties) || bits.size() > static_cast<size_t>(kMaxProperties))
            throw PreconditionError("PropertyState: bit-string length must be in [2, 12]: \"" + std::string(bits) + "\"");
        unsigned v = 0;
        for (char c : bits) {
            if (c != '0' && c != '1')
                throw PreconditionError("PropertyState: bit-string may contain only 0/1: \"" + std::string(bits) + "\"");
            v = (v << 1) | static_cast<unsigned>(c - '0');
        }
        return PropertyState(v, static_cast<int>(bits.size()));
    }

    int size() const { return n_; }
    unsigned value() const { return value_; }

    int bit(int k) const {
        if (k < 0 || k >= n_) throw PreconditionError("PropertyState: property position out of range");
        return static_cast<int>((value_ >> (n_ - 1 - k)) & 1u);
    }

    PropertyState with_flip(int k) const {
        if (k < 0 || k >= n_) throw PreconditionError("PropertyState: property position out of range");
        return PropertyState(value_ ^ (1u << (n_ - 1 - k)), n_);
    }

    std::string to_string() const {
        std::string s(static_cast<size_t>(n_), '0');
        for (int k = 0; k < n_; ++k) s[static_cast<size_t>(k)] = static_cast<char>('0' + bit(k));
        return s;
    }

    friend bool operator==(const PropertyState& a, const PropertyState& b) {
        return a.n_ == b.n_ && a.value_ == b.value_;
    }
    friend bool operator!=(const PropertyState& a, const PropertyState& b) { return !(a == b); }

private:
    unsigned value_;
    int n_;
};

inline int hamming(const PropertyState& a, const PropertyState& b) {
    if (a.size() != b.size()) throw PreconditionError("hamming: states have different property counts");
    return std::popcount(a.value() ^ b.value());
}

/// A fixed enumeration of all 2^n corners. External site indices are 1-based
/// everywhere in the public API and all I/O; only private storage is 0-based.
class SiteOrdering {
public:
    explicit SiteOrdering(std::vector<PropertyState> sites) : sites_(std::move(sites)) {
        if (sites_.empty()) throw PreconditionError("SiteOrdering: empty site list");
        n_ = sites_[0].size();
        const size_t expect = size_t{1} << n_;
        if (sites_.size() != expect)
            throw PreconditionError("SiteOrdering: need all 2^n states, got " + std::to_string(sites_.size()));
        index_of_.assign(expect, 0);
        std::vector<bool> seen(expect, false);
        for (size_t i = 0; i < sites_.size(); ++i) {
            if (sites_[i].size() != n_)
                throw PreconditionError("SiteOrdering: mixed property counts");
            const unsigned v = sites_[i].value();
            if (seen[v])
                throw PreconditionError("SiteOrdering: duplicate state " + sites_[i].to_string());
            seen[v] = true;
            index_of_[v] = static_cast<int>(i);
        }
    }

    /// The 3-property ordering (111),(110),(100),(101),(001),(011),(010),(000).
    static SiteOrdering standard3() {
        std::vector<PropertyState> s;
        for (const char* b : {"111", "110", "100", "101", "001", "011", "010", "000"})
            s.push_back(PropertyState::from_string(b));
        return SiteOrdering(std::move(s));
    }

    /// Canonical ordering for other property counts: reflected binary Gray code.
    static SiteOrdering gray(int n) {
        if (n < kMinProperties || n > kMaxProperties)
            throw PreconditionError("SiteOrdering::gray: property count must be in [2, 12]");
        std::vector<PropertyState> s;
        const unsigned count = 1u << n;
        for (unsigned i = 0; i < count; ++i) s.emplace_back(i ^ (i >> 1), n);
        return SiteOrdering(std::move(s));
    }

    int dimension() const { return n_; }
    int num_sites() const { return static_cast<int>(sites_.size()); }

    const PropertyState& state_of_index(int site) const {
        check_site(site);
        return sites_[static_cast<size_t>(site - 1)];
    }

    int index_of_state(const PropertyState& s) const {
        if (s.size() != n_)
            throw PreconditionError("index_of_state: state has " + std::to_string(s.size()) +
                                    " properties, ordering has " + std::to_string(n_));
        return index_of_[s.value()] + 1;
    }

    void check_site(int site) const {
        if (site < 1 || site > num_sites())
            throw PreconditionError("site index " + std::to_string(site) + " out of range [1, " +
                                    std::to_string(num_sites()) + "]");
    }

    friend bool operator==(const SiteOrdering& a, const SiteOrdering& b) { return a.sites_ == b.sites_; }
    friend bool operator!=(const SiteOrdering& a, const SiteOrdering& b) { return !(a == b); }

private:
    std::vector<PropertyState> sites_;
    std::vector<int> index_of_;
    int n_ = 0;
};

/// Allowed one-step flips: a symmetric 0/1 adjacency matrix over a site
/// ordering. Off-diagonal ones connect states differing in exactly one
/// property; diagonal ones are explicit "no flip" transitions.
class FlipGraph {
public:
    FlipGraph(SiteOrdering ordering,
              const std::vector<std::pair<int, int>>& edges,
              const std::vector<int>& self_loops)
        : ordering_(std::move(ordering)) {
        const int m = ordering_.num_sites();
        adj_.assign(static_cast<size_t>(m) * m, 0);
        std::set<std::pair<int, int>> seen_edges;
        for (auto [i, j] : edges) {
            ordering_.check_site(i);
            ordering_.check_site(j);
            if (i == j)
                throw PreconditionError("edge {" + std::to_string(i) + "," + std::to_string(j) +
                                        "}: self-loops must be listed separately");
            const auto key = std::minmax(i, j);
            if (!seen_edges.insert(key).second)
                throw PreconditionError("duplicate edge {" + std::to_string(i) + "," + std::to_string(j) + "}");
            const auto& a = ordering_.state_of_index(i);
            const auto& b = ordering_.state_of_index(j);
            if (hamming(a, b) != 1)
                throw PreconditionError("invalid flip: states " + a.to_string() + " and " + b.to_string() +
                                        " differ in " + std::to_string(hamming(a, b)) + " properties");
            at(i, j) = 1;
            at(j, i) = 1;
        }
        std::set<int> seen_loops;
        for (int i : self_loops) {
            ordering_.check_site(i);
            if (!seen_loops.insert(i).second)
                throw PreconditionError("duplicate self-loop at site " + std::to_string(i));
            at(i, i) = 1;
        }
        build_neighbors();
    }

    /// The 8-site graph of the three-property model: the six-cycle
    /// (110)-(100)-(101)-(001)-(011)-(010) plus a self-loop at every site.
    static FlipGraph standard() {
        SiteOrdering ord = SiteOrdering::standard3();
        const std::vector<std::pair<int, int>> edges = {{2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {7, 2}};
        std::vector<int> loops;
        for (int i = 1; i <= 8; ++i) loops.push_back(i);
        return FlipGraph(std::move(ord), edges, loops);
    }

    /// Control graph: every single-property flip allowed plus all self-loops.
    static FlipGraph full_cube(int n) {
        SiteOrdering ord = n == 3 ? SiteOrdering::standard3() : SiteOrdering::gray(n);
        std::vector<std::pair<int, int>> edges;
        std::vector<int> loops;
        for (int i = 1; i <= ord.num_sites(); ++i) {
            loops.push_back(i);
            const PropertyState& s = ord.state_of_index(i);
            for (int k = 0; k < n; ++k) {
                const int j = ord.index_of_state(s.with_flip(k));
                if (i < j) edges.emplace_back(i, j);
            }
        }
        return FlipGraph(std::move(ord), edges, loops);
    }

    const SiteOrdering& ordering() const { return ordering_; }
    int num_sites() const { return ordering_.num_sites(); }
    int dimension() const { return ordering_.dimension(); }

    int adj(int i, int j) const {
        ordering_.check_site(i);
        ordering_.check_site(j);
        return adj_[static_cast<size_t>(i - 1) * num_sites() + (j - 1)];
    }

    /// 1-based sites j with adj(i,j) = 1, ascending.
    const std::vector<int>& neighbors(int i) const {
        ordering_.check_site(i);
        return neighbors_[static_cast<size_t>(i - 1)];
    }

    /// Number of directed transitions: off-diagonal ones counted per
    /// direction plus diagonal ones (= total 1-entries of the matrix).
    int transition_count() const {
        int c = 0;
        for (auto v : adj_) c += v;
        return c;
    }

    bool has_self_loop(int i) const { return adj(i, i) == 1; }

    friend bool operator==(const FlipGraph& a, const FlipGraph& b) {
        return a.ordering_ == b.ordering_ && a.adj_ == b.adj_;
    }
    friend bool operator!=(const FlipGraph& a, const FlipGraph& b) { return !(a == b); }

private:
    uint8_t& at(int i, int j) { return adj_[static_cast<size_t>(i - 1) * ordering_.num_sites() + (j - 1)]; }

    void build_neighbors() {
        const int m = num_sites();
        neighbors_.assign(static_cast<size_t>(m), {});
        for (int i = 1; i <= m; ++i)
            for (int j = 1; j <= m; ++j)
                if (adj_[static_cast<size_t>(i - 1) * m + (j - 1)]) neighbors_[static_cast<size_t>(i - 1)].push_back(j);
    }

    SiteOrdering ordering_;
    std::vector<uint8_t> adj_;
    std::vector<std::vector<int>> neighbors_;
};

inline FlipGraph build_standard_graph() { return FlipGraph::standard(); }

inline FlipGraph build_graph(SiteOrdering ordering,
                             const std::vector<std::pair<int, int>>& edges,
                             const std::vector<int>& self_loops) {
    return FlipGraph(std::move(ordering), edges, self_loops);
}

/// An experiment: a graph plus a start specification. The start is either a
/// single 1-based site (a delta of one path) or explicit per-site counts.
struct WalkConfig {
    FlipGraph graph;
    std::variant<int, std::vector<BigInt>> start;
    std::string label;

    WalkConfig(FlipGraph g, std::variant<int, std::vector<BigInt>> s, std::string lbl = "")
        : graph(std::move(g)), start(std::move(s)), label(std::move(lbl)) {
        if (std::holds_alternative<int>(start)) {
            graph.ordering().check_site(std::get<int>(start));
        } else {
            const auto& counts = std::get<std::vector<BigInt>>(start);
            if (static_cast<int>(counts.size()) != graph.num_sites())
                throw PreconditionError("start vector length " + std::to_string(counts.size()) +
                                        " does not match graph with " + std::to_string(graph.num_sites()) + " sites");
            bool any = false;
            for (const auto& c : counts) {
                if (c < 0) throw PreconditionError("start vector has a negative entry");
                if (c > 0) any = true;
            }
            if (!any) throw PreconditionError("start vector is all zero");
        }
    }
};

} // namespace merw
