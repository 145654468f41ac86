// Acceptance suite: one test case per criterion, one [PASS]/[FAIL] line each.

#include "merw/merw.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>
#include <sys/wait.h>

using namespace merw;

namespace {

class CriterionListener : public Catch::EventListenerBase {
public:
    using EventListenerBase::EventListenerBase;
    void testCaseEnded(const Catch::TestCaseStats& stats) override {
        std::printf("%s %s\n", stats.totals.assertions.allOk() ? "[PASS]" : "[FAIL]",
                    stats.testInfo->name.c_str());
        std::fflush(stdout);
    }
};
CATCH_REGISTER_LISTENER(CriterionListener)

struct RunResult {
    int exit_code;
    std::string output;
};

RunResult run_cli(const std::string& args) {
    const char* bin = std::getenv("MERW_CLI_BIN");
    REQUIRE(bin != nullptr);
    const std::string cmd = std::string(bin) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string output;
    std::array<char, 4096> buf{};
    size_t got = 0;
    while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) output.append(buf.data(), got);
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, output};
}

std::string standard_config() {
    const char* dir = std::getenv("MERW_SOURCE_DIR");
    REQUIRE(dir != nullptr);
    return (std::filesystem::path(dir) / "configs" / "standard.json").string();
}

// Count vectors out of "t=K  n = (a, b, ...)  total = s" lines.
std::vector<std::vector<long long>> parse_count_rows(const std::string& text) {
    std::vector<std::vector<long long>> rows;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto open = line.find('(');
        const auto close = line.find(')');
        if (line.rfind("t=", 0) != 0 || open == std::string::npos || close == std::string::npos) continue;
        std::vector<long long> row;
        std::string cell;
        std::istringstream cells(line.substr(open + 1, close - open - 1));
        while (std::getline(cells, cell, ',')) row.push_back(std::stoll(cell));
        rows.push_back(std::move(row));
    }
    return rows;
}

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

const long long kPrintedCounts[6][8] = {
    {0, 0, 0, 1, 0, 0, 0, 0},      {0, 0, 1, 1, 1, 0, 0, 0},      {0, 1, 2, 3, 2, 1, 0, 0},
    {0, 3, 6, 7, 6, 3, 2, 0},      {0, 11, 16, 19, 16, 11, 8, 0}, {0, 35, 46, 51, 46, 35, 30, 0}};

} // namespace

TEST_CASE("criterion 1: evolve emits the printed count sequence in under a second") {
    const auto start = Clock::now();
    const RunResult r = run_cli("evolve " + standard_config() + " --steps 5");
    const double elapsed = seconds_since(start);

    REQUIRE(r.exit_code == 0);
    const auto rows = parse_count_rows(r.output);
    REQUIRE(rows.size() == 6);
    for (size_t t = 0; t < 6; ++t) {
        REQUIRE(rows[t].size() == 8);
        for (size_t i = 0; i < 8; ++i) CHECK(rows[t][i] == kPrintedCounts[t][i]);
    }
    CHECK(elapsed < 1.0);
}

TEST_CASE("criterion 2: stationary distribution is exactly uniform 1/6 with growth 3") {
    const FlipGraph g = build_standard_graph();

    const ArrivalResult exact = arrival_distribution(g, delta_start(g, 4));
    REQUIRE(exact.converged);
    CHECK(exact.exact);
    CHECK(exact.growth_rate == 3);
    CHECK(exact.prob(1) == 0);
    CHECK(exact.prob(8) == 0);
    for (int i = 2; i <= 7; ++i) CHECK(exact.prob(i) == Rational(1, 6));
    CHECK(exact.support == std::vector<int>{2, 3, 4, 5, 6, 7});

    ArrivalOptions options;
    options.mode = ArrivalMode::kFloat;
    options.tolerance = 1e-13;
    options.max_iter = 200;
    const ArrivalResult approx = arrival_distribution(g, delta_start(g, 4), options);
    REQUIRE(approx.converged);
    CHECK(approx.iterations <= 200);
    for (int i = 1; i <= 8; ++i)
        CHECK(std::abs(to_double(approx.prob(i)) - to_double(exact.prob(i))) < 1e-12);
    CHECK(std::abs(to_double(approx.growth_rate) - 3.0) < 1e-12);
}

TEST_CASE("criterion 3: measurement ensembles have 10 trajectories (2 favorable) and 18 unmasked") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = arrival_distribution(g, delta_start(g, 4));

    for (const auto& pair : canonical_pairs()) {
        const MeasurementOutcome out = equality_probability(measure(g, arrival, pair));
        CHECK(out.trajectory_count == 10);
        CHECK(out.favorable_count == 2);
        CHECK(out.p_equal == Rational(2, 10));
    }
    CHECK(enumerate_trajectories(g, arrival).trajectory_count() == 18);
}

TEST_CASE("criterion 4: bell sums are exactly 6/10 measured and 1 unmeasured, with verdicts") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = arrival_distribution(g, delta_start(g, 4));
    CHECK(bell_sum_measured(g, arrival).total == Rational(6, 10));
    CHECK(bell_sum_unmeasured(arrival).total == 1);

    const RunResult measured = run_cli("bell " + standard_config() + " --mode measured");
    REQUIRE(measured.exit_code == 0);
    CHECK(measured.output.find("total = 6/10 = 3/5") != std::string::npos);
    CHECK(measured.output.find("VIOLATED") != std::string::npos);

    const RunResult unmeasured = run_cli("bell " + standard_config() + " --mode unmeasured");
    REQUIRE(unmeasured.exit_code == 0);
    CHECK(unmeasured.output.find("total = 1 = 1.000000000000") != std::string::npos);
    CHECK(unmeasured.output.find("SATISFIED") != std::string::npos);
}

TEST_CASE("criterion 5: 10000 random rational joints satisfy the Mermin bound in under 10 s") {
    const auto start = Clock::now();
    Xoshiro256StarStar rng(2718281828ull);
    int satisfied = 0;
    for (int trial = 0; trial < 10000; ++trial) {
        const MerminCheck check = mermin_bound_check(oracles::random_joint(rng));
        if (check.satisfied && check.sum >= 1) ++satisfied;
    }
    CHECK(satisfied == 10000);
    CHECK(seconds_since(start) < 10.0);
}

TEST_CASE("criterion 6: path totals are 3^t for t <= 30, cross-checked by enumeration to t = 10") {
    const FlipGraph g = build_standard_graph();
    const CountVector n0 = delta_start(g, 4);
    CountVector n = n0;
    for (int t = 0; t <= 30; ++t) {
        CHECK(total_paths(n) == pow_int(3, static_cast<unsigned>(t)));
        n = evolve(g, n, 1);
    }
    for (int t = 0; t <= 10; ++t)
        CHECK(evolve(g, n0, t).counts == oracles::walk_endpoint_counts(g, n0, t));
}

TEST_CASE("criterion 7: the full cube control gives exactly 3/2, matching the oracle") {
    const FlipGraph cube = FlipGraph::full_cube(3);
    const ArrivalResult arrival = arrival_distribution(cube, delta_start(cube, 4));
    const BellMeasuredResult bell = bell_sum_measured(cube, arrival);
    CHECK(bell.total == Rational(3, 2));

    Rational oracle_total = 0;
    for (const auto& pair : canonical_pairs())
        oracle_total += oracles::equality_probability(mask_graph(cube, pair), arrival, pair);
    CHECK(oracle_total == Rational(3, 2));
    CHECK(bell.total == oracle_total);
}

TEST_CASE("criterion 8: seeded Monte Carlo is consistent, chi-square clean and bit-identical in under 30 s") {
    const auto start = Clock::now();
    const WalkConfig config(build_standard_graph(), 4, "acceptance");
    SamplerConfig cfg{7, 100000, 1};

    const EstimateReport report = validate_all(config, cfg);
    for (const auto& row : report.rows) CHECK(std::abs(row.z) < kMaxAbsZ);
    bool saw_t5 = false;
    for (const auto& chi : report.chi_squares) {
        CHECK(chi.p_value > kMinChiSquareP);
        if (chi.name == "endpoint[T=5]") saw_t5 = true;
    }
    CHECK(saw_t5);
    CHECK(report.ok());

    const EstimateReport again = validate_all(config, cfg);
    CHECK(render_report(report, OutputFormat::kJsonl) == render_report(again, OutputFormat::kJsonl));
    CHECK(seconds_since(start) < 30.0);
}

TEST_CASE("criterion 9: equality probability matches the brute-force oracle on 100 random graphs") {
    Xoshiro256StarStar rng(909090);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 2 + static_cast<int>(rng.next() % 3);
        const FlipGraph g = oracles::random_flip_graph(n, rng);
        const int start = 1 + static_cast<int>(rng.next() % static_cast<unsigned>(g.num_sites()));
        const ArrivalResult arrival = arrival_distribution(g, delta_start(g, start));
        const int a = static_cast<int>(rng.next() % static_cast<unsigned>(n));
        int b = static_cast<int>(rng.next() % static_cast<unsigned>(n));
        if (b == a) b = (a + 1) % n;
        const MeasurementPair pair{a, b};
        const FlipGraph masked = mask_graph(g, pair);
        const MeasurementOutcome out = equality_probability(enumerate_trajectories(masked, arrival, pair));
        CHECK(out.p_equal == oracles::equality_probability(masked, arrival, pair));
    }
}
