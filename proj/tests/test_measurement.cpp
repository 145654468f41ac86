#include "merw/measurement.hpp"

#include "oracles.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <chrono>
#include <set>

using namespace merw;

namespace {

ArrivalResult standard_arrival() {
    const FlipGraph g = build_standard_graph();
    return arrival_distribution(g, delta_start(g, 4));
}

std::set<std::pair<int, int>> transition_set(const TrajectoryEnsemble& e) {
    return {e.transitions.begin(), e.transitions.end()};
}

} // namespace

TEST_CASE("measurement pair validation and names") {
    CHECK(MeasurementPair(0, 1).name() == "xy");
    CHECK(MeasurementPair(1, 2).name() == "yz");
    CHECK(MeasurementPair(2, 0).name() == "zx");
    CHECK_THROWS_AS(MeasurementPair(1, 1), PreconditionError);
    CHECK_THROWS_AS(MeasurementPair(-1, 0), PreconditionError);
    CHECK_THROWS_AS(MeasurementPair(0, 3).check_dimension(3), PreconditionError);
}

TEST_CASE("masking the standard graph for (x,y) keeps only z-flips") {
    const FlipGraph g = build_standard_graph();
    const FlipGraph masked = mask_graph(g, {0, 1});

    // Off-diagonal survivors: (100)<->(101) = sites 3,4 and (011)<->(010) = sites 6,7.
    for (int i = 1; i <= 8; ++i)
        for (int j = 1; j <= 8; ++j) {
            const bool survivor = (i == j && g.adj(i, j)) || (i == 3 && j == 4) || (i == 4 && j == 3) ||
                                  (i == 6 && j == 7) || (i == 7 && j == 6);
            CHECK(masked.adj(i, j) == (survivor ? 1 : 0));
        }

    SECTION("masking is idempotent") {
        CHECK(mask_graph(masked, {0, 1}) == masked);
    }
}

TEST_CASE("masking the full cube keeps loops plus the free flip") {
    const FlipGraph cube = FlipGraph::full_cube(3);
    const FlipGraph masked = mask_graph(cube, {0, 1});
    // 8 self-loops + 4 z-flip edges in both directions.
    CHECK(masked.transition_count() == 16);
    int off_diag = 0;
    for (int i = 1; i <= 8; ++i)
        for (int j = 1; j <= 8; ++j)
            if (i != j && masked.adj(i, j)) {
                ++off_diag;
                const auto& si = masked.ordering().state_of_index(i);
                const auto& sj = masked.ordering().state_of_index(j);
                CHECK(si.bit(0) == sj.bit(0));
                CHECK(si.bit(1) == sj.bit(1));
                CHECK(si.bit(2) != sj.bit(2));
            }
    CHECK(off_diag == 8);
}

TEST_CASE("the (x,y) measurement admits 10 trajectories, 2 favorable") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();
    const TrajectoryEnsemble ens = measure(g, arrival, {0, 1});

    CHECK(ens.trajectory_count() == 10);
    Rational sum = 0;
    for (const auto& w : ens.weights) {
        CHECK(w == Rational(1, 10));
        sum += w;
    }
    CHECK(sum == 1);

    const MeasurementOutcome out = equality_probability(ens);
    CHECK(out.trajectory_count == 10);
    CHECK(out.favorable_count == 2);
    CHECK(out.p_equal == Rational(2, 10));

    // The two favorable trajectories are the self-loops at (110) and (001).
    std::set<std::pair<int, int>> favorable;
    for (size_t k = 0; k < ens.transitions.size(); ++k) {
        const auto& s = ens.ordering.state_of_index(ens.transitions[k].first);
        if (s.bit(0) == s.bit(1)) favorable.insert(ens.transitions[k]);
    }
    CHECK(favorable == std::set<std::pair<int, int>>{{2, 2}, {5, 5}});
}

TEST_CASE("every transition of a measured ensemble preserves the measured bits") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();
    for (const auto& pair : canonical_pairs()) {
        const TrajectoryEnsemble ens = measure(g, arrival, pair);
        for (const auto& [i, j] : ens.transitions) {
            const auto& si = ens.ordering.state_of_index(i);
            const auto& sj = ens.ordering.state_of_index(j);
            CHECK(si.bit(pair.a) == sj.bit(pair.a));
            CHECK(si.bit(pair.b) == sj.bit(pair.b));
            CHECK(arrival.in_support(i));
        }
    }
}

TEST_CASE("the unmasked one-step ensemble on the cycle has 18 trajectories") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();
    const TrajectoryEnsemble ens = enumerate_trajectories(g, arrival);
    CHECK(ens.trajectory_count() == 18);
    CHECK_FALSE(ens.pair.has_value());
    Rational sum = 0;
    for (const auto& w : ens.weights) sum += w;
    CHECK(sum == 1);
    CHECK_THROWS_AS(equality_probability(ens), PreconditionError);
}

TEST_CASE("all three canonical measurements give 2/10") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();
    for (const auto& pair : canonical_pairs()) {
        const MeasurementOutcome out = equality_probability(measure(g, arrival, pair));
        CHECK(out.trajectory_count == 10);
        CHECK(out.favorable_count == 2);
        CHECK(out.p_equal == Rational(1, 5));
    }
}

TEST_CASE("cyclic relabeling maps the (x,y) ensemble onto the (y,z) ensemble") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();
    const TrajectoryEnsemble exy = measure(g, arrival, {0, 1});
    const TrajectoryEnsemble eyz = measure(g, arrival, {1, 2});

    // x->y->z->x: the image of state (abc) is (cab).
    auto rotate = [&](int site) {
        const PropertyState s = g.ordering().state_of_index(site);
        const unsigned v = static_cast<unsigned>((s.bit(2) << 2) | (s.bit(0) << 1) | s.bit(1));
        return g.ordering().index_of_state(PropertyState(v, 3));
    };
    std::set<std::pair<int, int>> mapped;
    for (const auto& [i, j] : exy.transitions) mapped.emplace(rotate(i), rotate(j));
    CHECK(mapped == transition_set(eyz));
}

TEST_CASE("full-cube control measurement gives 1/2") {
    const FlipGraph cube = FlipGraph::full_cube(3);
    const ArrivalResult arrival = arrival_distribution(cube, delta_start(cube, 4));
    const MeasurementOutcome out = equality_probability(measure(cube, arrival, {0, 1}));
    CHECK(out.trajectory_count == 16);
    CHECK(out.favorable_count == 8);
    CHECK(out.p_equal == Rational(1, 2));
}

TEST_CASE("bell sums: violation with the restricted edges, none without") {
    const FlipGraph g = build_standard_graph();
    const ArrivalResult arrival = standard_arrival();

    SECTION("measured mode sums to 6/10") {
        const BellMeasuredResult bell = bell_sum_measured(g, arrival);
        REQUIRE(bell.per_pair.size() == 3);
        for (const auto& out : bell.per_pair) CHECK(out.p_equal == Rational(2, 10));
        CHECK(bell.total == Rational(6, 10));
        CHECK(bell.total < 1);
    }
    SECTION("unmeasured mode sums to exactly 1") {
        const BellUnmeasuredResult bell = bell_sum_unmeasured(arrival);
        REQUIRE(bell.per_pair.size() == 3);
        for (const auto& [pair, p] : bell.per_pair) CHECK(p == Rational(1, 3));
        CHECK(bell.total == 1);
    }
    SECTION("full cube control: measured sum is 3/2") {
        const FlipGraph cube = FlipGraph::full_cube(3);
        const ArrivalResult cube_arrival = arrival_distribution(cube, delta_start(cube, 4));
        CHECK(bell_sum_measured(cube, cube_arrival).total == Rational(3, 2));
        CHECK(bell_sum_unmeasured(cube_arrival).total == Rational(3, 2));
    }
    SECTION("self-loops only, uniform start: measured sum is 3/2") {
        SiteOrdering ord = SiteOrdering::standard3();
        const FlipGraph loops = build_graph(std::move(ord), {}, {1, 2, 3, 4, 5, 6, 7, 8});
        CountVector uniform;
        uniform.counts.assign(8, BigInt(1));
        const ArrivalResult a = arrival_distribution(loops, uniform);
        CHECK(bell_sum_measured(loops, a).total == Rational(3, 2));
    }
}

TEST_CASE("unmeasured bell sum on simple joint ensembles") {
    const FlipGraph g = build_standard_graph();
    SECTION("point mass on (111) gives 3") {
        const ArrivalResult point = arrival_distribution(g, delta_start(g, 1));
        CHECK(bell_sum_unmeasured(point).total == 3);
    }
    SECTION("uniform over all 8 corners gives 3/2") {
        SiteOrdering ord = SiteOrdering::standard3();
        const FlipGraph loops = build_graph(std::move(ord), {}, {1, 2, 3, 4, 5, 6, 7, 8});
        CountVector uniform;
        uniform.counts.assign(8, BigInt(1));
        CHECK(bell_sum_unmeasured(arrival_distribution(loops, uniform)).total == Rational(3, 2));
    }
}

TEST_CASE("mermin bound check") {
    SECTION("uniform joint gives 3/2") {
        const JointDistribution uniform(3, std::vector<Rational>(8, Rational(1, 8)));
        const MerminCheck check = mermin_bound_check(uniform);
        CHECK(check.sum == Rational(3, 2));
        CHECK(check.satisfied);
    }
    SECTION("point mass on (101) gives exactly 1") {
        std::vector<Rational> probs(8, Rational(0));
        probs[PropertyState::from_string("101").value()] = 1;
        const MerminCheck check = mermin_bound_check(JointDistribution(3, std::move(probs)));
        CHECK(check.sum == 1);
        CHECK(check.satisfied);
    }
    SECTION("holds for random rational joints") {
        Xoshiro256StarStar rng(5);
        for (int trial = 0; trial < 2000; ++trial) {
            const MerminCheck check = mermin_bound_check(oracles::random_joint(rng));
            CHECK(check.sum >= 1);
            CHECK(check.satisfied);
        }
    }
    SECTION("agrees with the unmeasured bell sum through from_arrival") {
        const ArrivalResult arrival = standard_arrival();
        const MerminCheck check = mermin_bound_check(JointDistribution::from_arrival(arrival));
        CHECK(check.sum == bell_sum_unmeasured(arrival).total);
    }
}

TEST_CASE("joint distribution validation") {
    CHECK_THROWS_AS(JointDistribution(3, std::vector<Rational>(7, Rational(1, 7))), PreconditionError);
    CHECK_THROWS_AS(JointDistribution(3, std::vector<Rational>(8, Rational(1, 4))), PreconditionError);
    const JointDistribution two(2, std::vector<Rational>(4, Rational(1, 4)));
    CHECK_THROWS_AS(mermin_bound_check(two), PreconditionError);
}

TEST_CASE("library equality probability matches the brute-force oracle") {
    Xoshiro256StarStar rng(777);
    for (int trial = 0; trial < 60; ++trial) {
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

TEST_CASE("degenerate measurements and misuse are rejected") {
    SECTION("empty ensemble") {
        // Hand-built arrival whose only support site loses all transitions
        // under the mask: one y-flip edge, no self-loops anywhere relevant.
        SiteOrdering ord = SiteOrdering::standard3();
        const FlipGraph g = build_graph(std::move(ord), {{2, 3}}, {1});
        std::vector<Rational> probs(8, Rational(0));
        probs[1] = 1; // site 2 = (110)
        const ArrivalResult fake{g.ordering(), Distribution(std::move(probs)), Rational(1), {2}, true, true, 0};
        const FlipGraph masked = mask_graph(g, {0, 1});
        CHECK_THROWS_AS(enumerate_trajectories(masked, fake, MeasurementPair{0, 1}), DegenerateEnsembleError);
    }
    SECTION("unmasked graph with a pair that its transitions violate") {
        const FlipGraph g = build_standard_graph();
        const ArrivalResult arrival = standard_arrival();
        CHECK_THROWS_AS(enumerate_trajectories(g, arrival, MeasurementPair{0, 1}), PreconditionError);
    }
    SECTION("unconverged arrival is rejected") {
        const FlipGraph g = build_standard_graph();
        ArrivalResult bad = standard_arrival();
        bad.converged = false;
        CHECK_THROWS_AS(enumerate_trajectories(g, bad), PreconditionError);
    }
}
