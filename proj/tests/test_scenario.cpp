#include "testutil.hpp"

using namespace aq;
using aqtest::ev;

TEST_CASE("scenario invariants") {
    CHECK_THROWS_AS(Scenario({2}, {2, 2}), structural_error);
    CHECK_THROWS_AS(Scenario({0, 2}, {2, 2}), structural_error);
    CHECK_THROWS_AS(Scenario({2, 2}, {2, 1}), structural_error);
    Scenario sc({3, 2}, {2, 4});
    CHECK(sc.table_size() == 3 * 2 * 2 * 4);
}

TEST_CASE("event canonicalization and validation") {
    Event e({{1, 0, 1}, {0, 1, 1}});
    CHECK(e.parts()[0].party == 0);
    CHECK(e.str() == "0:1:1;1:0:1");
    CHECK(Event{}.str() == "phi");
    CHECK_THROWS_AS(Event({{0, 0, 1}, {0, 1, 1}}), structural_error);
    Scenario sc({2, 2}, {2, 2});
    CHECK_THROWS_AS(ev({{0, 2, 1}}).check_in(sc), structural_error);
    CHECK_THROWS_AS(ev({{0, 0, 2}}).check_in(sc), structural_error);
    CHECK_THROWS_AS(ev({{2, 0, 1}}).check_in(sc), structural_error);
}

TEST_CASE("local orthogonality") {
    // same party, same input, different outputs
    CHECK(locally_orthogonal(ev({{0, 0, 1}}), ev({{0, 0, 0}})));
    // same party, different inputs
    CHECK_FALSE(locally_orthogonal(ev({{0, 0, 1}}), ev({{0, 1, 1}})));
    // joint events sharing party 0 at x=0 with differing outputs
    CHECK(locally_orthogonal(ev({{0, 0, 0}, {1, 0, 0}}), ev({{0, 0, 1}, {1, 1, 0}})));
    // disjoint parties are never orthogonal
    CHECK_FALSE(locally_orthogonal(ev({{0, 0, 1}}), ev({{1, 0, 0}})));
}

TEST_CASE("local orthogonality is symmetric and irreflexive on equal assignments") {
    std::mt19937_64 rng(3);
    Scenario sc({2, 3}, {3, 2});
    auto random_event = [&]() {
        std::vector<Assignment> parts;
        for (int k = 0; k < 2; ++k)
            if (rng() & 1)
                parts.push_back({k, static_cast<int>(rng() % sc.inputs[k]),
                                 static_cast<int>(rng() % sc.outputs[k])});
        return Event(parts);
    };
    for (int t = 0; t < 200; ++t) {
        Event a = random_event(), b = random_event();
        CHECK(locally_orthogonal(a, b) == locally_orthogonal(b, a));
        CHECK_FALSE(locally_orthogonal(a, a));
    }
}

TEST_CASE("enumerate_events for the 2222 scenario") {
    Scenario sc({2, 2}, {2, 2});
    auto aqevs = enumerate_events(sc, Level::AlmostQuantum);
    REQUIRE(aqevs.size() == 9);
    CHECK(aqevs[0].str() == "phi");
    CHECK(aqevs[1].str() == "0:0:1");
    CHECK(aqevs[2].str() == "0:1:1");
    CHECK(aqevs[3].str() == "1:0:1");
    CHECK(aqevs[4].str() == "1:1:1");
    CHECK(aqevs[5].str() == "0:0:1;1:0:1");
    CHECK(aqevs[6].str() == "0:0:1;1:1:1"); // joint inputs lexicographic: (0,0),(0,1),(1,0),(1,1)
    CHECK(aqevs[7].str() == "0:1:1;1:0:1");
    CHECK(aqevs[8].str() == "0:1:1;1:1:1");

    CHECK(enumerate_events(sc, Level::Q1).size() == 5);
    CHECK(enumerate_events(Scenario({1}, {2}), Level::AlmostQuantum).size() == 2);
}

TEST_CASE("enumerate_events count formula for bipartite scenarios") {
    for (auto [ma, da, mb, db] : {std::array<int, 4>{2, 2, 2, 2}, std::array<int, 4>{3, 3, 2, 3},
                                  std::array<int, 4>{4, 4, 2, 4}, std::array<int, 4>{3, 2, 3, 2}}) {
        Scenario sc({ma, mb}, {da, db});
        const std::size_t expect =
            1 + ma * (da - 1) + mb * (db - 1) + std::size_t(ma) * mb * (da - 1) * (db - 1);
        CHECK(enumerate_events(sc, Level::AlmostQuantum).size() == expect);
    }
    // the d=3 scenario from the noise family: 35 rows
    CHECK(enumerate_events(Scenario({3, 2}, {3, 3}), Level::AlmostQuantum).size() == 35);
}

TEST_CASE("event ordering matches enumeration order") {
    Scenario sc({2, 2}, {3, 3});
    auto evs = enumerate_events(sc, Level::AlmostQuantum);
    for (std::size_t i = 0; i + 1 < evs.size(); ++i) CHECK(evs[i] < evs[i + 1]);
}
