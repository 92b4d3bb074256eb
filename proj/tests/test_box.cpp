#include "testutil.hpp"

using namespace aq;
using aqtest::ev;

TEST_CASE("PR box validates") {
    ValidationReport rep = validate_box(aqtest::pr_box22());
    CHECK(rep.valid());
    CHECK(rep.worst_normalization <= 1e-15);
    CHECK(rep.worst_signalling <= 1e-15);
}

TEST_CASE("normalization defect is caught with its residual") {
    Box b = aqtest::pr_box22();
    for (int a = 0; a < 2; ++a)
        for (int bb = 0; bb < 2; ++bb) b.at({0, 0}, {a, bb}) *= 0.9;
    ValidationReport rep = validate_box(b);
    CHECK_FALSE(rep.normalized);
    CHECK(rep.worst_normalization == Catch::Approx(0.1).margin(1e-12));
}

TEST_CASE("signalling defect is caught") {
    Scenario sc({2, 2}, {2, 2});
    Box b = Box::zeros(sc);
    // party 0 outputs its input: marginal depends on x
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) b.at({x, y}, {x, 0}) = 1.0;
    ValidationReport rep = validate_box(b);
    CHECK(rep.normalized);
    CHECK_FALSE(rep.no_signalling);
    CHECK(rep.worst_signalling == Catch::Approx(1.0));
}

TEST_CASE("dimension mismatch is a structural error, not a failed report") {
    Scenario sc({2, 2}, {2, 2});
    CHECK_THROWS_AS(Box(sc, std::vector<double>(15, 0.0)), structural_error);
}

TEST_CASE("marginal probability uses no-signalling marginalization") {
    Box pr = aqtest::pr_box22();
    CHECK(marginal_probability(pr, ev({{0, 0, 1}})) == Catch::Approx(0.5));
    CHECK(marginal_probability(pr, ev({{1, 1, 1}})) == Catch::Approx(0.5));
    CHECK(marginal_probability(pr, ev({{0, 0, 1}, {1, 0, 1}})) == Catch::Approx(0.5));
    CHECK(marginal_probability(pr, ev({{0, 1, 1}, {1, 1, 1}})) == Catch::Approx(0.0));
    CHECK(marginal_probability(pr, Event{}) == Catch::Approx(1.0));
}

TEST_CASE("PR box in Collins-Gisin coordinates") {
    CGVector v = box_to_cg(aqtest::pr_box22());
    // internal order: A(1|0) A(1|1) B(1|0) B(1|1) J00 J01 J10 J11
    const std::vector<double> expect{0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.5, 0.0};
    REQUIRE(v.coefficients.size() == expect.size());
    for (std::size_t i = 0; i < expect.size(); ++i)
        CHECK(v.coefficients[i] == Catch::Approx(expect[i]).margin(1e-14));
}

TEST_CASE("all-zero deterministic box maps to the zero CG vector") {
    Scenario sc({2, 2}, {2, 2});
    Box b = aqtest::deterministic_box(sc, {{0, 0}, {0, 0}});
    for (double c : box_to_cg(b).coefficients) CHECK(c == 0.0);
}

TEST_CASE("CG round-trip is the identity") {
    std::mt19937_64 rng(17);
    for (const Scenario& sc :
         {Scenario({2, 2}, {2, 2}), Scenario({3, 2}, {3, 3}), Scenario({2, 2, 2}, {2, 2, 2})}) {
        for (int t = 0; t < 8; ++t) {
            Box b = aqtest::random_local_box(sc, rng);
            REQUIRE(validate_box(b).valid());
            Box back = cg_to_box(box_to_cg(b));
            for (std::size_t i = 0; i < b.table.size(); ++i)
                CHECK(std::abs(back.table[i] - b.table[i]) <= tol::cg_roundtrip);
        }
    }
}

TEST_CASE("invalid CG coefficients are rejected") {
    CGVector v;
    v.scenario = Scenario({2, 2}, {2, 2});
    v.coefficients = {1.0, 1.0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.0}; // P(1,1|00)=0 but marginals 1
    CHECK_THROWS_AS(cg_to_box(v), invalid_cg_error);
}

TEST_CASE("size cap yields a structural error") {
    Scenario big({10, 10, 10, 10}, {10, 10, 10, 10}); // 10^8 entries
    CHECK_THROWS_AS(Box::zeros(big), structural_error);
}
