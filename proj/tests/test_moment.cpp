#include "testutil.hpp"

using namespace aq;
using aqtest::ev;

namespace {
const Scenario sc22({2, 2}, {2, 2});
}

TEST_CASE("classify_pair base cases") {
    Scenario sc33({2, 2}, {3, 3});
    // same party, same input, different nonzero outputs
    CHECK(classify_pair(ev({{0, 0, 1}}), ev({{0, 0, 2}}), sc33).kind == EntryClass::Zero);
    // disjoint parties merge into a probability entry
    EntryClass p = classify_pair(ev({{0, 0, 1}}), ev({{1, 1, 1}}), sc22);
    REQUIRE(p.kind == EntryClass::Prob);
    CHECK(p.merged.str() == "0:0:1;1:1:1");
    // same party, different inputs
    CHECK(classify_pair(ev({{0, 0, 1}}), ev({{0, 1, 1}}), sc22).kind == EntryClass::Free);
    // diagonal pins to the event's own probability
    EntryClass d = classify_pair(ev({{0, 0, 1}, {1, 0, 1}}), ev({{0, 0, 1}, {1, 0, 1}}), sc22);
    REQUIRE(d.kind == EntryClass::Prob);
    CHECK(d.merged.str() == "0:0:1;1:0:1");
    // phi against anything is the plain probability
    EntryClass f = classify_pair(Event{}, ev({{0, 0, 1}}), sc22);
    REQUIRE(f.kind == EntryClass::Prob);
    CHECK(f.merged.str() == "0:0:1");
}

TEST_CASE("classify_pair shared-factor reduction key") {
    // (1,1|0,0) vs (1,1|0,1): shared A(1|0) drops, leaving {B(1|0), (1,1|0,1)}
    EntryClass c = classify_pair(ev({{0, 0, 1}, {1, 0, 1}}), ev({{0, 0, 1}, {1, 1, 1}}), sc22);
    REQUIRE(c.kind == EntryClass::Free);
    CHECK(c.key.first.str() == "1:0:1");
    CHECK(c.key.second.str() == "0:0:1;1:1:1");
}

TEST_CASE("classify_pair outputs-zero precondition") {
    CHECK_THROWS_AS(classify_pair(ev({{0, 0, 0}}), ev({{1, 0, 1}}), sc22), structural_error);
}

TEST_CASE("classify_pair is symmetric") {
    std::mt19937_64 rng(5);
    Scenario sc({2, 2}, {3, 3});
    auto random_event = [&]() {
        std::vector<Assignment> parts;
        while (parts.empty())
            for (int k = 0; k < 2; ++k)
                if (rng() & 1)
                    parts.push_back({k, static_cast<int>(rng() % sc.inputs[k]),
                                     1 + static_cast<int>(rng() % (sc.outputs[k] - 1))});
        return Event(parts);
    };
    for (int t = 0; t < 300; ++t) {
        Event a = random_event(), b = random_event();
        EntryClass x = classify_pair(a, b, sc), y = classify_pair(b, a, sc);
        CHECK(x.kind == y.kind);
        if (x.kind == EntryClass::Prob) CHECK(x.merged == y.merged);
        if (x.kind == EntryClass::Free) CHECK(x.key == y.key);
    }
}

TEST_CASE("diagonal entries are the event's own probability") {
    Scenario sc({2, 2}, {3, 2});
    for (const Event& e : cg_basis(sc)) {
        EntryClass c = classify_pair(e, e, sc);
        REQUIRE(c.kind == EntryClass::Prob);
        CHECK(c.merged == e);
    }
}

TEST_CASE("moment problem dimensions") {
    CHECK(build_moment_problem(sc22, Level::AlmostQuantum, FreeBox{}).dim() == 9);
    CHECK(build_moment_problem(sc22, Level::Q1, FreeBox{}).dim() == 5);
    CHECK(build_moment_problem(Scenario({3, 2}, {3, 3}), Level::AlmostQuantum, FreeBox{}).dim() ==
          35);
}

TEST_CASE("Q1 classification reproduces the macroscopic-locality matrix") {
    MomentProblem mp = build_moment_problem(sc22, Level::Q1, FreeBox{});
    // index: phi, A(1|0), A(1|1), B(1|0), B(1|1)
    CHECK(mp.cell(1, 2).kind == EntryClass::Free);  // same party, different input
    CHECK(mp.cell(3, 4).kind == EntryClass::Free);
    CHECK(mp.cell(1, 3).kind == EntryClass::Prob);  // cross party: joint probability
    CHECK(mp.prob_events[mp.cell(1, 3).id].str() == "0:0:1;1:0:1");
    CHECK(mp.cell(0, 1).kind == EntryClass::Prob);
    // with d = 3, same input different outputs on one side are zeros
    MomentProblem mp3 = build_moment_problem(Scenario({2, 2}, {3, 3}), Level::Q1, FreeBox{});
    // index: phi, A(1|0), A(2|0), A(1|1), A(2|1), B...
    CHECK(mp3.index[1].str() == "0:0:1");
    CHECK(mp3.index[2].str() == "0:0:2");
    CHECK(mp3.cell(1, 2).kind == EntryClass::Zero);
}

TEST_CASE("condition (d) closure links all three reduction cells") {
    MomentProblem mp = build_moment_problem(sc22, Level::AlmostQuantum, FreeBox{});
    // index: 0 phi, 1 A(1|0), 2 A(1|1), 3 B(1|0), 4 B(1|1), 5 J00, 6 J01, 7 J10, 8 J11
    // shared A(1|0) in (J00, J01): Gamma_{J00,J01} = Gamma_{B(1|0),J01} = Gamma_{J00,B(1|1)}
    const auto& a = mp.cell(5, 6);
    const auto& b = mp.cell(3, 6);
    const auto& c = mp.cell(5, 4);
    REQUIRE(a.kind == EntryClass::Free);
    CHECK(a.id == b.id);
    CHECK(a.id == c.id);
    // 8 free classes in the 2222 almost-quantum matrix after closure
    CHECK(mp.free_keys.size() == 8);
}

TEST_CASE("paper certificate is accepted against the paper box") {
    Box box = paper_box();
    CHECK(validate_box(box).valid());
    CertificateReport rep = validate_certificate(paper_certificate(), box, Level::AlmostQuantum);
    CHECK(rep.accepted);
    CHECK(rep.min_eigenvalue >= -1e-9);
    CHECK(rep.max_prob_residual <= 1e-9);
    CHECK(rep.max_group_residual <= 1e-9);
}

TEST_CASE("identity matrix is rejected as a certificate") {
    Box box = paper_box();
    CertificateReport rep =
        validate_certificate(Eigen::MatrixXd::Identity(9, 9), box, Level::AlmostQuantum);
    CHECK_FALSE(rep.accepted);
    CHECK(rep.max_prob_residual >= 9.0 / 20.0 - 1e-12); // Gamma_{phi,A(1|0)} = 0 != 9/20
}

TEST_CASE("certificate dimension mismatch is structural") {
    CHECK_THROWS_AS(
        validate_certificate(Eigen::MatrixXd::Identity(5, 5), paper_box(), Level::AlmostQuantum),
        structural_error);
}

TEST_CASE("gram vectors reproduce their matrix") {
    SECTION("identity gives an orthonormal set") {
        auto vs = gram_vectors(Eigen::MatrixXd::Identity(3, 3));
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                CHECK(vs[i].dot(vs[j]) == Catch::Approx(i == j ? 1.0 : 0.0).margin(1e-12));
    }
    SECTION("rank-1 all-ones gives equal unit vectors") {
        Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(2, 2);
        auto vs = gram_vectors(ones);
        CHECK((vs[0] - vs[1]).norm() <= 1e-12);
        CHECK(vs[0].norm() == Catch::Approx(1.0));
    }
    SECTION("paper certificate decomposes within 1e-8") {
        Eigen::MatrixXd g = paper_certificate();
        auto vs = gram_vectors(g);
        for (int i = 0; i < 9; ++i)
            for (int j = i; j < 9; ++j)
                CHECK(vs[i].dot(vs[j]) == Catch::Approx(g(i, j)).margin(1e-8));
    }
    SECTION("indefinite matrices are refused") {
        Eigen::MatrixXd m(2, 2);
        m << 1.0, 2.0, 2.0, 1.0;
        CHECK_THROWS_AS(gram_vectors(m), structural_error);
    }
}

TEST_CASE("paper gram vectors satisfy the vector-form conditions") {
    // orthogonality on locally orthogonal events, probabilities against phi,
    // and the shared-factor consistency, within 1e-8
    Eigen::MatrixXd g = paper_certificate();
    auto vs = gram_vectors(g);
    MomentProblem mp = build_moment_problem(sc22, Level::AlmostQuantum, FixedBox{paper_box()});
    for (std::size_t i = 0; i < mp.index.size(); ++i) {
        CHECK(vs[0].dot(vs[i]) ==
              Catch::Approx(marginal_probability(paper_box(), mp.index[i])).margin(1e-8));
        for (std::size_t j = i; j < mp.index.size(); ++j)
            if (locally_orthogonal(mp.index[i], mp.index[j]))
                CHECK(std::abs(vs[i].dot(vs[j])) <= 1e-8);
    }
}

TEST_CASE("Q1 principal submatrix of a valid certificate is a valid Q1 certificate") {
    Box box = paper_box();
    Eigen::MatrixXd g = paper_certificate();
    CertificateReport rep =
        validate_certificate(g.topLeftCorner(5, 5), box, Level::Q1);
    CHECK(rep.accepted);
}
