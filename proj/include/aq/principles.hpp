#pragma once

#include <Eigen/Dense>
#include <bit>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "aq/membership.hpp"
#include "aq/wirings.hpp"

namespace aq {

// ---------------------------------------------------------------------------
// Local Orthogonality

// Sum of probabilities of a pairwise locally orthogonal event set.
inline double lo_value(const Box& box, const std::vector<Event>& events) {
    for (std::size_t i = 0; i < events.size(); ++i)
        for (std::size_t j = i + 1; j < events.size(); ++j)
            if (!locally_orthogonal(events[i], events[j]))
                throw structural_error("lo_value: events " + events[i].str() + " and " +
                                       events[j].str() + " are not locally orthogonal");
    double s = 0.0;
    for (const Event& e : events) s += marginal_probability(box, e);
    return s;
}

// All events of the scenario (any outputs, all nonempty party subsets).
inline std::vector<Event> all_scenario_events(const Scenario& sc) {
    std::vector<Event> out;
    const int n = sc.num_parties;
    for (std::size_t mask = 1; mask < (std::size_t{1} << n); ++mask) {
        std::vector<int> subset;
        for (int k = 0; k < n; ++k)
            if (mask & (std::size_t{1} << k)) subset.push_back(k);
        const int sz = static_cast<int>(subset.size());
        std::vector<int> xs(sz, 0);
        while (true) {
            std::vector<int> as(sz, 0);
            while (true) {
                std::vector<Assignment> parts(sz);
                for (int i = 0; i < sz; ++i) parts[i] = {subset[i], xs[i], as[i]};
                out.push_back(Event(std::move(parts)));
                int i = sz - 1;
                while (i >= 0 && ++as[i] == sc.outputs[subset[i]]) as[i--] = 0;
                if (i < 0) break;
            }
            int i = sz - 1;
            while (i >= 0 && ++xs[i] == sc.inputs[subset[i]]) xs[i--] = 0;
            if (i < 0) break;
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

struct LoSearchResult {
    double value = 0.0;
    std::vector<Event> witness;
};

// Exhaustive branch-and-bound search for the maximum-probability pairwise
// locally orthogonal event set of at most max_set_size events.
inline LoSearchResult find_lo_violation(const Box& box, int max_set_size = 8) {
    std::vector<Event> universe = all_scenario_events(box.scenario);
    std::vector<double> weight;
    std::vector<Event> events;
    for (const Event& e : universe) {
        const double w = marginal_probability(box, e);
        if (w > 1e-12) {
            events.push_back(e);
            weight.push_back(w);
        }
    }
    const int n = static_cast<int>(events.size());
    if (static_cast<std::size_t>(n) * n > 64 * kMaxTableEntries)
        throw structural_error("find_lo_violation: orthogonality graph too large");

    // order by weight descending so the greedy bound prunes early
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return weight[a] > weight[b]; });
    std::vector<Event> ev(n);
    std::vector<double> w(n);
    for (int i = 0; i < n; ++i) {
        ev[i] = events[order[i]];
        w[i] = weight[order[i]];
    }
    std::vector<std::vector<char>> adj(n, std::vector<char>(n, 0));
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) adj[i][j] = adj[j][i] = locally_orthogonal(ev[i], ev[j]);

    LoSearchResult best;
    std::vector<int> current;
    // candidates stay sorted by weight, so the top-`room` prefix bounds the rest
    auto bound = [&](const std::vector<int>& cand, std::size_t from, int room) {
        double s = 0.0;
        for (std::size_t i = from; i < cand.size() && static_cast<int>(i - from) < room; ++i)
            s += w[cand[i]];
        return s;
    };
    std::function<void(const std::vector<int>&, double)> rec = [&](const std::vector<int>& cand,
                                                                   double acc) {
        if (acc > best.value) {
            best.value = acc;
            best.witness.clear();
            for (int i : current) best.witness.push_back(ev[i]);
        }
        const int room = max_set_size - static_cast<int>(current.size());
        if (room <= 0 || cand.empty()) return;
        for (std::size_t idx = 0; idx < cand.size(); ++idx) {
            if (acc + bound(cand, idx, room) <= best.value + 1e-13) return;
            const int v = cand[idx];
            std::vector<int> next;
            for (std::size_t j = idx + 1; j < cand.size(); ++j)
                if (adj[v][cand[j]]) next.push_back(cand[j]);
            current.push_back(v);
            rec(next, acc + w[v]);
            current.pop_back();
        }
    };
    std::vector<int> cand(n);
    std::iota(cand.begin(), cand.end(), 0);
    rec(cand, 0.0);
    return best;
}

// ---------------------------------------------------------------------------
// No Advantage for Nonlocal Computation

struct NonlocalComputationTask {
    int n = 0;
    std::vector<int> f;       // truth table, size 2^n, values in {0,1}
    std::vector<double> prior; // nonnegative, sums to 1

    NonlocalComputationTask(int n_, std::vector<int> f_, std::vector<double> p_)
        : n(n_), f(std::move(f_)), prior(std::move(p_)) {
        const std::size_t size = std::size_t{1} << n;
        if (f.size() != size || prior.size() != size)
            throw structural_error("nlc task: table sizes must be 2^n");
        double s = 0.0;
        for (double p : prior) {
            if (p < 0.0) throw structural_error("nlc task: negative prior");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12) throw structural_error("nlc task: prior must sum to 1");
        for (int v : f)
            if (v != 0 && v != 1) throw structural_error("nlc task: boolean table expected");
    }
};

// Phi = sum_{x,y} (-1)^{f(x xor y)} p(x xor y) |x><y|
inline Eigen::MatrixXd phi_operator(const NonlocalComputationTask& t) {
    const int size = 1 << t.n;
    Eigen::MatrixXd phi(size, size);
    for (int x = 0; x < size; ++x)
        for (int y = 0; y < size; ++y) {
            const int z = x ^ y;
            phi(x, y) = (t.f[z] ? -1.0 : 1.0) * t.prior[z];
        }
    return phi;
}

// Classical bound (1/2)(1 + max_u |sum_z (-1)^{f(z)+u.z} p(z)|) via a
// Walsh-Hadamard transform of the signed prior.
inline double nlc_classical_bound(const NonlocalComputationTask& t) {
    const int size = 1 << t.n;
    std::vector<double> h(size);
    for (int z = 0; z < size; ++z) h[z] = (t.f[z] ? -1.0 : 1.0) * t.prior[z];
    for (int step = 1; step < size; step <<= 1)
        for (int i = 0; i < size; i += 2 * step)
            for (int j = i; j < i + step; ++j) {
                const double a = h[j], b = h[j + step];
                h[j] = a + b;
                h[j + step] = a - b;
            }
    double best = 0.0;
    for (double v : h) best = std::max(best, std::abs(v));
    return 0.5 * (1.0 + best);
}

// Spectral-norm bound (1/2)(1 + ||Phi||); equals the classical bound because
// Phi is an XOR-circulant.
inline double nlc_phi_bound(const NonlocalComputationTask& t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(phi_operator(t), Eigen::EigenvaluesOnly);
    return 0.5 * (1.0 + es.eigenvalues().cwiseAbs().maxCoeff());
}

// The nonlocal-computation success functional in CG-affine form:
// sum_{x,y} 2^-n p(x xor y) P(a xor b = f(x xor y) | x, y).
inline BellFunctional nlc_functional(const NonlocalComputationTask& t) {
    const int size = 1 << t.n;
    Scenario sc({size, size}, {2, 2});
    std::vector<double> w(sc.table_size(), 0.0);
    const double scale = 1.0 / size;
    std::size_t i = 0;
    for (int x = 0; x < size; ++x)
        for (int y = 0; y < size; ++y) {
            const int target = t.f[x ^ y];
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b, ++i)
                    if ((a ^ b) == target) w[i] = scale * t.prior[x ^ y];
        }
    return functional_from_full(sc, w);
}

// Maximum success over the Q1 relaxation.
inline double nlc_q1_value(const NonlocalComputationTask& t,
                           const conic::Settings& settings = {}) {
    if ((1 << t.n) > 16) throw structural_error("nlc_q1_value: 2^n must be <= 16");
    BellFunctional f = nlc_functional(t);
    MomentProblem mp = build_moment_problem(f.scenario, Level::Q1, FreeBox{});
    return maximize_linear(mp, &f, settings).value;
}

// ---------------------------------------------------------------------------
// Non-Trivial Communication Complexity

// Upper bound (1/2)(1 + 2^((m-n)/2)) on the inner-product game success when
// Alice may send m bits about her n-bit string.
inline double ntcc_bound(int n, int m) {
    if (m >= n || m < 0 || n < 1) throw structural_error("ntcc_bound: need 0 <= m < n");
    return 0.5 * (1.0 + std::pow(2.0, 0.5 * (m - n)));
}

// Uniform-average success of the inner-product game over a relaxation level:
// Alice holds x (2^n inputs) and outputs the m-bit message, Bob holds [z, y]
// (2^(m+n) inputs) and outputs one bit that should equal x.y mod 2.
inline double ntcc_game_value(int n, int m, Level level, const conic::Settings& settings = {}) {
    if (n > 2 || m >= n || m < 0) throw structural_error("ntcc_game_value: need m < n <= 2");
    const int na = 1 << n;          // Alice inputs
    const int da = std::max(2, 1 << m);
    const int nb = 1 << (n + m);    // Bob inputs, index = z * 2^n + y
    Scenario sc({na, nb}, {da, 2});
    std::vector<double> w(sc.table_size(), 0.0);
    const double scale = 1.0 / static_cast<double>(na) / static_cast<double>(na);
    const int msgs = 1 << m; // m = 0: one empty message, carried by both dummy outputs
    for (int x = 0; x < na; ++x)
        for (int y = 0; y < na; ++y) {
            const int ip = std::popcount(static_cast<unsigned>(x & y)) & 1;
            for (int a = 0; a < (m == 0 ? 2 : msgs); ++a) {
                const int z = (m == 0) ? 0 : a;
                const int bob_input = z * na + y;
                const std::size_t idx =
                    (static_cast<std::size_t>(x) * nb + bob_input) * (da * 2) + a * 2 + ip;
                w[idx] += scale;
            }
        }
    BellFunctional f = functional_from_full(sc, w);
    MomentProblem mp = build_moment_problem(sc, level, FreeBox{});
    return maximize_linear(mp, &f, settings).value;
}

// ---------------------------------------------------------------------------
// Uffink / Information Causality evidence

// (<A0B0> + <A1B0>)^2 + (<A0B1> - <A1B1>)^2 for a 2-input 2-output bipartite
// box; Q1 members satisfy <= 4.
inline double uffink_lhs(const Box& box) {
    const Scenario& sc = box.scenario;
    if (sc.num_parties != 2 || sc.inputs != std::vector<int>{2, 2} ||
        sc.outputs != std::vector<int>{2, 2})
        throw structural_error("uffink_lhs: needs the 2-input 2-output bipartite scenario");
    double corr[2][2];
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            double c = 0.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    c += (a == b ? 1.0 : -1.0) * box.at({x, y}, {a, b});
            corr[x][y] = c;
        }
    const double t1 = corr[0][0] + corr[1][0];
    const double t2 = corr[0][1] - corr[1][1];
    return t1 * t1 + t2 * t2;
}

// PR(E) = E * PR0 + (1 - E) * uniform, with PR0(a,b|x,y) = 1/d iff
// x*y = b - a (mod d); Alice has d inputs and d outputs, Bob 2 inputs and d
// outputs.
inline Box pr_box(int d, double noise_weight) {
    if (d < 2) throw structural_error("pr_box: d >= 2 required");
    if (noise_weight < 0.0 || noise_weight > 1.0)
        throw structural_error("pr_box: E must lie in [0, 1]");
    Scenario sc({d, 2}, {d, d});
    Box out = Box::zeros(sc);
    const double unif = 1.0 / static_cast<double>(d * d);
    for (int x = 0; x < d; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < d; ++a)
                for (int b = 0; b < d; ++b) {
                    const bool hit = ((x * y) % d) == (((b - a) % d + d) % d);
                    out.at({x, y}, {a, b}) =
                        noise_weight * (hit ? 1.0 / d : 0.0) + (1.0 - noise_weight) * unif;
                }
    return out;
}

// Largest E with PR(E) inside the relaxation level: one SDP maximizing the
// affine parameter of the family uniform + t * (PR0 - uniform).
inline double critical_noise(int d, Level level, const conic::Settings& settings = {}) {
    if (d < 2) throw structural_error("critical_noise: d >= 2 required");
    Box pr0 = pr_box(d, 1.0);
    Box unif = uniform_box(pr0.scenario);
    AffineFamily family;
    family.base = unif;
    family.direction.resize(pr0.table.size());
    for (std::size_t i = 0; i < pr0.table.size(); ++i)
        family.direction[i] = pr0.table[i] - unif.table[i];
    family.lower = 0.0;
    family.upper = 1.0;
    MomentProblem mp = build_moment_problem(pr0.scenario, level, family);
    return maximize_linear(mp, nullptr, settings).parameter;
}

} // namespace aq
