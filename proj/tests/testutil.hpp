#pragma once

#include <catch2/catch_amalgamated.hpp>
#include <random>

#include "aq/aq.hpp"

namespace aqtest {

inline aq::Event ev(std::vector<aq::Assignment> parts) { return aq::Event(std::move(parts)); }

// The standard PR box: a xor b = x.y, uniform marginals.
inline aq::Box pr_box22() {
    aq::Scenario sc({2, 2}, {2, 2});
    aq::Box b = aq::Box::zeros(sc);
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y)
            for (int a = 0; a < 2; ++a)
                for (int bb = 0; bb < 2; ++bb)
                    if ((a ^ bb) == (x & y)) b.at({x, y}, {a, bb}) = 0.5;
    return b;
}

// Deterministic box: each party outputs f_k(x_k) given by per-party tables.
inline aq::Box deterministic_box(const aq::Scenario& sc,
                                 const std::vector<std::vector<int>>& strategy) {
    aq::Box b = aq::Box::zeros(sc);
    const int n = sc.num_parties;
    std::vector<int> xs(n, 0);
    while (true) {
        std::vector<int> as(n);
        for (int k = 0; k < n; ++k) as[k] = strategy[k][xs[k]];
        b.at(xs, as) = 1.0;
        int i = n - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[i]) xs[i--] = 0;
        if (i < 0) break;
    }
    return b;
}

// Random local (hence no-signalling) box: mixture of deterministic boxes.
inline aq::Box random_local_box(const aq::Scenario& sc, std::mt19937_64& rng, int terms = 6) {
    aq::Box total = aq::Box::zeros(sc);
    std::vector<double> wts(terms);
    double s = 0.0;
    for (double& w : wts) {
        w = (rng() >> 11) * 0x1.0p-53 + 1e-3;
        s += w;
    }
    for (int t = 0; t < terms; ++t) {
        std::vector<std::vector<int>> strat;
        for (int k = 0; k < sc.num_parties; ++k) {
            std::vector<int> f(sc.inputs[k]);
            for (int& v : f) v = static_cast<int>(rng() % sc.outputs[k]);
            strat.push_back(f);
        }
        aq::Box d = deterministic_box(sc, strat);
        for (std::size_t i = 0; i < total.table.size(); ++i)
            total.table[i] += wts[t] / s * d.table[i];
    }
    return total;
}

} // namespace aqtest
