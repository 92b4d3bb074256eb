#pragma once

#include <map>
#include <vector>

#include "aq/box.hpp"

namespace aq {

enum class Sense { Minimize, Maximize };

// Linear form over boxes, stored as an affine expression in Collins-Gisin
// coordinates: value(P) = constant + sum_e coeff[e] * P(e).
struct BellFunctional {
    Scenario scenario;
    std::map<Event, double> coefficients;
    double constant = 0.0;
    Sense sense = Sense::Maximize;

    double evaluate(const Box& box) const {
        if (!(box.scenario == scenario))
            throw structural_error("functional: scenario mismatch");
        double v = constant;
        for (const auto& [e, c] : coefficients) v += c * marginal_probability(box, e);
        return v;
    }
};

inline BellFunctional functional_from_cg(const Scenario& sc, const std::vector<double>& coeffs,
                                         Sense sense = Sense::Maximize, double constant = 0.0) {
    std::vector<Event> basis = cg_basis(sc);
    if (coeffs.size() != basis.size())
        throw structural_error("functional: CG coefficient length mismatch");
    BellFunctional f;
    f.scenario = sc;
    f.sense = sense;
    f.constant = constant;
    for (std::size_t i = 0; i < basis.size(); ++i)
        if (coeffs[i] != 0.0) f.coefficients[basis[i]] = coeffs[i];
    return f;
}

// Converts a functional given on the full probability table (one weight per
// (x, a) pair, box flat order) into the equivalent CG-affine form via
// inclusion-exclusion over zero-output parties.
inline BellFunctional functional_from_full(const Scenario& sc, const std::vector<double>& weights,
                                           Sense sense = Sense::Maximize) {
    if (weights.size() != sc.table_size())
        throw structural_error("functional: full coefficient length mismatch");
    BellFunctional f;
    f.scenario = sc;
    f.sense = sense;
    const int n = sc.num_parties;
    std::vector<int> xs(n, 0);
    std::size_t flat = 0;
    while (true) {
        std::vector<int> as(n, 0);
        while (true) {
            const double w = weights[flat++];
            if (w != 0.0) {
                // P(a|x) = sum_{T subsets of zero parties} (-1)^{|T|} sum_{b_T != 0} CG(...)
                std::vector<int> zero_parties;
                std::vector<Assignment> base;
                for (int k = 0; k < n; ++k) {
                    if (as[k] == 0)
                        zero_parties.push_back(k);
                    else
                        base.push_back({k, xs[k], as[k]});
                }
                const std::size_t z = zero_parties.size();
                for (std::size_t mask = 0; mask < (std::size_t{1} << z); ++mask) {
                    std::vector<int> chosen;
                    for (std::size_t i = 0; i < z; ++i)
                        if (mask & (std::size_t{1} << i)) chosen.push_back(zero_parties[i]);
                    const double sign = (chosen.size() % 2 == 0) ? 1.0 : -1.0;
                    std::vector<int> bs(chosen.size(), 1);
                    while (true) {
                        std::vector<Assignment> parts = base;
                        for (std::size_t i = 0; i < chosen.size(); ++i)
                            parts.push_back({chosen[i], xs[chosen[i]], bs[i]});
                        Event ev(std::move(parts));
                        if (ev.empty())
                            f.constant += sign * w;
                        else
                            f.coefficients[ev] += sign * w;
                        int i = static_cast<int>(chosen.size()) - 1;
                        while (i >= 0 && ++bs[i] == sc.outputs[chosen[i]]) bs[i--] = 1;
                        if (i < 0) break;
                    }
                }
            }
            int i = n - 1;
            while (i >= 0 && ++as[i] == sc.outputs[i]) as[i--] = 0;
            if (i < 0) break;
        }
        int i = n - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[i]) xs[i--] = 0;
        if (i < 0) break;
    }
    // drop exact cancellations
    for (auto it = f.coefficients.begin(); it != f.coefficients.end();)
        it = (it->second == 0.0) ? f.coefficients.erase(it) : std::next(it);
    return f;
}

// CHSH as a correlator functional <A0B0>+<A0B1>+<A1B0>-<A1B1> in CG form.
inline BellFunctional chsh_functional() {
    Scenario sc({2, 2}, {2, 2});
    std::vector<double> w(sc.table_size());
    std::size_t i = 0;
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            const double s = (x == 1 && y == 1) ? -1.0 : 1.0;
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b) w[i++] = s * ((a == b) ? 1.0 : -1.0);
        }
    return functional_from_full(sc, w);
}

} // namespace aq
