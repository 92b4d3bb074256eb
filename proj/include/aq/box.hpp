#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

#include "aq/scenario.hpp"

namespace aq {

namespace tol {
inline constexpr double entry_negativity = 1e-10; // eps_zero
inline constexpr double box_residual = 1e-9;      // normalization / no-signalling
inline constexpr double cg_roundtrip = 1e-12;
} // namespace tol

inline constexpr std::size_t kMaxTableEntries = 10'000'000;

// Full conditional probability table P(a|x) over all parties.
// Flat layout: input tuples lexicographic with party 0 slowest, then output
// tuples lexicographic with party 0 slowest.
struct Box {
    Scenario scenario;
    std::vector<double> table;

    Box() = default;
    Box(Scenario sc, std::vector<double> t) : scenario(std::move(sc)), table(std::move(t)) {
        if (scenario.table_size() > kMaxTableEntries)
            throw structural_error("box: table exceeds dense size cap");
        if (table.size() != scenario.table_size())
            throw structural_error("box: table length does not match scenario");
    }

    static Box zeros(const Scenario& sc) {
        if (sc.table_size() > kMaxTableEntries)
            throw structural_error("box: table exceeds dense size cap");
        return Box(sc, std::vector<double>(sc.table_size(), 0.0));
    }

    std::size_t flat_index(const std::vector<int>& xs, const std::vector<int>& as) const {
        std::size_t xi = 0, ai = 0;
        for (int k = 0; k < scenario.num_parties; ++k) {
            xi = xi * static_cast<std::size_t>(scenario.inputs[k]) + static_cast<std::size_t>(xs[k]);
            ai = ai * static_cast<std::size_t>(scenario.outputs[k]) + static_cast<std::size_t>(as[k]);
        }
        return xi * scenario.output_tuples() + ai;
    }

    double& at(const std::vector<int>& xs, const std::vector<int>& as) {
        return table[flat_index(xs, as)];
    }
    double at(const std::vector<int>& xs, const std::vector<int>& as) const {
        return table[flat_index(xs, as)];
    }
};

// Box with every entry 1 / (number of output tuples).
inline Box uniform_box(const Scenario& sc) {
    Box b = Box::zeros(sc);
    const double v = 1.0 / static_cast<double>(sc.output_tuples());
    std::fill(b.table.begin(), b.table.end(), v);
    return b;
}

// P(event) marginalized over omitted parties; omitted parties measure input 0
// (well-defined for no-signalling boxes).
inline double marginal_probability(const Box& box, const Event& ev) {
    ev.check_in(box.scenario);
    const Scenario& sc = box.scenario;
    const int n = sc.num_parties;
    std::vector<int> xs(n, 0), as(n, 0);
    std::vector<int> free_parties;
    std::vector<char> fixed(n, 0);
    for (const auto& p : ev.parts()) {
        xs[p.party] = p.input;
        as[p.party] = p.output;
        fixed[p.party] = 1;
    }
    for (int k = 0; k < n; ++k)
        if (!fixed[k]) free_parties.push_back(k);
    double total = 0.0;
    while (true) {
        total += box.at(xs, as);
        int i = static_cast<int>(free_parties.size()) - 1;
        while (i >= 0 && ++as[free_parties[i]] == sc.outputs[free_parties[i]])
            as[free_parties[i--]] = 0;
        if (i < 0) break;
    }
    return total;
}

struct ValidationReport {
    bool nonneg = false;
    bool normalized = false;
    bool no_signalling = false;
    double worst_negativity = 0.0;     // most negative entry, as a positive residual
    double worst_normalization = 0.0;  // max |sum - 1| over input tuples
    double worst_signalling = 0.0;     // max marginal spread across a party's inputs

    bool valid() const { return nonneg && normalized && no_signalling; }
};

// Checks nonnegativity, normalization and no-signalling. No-signalling is
// checked party by party: the marginal over party k's output must not depend
// on x_k, which implies the condition for every party subset.
inline ValidationReport validate_box(const Box& box) {
    const Scenario& sc = box.scenario;
    if (box.table.size() != sc.table_size())
        throw structural_error("validate_box: table length mismatch");
    ValidationReport rep;

    for (double v : box.table)
        if (v < 0.0) rep.worst_negativity = std::max(rep.worst_negativity, -v);
    rep.nonneg = rep.worst_negativity <= tol::entry_negativity;

    const std::size_t nout = sc.output_tuples();
    const std::size_t nin = sc.input_tuples();
    for (std::size_t xi = 0; xi < nin; ++xi) {
        double s = 0.0;
        for (std::size_t ai = 0; ai < nout; ++ai) s += box.table[xi * nout + ai];
        rep.worst_normalization = std::max(rep.worst_normalization, std::abs(s - 1.0));
    }
    rep.normalized = rep.worst_normalization <= tol::box_residual;

    const int n = sc.num_parties;
    std::vector<int> xs(n, 0), as(n, 0);
    for (int k = 0; k < n; ++k) {
        if (sc.inputs[k] < 2) continue;
        // enumerate all other-party inputs and other-party outputs
        std::fill(xs.begin(), xs.end(), 0);
        while (true) {
            std::fill(as.begin(), as.end(), 0);
            while (true) {
                double lo = 0.0, hi = 0.0;
                for (int xk = 0; xk < sc.inputs[k]; ++xk) {
                    xs[k] = xk;
                    double m = 0.0;
                    for (int ak = 0; ak < sc.outputs[k]; ++ak) {
                        as[k] = ak;
                        m += box.at(xs, as);
                    }
                    if (xk == 0) lo = hi = m;
                    lo = std::min(lo, m);
                    hi = std::max(hi, m);
                }
                xs[k] = 0;
                as[k] = 0;
                rep.worst_signalling = std::max(rep.worst_signalling, hi - lo);
                int i = n - 1;
                while (i >= 0 && (i == k || ++as[i] == sc.outputs[i])) {
                    if (i != k) as[i] = 0;
                    --i;
                }
                if (i < 0) break;
            }
            int i = n - 1;
            while (i >= 0 && (i == k || ++xs[i] == sc.inputs[i])) {
                if (i != k) xs[i] = 0;
                --i;
            }
            if (i < 0) break;
        }
    }
    rep.no_signalling = rep.worst_signalling <= tol::box_residual;
    return rep;
}

// Collins-Gisin coordinates: marginal probabilities of every event with all
// outputs != 0, in enumerate_events(AlmostQuantum) order without phi.
struct CGVector {
    Scenario scenario;
    std::vector<double> coefficients;
};

inline std::vector<Event> cg_basis(const Scenario& sc) {
    std::vector<Event> evs = enumerate_events(sc, Level::AlmostQuantum);
    evs.erase(evs.begin()); // drop phi
    return evs;
}

inline CGVector box_to_cg(const Box& box) {
    CGVector v;
    v.scenario = box.scenario;
    for (const Event& e : cg_basis(box.scenario))
        v.coefficients.push_back(marginal_probability(box, e));
    return v;
}

namespace detail {

// P(a|x) for a full output tuple (labels may be 0) by inclusion-exclusion
// over the zero-output parties, from a lookup of nonzero-output marginals.
template <class Lookup>
double reconstruct_entry(const Scenario& sc, const std::vector<int>& xs,
                         const std::vector<int>& as, Lookup&& cg_value) {
    std::vector<int> zero_parties;
    std::vector<Assignment> base;
    for (int k = 0; k < sc.num_parties; ++k) {
        if (as[k] == 0)
            zero_parties.push_back(k);
        else
            base.push_back({k, xs[k], as[k]});
    }
    double total = 0.0;
    const std::size_t z = zero_parties.size();
    for (std::size_t mask = 0; mask < (std::size_t{1} << z); ++mask) {
        std::vector<int> chosen;
        for (std::size_t i = 0; i < z; ++i)
            if (mask & (std::size_t{1} << i)) chosen.push_back(zero_parties[i]);
        const double sign = (chosen.size() % 2 == 0) ? 1.0 : -1.0;
        // sum over nonzero outputs of the chosen parties
        std::vector<int> bs(chosen.size(), 1);
        while (true) {
            std::vector<Assignment> parts = base;
            for (std::size_t i = 0; i < chosen.size(); ++i)
                parts.push_back({chosen[i], xs[chosen[i]], bs[i]});
            total += sign * cg_value(Event(std::move(parts)));
            int i = static_cast<int>(chosen.size()) - 1;
            while (i >= 0 && ++bs[i] == sc.outputs[chosen[i]]) bs[i--] = 1;
            if (i < 0) break;
        }
    }
    return total;
}

} // namespace detail

inline Box cg_to_box(const CGVector& v) {
    const Scenario& sc = v.scenario;
    std::vector<Event> basis = cg_basis(sc);
    if (v.coefficients.size() != basis.size())
        throw structural_error("cg_to_box: coefficient length mismatch");
    std::map<Event, double> lut;
    for (std::size_t i = 0; i < basis.size(); ++i) lut[basis[i]] = v.coefficients[i];
    auto cg_value = [&](const Event& e) -> double {
        if (e.empty()) return 1.0;
        auto it = lut.find(e);
        if (it == lut.end()) throw structural_error("cg_to_box: event missing from basis");
        return it->second;
    };

    Box box = Box::zeros(sc);
    const int n = sc.num_parties;
    std::vector<int> xs(n, 0);
    while (true) {
        std::vector<int> as(n, 0);
        while (true) {
            const double p = detail::reconstruct_entry(sc, xs, as, cg_value);
            if (p < -tol::entry_negativity)
                throw invalid_cg_error("cg_to_box: negative reconstructed probability " +
                                       std::to_string(p));
            box.at(xs, as) = p;
            int i = n - 1;
            while (i >= 0 && ++as[i] == sc.outputs[i]) as[i--] = 0;
            if (i < 0) break;
        }
        int i = n - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[i]) xs[i--] = 0;
        if (i < 0) break;
    }
    return box;
}

} // namespace aq
