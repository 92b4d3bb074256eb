#pragma once

#include <optional>

#include "aq/conic.hpp"
#include "aq/functional.hpp"
#include "aq/moment.hpp"

namespace aq {

inline constexpr double kMembershipTol = 1e-7;
inline constexpr std::size_t kMaxDeterministicStrategies = 100'000;

namespace detail {

// Collects the matrix cells belonging to each class of a MomentProblem.
struct CellIndex {
    std::vector<std::vector<std::pair<int, int>>> prob_cells;
    std::vector<std::vector<std::pair<int, int>>> free_cells;

    explicit CellIndex(const MomentProblem& mp)
        : prob_cells(mp.prob_events.size()), free_cells(mp.free_keys.size()) {
        const int n = static_cast<int>(mp.dim());
        for (int i = 0; i < n; ++i)
            for (int j = i; j < n; ++j) {
                const auto& c = mp.cell(i, j);
                if (c.kind == EntryClass::Prob) prob_cells[c.id].push_back({i, j});
                if (c.kind == EntryClass::Free) free_cells[c.id].push_back({i, j});
            }
    }
};

inline void push_cells(std::vector<conic::CoeffEntry>& out,
                       const std::vector<std::pair<int, int>>& cells, double value,
                       int block = 0) {
    for (auto [i, j] : cells) out.push_back({block, i, j, value});
}

} // namespace detail

struct MarginResult {
    double margin = 0.0;
    bool member = false;
    Eigen::MatrixXd gamma;
    conic::Status status = conic::Status::MaxIterations;
    double duality_gap = 0.0;
    int iterations = 0;
};

// Maximum lambda with a structurally valid Gamma - lambda*I PSD; the box is a
// member iff the margin clears -1e-7.
inline MarginResult psd_margin(const MomentProblem& mp, const conic::Settings& settings = {}) {
    if (!std::holds_alternative<FixedBox>(mp.binding))
        throw structural_error("psd_margin: needs a FixedBox binding");
    detail::CellIndex cells(mp);
    const int n = static_cast<int>(mp.dim());
    const int nfree = static_cast<int>(mp.free_keys.size());

    conic::StandardForm sf;
    sf.blocks.push_back({conic::Block::PSD, n});
    for (std::size_t p = 0; p < mp.prob_events.size(); ++p)
        detail::push_cells(sf.c_entries, cells.prob_cells[p], mp.prob_values[p]);
    sf.rows.resize(nfree + 1);
    sf.b.assign(nfree + 1, 0.0);
    for (int k = 0; k < nfree; ++k)
        detail::push_cells(sf.rows[k], cells.free_cells[k], -1.0);
    for (int i = 0; i < n; ++i) sf.rows[nfree].push_back({0, i, i, 1.0}); // A = -F, F = -I
    sf.b[nfree] = 1.0;

    conic::Solution s = conic::solve(sf, settings);
    if (s.status != conic::Status::Optimal && s.status != conic::Status::MaxIterations)
        throw solver_error(std::string("psd_margin: solver status ") +
                           conic::status_name(s.status));
    MarginResult r;
    r.margin = s.dual_objective;
    r.member = r.margin >= -kMembershipTol;
    r.gamma = s.S[0] + r.margin * Eigen::MatrixXd::Identity(n, n);
    r.status = s.status;
    r.duality_gap = s.duality_gap;
    r.iterations = s.iterations;
    return r;
}

struct OptimizationResult {
    double value = 0.0;
    Box optimizer;                  // FreeBox binding
    double parameter = 0.0;         // AffineFamily binding: t*
    Eigen::MatrixXd gamma;
    bool box_valid = false;
    ValidationReport box_report;
    conic::Status status = conic::Status::MaxIterations;
    double duality_gap = 0.0;
    int iterations = 0;
};

// Optimizes a Bell functional over the relaxation (FreeBox binding) or the
// family parameter t (AffineFamily binding). The reconstructed optimizer box
// is validated; an invalid reconstruction is reported through box_valid
// rather than discarded, since the optimum value stands on its own.
inline OptimizationResult maximize_linear(const MomentProblem& mp,
                                          const BellFunctional* objective,
                                          const conic::Settings& settings = {}) {
    detail::CellIndex cells(mp);
    const int n = static_cast<int>(mp.dim());
    const int nfree = static_cast<int>(mp.free_keys.size());
    OptimizationResult out;

    if (std::holds_alternative<FreeBox>(mp.binding)) {
        if (!objective) throw structural_error("maximize_linear: objective required");
        if (!(objective->scenario == mp.scenario))
            throw structural_error("maximize_linear: functional scenario mismatch");
        const double sense = objective->sense == Sense::Maximize ? 1.0 : -1.0;

        // variables: prob classes except phi, then free classes
        std::vector<int> prob_var(mp.prob_events.size(), -1);
        int nv = 0;
        for (std::size_t p = 0; p < mp.prob_events.size(); ++p)
            if (!mp.prob_events[p].empty()) prob_var[p] = nv++;
        const int free_base = nv;
        nv += nfree;

        conic::StandardForm sf;
        sf.blocks.push_back({conic::Block::PSD, n});
        sf.rows.resize(nv);
        sf.b.assign(nv, 0.0);
        for (std::size_t p = 0; p < mp.prob_events.size(); ++p) {
            if (prob_var[p] < 0)
                detail::push_cells(sf.c_entries, cells.prob_cells[p], 1.0); // Gamma_phiphi = 1
            else
                detail::push_cells(sf.rows[prob_var[p]], cells.prob_cells[p], -1.0);
        }
        for (int k = 0; k < nfree; ++k)
            detail::push_cells(sf.rows[free_base + k], cells.free_cells[k], -1.0);
        for (const auto& [e, c] : objective->coefficients) {
            auto pc = mp.prob_class_of(e);
            if (!pc || prob_var[*pc] < 0)
                throw structural_error("maximize_linear: functional references event '" + e.str() +
                                       "' outside this level's probability classes");
            sf.b[prob_var[*pc]] = sense * c;
        }

        conic::Solution s = conic::solve(sf, settings);
        if (s.status != conic::Status::Optimal && s.status != conic::Status::MaxIterations)
            throw solver_error(std::string("maximize_linear: solver status ") +
                               conic::status_name(s.status));
        out.value = objective->constant + sense * s.dual_objective;
        out.gamma = s.S[0];
        out.status = s.status;
        out.duality_gap = s.duality_gap;
        out.iterations = s.iterations;

        // reconstruct the optimizer box from the CG coordinates
        std::vector<Event> basis = cg_basis(mp.scenario);
        CGVector cg;
        cg.scenario = mp.scenario;
        bool have_all = true;
        for (const Event& e : basis) {
            auto pc = mp.prob_class_of(e);
            if (!pc || prob_var[*pc] < 0) {
                have_all = false;
                break;
            }
            cg.coefficients.push_back(s.y[prob_var[*pc]]);
        }
        if (have_all) {
            try {
                out.optimizer = cg_to_box(cg);
                out.box_report = validate_box(out.optimizer);
                out.box_valid = out.box_report.valid() ||
                                (out.box_report.worst_negativity <= 1e-6 &&
                                 out.box_report.worst_normalization <= 1e-6 &&
                                 out.box_report.worst_signalling <= 1e-6);
            } catch (const invalid_cg_error&) {
                out.box_valid = false;
            }
        }
        return out;
    }

    if (auto* af = std::get_if<AffineFamily>(&mp.binding)) {
        // variables: t, then free classes
        conic::StandardForm sf;
        sf.blocks.push_back({conic::Block::PSD, n});
        sf.blocks.push_back({conic::Block::Nonneg, 2});
        const int nv = 1 + nfree;
        sf.rows.resize(nv);
        sf.b.assign(nv, 0.0);
        sf.b[0] = 1.0; // maximize t
        for (std::size_t p = 0; p < mp.prob_events.size(); ++p) {
            detail::push_cells(sf.c_entries, cells.prob_cells[p], mp.prob_base[p]);
            if (mp.prob_dir[p] != 0.0)
                detail::push_cells(sf.rows[0], cells.prob_cells[p], -mp.prob_dir[p]);
        }
        for (int k = 0; k < nfree; ++k)
            detail::push_cells(sf.rows[1 + k], cells.free_cells[k], -1.0);
        // t - lower >= 0, upper - t >= 0
        sf.c_entries.push_back({1, 0, 0, -af->lower});
        sf.c_entries.push_back({1, 1, 0, af->upper});
        sf.rows[0].push_back({1, 0, 0, -1.0});
        sf.rows[0].push_back({1, 1, 0, 1.0});

        conic::Solution s = conic::solve(sf, settings);
        if (s.status != conic::Status::Optimal && s.status != conic::Status::MaxIterations)
            throw solver_error(std::string("maximize_linear: solver status ") +
                               conic::status_name(s.status));
        out.value = s.dual_objective;
        out.parameter = s.y[0];
        out.gamma = s.S[0];
        out.status = s.status;
        out.duality_gap = s.duality_gap;
        out.iterations = s.iterations;

        Box b = af->base;
        for (std::size_t i = 0; i < b.table.size(); ++i)
            b.table[i] += out.parameter * af->direction[i];
        out.optimizer = b;
        out.box_report = validate_box(b);
        out.box_valid = out.box_report.valid();
        return out;
    }

    throw structural_error("maximize_linear: needs a FreeBox or AffineFamily binding");
}

struct LocalMembershipResult {
    bool member = false;
    double visibility = 0.0; // max v with v*B + (1-v)*U local
    double margin = 0.0;     // visibility - 1
    conic::Status status = conic::Status::MaxIterations;
};

namespace detail {

// all deterministic single-party strategies as output-per-input tables
inline std::vector<std::vector<int>> party_strategies(int inputs, int outputs) {
    std::vector<std::vector<int>> out;
    std::vector<int> cur(inputs, 0);
    while (true) {
        out.push_back(cur);
        int i = inputs - 1;
        while (i >= 0 && ++cur[i] == outputs) cur[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

} // namespace detail

// LP over the convex hull of deterministic boxes: finds the largest v with
// v*B + (1-v)*U still local. Member iff v >= 1 (within 1e-6); margin is the
// robustness v - 1.
inline LocalMembershipResult lp_local_membership(const Box& box,
                                                 const conic::Settings& settings = {}) {
    const Scenario& sc = box.scenario;
    std::size_t total = 1;
    for (int k = 0; k < sc.num_parties; ++k) {
        std::size_t s = 1;
        for (int i = 0; i < sc.inputs[k]; ++i) s *= static_cast<std::size_t>(sc.outputs[k]);
        total *= s;
        if (total > kMaxDeterministicStrategies)
            throw structural_error("lp_local_membership: too many deterministic strategies");
    }

    std::vector<std::vector<std::vector<int>>> per_party;
    for (int k = 0; k < sc.num_parties; ++k)
        per_party.push_back(detail::party_strategies(sc.inputs[k], sc.outputs[k]));

    const std::vector<Event> basis = cg_basis(sc);
    const CGVector cg_box = box_to_cg(box);
    const CGVector cg_unif = box_to_cg(uniform_box(sc));
    const int ncg = static_cast<int>(basis.size());
    const double vcap = 1e3;

    // variables: q_s (one per joint strategy), v, w ; all nonnegative
    const int nq = static_cast<int>(total);
    conic::StandardForm sf;
    sf.blocks.push_back({conic::Block::Nonneg, nq + 2});
    sf.rows.resize(ncg + 2);
    sf.b.assign(ncg + 2, 0.0);
    sf.c_entries.push_back({0, nq, 0, -1.0}); // min -v

    std::vector<int> pick(sc.num_parties, 0);
    for (int s = 0; s < nq; ++s) {
        for (int e = 0; e < ncg; ++e) {
            double val = 1.0;
            for (const auto& p : basis[e].parts())
                if (per_party[p.party][pick[p.party]][p.input] != p.output) {
                    val = 0.0;
                    break;
                }
            if (val != 0.0) sf.rows[e].push_back({0, s, 0, 1.0});
        }
        sf.rows[ncg].push_back({0, s, 0, 1.0});
        int i = sc.num_parties - 1;
        while (i >= 0 && ++pick[i] == static_cast<int>(per_party[i].size())) pick[i--] = 0;
        if (i < 0 && s + 1 < nq) throw structural_error("lp_local_membership: enumeration bug");
    }
    for (int e = 0; e < ncg; ++e) {
        const double dir = cg_box.coefficients[e] - cg_unif.coefficients[e];
        if (dir != 0.0) sf.rows[e].push_back({0, nq, 0, -dir});
        sf.b[e] = cg_unif.coefficients[e];
    }
    sf.b[ncg] = 1.0;
    sf.rows[ncg + 1].push_back({0, nq, 0, 1.0});
    sf.rows[ncg + 1].push_back({0, nq + 1, 0, 1.0});
    sf.b[ncg + 1] = vcap;

    conic::Solution s = conic::solve(sf, settings);
    if (s.status != conic::Status::Optimal && s.status != conic::Status::MaxIterations)
        throw solver_error(std::string("lp_local_membership: solver status ") +
                           conic::status_name(s.status));
    LocalMembershipResult r;
    r.visibility = s.X[0](nq, 0);
    r.margin = r.visibility - 1.0;
    r.member = r.visibility >= 1.0 - 1e-6;
    r.status = s.status;
    return r;
}

// Maximum of a functional over all deterministic boxes (the local bound).
inline double local_bound(const BellFunctional& f) {
    const Scenario& sc = f.scenario;
    std::size_t total = 1;
    for (int k = 0; k < sc.num_parties; ++k)
        for (int i = 0; i < sc.inputs[k]; ++i) {
            total *= static_cast<std::size_t>(sc.outputs[k]);
            if (total > kMaxDeterministicStrategies)
                throw structural_error("local_bound: too many deterministic strategies");
        }
    std::vector<std::vector<std::vector<int>>> per_party;
    for (int k = 0; k < sc.num_parties; ++k)
        per_party.push_back(detail::party_strategies(sc.inputs[k], sc.outputs[k]));
    const double sense = f.sense == Sense::Maximize ? 1.0 : -1.0;
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> pick(sc.num_parties, 0);
    while (true) {
        double v = f.constant;
        for (const auto& [e, c] : f.coefficients) {
            bool hit = true;
            for (const auto& p : e.parts())
                if (per_party[p.party][pick[p.party]][p.input] != p.output) {
                    hit = false;
                    break;
                }
            if (hit) v += c;
        }
        best = std::max(best, sense * v);
        int i = sc.num_parties - 1;
        while (i >= 0 && ++pick[i] == static_cast<int>(per_party[i].size())) pick[i--] = 0;
        if (i < 0) break;
    }
    return sense * best;
}

// Maximum of a functional over the no-signalling polytope, solved as an LMI
// over CG coordinates with one nonnegativity slack per table entry.
inline double ns_bound(const BellFunctional& f, const conic::Settings& settings = {}) {
    const Scenario& sc = f.scenario;
    const std::vector<Event> basis = cg_basis(sc);
    const int ncg = static_cast<int>(basis.size());
    std::map<Event, int> var_of;
    for (int i = 0; i < ncg; ++i) var_of[basis[i]] = i;

    conic::StandardForm sf;
    sf.blocks.push_back({conic::Block::Nonneg, static_cast<int>(sc.table_size())});
    sf.rows.resize(ncg);
    sf.b.assign(ncg, 0.0);
    const double sense = f.sense == Sense::Maximize ? 1.0 : -1.0;
    for (const auto& [e, c] : f.coefficients) sf.b[var_of.at(e)] = sense * c;

    const int n = sc.num_parties;
    std::vector<int> xs(n, 0);
    int row = 0;
    while (true) {
        std::vector<int> as(n, 0);
        while (true) {
            // P(a|x) = inclusion-exclusion over zero-output parties
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
                        sf.c_entries.push_back({0, row, 0, sign});
                    else
                        sf.rows[var_of.at(ev)].push_back({0, row, 0, -sign});
                    int i = static_cast<int>(chosen.size()) - 1;
                    while (i >= 0 && ++bs[i] == sc.outputs[chosen[i]]) bs[i--] = 1;
                    if (i < 0) break;
                }
            }
            ++row;
            int i = n - 1;
            while (i >= 0 && ++as[i] == sc.outputs[i]) as[i--] = 0;
            if (i < 0) break;
        }
        int i = n - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[i]) xs[i--] = 0;
        if (i < 0) break;
    }

    conic::Solution s = conic::solve(sf, settings);
    if (s.status != conic::Status::Optimal && s.status != conic::Status::MaxIterations)
        throw solver_error(std::string("ns_bound: solver status ") + conic::status_name(s.status));
    return f.constant + sense * s.dual_objective;
}

} // namespace aq
