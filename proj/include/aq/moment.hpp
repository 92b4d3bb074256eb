#pragma once

#include <Eigen/Dense>
#include <map>
#include <optional>
#include <variant>
#include <vector>

#include "aq/box.hpp"

namespace aq {

// Unordered pair of events in canonical order, used as the identity of a
// free-variable equality class.
struct PairKey {
    Event first, second; // first <= second

    PairKey() = default;
    PairKey(Event a, Event b) {
        if (b < a) std::swap(a, b);
        first = std::move(a);
        second = std::move(b);
    }
    friend bool operator==(const PairKey&, const PairKey&) = default;
    friend bool operator<(const PairKey& x, const PairKey& y) {
        if (x.first == y.first) return x.second < y.second;
        return x.first < y.first;
    }
};

struct EntryClass {
    enum Kind { Zero, Prob, Free } kind = Zero;
    Event merged;  // Prob: the merged event whose probability pins the entry
    PairKey key;   // Free: canonical reduced pair
};

namespace detail {

inline std::vector<int> shared_identical_parties(const Event& e1, const Event& e2) {
    std::vector<int> out;
    for (const auto& p : e1.parts()) {
        const Assignment* q = e2.find(p.party);
        if (q && q->input == p.input && q->output == p.output) out.push_back(p.party);
    }
    return out;
}

inline bool disjoint_parties(const Event& e1, const Event& e2) {
    for (const auto& p : e1.parts())
        if (e2.find(p.party)) return false;
    return true;
}

inline Event union_event(const Event& e1, const Event& e2) {
    std::vector<Assignment> parts = e1.parts();
    for (const auto& q : e2.parts())
        if (!e1.find(q.party)) parts.push_back(q);
    return Event(std::move(parts));
}

inline void check_cg_event(const Event& e, const Scenario& sc) {
    e.check_in(sc);
    for (const auto& p : e.parts())
        if (p.output == 0) throw structural_error("moment: events must have nonzero outputs");
}

} // namespace detail

// Classifies one matrix entry per Remark-1 style rules: orthogonal events
// give a zero entry; if dropping shared identical assignments from one side
// leaves disjoint party sets the entry equals the probability of the merged
// event; otherwise it is a free variable keyed by the minimal reachable
// reduced pair. Full (d)-closure across entries is handled by
// build_moment_problem; this per-pair form reports the local canonical key.
inline EntryClass classify_pair(const Event& e1, const Event& e2, const Scenario& sc) {
    detail::check_cg_event(e1, sc);
    detail::check_cg_event(e2, sc);
    if (locally_orthogonal(e1, e2)) return {EntryClass::Zero, {}, {}};

    // BFS over one-sided drops of shared identical assignments
    std::vector<PairKey> frontier{PairKey(e1, e2)};
    std::map<PairKey, bool> seen{{frontier[0], true}};
    PairKey best = frontier[0];
    bool any_disjoint = detail::disjoint_parties(e1, e2);
    while (!frontier.empty()) {
        PairKey cur = frontier.back();
        frontier.pop_back();
        if (cur < best) best = cur;
        for (int side = 0; side < 2; ++side) {
            const Event& a = side ? cur.second : cur.first;
            const Event& b = side ? cur.first : cur.second;
            for (int k : detail::shared_identical_parties(a, b)) {
                PairKey next(a.without(k), b);
                if (detail::disjoint_parties(next.first, next.second)) any_disjoint = true;
                if (!seen.emplace(next, true).second) continue;
                frontier.push_back(next);
            }
        }
    }
    if (any_disjoint) return {EntryClass::Prob, detail::union_event(e1, e2), {}};
    return {EntryClass::Free, {}, best};
}

struct FixedBox {
    Box box;
};
struct AffineFamily {
    Box base;
    std::vector<double> direction; // same flat layout as the base table
    double lower = 0.0, upper = 1.0;
};
struct FreeBox {};
using Binding = std::variant<FixedBox, AffineFamily, FreeBox>;

// Moment-matrix problem: event index, per-entry classification with the
// equality classes fully closed under shared-factor reduction, and the
// binding that decides how probability-linked entries are pinned.
struct MomentProblem {
    Scenario scenario;
    Level level = Level::AlmostQuantum;
    Binding binding = FreeBox{};
    std::vector<Event> index;

    // per entry (row-major upper triangle): kind and class id
    struct Cell {
        EntryClass::Kind kind;
        int id; // Prob: prob-class id, Free: free-class id, Zero: -1
    };
    std::vector<Cell> cells;
    std::vector<Event> prob_events; // prob-class id -> merged event (phi = id 0)
    std::vector<PairKey> free_keys; // free-class id -> minimal member pair

    std::size_t dim() const { return index.size(); }
    const Cell& cell(std::size_t i, std::size_t j) const {
        if (j < i) std::swap(i, j);
        return cells[i * dim() - i * (i + 1) / 2 + j];
    }

    // FixedBox: value of each prob class. AffineFamily: base and direction.
    std::vector<double> prob_values;
    std::vector<double> prob_base, prob_dir;

    std::optional<int> prob_class_of(const Event& e) const {
        auto it = prob_index.find(e);
        if (it == prob_index.end()) return std::nullopt;
        return it->second;
    }

    std::map<Event, int> prob_index;
};

namespace detail {

struct UnionFind {
    std::vector<int> parent;
    int make() {
        parent.push_back(static_cast<int>(parent.size()));
        return parent.back();
    }
    int find(int x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    }
    void unite(int a, int b) {
        a = find(a);
        b = find(b);
        if (a != b) parent[a] = b;
    }
};

} // namespace detail

inline MomentProblem build_moment_problem(const Scenario& sc, Level level, Binding binding) {
    MomentProblem mp;
    mp.scenario = sc;
    mp.level = level;
    mp.binding = std::move(binding);
    mp.index = enumerate_events(sc, level);
    const std::size_t n = mp.index.size();
    if (n * n * sizeof(double) > 8 * kMaxTableEntries)
        throw structural_error("moment: index too large for dense handling");

    if (auto* fb = std::get_if<FixedBox>(&mp.binding)) {
        ValidationReport rep = validate_box(fb->box);
        if (!rep.valid()) throw structural_error("moment: fixed box fails validation");
        if (!(fb->box.scenario == sc)) throw structural_error("moment: box scenario mismatch");
    }
    if (auto* af = std::get_if<AffineFamily>(&mp.binding)) {
        if (!(af->base.scenario == sc) || af->direction.size() != sc.table_size())
            throw structural_error("moment: affine family tables mismatch");
    }

    // Closure of condition (d): every shared identical assignment may be
    // dropped from either side, and all entries connected this way are equal.
    detail::UnionFind uf;
    std::map<PairKey, int> node_of;
    std::vector<PairKey> nodes;
    auto node = [&](const PairKey& p) {
        auto it = node_of.find(p);
        if (it != node_of.end()) return it->second;
        const int id = uf.make();
        node_of.emplace(p, id);
        nodes.push_back(p);
        return id;
    };

    std::vector<int> stack;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) stack.push_back(node(PairKey(mp.index[i], mp.index[j])));
    std::vector<char> expanded;
    while (!stack.empty()) {
        const int id = stack.back();
        stack.pop_back();
        if (static_cast<std::size_t>(id) < expanded.size() && expanded[id]) continue;
        if (static_cast<std::size_t>(id) >= expanded.size()) expanded.resize(id + 1, 0);
        expanded[id] = 1;
        const PairKey cur = nodes[id];
        for (int side = 0; side < 2; ++side) {
            const Event& a = side ? cur.second : cur.first;
            const Event& b = side ? cur.first : cur.second;
            for (int k : detail::shared_identical_parties(a, b)) {
                const int other = node(PairKey(a.without(k), b));
                uf.unite(id, other);
                if (static_cast<std::size_t>(other) >= expanded.size() || !expanded[other])
                    stack.push_back(other);
            }
        }
    }

    // classify each closure class
    struct ClassInfo {
        EntryClass::Kind kind = EntryClass::Free;
        Event merged;
        PairKey min_pair;
        bool has_min = false;
        int out_id = -1;
    };
    std::map<int, ClassInfo> classes;
    for (std::size_t v = 0; v < nodes.size(); ++v) {
        const int root = uf.find(static_cast<int>(v));
        ClassInfo& ci = classes[root];
        const PairKey& p = nodes[v];
        if (!ci.has_min || p < ci.min_pair) {
            ci.min_pair = p;
            ci.has_min = true;
        }
        if (locally_orthogonal(p.first, p.second)) ci.kind = EntryClass::Zero;
        if (ci.kind != EntryClass::Zero && detail::disjoint_parties(p.first, p.second)) {
            ci.kind = EntryClass::Prob;
            ci.merged = detail::union_event(p.first, p.second);
        }
    }

    // deterministic registry: scan index pairs in row-major order
    mp.cells.reserve(n * (n + 1) / 2);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const int root = uf.find(node_of.at(PairKey(mp.index[i], mp.index[j])));
            ClassInfo& ci = classes.at(root);
            MomentProblem::Cell cell{EntryClass::Zero, -1};
            if (ci.kind == EntryClass::Prob) {
                if (ci.out_id < 0) {
                    auto it = mp.prob_index.find(ci.merged);
                    if (it != mp.prob_index.end()) {
                        ci.out_id = it->second;
                    } else {
                        ci.out_id = static_cast<int>(mp.prob_events.size());
                        mp.prob_events.push_back(ci.merged);
                        mp.prob_index.emplace(ci.merged, ci.out_id);
                    }
                }
                cell = {EntryClass::Prob, ci.out_id};
            } else if (ci.kind == EntryClass::Free) {
                if (ci.out_id < 0) {
                    ci.out_id = static_cast<int>(mp.free_keys.size());
                    mp.free_keys.push_back(ci.min_pair);
                }
                cell = {EntryClass::Free, ci.out_id};
            }
            mp.cells.push_back(cell);
        }
    }

    if (auto* fb = std::get_if<FixedBox>(&mp.binding)) {
        for (const Event& e : mp.prob_events)
            mp.prob_values.push_back(e.empty() ? 1.0 : marginal_probability(fb->box, e));
    } else if (auto* af = std::get_if<AffineFamily>(&mp.binding)) {
        Box dir(sc, af->direction);
        for (const Event& e : mp.prob_events) {
            mp.prob_base.push_back(e.empty() ? 1.0 : marginal_probability(af->base, e));
            mp.prob_dir.push_back(e.empty() ? 0.0 : marginal_probability(dir, e));
        }
    }
    return mp;
}

struct CertificateReport {
    double min_eigenvalue = 0.0;
    double max_zero_residual = 0.0;
    double max_prob_residual = 0.0;
    double max_group_residual = 0.0;
    double phi_residual = 0.0;
    bool accepted = false;
};

// Checks a symmetric matrix against the certificate structure for the given
// box: PSD within 1e-9, zero entries, probability-linked entries matching the
// box's marginals, and equality across every free class.
inline CertificateReport validate_certificate(const Eigen::MatrixXd& gamma, const Box& box,
                                              Level level) {
    MomentProblem mp = build_moment_problem(box.scenario, level, FixedBox{box});
    const std::size_t n = mp.dim();
    if (gamma.rows() != static_cast<Eigen::Index>(n) || gamma.cols() != gamma.rows())
        throw structural_error("validate_certificate: dimension mismatch");

    CertificateReport rep;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma + gamma.transpose()));
    rep.min_eigenvalue = es.eigenvalues().minCoeff();

    std::vector<double> free_min(mp.free_keys.size(), 0.0), free_max(mp.free_keys.size(), 0.0);
    std::vector<char> free_seen(mp.free_keys.size(), 0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i; j < n; ++j) {
            const auto& c = mp.cell(i, j);
            const double v = gamma(i, j);
            switch (c.kind) {
                case EntryClass::Zero:
                    rep.max_zero_residual = std::max(rep.max_zero_residual, std::abs(v));
                    break;
                case EntryClass::Prob:
                    rep.max_prob_residual =
                        std::max(rep.max_prob_residual, std::abs(v - mp.prob_values[c.id]));
                    break;
                case EntryClass::Free:
                    if (!free_seen[c.id]) {
                        free_seen[c.id] = 1;
                        free_min[c.id] = free_max[c.id] = v;
                    } else {
                        free_min[c.id] = std::min(free_min[c.id], v);
                        free_max[c.id] = std::max(free_max[c.id], v);
                    }
                    break;
            }
        }
    }
    for (std::size_t k = 0; k < mp.free_keys.size(); ++k)
        if (free_seen[k])
            rep.max_group_residual = std::max(rep.max_group_residual, free_max[k] - free_min[k]);
    rep.phi_residual = std::abs(gamma(0, 0) - 1.0);

    const double t = 1e-9;
    rep.accepted = rep.min_eigenvalue >= -t && rep.max_zero_residual <= t &&
                   rep.max_prob_residual <= t && rep.max_group_residual <= t &&
                   rep.phi_residual <= t;
    return rep;
}

// Gram decomposition: vectors whose pairwise inner products reproduce the
// matrix. Eigenvalues in [-1e-9, 0) are clipped to zero.
inline std::vector<Eigen::VectorXd> gram_vectors(const Eigen::MatrixXd& gamma) {
    if (gamma.rows() != gamma.cols()) throw structural_error("gram_vectors: not square");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma + gamma.transpose()));
    Eigen::VectorXd lam = es.eigenvalues();
    if (lam.minCoeff() < -1e-9)
        throw structural_error("gram_vectors: matrix is not positive semidefinite");
    lam = lam.cwiseMax(0.0).cwiseSqrt();
    Eigen::MatrixXd f = es.eigenvectors() * lam.asDiagonal(); // rows are the vectors
    std::vector<Eigen::VectorXd> out;
    out.reserve(gamma.rows());
    for (Eigen::Index i = 0; i < gamma.rows(); ++i) out.push_back(f.row(i).transpose());
    return out;
}

} // namespace aq
