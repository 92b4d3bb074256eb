#pragma once

#include <map>
#include <memory>
#include <vector>

#include "aq/box.hpp"

namespace aq {

// Conditions the box on party k obtaining output a under input x.
// P(rest | x_rest) = P(a, rest | x, x_rest) / P(a | x).
inline Box post_select(const Box& box, int party, int input, int output) {
    const Scenario& sc = box.scenario;
    if (party < 0 || party >= sc.num_parties || input < 0 || input >= sc.inputs[party] ||
        output < 0 || output >= sc.outputs[party])
        throw structural_error("post_select: label out of range");
    if (sc.num_parties < 2)
        throw structural_error("post_select: cannot condition a single-party box");

    const double pa = marginal_probability(box, Event({{party, input, output}}));
    if (pa < 1e-9)
        throw zero_probability_error("post_select: conditioning event has probability " +
                                     std::to_string(pa));

    std::vector<int> m, d, rest;
    for (int k = 0; k < sc.num_parties; ++k) {
        if (k == party) continue;
        m.push_back(sc.inputs[k]);
        d.push_back(sc.outputs[k]);
        rest.push_back(k);
    }
    Box out = Box::zeros(Scenario(m, d));
    const int rn = static_cast<int>(rest.size());
    std::vector<int> xs(sc.num_parties, 0), as(sc.num_parties, 0);
    xs[party] = input;
    as[party] = output;
    std::vector<int> rxs(rn, 0);
    while (true) {
        std::vector<int> ras(rn, 0);
        while (true) {
            for (int i = 0; i < rn; ++i) {
                xs[rest[i]] = rxs[i];
                as[rest[i]] = ras[i];
            }
            out.at(rxs, ras) = box.at(xs, as) / pa;
            int i = rn - 1;
            while (i >= 0 && ++ras[i] == d[i]) ras[i--] = 0;
            if (i < 0) break;
        }
        int i = rn - 1;
        while (i >= 0 && ++rxs[i] == m[i]) rxs[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

// Independent composition: product table on n_A + n_B parties, with the
// second box's party indices shifted by n_A.
inline Box compose(const Box& a, const Box& b) {
    std::vector<int> m = a.scenario.inputs, d = a.scenario.outputs;
    m.insert(m.end(), b.scenario.inputs.begin(), b.scenario.inputs.end());
    d.insert(d.end(), b.scenario.outputs.begin(), b.scenario.outputs.end());
    Scenario sc(m, d);
    if (sc.table_size() > kMaxTableEntries)
        throw structural_error("compose: resulting table exceeds size cap");
    Box out = Box::zeros(sc);

    const std::size_t bin = b.scenario.input_tuples(), bout = b.scenario.output_tuples();
    const std::size_t ain = a.scenario.input_tuples(), aout = a.scenario.output_tuples();
    for (std::size_t xa = 0; xa < ain; ++xa)
        for (std::size_t xb = 0; xb < bin; ++xb)
            for (std::size_t oa = 0; oa < aout; ++oa)
                for (std::size_t ob = 0; ob < bout; ++ob)
                    out.table[(xa * bin + xb) * (aout * bout) + oa * bout + ob] =
                        a.table[xa * aout + oa] * b.table[xb * bout + ob];
    return out;
}

// Merges outputs of one party; the merge map must cover a dense range
// {0..d'-1} with d' >= 2.
inline Box coarse_grain(const Box& box, int party, const std::vector<int>& merge) {
    const Scenario& sc = box.scenario;
    if (party < 0 || party >= sc.num_parties) throw structural_error("coarse_grain: bad party");
    if (static_cast<int>(merge.size()) != sc.outputs[party])
        throw structural_error("coarse_grain: merge map length mismatch");
    int dnew = 0;
    for (int v : merge) {
        if (v < 0) throw structural_error("coarse_grain: negative output label");
        dnew = std::max(dnew, v + 1);
    }
    std::vector<char> hit(dnew, 0);
    for (int v : merge) hit[v] = 1;
    for (char h : hit)
        if (!h) throw structural_error("coarse_grain: merge map not surjective onto 0..d'-1");
    if (dnew < 2) throw structural_error("coarse_grain: need at least 2 outputs");

    std::vector<int> d = sc.outputs;
    d[party] = dnew;
    Box out = Box::zeros(Scenario(sc.inputs, d));
    const int n = sc.num_parties;
    std::vector<int> xs(n, 0);
    while (true) {
        std::vector<int> as(n, 0);
        while (true) {
            std::vector<int> am = as;
            am[party] = merge[as[party]];
            out.at(xs, am) += box.at(xs, as);
            int i = n - 1;
            while (i >= 0 && ++as[i] == sc.outputs[i]) as[i--] = 0;
            if (i < 0) break;
        }
        int i = n - 1;
        while (i >= 0 && ++xs[i] == sc.inputs[i]) xs[i--] = 0;
        if (i < 0) break;
    }
    return out;
}

// Decision tree for one effective input of one party group: internal nodes
// measure a constituent party (at most once per root-to-leaf path), leaves
// assign the effective outcome.
struct WireNode {
    bool leaf = false;
    int outcome = 0;                 // leaf payload
    int party = 0, input = 0;        // measurement payload
    std::vector<WireNode> branches;  // one per outcome of `party`

    static WireNode make_leaf(int outcome) {
        WireNode n;
        n.leaf = true;
        n.outcome = outcome;
        return n;
    }
    static WireNode measure(int party, int input, std::vector<WireNode> branches) {
        WireNode n;
        n.party = party;
        n.input = input;
        n.branches = std::move(branches);
        return n;
    }
};

struct WiringSpec {
    std::vector<std::vector<int>> partition;       // groups of constituent parties
    std::vector<std::vector<WireNode>> trees;      // trees[g][effective input]
    bool fine_grained = false;
};

namespace detail {

struct WirePath {
    std::vector<Assignment> assignments;
    int outcome = 0;
};

inline void collect_paths(const WireNode& node, const Scenario& sc,
                          const std::vector<int>& group, std::vector<Assignment>& prefix,
                          std::vector<WirePath>& out) {
    if (node.leaf) {
        out.push_back({prefix, node.outcome});
        return;
    }
    bool in_group = false;
    for (int g : group) in_group |= (g == node.party);
    if (!in_group) throw structural_error("wiring: tree measures a party outside its group");
    if (node.input < 0 || node.input >= sc.inputs[node.party])
        throw structural_error("wiring: tree input out of range");
    for (const auto& a : prefix)
        if (a.party == node.party) throw structural_error("wiring: party measured twice on a path");
    if (static_cast<int>(node.branches.size()) != sc.outputs[node.party])
        throw structural_error("wiring: branch count must match the party's outputs");
    for (int o = 0; o < static_cast<int>(node.branches.size()); ++o) {
        prefix.push_back({node.party, node.input, o});
        collect_paths(node.branches[o], sc, group, prefix, out);
        prefix.pop_back();
    }
}

} // namespace detail

// Applies a grouping wiring: constituent parties are merged into effective
// parties, each effective input runs an adaptive decision tree, and the
// effective outcome is the tree's leaf label (or the full transcript id when
// fine_grained is set).
inline Box group_parties(const Box& box, const WiringSpec& spec) {
    const Scenario& sc = box.scenario;
    const int ngroups = static_cast<int>(spec.partition.size());
    if (spec.trees.size() != spec.partition.size())
        throw structural_error("wiring: one tree list per group required");
    std::vector<char> used(sc.num_parties, 0);
    for (const auto& g : spec.partition)
        for (int k : g) {
            if (k < 0 || k >= sc.num_parties) throw structural_error("wiring: bad party in partition");
            if (used[k]++) throw structural_error("wiring: party in two groups");
        }
    for (int k = 0; k < sc.num_parties; ++k)
        if (!used[k]) throw structural_error("wiring: partition must cover all parties");

    // enumerate every tree's paths
    std::vector<std::vector<std::vector<detail::WirePath>>> paths(ngroups);
    std::vector<int> eff_inputs(ngroups), eff_outputs(ngroups, 0);
    for (int g = 0; g < ngroups; ++g) {
        eff_inputs[g] = static_cast<int>(spec.trees[g].size());
        if (eff_inputs[g] < 1) throw structural_error("wiring: group needs >= 1 effective input");
        paths[g].resize(eff_inputs[g]);
        for (int x = 0; x < eff_inputs[g]; ++x) {
            std::vector<Assignment> prefix;
            detail::collect_paths(spec.trees[g][x], sc, spec.partition[g], prefix, paths[g][x]);
            if (spec.fine_grained)
                for (std::size_t p = 0; p < paths[g][x].size(); ++p)
                    paths[g][x][p].outcome = static_cast<int>(p);
            for (const auto& p : paths[g][x])
                eff_outputs[g] = std::max(eff_outputs[g], p.outcome + 1);
        }
        // effective outcomes must form a dense alphabet
        std::vector<char> seen(eff_outputs[g], 0);
        for (int x = 0; x < eff_inputs[g]; ++x)
            for (const auto& p : paths[g][x]) seen[p.outcome] = 1;
        for (char s : seen)
            if (!s) throw structural_error("wiring: effective outcomes are not dense");
        if (eff_outputs[g] < 2) eff_outputs[g] = 2; // pad degenerate groups
    }

    Box out = Box::zeros(Scenario(eff_inputs, eff_outputs));
    std::vector<int> xeff(ngroups, 0);
    while (true) {
        // combine one path choice per group
        std::vector<std::size_t> pick(ngroups, 0);
        while (true) {
            std::vector<Assignment> all;
            std::vector<int> aeff(ngroups);
            for (int g = 0; g < ngroups; ++g) {
                const auto& p = paths[g][xeff[g]][pick[g]];
                all.insert(all.end(), p.assignments.begin(), p.assignments.end());
                aeff[g] = p.outcome;
            }
            out.at(xeff, aeff) += marginal_probability(box, Event(std::move(all)));
            int g = ngroups - 1;
            while (g >= 0 && ++pick[g] == paths[g][xeff[g]].size()) pick[g--] = 0;
            if (g < 0) break;
        }
        int g = ngroups - 1;
        while (g >= 0 && ++xeff[g] == eff_inputs[g]) xeff[g--] = 0;
        if (g < 0) break;
    }
    return out;
}

} // namespace aq
