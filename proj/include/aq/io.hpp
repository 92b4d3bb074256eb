#pragma once

#include <fstream>
#include <json.hpp>
#include <sstream>

#include "aq/functional.hpp"
#include "aq/moment.hpp"
#include "aq/version.hpp"
#include "aq/wirings.hpp"

namespace aq::io {

using nlohmann::json;

inline json scenario_to_json(const Scenario& sc) {
    return json{{"parties", sc.num_parties}, {"inputs", sc.inputs}, {"outputs", sc.outputs}};
}

inline Scenario scenario_from_json(const json& j) {
    try {
        return Scenario(j.at("inputs").get<std::vector<int>>(),
                        j.at("outputs").get<std::vector<int>>());
    } catch (const json::exception& e) {
        throw io_error(std::string("scenario: ") + e.what());
    }
}

// BoxFile: {"parties": n, "inputs": [...], "outputs": [...],
//           "probabilities": [...]} with the flat order input tuples
// lexicographic (party 1 slowest), then output tuples lexicographic.
inline json box_to_json(const Box& box) {
    json j = scenario_to_json(box.scenario);
    j["probabilities"] = box.table;
    return j;
}

inline Box box_from_json(const json& j) {
    Scenario sc = scenario_from_json(j);
    std::vector<double> probs;
    try {
        probs = j.at("probabilities").get<std::vector<double>>();
        if (j.contains("parties") && j.at("parties").get<int>() != sc.num_parties)
            throw io_error("box: parties field disagrees with input list length");
    } catch (const json::exception& e) {
        throw io_error(std::string("box: ") + e.what());
    }
    if (probs.size() != sc.table_size())
        throw io_error("box: probabilities length " + std::to_string(probs.size()) +
                       " does not match scenario (" + std::to_string(sc.table_size()) + ")");
    for (double v : probs)
        if (!std::isfinite(v)) throw io_error("box: non-finite probability");
    return Box(sc, std::move(probs));
}

// FunctionalFile: {"scenario": {...}, "basis": "collins-gisin" | "full",
//                  "coefficients": [...], "sense": "min" | "max",
//                  "constant": c (optional)}
inline json functional_to_json(const BellFunctional& f) {
    json j;
    j["scenario"] = scenario_to_json(f.scenario);
    j["basis"] = "collins-gisin";
    std::vector<double> coeffs;
    for (const Event& e : cg_basis(f.scenario)) {
        auto it = f.coefficients.find(e);
        coeffs.push_back(it == f.coefficients.end() ? 0.0 : it->second);
    }
    j["coefficients"] = coeffs;
    j["constant"] = f.constant;
    j["sense"] = f.sense == Sense::Minimize ? "min" : "max";
    return j;
}

inline BellFunctional functional_from_json(const json& j) {
    try {
        Scenario sc = scenario_from_json(j.at("scenario"));
        const std::string basis = j.at("basis").get<std::string>();
        const std::string sense_s = j.at("sense").get<std::string>();
        if (sense_s != "min" && sense_s != "max") throw io_error("functional: bad sense");
        const Sense sense = sense_s == "min" ? Sense::Minimize : Sense::Maximize;
        auto coeffs = j.at("coefficients").get<std::vector<double>>();
        for (double v : coeffs)
            if (!std::isfinite(v)) throw io_error("functional: non-finite coefficient");
        const double constant = j.value("constant", 0.0);
        if (basis == "collins-gisin") return functional_from_cg(sc, coeffs, sense, constant);
        if (basis == "full") {
            BellFunctional f = functional_from_full(sc, coeffs, sense);
            f.constant += constant;
            return f;
        }
        throw io_error("functional: basis must be 'collins-gisin' or 'full'");
    } catch (const json::exception& e) {
        throw io_error(std::string("functional: ") + e.what());
    } catch (const structural_error& e) {
        throw io_error(std::string("functional: ") + e.what());
    }
}

// CertificateFile: {"level": ..., "index": [...], "matrix": row-major,
//                   "psd_margin": ...}
inline json certificate_to_json(const MomentProblem& mp, const Eigen::MatrixXd& gamma,
                                double margin) {
    json j;
    j["level"] = level_name(mp.level);
    std::vector<std::string> index;
    for (const Event& e : mp.index) index.push_back(e.str());
    j["index"] = index;
    std::vector<double> mat;
    mat.reserve(gamma.size());
    for (Eigen::Index i = 0; i < gamma.rows(); ++i)
        for (Eigen::Index k = 0; k < gamma.cols(); ++k) mat.push_back(gamma(i, k));
    j["matrix"] = mat;
    j["psd_margin"] = margin;
    return j;
}

// WiringFile:
//   {"partition": [[0,1],[2,3]], "fine_grained": false,
//    "trees": [[tree per effective input], ...]}
// tree node: {"outcome": o} or {"party": k, "input": x, "branches": [...]}
inline WireNode wire_node_from_json(const json& j) {
    if (j.contains("outcome")) return WireNode::make_leaf(j.at("outcome").get<int>());
    if (!j.contains("party") || !j.contains("input") || !j.contains("branches"))
        throw io_error("wiring: node needs outcome or party/input/branches");
    std::vector<WireNode> branches;
    for (const auto& b : j.at("branches")) branches.push_back(wire_node_from_json(b));
    return WireNode::measure(j.at("party").get<int>(), j.at("input").get<int>(),
                             std::move(branches));
}

inline WiringSpec wiring_from_json(const json& j) {
    try {
        WiringSpec spec;
        spec.partition = j.at("partition").get<std::vector<std::vector<int>>>();
        spec.fine_grained = j.value("fine_grained", false);
        for (const auto& group : j.at("trees")) {
            std::vector<WireNode> trees;
            for (const auto& t : group) trees.push_back(wire_node_from_json(t));
            spec.trees.push_back(std::move(trees));
        }
        return spec;
    } catch (const json::exception& e) {
        throw io_error(std::string("wiring: ") + e.what());
    }
}

inline json load_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw io_error(path + ": " + e.what());
    }
}

inline void save_json(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw io_error("cannot write " + path);
    out << j.dump(2) << '\n';
}

inline json report_header(const std::string& target) {
    json j;
    j["tool"] = std::string(kToolName) + " " + kVersion;
    j["target"] = target;
    j["solver"] = {{"method", "primal-dual interior point (NT scaling)"},
                   {"gap_tol", 1e-9},
                   {"feas_tol", 1e-9}};
    return j;
}

} // namespace aq::io
