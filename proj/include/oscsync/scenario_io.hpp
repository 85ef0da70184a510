#pragma once

#include <fstream>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "oscsync/simulator.hpp"

namespace oscsync {

/// Scenario file errors carry the file name plus either a line:column
/// anchor (syntax) or the offending field path (semantics).
class ScenarioParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

using nlohmann::json;

[[noreturn]] inline void parse_fail(const std::string& where, const std::string& what) {
    throw ScenarioParseError(where + ": " + what);
}

inline const json& require_field(const json& obj, const std::string& path, const char* key) {
    if (!obj.is_object()) parse_fail(path, "expected an object");
    const auto it = obj.find(key);
    if (it == obj.end()) parse_fail(path + "." + key, "missing required field");
    return *it;
}

inline double as_number(const json& j, const std::string& path) {
    if (!j.is_number()) parse_fail(path, "expected a number");
    return j.get<double>();
}

inline int as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) parse_fail(path, "expected an integer");
    return j.get<int>();
}

inline std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) parse_fail(path, "expected a string");
    return j.get<std::string>();
}

inline Vec as_vec(const json& j, const std::string& path) {
    if (!j.is_array()) parse_fail(path, "expected an array of numbers");
    Vec v;
    v.reserve(j.size());
    for (std::size_t k = 0; k < j.size(); ++k)
        v.push_back(as_number(j[k], path + "[" + std::to_string(k) + "]"));
    return v;
}

/// A gain entry is either a positive scalar (scaled identity) or a full
/// dim x dim matrix given as rows.
inline Mat as_gain(const json& j, const std::string& path, int dim) {
    if (j.is_number()) return j.get<double>() * Mat::identity(dim);
    if (!j.is_array()) parse_fail(path, "expected a scalar gain or a matrix (array of rows)");
    if (j.size() != static_cast<std::size_t>(dim))
        parse_fail(path, "expected " + std::to_string(dim) + " rows");
    Mat g(dim, dim);
    for (int i = 0; i < dim; ++i) {
        const Vec row = as_vec(j[i], path + "[" + std::to_string(i) + "]");
        if (row.size() != static_cast<std::size_t>(dim))
            parse_fail(path + "[" + std::to_string(i) + "]",
                       "expected " + std::to_string(dim) + " entries");
        for (int c = 0; c < dim; ++c) g(i, c) = row[c];
    }
    return g;
}

inline AgentModelPtr model_from_json(const json& j, const std::string& path) {
    const std::string kind = as_string(require_field(j, path, "model"), path + ".model");
    try {
        if (kind == "mass-damper") {
            return std::make_shared<PlanarMassDamper>(
                as_number(require_field(j, path, "mass"), path + ".mass"),
                as_number(require_field(j, path, "damping"), path + ".damping"));
        }
        if (kind == "two-link-arm") {
            TwoLinkArm::Params p;
            auto opt = [&](const char* key, double& slot) {
                if (j.contains(key)) slot = as_number(j[key], path + "." + key);
            };
            opt("m1", p.m1);
            opt("m2", p.m2);
            opt("l1", p.l1);
            opt("l2", p.l2);
            opt("lc1", p.lc1);
            opt("lc2", p.lc2);
            opt("I1", p.i1);
            opt("I2", p.i2);
            opt("gravity", p.gravity);
            return std::make_shared<TwoLinkArm>(p);
        }
    } catch (const std::invalid_argument& e) {
        parse_fail(path, e.what());
    }
    parse_fail(path + ".model", "unknown model kind '" + kind + "'");
}

inline Scenario scenario_from_json(const json& root, const std::string& name) {
    Scenario sc;
    const std::string base = name;

    const json& topo = require_field(root, base, "topology");
    const int n = as_int(require_field(topo, base + ".topology", "followers"),
                         base + ".topology.followers");
    std::vector<TopologyEdge> edges;
    const json& jedges = require_field(topo, base + ".topology", "edges");
    if (!jedges.is_array()) parse_fail(base + ".topology.edges", "expected an array");
    for (std::size_t k = 0; k < jedges.size(); ++k) {
        const std::string epath = base + ".topology.edges[" + std::to_string(k) + "]";
        TopologyEdge e;
        e.from = as_int(require_field(jedges[k], epath, "from"), epath + ".from");
        e.to = as_int(require_field(jedges[k], epath, "to"), epath + ".to");
        e.weight = jedges[k].contains("weight") ? as_number(jedges[k]["weight"], epath + ".weight")
                                                : 1.0;
        edges.push_back(e);
    }
    try {
        sc.topology = DirectedTopology::from_edges(n, edges);
    } catch (const TopologyError& e) {
        parse_fail(base + ".topology", e.what());
    }

    sc.alpha = as_number(require_field(root, base, "alpha"), base + ".alpha");
    sc.dt = as_number(require_field(root, base, "dt"), base + ".dt");
    sc.t_final = as_number(require_field(root, base, "t_final"), base + ".t_final");
    if (root.contains("record_stride"))
        sc.record_stride = as_int(root["record_stride"], base + ".record_stride");
    if (root.contains("integrator")) {
        const std::string mode = as_string(root["integrator"], base + ".integrator");
        if (mode == "rk4")
            sc.integrator = IntegratorMode::rk4;
        else if (mode == "zoh-euler")
            sc.integrator = IntegratorMode::zoh_euler;
        else
            parse_fail(base + ".integrator", "expected 'rk4' or 'zoh-euler', got '" + mode + "'");
    }

    const json& leader = require_field(root, base, "leader");
    sc.leader_q0 = as_vec(require_field(leader, base + ".leader", "q"), base + ".leader.q");
    sc.leader_qdot0 =
        as_vec(require_field(leader, base + ".leader", "qdot"), base + ".leader.qdot");

    const json& agents = require_field(root, base, "agents");
    if (!agents.is_array()) parse_fail(base + ".agents", "expected an array");
    if (agents.size() != static_cast<std::size_t>(n))
        parse_fail(base + ".agents", "expected " + std::to_string(n) + " agents (one per follower)");
    bool any_q_int = false;
    for (std::size_t k = 0; k < agents.size(); ++k)
        if (agents[k].is_object() && agents[k].contains("q_int")) any_q_int = true;

    for (std::size_t k = 0; k < agents.size(); ++k) {
        const std::string apath = base + ".agents[" + std::to_string(k) + "]";
        const json& ja = agents[k];
        AgentModelPtr model = model_from_json(ja, apath);
        sc.models.push_back(model);
        FollowerInit init;
        init.q = as_vec(require_field(ja, apath, "q"), apath + ".q");
        init.qdot = as_vec(require_field(ja, apath, "qdot"), apath + ".qdot");
        sc.follower_init.push_back(std::move(init));
        if (ja.contains("a_hat"))
            sc.a_hat_init.push_back(as_vec(ja["a_hat"], apath + ".a_hat"));
        else
            sc.a_hat_init.push_back(Vec(model->param_dim(), 0.0));
        if (any_q_int) {
            if (ja.contains("q_int"))
                sc.q_int_init.push_back(as_vec(ja["q_int"], apath + ".q_int"));
            else
                sc.q_int_init.push_back(Vec(model->dof(), 0.0));
        }
        const json& jg = require_field(ja, apath, "gains");
        Gains g;
        g.feedback = as_gain(require_field(jg, apath + ".gains", "K"), apath + ".gains.K",
                             model->dof());
        g.adaptation = as_gain(require_field(jg, apath + ".gains", "Gamma"),
                               apath + ".gains.Gamma", model->param_dim());
        sc.gains.push_back(std::move(g));
    }

    try {
        sc.validate(/*strict=*/true);
    } catch (const std::invalid_argument& e) {
        parse_fail(base, e.what());
    }
    return sc;
}

}  // namespace detail

inline Scenario parse_scenario(const std::string& text, const std::string& name) {
    nlohmann::json root;
    try {
        root = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        std::size_t line = 1, col = 1;
        const std::size_t stop = std::min(text.size(), e.byte > 0 ? e.byte - 1 : 0);
        for (std::size_t i = 0; i < stop; ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        throw ScenarioParseError(name + ":" + std::to_string(line) + ":" + std::to_string(col) +
                                 ": " + e.what());
    }
    return detail::scenario_from_json(root, name);
}

inline Scenario load_scenario(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ScenarioParseError("cannot open scenario file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_scenario(buf.str(), path);
}

namespace detail {

inline json gain_to_json(const Mat& g) {
    // emit scaled identities back as scalars
    bool scaled_identity = g.rows() == g.cols();
    for (std::size_t i = 0; scaled_identity && i < g.rows(); ++i)
        for (std::size_t j = 0; j < g.cols(); ++j)
            if (g(i, j) != (i == j ? g(0, 0) : 0.0)) {
                scaled_identity = false;
                break;
            }
    if (scaled_identity) return g(0, 0);
    json rows = json::array();
    for (std::size_t i = 0; i < g.rows(); ++i) {
        json row = json::array();
        for (std::size_t j = 0; j < g.cols(); ++j) row.push_back(g(i, j));
        rows.push_back(row);
    }
    return rows;
}

inline json model_to_json(const AgentModel& model) {
    json j;
    if (const auto* md = dynamic_cast<const PlanarMassDamper*>(&model)) {
        j["model"] = "mass-damper";
        j["mass"] = md->mass();
        j["damping"] = md->damping();
        return j;
    }
    if (const auto* arm = dynamic_cast<const TwoLinkArm*>(&model)) {
        const TwoLinkArm::Params& p = arm->params();
        j["model"] = "two-link-arm";
        j["m1"] = p.m1;
        j["m2"] = p.m2;
        j["l1"] = p.l1;
        j["l2"] = p.l2;
        j["lc1"] = p.lc1;
        j["lc2"] = p.lc2;
        j["I1"] = p.i1;
        j["I2"] = p.i2;
        return j;
    }
    throw std::invalid_argument("scenario_to_json: unsupported model type " + model.name());
}

}  // namespace detail

inline nlohmann::json scenario_to_json(const Scenario& sc) {
    using nlohmann::json;
    json root;
    root["alpha"] = sc.alpha;
    root["dt"] = sc.dt;
    root["t_final"] = sc.t_final;
    root["record_stride"] = sc.record_stride;
    root["integrator"] = to_string(sc.integrator);
    json topo;
    topo["followers"] = sc.topology.n;
    json edges = json::array();
    for (int i = 1; i <= sc.topology.n; ++i)
        for (int j = 0; j <= sc.topology.n; ++j)
            if (sc.topology.weights(i, j) > 0.0)
                edges.push_back({{"from", i}, {"to", j}, {"weight", sc.topology.weights(i, j)}});
    topo["edges"] = std::move(edges);
    root["topology"] = std::move(topo);
    root["leader"] = {{"q", sc.leader_q0}, {"qdot", sc.leader_qdot0}};
    json agents = json::array();
    for (std::size_t i = 0; i < sc.models.size(); ++i) {
        json ja = detail::model_to_json(*sc.models[i]);
        ja["q"] = sc.follower_init[i].q;
        ja["qdot"] = sc.follower_init[i].qdot;
        ja["a_hat"] = sc.a_hat_init[i];
        if (!sc.q_int_init.empty()) ja["q_int"] = sc.q_int_init[i];
        ja["gains"] = {{"K", detail::gain_to_json(sc.gains[i].feedback)},
                       {"Gamma", detail::gain_to_json(sc.gains[i].adaptation)}};
        agents.push_back(std::move(ja));
    }
    root["agents"] = std::move(agents);
    return root;
}

inline std::string scenario_to_string(const Scenario& sc) { return scenario_to_json(sc).dump(2) + "\n"; }

inline void save_scenario(const Scenario& sc, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write scenario file: " + path);
    out << scenario_to_string(sc);
}

/// Built-in simulation study: nine planar mass agents on a directed chain
/// 1 -> 0, 2 -> 1, ..., 9 -> 8 tracking the elliptic leader orbit
/// [2 cos t, sin t], adaptive gains K = 20 I, Gamma = 2 I, 5 ms steps for
/// 60 s.
inline Scenario paper_scenario() {
    const std::vector<double> masses = {1.0, 1.5, 1.6, 1.2, 0.5, 2.5, 2.2, 1.8, 2.1};
    const std::vector<double> dampings = {0.3, 0.5, 0.7, 0.35, 0.6, 0.8, 0.9, 0.75, 0.85};
    const std::vector<Vec> positions = {{3, 2}, {-3, 2}, {-3, -2}, {3, -2}, {3, 0},
                                        {-3, 0}, {3, 3}, {-3, 3},  {-3, -3}};
    Scenario sc;
    sc.topology = DirectedTopology::chain(9);
    sc.alpha = 1.0;
    sc.leader_q0 = {2.0, 0.0};
    sc.leader_qdot0 = {0.0, 1.0};
    sc.dt = 0.005;
    sc.t_final = 60.0;
    sc.record_stride = 10;
    sc.integrator = IntegratorMode::rk4;
    for (int i = 0; i < 9; ++i) {
        sc.models.push_back(std::make_shared<PlanarMassDamper>(masses[i], dampings[i]));
        sc.gains.push_back(Gains::scaled_identity(2, 2, 20.0, 2.0));
        sc.follower_init.push_back({positions[i], {0.0, 0.0}});
        sc.a_hat_init.push_back({0.0, 0.0});
    }
    return sc;
}

/// Remove the edge 1 -> 0, cutting every follower off from the leader.
inline Scenario with_broken_tree(Scenario sc) {
    sc.topology.weights(1, 0) = 0.0;
    return sc;
}

}  // namespace oscsync
