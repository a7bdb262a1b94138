#pragma once

// JSON ingestion of system descriptions and emission of machine-readable
// reports. A system file carries dim, coords, box, drift, inputs, outputs
// and a connection given either by sparse Christoffel symbols or by a
// metric whose Levi-Civita connection is taken.

#include <cstdio>
#include <fstream>

#include <nlohmann/json.hpp>

#include "gradiometer/realization.hpp"

namespace gradiometer {

inline constexpr const char* kToolVersion = "1.0.0";

struct SystemDescription {
    ControlSystem system;
    Connection connection;
    std::optional<Metric> metric; // present when the connection came from one
};

namespace detail {

using nlohmann::json;

inline std::vector<Interval> parse_box(const json& jb, int n, const std::string& where) {
    if (!jb.is_array() || static_cast<int>(jb.size()) != n)
        throw std::invalid_argument(where + ": box must be an array of " + std::to_string(n) +
                                    " [lo, hi] pairs");
    std::vector<Interval> box(n);
    for (int a = 0; a < n; ++a) {
        const auto& iv = jb[a];
        if (!iv.is_array() || iv.size() != 2)
            throw std::invalid_argument(where + ": box entry " + std::to_string(a + 1) +
                                        " must be [lo, hi]");
        box[a] = {iv[0].get<double>(), iv[1].get<double>()};
        if (!(box[a].lo < box[a].hi))
            throw std::invalid_argument(where + ": box entry " + std::to_string(a + 1) +
                                        " needs lo < hi");
    }
    return box;
}

inline Expression parse_entry(const json& j, const Chart& chart, const std::string& where) {
    if (!j.is_string())
        throw std::invalid_argument(where + ": expected an expression string");
    try {
        return parse_expr(j.get<std::string>(), chart);
    } catch (const ParseError& e) {
        throw std::invalid_argument(where + ": " + e.what() + " in \"" +
                                    j.get<std::string>() + "\"");
    }
}

inline ExprMatrix parse_matrix(const json& jm, const Chart& chart, const std::string& where) {
    const int n = chart.dim();
    if (!jm.is_array() || static_cast<int>(jm.size()) != n)
        throw std::invalid_argument(where + ": expected " + std::to_string(n) + " rows");
    ExprMatrix m(n, std::vector<Expression>(n));
    for (int a = 0; a < n; ++a) {
        if (!jm[a].is_array() || static_cast<int>(jm[a].size()) != n)
            throw std::invalid_argument(where + ": row " + std::to_string(a + 1) + " needs " +
                                        std::to_string(n) + " entries");
        for (int b = 0; b < n; ++b)
            m[a][b] = parse_entry(jm[a][b], chart,
                                  where + "[" + std::to_string(a + 1) + "][" +
                                      std::to_string(b + 1) + "]");
    }
    return m;
}

} // namespace detail

inline SystemDescription load_system(const nlohmann::json& j) {
    using nlohmann::json;
    for (const char* key : {"dim", "coords", "box", "drift", "inputs", "outputs", "connection"})
        if (!j.contains(key))
            throw std::invalid_argument(std::string("system file: missing field \"") + key +
                                        "\"");

    const int n = j["dim"].get<int>();
    if (n < 1) throw std::invalid_argument("system file: dim must be >= 1");
    auto coords = j["coords"].get<std::vector<std::string>>();
    if (static_cast<int>(coords.size()) != n)
        throw std::invalid_argument("system file: coords count != dim");
    Chart chart(coords, detail::parse_box(j["box"], n, "system file"));

    if (!j["drift"].is_array() || static_cast<int>(j["drift"].size()) != n)
        throw std::invalid_argument("system file: drift needs dim components");
    std::vector<Expression> drift(n);
    for (int a = 0; a < n; ++a)
        drift[a] = detail::parse_entry(j["drift"][a], chart,
                                       "drift[" + std::to_string(a + 1) + "]");

    if (!j["inputs"].is_array() || j["inputs"].empty())
        throw std::invalid_argument("system file: at least one input field required");
    const int m = static_cast<int>(j["inputs"].size());
    std::vector<VectorField> inputs;
    for (int k = 0; k < m; ++k) {
        if (!j["inputs"][k].is_array() || static_cast<int>(j["inputs"][k].size()) != n)
            throw std::invalid_argument("system file: input " + std::to_string(k + 1) +
                                        " needs dim components");
        std::vector<Expression> comps(n);
        for (int a = 0; a < n; ++a)
            comps[a] = detail::parse_entry(j["inputs"][k][a], chart,
                                           "inputs[" + std::to_string(k + 1) + "][" +
                                               std::to_string(a + 1) + "]");
        inputs.emplace_back(chart, std::move(comps));
    }

    if (!j["outputs"].is_array() || static_cast<int>(j["outputs"].size()) != m)
        throw std::invalid_argument("system file: output count must equal input count");
    std::vector<Expression> outputs(m);
    for (int k = 0; k < m; ++k)
        outputs[k] = detail::parse_entry(j["outputs"][k], chart,
                                         "outputs[" + std::to_string(k + 1) + "]");

    SystemDescription desc;
    desc.system = ControlSystem(chart, VectorField(chart, std::move(drift)), std::move(inputs),
                                std::move(outputs));

    const json& jc = j["connection"];
    if (!jc.contains("kind"))
        throw std::invalid_argument("system file: connection needs a \"kind\"");
    const std::string kind = jc["kind"].get<std::string>();
    if (kind == "christoffel") {
        // sparse symbols keyed "a,b,c" with 1-based indices; unlisted = 0
        Connection C = Connection::flat(chart);
        if (jc.contains("symbols")) {
            for (const auto& [key, val] : jc["symbols"].items()) {
                int a = 0, b = 0, c = 0;
                if (std::sscanf(key.c_str(), "%d,%d,%d", &a, &b, &c) != 3 || a < 1 || a > n ||
                    b < 1 || b > n || c < 1 || c > n)
                    throw std::invalid_argument("system file: bad symbol key \"" + key + "\"");
                C.symbols[a - 1][b - 1][c - 1] =
                    detail::parse_entry(val, chart, "connection symbol " + key);
            }
        }
        desc.connection = std::move(C);
    } else if (kind == "levi_civita") {
        if (!jc.contains("metric"))
            throw std::invalid_argument("system file: levi_civita connection needs a metric");
        Metric G(chart, detail::parse_matrix(jc["metric"], chart, "connection metric"));
        MetricCheck mc = check_metric(G);
        if (!mc.symmetric)
            throw std::invalid_argument("system file: connection metric is not symmetric");
        if (!mc.nondegenerate)
            throw std::invalid_argument("system file: connection metric degenerates on the box");
        desc.connection = christoffel_from_metric(G);
        desc.metric = std::move(G);
    } else {
        throw std::invalid_argument("system file: unknown connection kind \"" + kind + "\"");
    }
    return desc;
}

inline SystemDescription load_system_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    try {
        return load_system(j);
    } catch (const std::invalid_argument& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Report emission. Deterministic given (input, flags, seed) except for the
// timing field.

inline nlohmann::json report_json(const RealizationReport& rep, const Tolerances& tol,
                                  int samples, double elapsed_seconds) {
    nlohmann::json j;
    j["version"] = kToolVersion;
    j["seed"] = rep.seed;
    j["depth"] = rep.depth;
    j["samples"] = samples;
    j["tolerances"] = {{"identity", tol.identity},
                       {"simulation", tol.simulation},
                       {"rank", tol.rank},
                       {"relative", tol.relative}};
    j["verdict"] = verdict_name(rep.verdict);
    j["stages"] = nlohmann::json::array();
    for (const auto& s : rep.stages) {
        nlohmann::json js;
        js["name"] = s.name;
        js["passed"] = s.passed;
        js["residual"] = s.residual;
        if (!s.detail.empty()) js["detail"] = s.detail;
        if (!s.witness.empty()) js["witness"] = s.witness;
        j["stages"].push_back(std::move(js));
    }
    j["candidate_symbolic"] = rep.candidate_symbolic;
    if (rep.candidate_metric) {
        nlohmann::json jm = nlohmann::json::array();
        for (const auto& row : rep.candidate_metric->components) {
            nlohmann::json jr = nlohmann::json::array();
            for (const auto& e : row) jr.push_back(e.str());
            jm.push_back(std::move(jr));
        }
        j["candidate_metric"] = std::move(jm);
    }
    j["timing_seconds"] = elapsed_seconds;
    return j;
}

} // namespace gradiometer
