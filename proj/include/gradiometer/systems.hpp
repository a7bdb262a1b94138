#pragma once

// Control-system data model, the prolonged system on TM and the gradient
// extension on T*M, observation spaces, symmetric-product closure and
// rank-based observability analysis.

#include <optional>

#include <Eigen/Dense>

#include "gradiometer/lifts.hpp"

namespace gradiometer {

// Affine control system: xdot = g0 + sum u_j g_j, y_j = V_j. Input and
// output counts coincide.
struct ControlSystem {
    Chart chart;
    VectorField drift;
    std::vector<VectorField> inputs;
    std::vector<Expression> outputs;

    ControlSystem() = default;
    ControlSystem(Chart c, VectorField g0, std::vector<VectorField> g,
                  std::vector<Expression> V)
        : chart(std::move(c)), drift(std::move(g0)), inputs(std::move(g)),
          outputs(std::move(V)) {
        if (inputs.size() != outputs.size())
            throw std::invalid_argument("control system: input count != output count");
    }

    int m() const { return static_cast<int>(inputs.size()); }
    int n() const { return chart.dim(); }

    // field for word index i: 0 = drift, 1..m = inputs
    const VectorField& field(int i) const { return i == 0 ? drift : inputs.at(i - 1); }
};

enum class LiftKind { Prolonged, Extension };

// System on the induced 2n-chart: 2m inputs (u, u^p) or (u, u^e) and 2m
// outputs (y_j, y_j^v) or (y_j, y_j^a).
struct LiftedSystem {
    LiftKind kind;
    Chart chart;
    VectorField drift;
    std::vector<VectorField> inputs;
    std::vector<Expression> outputs;
    ControlSystem base;
};

// Prolonged system on TM: drift g0^c, inputs {g_j^c} then {g_j^v},
// outputs {V_j^v} then {V_j^c}.
inline LiftedSystem prolong(const ControlSystem& S) {
    const Chart tm = tangent_chart(S.chart);
    LiftedSystem P;
    P.kind = LiftKind::Prolonged;
    P.chart = tm;
    P.drift = complete_lift_vf(S.drift, tm);
    for (const auto& g : S.inputs) P.inputs.push_back(complete_lift_vf(g, tm));
    for (const auto& g : S.inputs) P.inputs.push_back(vertical_lift_vf(g, tm));
    for (const auto& V : S.outputs) P.outputs.push_back(vertical_lift_fn(V));
    for (const auto& V : S.outputs) P.outputs.push_back(complete_lift_fn(S.chart, tm, V));
    P.base = S;
    return P;
}

// Gradient extension on T*M w.r.t. a torsion-free connection: drift
// grad V^{g0}, inputs {grad V^{g_j}} then {grad V_j^v}, outputs {V_j^v}
// then {V^{g_j}}.
inline LiftedSystem gradient_extension(const ControlSystem& S, const Connection& C) {
    if (!C.is_torsion_free())
        throw std::invalid_argument("gradient extension requires a torsion-free connection");
    const Chart tsm = cotangent_chart(S.chart);
    LiftedSystem E;
    E.kind = LiftKind::Extension;
    E.chart = tsm;
    E.drift = cotangent_gradient(C, CotangentFunction::momentum(S.drift), tsm);
    for (const auto& g : S.inputs)
        E.inputs.push_back(cotangent_gradient(C, CotangentFunction::momentum(g), tsm));
    for (const auto& V : S.outputs)
        E.inputs.push_back(cotangent_gradient(C, CotangentFunction::vertical(S.chart, V), tsm));
    for (const auto& V : S.outputs) E.outputs.push_back(vertical_lift_fn(V));
    for (const auto& g : S.inputs) E.outputs.push_back(momentum_fn(g, tsm));
    E.base = S;
    return E;
}

// ---------------------------------------------------------------------------
// Observation spaces and S_0 closure. Words are sequences over the field
// indices {0 = g_0, 1..m = g_j}; depth bounds the word length.

struct FamilyMember {
    std::vector<int> word; // applied left to right: word[0] acts last
    int output_index = 0;
    Expression fn;
};

struct FunctionFamily {
    Chart chart;
    int depth = 0;
    std::vector<FamilyMember> members;
};

namespace detail {

inline bool known_on_samples(const std::vector<Expression>& known, const Expression& e,
                             const Chart& chart, double tol, int samples, std::uint64_t seed) {
    for (const auto& k : known)
        if (equivalent_on_samples(k, e, chart, tol, samples, seed).ok) return true;
    return false;
}

} // namespace detail

// All L_{X_1}...L_{X_s} V_j with s <= depth, deduplicated on samples.
inline FunctionFamily observation_space(const ControlSystem& S, int depth, double tol = 1e-8,
                                        int samples = 64, std::uint64_t seed = kDefaultSeed) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    FunctionFamily fam{S.chart, depth, {}};
    std::vector<Expression> seen;
    std::vector<FamilyMember> frontier;
    for (int j = 0; j < S.m(); ++j) {
        FamilyMember m{{}, j, simplify(S.outputs[j])};
        if (!detail::known_on_samples(seen, m.fn, S.chart, tol, samples, seed)) {
            seen.push_back(m.fn);
            fam.members.push_back(m);
        }
        frontier.push_back(m);
    }
    for (int d = 0; d < depth; ++d) {
        std::vector<FamilyMember> next;
        for (const auto& m : frontier) {
            for (int i = 0; i <= S.m(); ++i) {
                FamilyMember nm;
                nm.word = {i};
                nm.word.insert(nm.word.end(), m.word.begin(), m.word.end());
                nm.output_index = m.output_index;
                nm.fn = lie_derivative(S.field(i), m.fn);
                next.push_back(nm);
                if (!detail::known_on_samples(seen, nm.fn, S.chart, tol, samples, seed)) {
                    seen.push_back(nm.fn);
                    fam.members.push_back(nm);
                }
            }
        }
        frontier = std::move(next);
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Numeric rank with the relative singular-value cutoff.

constexpr double kRankTol = 1e-8;

inline int numeric_rank(const Eigen::MatrixXd& A, double tol = kRankTol) {
    if (A.rows() == 0 || A.cols() == 0) return 0;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    const auto& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return 0;
    int r = 0;
    for (int i = 0; i < sv.size(); ++i)
        if (sv(i) >= tol * sv(0)) ++r;
    return r;
}

// ---------------------------------------------------------------------------
// S_0: iterated symmetric products <g_i : .> of the input fields, with the
// paired observation functions V_R and a greedy numeric basis.

struct S0Member {
    std::vector<int> word; // <word[0] : <word[1] : ... <word[s-1] : g_j>...>>
    int input_index = 0;   // j, 1-based field index is input_index+1
    VectorField field;
    Expression paired_fn; // L_{word[0]} ... L_{word[s-1]} V_j
};

struct S0Family {
    Chart chart;
    int depth = 0;
    std::vector<S0Member> members;
    std::vector<int> basis;          // indices into members, greedy order
    std::vector<int> rank_at_sample; // of the full member set
    bool full_rank = false;
    bool uniform_rank = true;
};

inline S0Family s0_closure(const ControlSystem& S, const Connection& C, int depth,
                           int samples = 64, std::uint64_t seed = kDefaultSeed,
                           double rank_tol = kRankTol) {
    if (depth < 0) throw std::invalid_argument("depth must be >= 0");
    S0Family fam;
    fam.chart = S.chart;
    fam.depth = depth;
    std::vector<S0Member> frontier;
    for (int j = 0; j < S.m(); ++j) {
        S0Member m{{}, j, S.inputs[j], simplify(S.outputs[j])};
        fam.members.push_back(m);
        frontier.push_back(std::move(m));
    }
    for (int d = 0; d < depth; ++d) {
        std::vector<S0Member> next;
        for (const auto& m : frontier) {
            for (int i = 0; i <= S.m(); ++i) {
                S0Member nm;
                nm.word = {i};
                nm.word.insert(nm.word.end(), m.word.begin(), m.word.end());
                nm.input_index = m.input_index;
                nm.field = symmetric_product(C, S.field(i), m.field);
                nm.paired_fn = lie_derivative(S.field(i), m.paired_fn);
                fam.members.push_back(nm);
                next.push_back(std::move(nm));
            }
        }
        frontier = std::move(next);
    }

    const auto pts = S.chart.sample_points(samples, seed);
    const int n = S.chart.dim();
    // member values at every sample, one matrix per point
    std::vector<Eigen::MatrixXd> vals(pts.size(),
                                      Eigen::MatrixXd(n, static_cast<int>(fam.members.size())));
    for (std::size_t p = 0; p < pts.size(); ++p)
        for (std::size_t k = 0; k < fam.members.size(); ++k) {
            auto v = fam.members[k].field.evaluate(pts[p]);
            for (int a = 0; a < n; ++a) vals[p](a, static_cast<int>(k)) = v[a];
        }

    int overall = 0;
    for (std::size_t p = 0; p < pts.size(); ++p) {
        fam.rank_at_sample.push_back(numeric_rank(vals[p], rank_tol));
        if (p > 0 && fam.rank_at_sample[p] != fam.rank_at_sample[0]) fam.uniform_rank = false;
        overall = std::max(overall, fam.rank_at_sample[p]);
    }
    fam.full_rank = !fam.rank_at_sample.empty() &&
                    *std::min_element(fam.rank_at_sample.begin(), fam.rank_at_sample.end()) == n;

    // greedy scan in generation order; keep a field iff it raises the rank
    // at a majority of sample points
    std::vector<int> kept;
    for (std::size_t k = 0; k < fam.members.size(); ++k) {
        if (static_cast<int>(kept.size()) == n) break;
        int raises = 0;
        for (std::size_t p = 0; p < pts.size(); ++p) {
            Eigen::MatrixXd cur(n, static_cast<int>(kept.size()) + 1);
            for (std::size_t c = 0; c < kept.size(); ++c) cur.col(c) = vals[p].col(kept[c]);
            cur.col(static_cast<int>(kept.size())) = vals[p].col(static_cast<int>(k));
            if (numeric_rank(cur, rank_tol) == static_cast<int>(kept.size()) + 1) ++raises;
        }
        if (raises * 2 > static_cast<int>(pts.size())) kept.push_back(static_cast<int>(k));
    }
    fam.basis = std::move(kept);
    return fam;
}

// H^p = H^c + H^v (lifts of the base observation space).
inline FunctionFamily prolonged_observation_space(const ControlSystem& S, int depth,
                                                  double tol = 1e-8, int samples = 64,
                                                  std::uint64_t seed = kDefaultSeed) {
    FunctionFamily base = observation_space(S, depth, tol, samples, seed);
    const Chart tm = tangent_chart(S.chart);
    FunctionFamily fam{tm, depth, {}};
    for (const auto& m : base.members)
        fam.members.push_back({m.word, m.output_index, complete_lift_fn(S.chart, tm, m.fn)});
    for (const auto& m : base.members)
        fam.members.push_back({m.word, m.output_index, vertical_lift_fn(m.fn)});
    return fam;
}

// H^e = V^{S_0} + (H + h)^v, assembled from the Lie-derivative closure rules
// of the Riemannian extension: every member is either fiber-linear
// (momentum of an S_0 field) or fiber-constant (vertical lift).
inline FunctionFamily extension_observation_space(const ControlSystem& S, const Connection& C,
                                                  int depth, double tol = 1e-8, int samples = 64,
                                                  std::uint64_t seed = kDefaultSeed) {
    const Chart tsm = cotangent_chart(S.chart);
    FunctionFamily fam{tsm, depth, {}};
    std::vector<Expression> seen;
    auto add = [&](std::vector<int> word, int j, Expression fn) {
        fn = simplify(fn);
        if (detail::known_on_samples(seen, fn, tsm, tol, samples, seed)) return;
        seen.push_back(fn);
        fam.members.push_back({std::move(word), j, std::move(fn)});
    };

    // momentum class: V^X for X in the S_0 truncation
    S0Family s0 = s0_closure(S, C, depth, samples, seed);
    for (const auto& m : s0.members) add(m.word, m.input_index, momentum_fn(m.field, tsm));

    // vertical class: H up to depth, plus h = L-words applied to L_X V_j
    // with X in the S_0 truncation (grad V_j^v steps produce exactly these;
    // L_{grad V_j^v} V_k^v = 0 members are pruned by construction)
    FunctionFamily H = observation_space(S, depth, tol, samples, seed);
    for (const auto& m : H.members) add(m.word, m.output_index, vertical_lift_fn(m.fn));
    for (const auto& m : s0.members) {
        Expression h = m.paired_fn;
        add(m.word, m.input_index, vertical_lift_fn(h));
        std::vector<Expression> level{h};
        for (int d = static_cast<int>(m.word.size()); d < depth; ++d) {
            std::vector<Expression> next;
            for (const auto& f : level)
                for (int i = 0; i <= S.m(); ++i) {
                    Expression nf = lie_derivative(S.field(i), f);
                    add(m.word, m.input_index, vertical_lift_fn(nf));
                    next.push_back(std::move(nf));
                }
            level = std::move(next);
        }
    }
    return fam;
}

// ---------------------------------------------------------------------------
// Observability rank verdicts per sample point.

struct RankReport {
    int expected = 0;
    std::vector<int> rank_at_sample;
    bool uniform = true;
    bool full = false;
};

inline RankReport rank_of_differentials(const FunctionFamily& fam, int expected_rank,
                                        int samples = 64, std::uint64_t seed = kDefaultSeed,
                                        double rank_tol = kRankTol) {
    RankReport rep;
    rep.expected = expected_rank;
    const int n = fam.chart.dim();
    std::vector<std::vector<Expression>> grads;
    for (const auto& m : fam.members) {
        std::vector<Expression> g(n);
        for (int a = 0; a < n; ++a) g[a] = differentiate(m.fn, a);
        grads.push_back(std::move(g));
    }
    for (const auto& p : fam.chart.sample_points(samples, seed)) {
        Eigen::MatrixXd D(static_cast<int>(grads.size()), n);
        for (std::size_t k = 0; k < grads.size(); ++k)
            for (int a = 0; a < n; ++a) D(static_cast<int>(k), a) = grads[k][a].evaluate(p);
        rep.rank_at_sample.push_back(numeric_rank(D, rank_tol));
    }
    for (std::size_t i = 1; i < rep.rank_at_sample.size(); ++i)
        if (rep.rank_at_sample[i] != rep.rank_at_sample[0]) rep.uniform = false;
    rep.full = !rep.rank_at_sample.empty() &&
               *std::min_element(rep.rank_at_sample.begin(), rep.rank_at_sample.end()) ==
                   expected_rank;
    return rep;
}

inline RankReport observability_rank(const ControlSystem& S, int depth, double rank_tol = kRankTol,
                                     int samples = 64, std::uint64_t seed = kDefaultSeed) {
    FunctionFamily H = observation_space(S, depth, 1e-8, samples, seed);
    return rank_of_differentials(H, S.n(), samples, seed, rank_tol);
}

} // namespace gradiometer
