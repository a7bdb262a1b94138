#pragma once

// Gradient-realization pipeline: reconstruct the candidate metric from an
// S_0 basis, verify symmetry, verify the connection is its Levi-Civita
// connection, verify the inputs are gradients of the outputs and the drift
// is locally gradient; plus the isometry test for state space
// diffeomorphisms between gradient systems.

#include <functional>

#include "gradiometer/compat.hpp"
#include "gradiometer/sim.hpp"

namespace gradiometer {

struct Tolerances {
    double identity = 1e-8;    // sampled tensor/bracket identities
    double simulation = 1e-6;  // trajectory conjugacy
    double rank = kRankTol;    // singular-value cutoff
    double relative = 1e-6;    // candidate-vs-reference metric comparison
};

// Candidate metric: symbolic expression matrix when the basis solve stays
// well conditioned symbolically (n <= 6), and always a pointwise numeric
// evaluator backed by the per-sample linear solve.
struct MetricCandidate {
    bool ok = false;
    std::string error;
    std::vector<double> witness;
    bool symbolic = false;
    Metric symbolic_metric;
    std::function<Eigen::MatrixXd(std::span<const double>)> eval;
};

// Solves G(x)^T K(x) = D(x) at each point, where K's columns are the S_0
// basis fields and D's columns are the differentials of their paired
// functions.
inline MetricCandidate reconstruct_metric(const ControlSystem& S, const Connection& C,
                                          int depth = 3, int samples = 64,
                                          std::uint64_t seed = kDefaultSeed) {
    MetricCandidate cand;
    const int n = S.n();
    S0Family s0 = s0_closure(S, C, depth, samples, seed);
    if (!s0.full_rank || static_cast<int>(s0.basis.size()) != n) {
        cand.error = "S_0 basis is rank deficient at depth " + std::to_string(depth);
        return cand;
    }

    auto basis_fields = std::make_shared<std::vector<VectorField>>();
    auto basis_grads = std::make_shared<std::vector<OneForm>>();
    for (int idx : s0.basis) {
        basis_fields->push_back(s0.members[idx].field);
        basis_grads->push_back(differential(S.chart, s0.members[idx].paired_fn));
    }

    cand.eval = [n, basis_fields, basis_grads](std::span<const double> x) {
        Eigen::MatrixXd K(n, n), D(n, n);
        for (int i = 0; i < n; ++i) {
            auto col = (*basis_fields)[i].evaluate(x);
            auto grad = (*basis_grads)[i].evaluate(x);
            for (int a = 0; a < n; ++a) {
                K(a, i) = col[a];
                D(a, i) = grad[a];
            }
        }
        // G^T K = D  =>  G = (D K^{-1})^T
        Eigen::MatrixXd Gt = K.transpose().fullPivLu().solve(D.transpose());
        return Eigen::MatrixXd(Gt.transpose());
    };

    // verify the per-sample solve is well posed
    for (const auto& p : S.chart.sample_points(samples, seed)) {
        Eigen::MatrixXd K(n, n);
        for (int i = 0; i < n; ++i) {
            auto col = (*basis_fields)[i].evaluate(p);
            for (int a = 0; a < n; ++a) K(a, i) = col[a];
        }
        if (numeric_rank(K) < n) {
            cand.error = "singular basis matrix K(x) at a sample point";
            cand.witness = p;
            return cand;
        }
    }

    if (n <= kMaxSymbolicInverseDim) {
        ExprMatrix K(n, std::vector<Expression>(n)), D(n, std::vector<Expression>(n));
        for (int i = 0; i < n; ++i)
            for (int a = 0; a < n; ++a) {
                K[a][i] = (*basis_fields)[i].components[a];
                D[a][i] = (*basis_grads)[i].components[a];
            }
        Expression detK = simplify(symbolic_det(K));
        bool det_nonvanishing = true;
        for (const auto& p : S.chart.sample_points(samples, seed))
            if (std::abs(detK.evaluate(p)) < kDegeneracyTol) det_nonvanishing = false;
        if (det_nonvanishing) {
            ExprMatrix Kinv = symbolic_inverse(K);
            ExprMatrix G(n, std::vector<Expression>(n));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    // G = (D K^{-1})^T, i.e. G_ab = sum_c D_bc Kinv_ca
                    std::vector<Expression> terms;
                    for (int c = 0; c < n; ++c) terms.push_back(D[b][c] * Kinv[c][a]);
                    G[a][b] = simplify(Expression::sum(std::move(terms)));
                }
            cand.symbolic = true;
            cand.symbolic_metric = Metric(S.chart, std::move(G));
        }
    }
    cand.ok = true;
    return cand;
}

inline double verify_symmetry(const MetricCandidate& Gc, const Chart& chart, int samples = 64,
                              std::uint64_t seed = kDefaultSeed) {
    double worst = 0.0;
    for (const auto& p : chart.sample_points(samples, seed)) {
        Eigen::MatrixXd G = Gc.eval(p);
        worst = std::max(worst, (G - G.transpose()).cwiseAbs().maxCoeff());
    }
    return worst;
}

namespace detail {

// Christoffel symbols of a pointwise metric via central finite differences.
inline std::vector<Eigen::MatrixXd> fd_christoffel(
    const std::function<Eigen::MatrixXd(std::span<const double>)>& metric,
    const std::vector<double>& x, double step = 1e-5) {
    const int n = static_cast<int>(x.size());
    Eigen::MatrixXd G = metric(x);
    Eigen::MatrixXd Ginv = G.fullPivLu().inverse();
    std::vector<Eigen::MatrixXd> dG(n); // dG[c](a,b) = d_c G_ab
    std::vector<double> xp = x, xm = x;
    for (int c = 0; c < n; ++c) {
        xp[c] = x[c] + step;
        xm[c] = x[c] - step;
        dG[c] = (metric(xp) - metric(xm)) / (2.0 * step);
        xp[c] = x[c];
        xm[c] = x[c];
    }
    std::vector<Eigen::MatrixXd> gamma(n, Eigen::MatrixXd(n, n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                double s = 0.0;
                for (int d = 0; d < n; ++d)
                    s += Ginv(a, d) * (dG[c](d, b) + dG[b](d, c) - dG[d](b, c));
                gamma[a](b, c) = 0.5 * s;
            }
    return gamma;
}

} // namespace detail

// max |Gamma(C) - Gamma(Levi-Civita of candidate)| over samples and indices.
inline double verify_levi_civita(const MetricCandidate& Gc, const Connection& C,
                                 int samples = 64, std::uint64_t seed = kDefaultSeed) {
    const int n = C.chart.dim();
    double worst = 0.0;
    std::optional<Connection> symbolic_gamma;
    if (Gc.symbolic) symbolic_gamma = christoffel_from_metric(Gc.symbolic_metric);
    for (const auto& p : C.chart.sample_points(samples, seed)) {
        std::vector<Eigen::MatrixXd> gamma;
        if (symbolic_gamma) {
            gamma.assign(n, Eigen::MatrixXd(n, n));
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c)
                        gamma[a](b, c) = symbolic_gamma->symbols[a][b][c].evaluate(p);
        } else {
            gamma = detail::fd_christoffel(Gc.eval, p);
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    worst = std::max(worst,
                                     std::abs(gamma[a](b, c) - C.symbols[a][b][c].evaluate(p)));
    }
    return worst;
}

// per input j: max component residual of flat_{Gc}(g_j) - dV_j over samples
inline std::vector<double> verify_input_gradients(const ControlSystem& S,
                                                  const MetricCandidate& Gc, int samples = 64,
                                                  std::uint64_t seed = kDefaultSeed) {
    const int n = S.n();
    std::vector<double> worst(S.m(), 0.0);
    std::vector<OneForm> dV;
    for (const auto& V : S.outputs) dV.push_back(differential(S.chart, V));
    for (const auto& p : S.chart.sample_points(samples, seed)) {
        Eigen::MatrixXd G = Gc.eval(p);
        for (int j = 0; j < S.m(); ++j) {
            auto g = S.inputs[j].evaluate(p);
            auto d = dV[j].evaluate(p);
            for (int a = 0; a < n; ++a) {
                double flat_a = 0.0;
                for (int b = 0; b < n; ++b) flat_a += G(a, b) * g[b];
                worst[j] = std::max(worst[j], std::abs(flat_a - d[a]));
            }
        }
    }
    return worst;
}

// closedness residual of flat_{Gc}(g_0); finite-difference curl of the
// pointwise one-form when no symbolic candidate exists
inline double verify_drift_locally_gradient(const ControlSystem& S, const MetricCandidate& Gc,
                                            int samples = 64, std::uint64_t seed = kDefaultSeed,
                                            double step = 1e-5) {
    const int n = S.n();
    if (n == 1) return 0.0; // one-forms on a line are always closed
    if (Gc.symbolic) {
        OneForm w = flat(Gc.symbolic_metric, S.drift);
        return is_closed(w, 0.0, samples, seed).max_residual;
    }
    auto omega = [&](std::vector<double> x) {
        Eigen::MatrixXd G = Gc.eval(x);
        auto g0 = S.drift.evaluate(x);
        Eigen::VectorXd w(n);
        for (int a = 0; a < n; ++a) {
            w(a) = 0.0;
            for (int b = 0; b < n; ++b) w(a) += G(a, b) * g0[b];
        }
        return w;
    };
    double worst = 0.0;
    for (const auto& p : S.chart.sample_points(samples, seed)) {
        std::vector<Eigen::VectorXd> dw(n);
        std::vector<double> xp = p, xm = p;
        for (int b = 0; b < n; ++b) {
            xp[b] = p[b] + step;
            xm[b] = p[b] - step;
            dw[b] = (omega(xp) - omega(xm)) / (2.0 * step);
            xp[b] = p[b];
            xm[b] = p[b];
        }
        for (int a = 0; a < n; ++a)
            for (int b = a + 1; b < n; ++b)
                worst = std::max(worst, std::abs(dw[b](a) - dw[a](b)));
    }
    return worst;
}

// ---------------------------------------------------------------------------

enum class Verdict { LocallyGradient, NotGradient, Inconclusive };

inline const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::LocallyGradient: return "locally-gradient";
        case Verdict::NotGradient: return "not-gradient";
        case Verdict::Inconclusive: return "inconclusive";
    }
    return "?";
}

struct StageResult {
    std::string name;
    bool ran = false;
    bool passed = false;
    double residual = 0.0;
    std::string detail;
    std::vector<double> witness;
};

struct RealizationReport {
    Verdict verdict = Verdict::Inconclusive;
    std::vector<StageResult> stages;
    int depth = 0;
    std::uint64_t seed = kDefaultSeed;
    bool candidate_symbolic = false;
    std::optional<Metric> candidate_metric;

    const StageResult* stage(const std::string& name) const {
        for (const auto& s : stages)
            if (s.name == name) return &s;
        return nullptr;
    }
};

struct CharacterizeOptions {
    int depth = 3;
    int samples = 64;
    std::uint64_t seed = kDefaultSeed;
    Tolerances tol;
    double sim_step = 1e-3;
    double sim_duration = 1.0;
};

// The full pipeline: observability, S_0 rank, compatibility on the basis,
// metric reconstruction, symmetry, Levi-Civita, input gradients, drift
// closedness, and the trajectory-conjugacy surrogate for weak external
// equivalence of the prolongation and the gradient extension.
inline RealizationReport characterize(const ControlSystem& S, const Connection& C,
                                      const CharacterizeOptions& opt = {}) {
    RealizationReport rep;
    rep.depth = opt.depth;
    rep.seed = opt.seed;
    bool hypotheses_ok = true;
    bool falsified = false;

    auto push = [&](StageResult s) { rep.stages.push_back(std::move(s)); };

    try {
        RankReport obs = observability_rank(S, opt.depth, opt.tol.rank, opt.samples, opt.seed);
        StageResult s{"observability_rank", true, obs.full,
                      static_cast<double>(obs.rank_at_sample.empty() ? 0 : obs.rank_at_sample[0]),
                      ""};
        if (!obs.uniform) s.detail = "warning: rank varies across sample points";
        if (!obs.full) {
            s.detail += (s.detail.empty() ? "" : "; ") + std::string("rank < n at some sample");
            hypotheses_ok = false;
        }
        push(std::move(s));
    } catch (const std::exception& e) {
        push({"observability_rank", true, false, 0.0, e.what()});
        hypotheses_ok = false;
    }

    try {
        S0Family s0 = s0_closure(S, C, opt.depth, opt.samples, opt.seed, opt.tol.rank);
        StageResult s{"s0_full_rank", true, s0.full_rank,
                      static_cast<double>(s0.rank_at_sample.empty() ? 0 : s0.rank_at_sample[0]),
                      ""};
        if (!s0.uniform_rank) s.detail = "warning: S_0 rank varies across sample points";
        if (!s0.full_rank) hypotheses_ok = false;
        push(std::move(s));
    } catch (const std::exception& e) {
        push({"s0_full_rank", true, false, 0.0, e.what()});
        hypotheses_ok = false;
    }

    if (hypotheses_ok) {
        try {
            BasisCompatReport comp = check_compatibility_on_basis(S, C, opt.depth,
                                                                  opt.tol.identity, opt.samples,
                                                                  opt.seed);
            StageResult s{"compatibility", true, comp.ok,
                          std::max(comp.condition_a.worst_residual,
                                   comp.condition_b.worst_residual),
                          comp.error};
            if (!comp.ok) {
                falsified = true;
                s.detail = comp.condition_a.ok ? comp.condition_b.failing_identity
                                               : comp.condition_a.failing_identity;
                s.witness = comp.condition_a.ok ? comp.condition_b.witness
                                                : comp.condition_a.witness;
            }
            push(std::move(s));
        } catch (const std::exception& e) {
            push({"compatibility", true, false, 0.0, e.what()});
            hypotheses_ok = false;
        }
    }

    MetricCandidate cand;
    if (hypotheses_ok) {
        cand = reconstruct_metric(S, C, opt.depth, opt.samples, opt.seed);
        push({"reconstruct_metric", true, cand.ok, 0.0, cand.error, cand.witness});
        if (!cand.ok) hypotheses_ok = false;
        rep.candidate_symbolic = cand.symbolic;
        if (cand.symbolic) rep.candidate_metric = cand.symbolic_metric;
    }

    if (hypotheses_ok && cand.ok) {
        double sym = verify_symmetry(cand, S.chart, opt.samples, opt.seed);
        push({"verify_symmetry", true, sym <= opt.tol.identity, sym, ""});
        if (sym > opt.tol.identity) falsified = true;

        try {
            double lc = verify_levi_civita(cand, C, opt.samples, opt.seed);
            // finite-difference Christoffels limit attainable accuracy
            double lc_tol = cand.symbolic ? opt.tol.identity : 1e-4;
            push({"verify_levi_civita", true, lc <= lc_tol, lc, ""});
            if (lc > lc_tol) falsified = true;
        } catch (const std::exception& e) {
            push({"verify_levi_civita", true, false, 0.0, e.what()});
            falsified = true;
        }

        auto grads = verify_input_gradients(S, cand, opt.samples, opt.seed);
        double worst_grad = grads.empty() ? 0.0 : *std::max_element(grads.begin(), grads.end());
        push({"verify_input_gradients", true, worst_grad <= opt.tol.identity, worst_grad, ""});
        if (worst_grad > opt.tol.identity) falsified = true;

        double closed = verify_drift_locally_gradient(S, cand, opt.samples, opt.seed);
        double closed_tol = cand.symbolic ? opt.tol.identity : 1e-4;
        push({"verify_drift_closed", true, closed <= closed_tol, closed, ""});
        if (closed > closed_tol) falsified = true;
    }

    // numeric conjugacy surrogate for weak external equivalence; only
    // meaningful once a symbolic candidate exists
    if (hypotheses_ok && cand.ok && cand.symbolic && !falsified) {
        try {
            const int n = S.n();
            std::vector<double> x0(n), v0(n);
            detail::SplitMix rng(opt.seed ^ 0x5109a7b3ULL);
            for (int a = 0; a < n; ++a) {
                const Interval& iv = S.chart.box(a);
                x0[a] = 0.5 * (iv.lo + iv.hi);
                v0[a] = rng.uniform() - 0.5;
            }
            ControlSignal u = ControlSignal::seeded_test_signal(S.m(), opt.sim_duration,
                                                                opt.seed);
            ControlSignal up = ControlSignal::seeded_test_signal(S.m(), opt.sim_duration,
                                                                 opt.seed ^ 0x9d2c5680ULL);
            ConjugacyResult conj = conjugacy_check(S, cand.symbolic_metric, C, x0, v0, u, up,
                                                   opt.sim_step, opt.sim_duration);
            double r = std::max(conj.state_residual, conj.output_residual);
            push({"conjugacy_simulation", true, r <= opt.tol.simulation, r,
                  "weak-external-equivalence surrogate"});
            if (r > opt.tol.simulation) falsified = true;
        } catch (const std::exception& e) {
            push({"conjugacy_simulation", true, false, 0.0, e.what()});
            falsified = true;
        }
    }

    if (!hypotheses_ok)
        rep.verdict = Verdict::Inconclusive;
    else if (falsified)
        rep.verdict = Verdict::NotGradient;
    else
        rep.verdict = Verdict::LocallyGradient;
    return rep;
}

// ---------------------------------------------------------------------------
// Isometry test for a state space map psi between two metric charts:
// residual of J^T G2(psi(x)) J - G1(x) plus the connection-respect check
// on a pair of seeded random polynomial fields.

struct IsometryReport {
    bool isometry = false;
    double pullback_residual = 0.0;
    std::vector<double> witness;
    double connection_residual = 0.0;
    bool respects_connection = false;
};

inline IsometryReport isometry_check(const Metric& G1, const Metric& G2,
                                     const std::vector<Expression>& psi, double tol = 1e-8,
                                     int samples = 64, std::uint64_t seed = kDefaultSeed) {
    const Chart& chart = G1.chart;
    const int n = chart.dim();
    if (static_cast<int>(psi.size()) != G2.chart.dim())
        throw std::invalid_argument("isometry_check: map component count != target dimension");

    ExprMatrix J(n, std::vector<Expression>(n));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b) J[a][b] = differentiate(psi[a], b);

    IsometryReport rep;
    const Connection C1 = christoffel_from_metric(G1);
    const Connection C2 = christoffel_from_metric(G2);

    // seeded linear-plus-constant test fields on the source chart
    detail::SplitMix rng(seed ^ 0xa5a5a5a5ULL);
    auto random_field = [&]() {
        std::vector<Expression> comps(n);
        for (int a = 0; a < n; ++a) {
            Expression e = Expression(rng.uniform() - 0.5);
            for (int b = 0; b < n; ++b)
                e = e + Expression(rng.uniform() - 0.5) * Expression::variable(chart, b);
            comps[a] = simplify(e);
        }
        return VectorField(chart, comps);
    };
    VectorField X = random_field();
    VectorField Y = random_field();
    VectorField W1 = covariant_derivative(C1, X, Y);

    // d/dx of (J * Y): for transporting the derivative of the pushforward
    ExprMatrix JY_jac(n, std::vector<Expression>(n));
    {
        std::vector<Expression> JY(n);
        for (int a = 0; a < n; ++a) {
            std::vector<Expression> terms;
            for (int b = 0; b < n; ++b) terms.push_back(J[a][b] * Y.components[b]);
            JY[a] = simplify(Expression::sum(std::move(terms)));
        }
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) JY_jac[a][b] = differentiate(JY[a], b);
    }

    for (const auto& p : chart.sample_points(samples, seed)) {
        Eigen::MatrixXd Jm(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) Jm(a, b) = J[a][b].evaluate(p);
        if (numeric_rank(Jm) < n)
            throw std::invalid_argument("isometry_check: singular Jacobian at a sample point");

        std::vector<double> q(n);
        for (int a = 0; a < n; ++a) q[a] = psi[a].evaluate(p);

        Eigen::MatrixXd G1m(n, n), G2m(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                G1m(a, b) = G1.components[a][b].evaluate(p);
                G2m(a, b) = G2.components[a][b].evaluate(q);
            }
        double r = (Jm.transpose() * G2m * Jm - G1m).cwiseAbs().maxCoeff();
        if (r > rep.pullback_residual) {
            rep.pullback_residual = r;
            if (r > tol) rep.witness = p;
        }

        // connection respect at p: J * (nabla1_X Y)(x) vs nabla2_{X'}Y' (psi(x))
        Eigen::VectorXd Xv(n), Yv(n), W1v(n);
        for (int a = 0; a < n; ++a) {
            Xv(a) = X.components[a].evaluate(p);
            Yv(a) = Y.components[a].evaluate(p);
            W1v(a) = W1.components[a].evaluate(p);
        }
        Eigen::VectorXd lhs = Jm * W1v;
        Eigen::VectorXd Xp = Jm * Xv, Yp = Jm * Yv;
        // D_y Y'(psi(x)) = D_x(J Y) * J^{-1}
        Eigen::MatrixXd P(n, n);
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) P(a, b) = JY_jac[a][b].evaluate(p);
        Eigen::MatrixXd DY = P * Jm.fullPivLu().inverse();
        Eigen::VectorXd rhs = DY * Xp;
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b)
                for (int c = 0; c < n; ++c)
                    rhs(a) += C2.symbols[a][b][c].evaluate(q) * Xp(b) * Yp(c);
        rep.connection_residual =
            std::max(rep.connection_residual, (lhs - rhs).cwiseAbs().maxCoeff());
    }

    rep.isometry = rep.pullback_residual <= tol;
    rep.respects_connection = rep.connection_residual <= std::max(tol, 1e-6);
    return rep;
}

} // namespace gradiometer
