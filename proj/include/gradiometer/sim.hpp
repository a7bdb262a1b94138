#pragma once

// Fixed-step RK4 integration of base and lifted systems under piecewise
// constant controls; finite-difference and conjugacy validation.

#include "gradiometer/systems.hpp"

namespace gradiometer {

// Piecewise constant, right continuous control signal.
struct ControlSignal {
    std::vector<double> breakpoints;            // strictly increasing, starts at 0
    std::vector<std::vector<double>> values;    // one vector per interval

    ControlSignal() = default;
    ControlSignal(std::vector<double> t, std::vector<std::vector<double>> v)
        : breakpoints(std::move(t)), values(std::move(v)) {
        if (breakpoints.size() != values.size() || breakpoints.empty())
            throw std::invalid_argument("control signal: breakpoint/value mismatch");
        for (std::size_t i = 1; i < breakpoints.size(); ++i)
            if (!(breakpoints[i] > breakpoints[i - 1]))
                throw std::invalid_argument("control signal: breakpoints must increase");
    }

    static ControlSignal constant(std::vector<double> u) {
        return ControlSignal({0.0}, {std::move(u)});
    }

    // deterministic two-interval test signal with values in [-0.5, 0.5]^m
    static ControlSignal seeded_test_signal(int m, double duration,
                                            std::uint64_t seed = kDefaultSeed) {
        detail::SplitMix rng(seed);
        std::vector<std::vector<double>> vals(2, std::vector<double>(m));
        for (auto& v : vals)
            for (double& x : v) x = rng.uniform() - 0.5;
        return ControlSignal({0.0, duration / 2.0}, std::move(vals));
    }

    const std::vector<double>& at(double t) const {
        std::size_t i = breakpoints.size();
        while (i > 0 && breakpoints[i - 1] > t) --i;
        return values[i == 0 ? 0 : i - 1];
    }

    int channels() const { return static_cast<int>(values.front().size()); }
};

struct Trajectory {
    double step = 0.0;
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    std::vector<std::vector<double>> outputs;
};

struct GuardBoxError : std::runtime_error {
    GuardBoxError(double t, std::vector<double> state_)
        : std::runtime_error("state left the guard box at t = " + std::to_string(t)),
          time(t), state(std::move(state_)) {}
    double time;
    std::vector<double> state;
};

namespace detail {

struct Dynamics {
    const VectorField* drift;
    const std::vector<VectorField>* inputs;
    const std::vector<Expression>* outputs;
    const Chart* chart;
};

inline Dynamics dynamics_of(const ControlSystem& S) {
    return {&S.drift, &S.inputs, &S.outputs, &S.chart};
}
inline Dynamics dynamics_of(const LiftedSystem& S) {
    return {&S.drift, &S.inputs, &S.outputs, &S.chart};
}

inline std::vector<double> rhs(const Dynamics& dyn, const std::vector<double>& x,
                               const std::vector<double>& u) {
    std::vector<double> dx = dyn.drift->evaluate(x);
    for (std::size_t j = 0; j < dyn.inputs->size(); ++j) {
        if (u[j] == 0.0) continue;
        auto gj = (*dyn.inputs)[j].evaluate(x);
        for (std::size_t a = 0; a < dx.size(); ++a) dx[a] += u[j] * gj[a];
    }
    return dx;
}

inline Trajectory integrate_impl(const Dynamics& dyn, std::vector<double> x0,
                                 const ControlSignal& u, double h, double T,
                                 double guard_scale) {
    if (h <= 0.0) throw std::invalid_argument("step must be positive");
    if (static_cast<int>(x0.size()) != dyn.chart->dim())
        throw std::invalid_argument("initial state dimension mismatch");
    if (u.channels() != static_cast<int>(dyn.inputs->size()))
        throw std::invalid_argument("control channel count mismatch");

    // guard box: guard_scale x chart box, centered on the box
    const int k = dyn.chart->dim();
    std::vector<Interval> guard(k);
    for (int a = 0; a < k; ++a) {
        const Interval& iv = dyn.chart->box(a);
        double mid = 0.5 * (iv.lo + iv.hi), half = 0.5 * (iv.hi - iv.lo);
        guard[a] = {mid - guard_scale * half, mid + guard_scale * half};
    }

    const int steps = static_cast<int>(std::llround(T / h));
    Trajectory traj;
    traj.step = h;
    auto push = [&](double t, const std::vector<double>& x) {
        traj.times.push_back(t);
        traj.states.push_back(x);
        std::vector<double> y(dyn.outputs->size());
        for (std::size_t j = 0; j < y.size(); ++j) y[j] = (*dyn.outputs)[j].evaluate(x);
        traj.outputs.push_back(std::move(y));
    };
    push(0.0, x0);

    std::vector<double> x = std::move(x0);
    for (int s = 0; s < steps; ++s) {
        double t = s * h;
        const auto& uc = u.at(t);
        auto k1 = rhs(dyn, x, uc);
        std::vector<double> tmp(k);
        for (int a = 0; a < k; ++a) tmp[a] = x[a] + 0.5 * h * k1[a];
        auto k2 = rhs(dyn, tmp, u.at(t + 0.5 * h));
        for (int a = 0; a < k; ++a) tmp[a] = x[a] + 0.5 * h * k2[a];
        auto k3 = rhs(dyn, tmp, u.at(t + 0.5 * h));
        for (int a = 0; a < k; ++a) tmp[a] = x[a] + h * k3[a];
        auto k4 = rhs(dyn, tmp, u.at(t + h));
        for (int a = 0; a < k; ++a)
            x[a] += h / 6.0 * (k1[a] + 2.0 * k2[a] + 2.0 * k3[a] + k4[a]);
        double tn = (s + 1) * h;
        for (int a = 0; a < k; ++a)
            if (x[a] < guard[a].lo || x[a] > guard[a].hi) throw GuardBoxError(tn, x);
        push(tn, x);
    }
    return traj;
}

} // namespace detail

constexpr double kGuardScale = 10.0;

inline Trajectory integrate(const ControlSystem& S, std::vector<double> x0,
                            const ControlSignal& u, double h = 1e-3, double T = 1.0,
                            double guard_scale = kGuardScale) {
    return detail::integrate_impl(detail::dynamics_of(S), std::move(x0), u, h, T, guard_scale);
}

inline Trajectory integrate(const LiftedSystem& S, std::vector<double> x0,
                            const ControlSignal& u, double h = 1e-3, double T = 1.0,
                            double guard_scale = kGuardScale) {
    return detail::integrate_impl(detail::dynamics_of(S), std::move(x0), u, h, T, guard_scale);
}

// Checks v(t) of the prolonged system with v(0) = 0 against the
// finite-difference quotient (x_{u + eps*delta}(t) - x_u(t)) / eps.
inline double variational_fd_check(const ControlSystem& S, const std::vector<double>& x0,
                                   const ControlSignal& u, const std::vector<double>& direction,
                                   double eps = 1e-5, double h = 1e-3, double T = 1.0) {
    const int n = S.n();
    LiftedSystem P = prolong(S);

    // prolonged signal: (u, u^p = direction)
    std::vector<std::vector<double>> pv;
    for (const auto& v : u.values) {
        std::vector<double> w = v;
        w.insert(w.end(), direction.begin(), direction.end());
        pv.push_back(std::move(w));
    }
    ControlSignal up(u.breakpoints, std::move(pv));

    std::vector<double> xp0 = x0;
    xp0.resize(2 * n, 0.0);
    Trajectory tp = integrate(P, xp0, up, h, T);

    std::vector<std::vector<double>> uv = u.values;
    for (auto& v : uv)
        for (int j = 0; j < S.m(); ++j) v[j] += eps * direction[j];
    Trajectory t0 = integrate(S, x0, u, h, T);
    Trajectory t1 = integrate(S, x0, ControlSignal(u.breakpoints, uv), h, T);

    double worst = 0.0;
    for (std::size_t s = 0; s < tp.times.size(); ++s)
        for (int a = 0; a < n; ++a) {
            double fd = (t1.states[s][a] - t0.states[s][a]) / eps;
            worst = std::max(worst, std::abs(tp.states[s][n + a] - fd));
        }
    return worst;
}

struct ConjugacyResult {
    double state_residual = 0.0;  // max_t |flat_G(x_p(t)) - x_e(t)|
    double output_residual = 0.0; // max_t output mismatch
};

// Integrates the prolonged system from (x0, v0) and the gradient extension
// from flat_G(x0, v0) with matched inputs, and measures how far flat_G is
// from intertwining the two flows.
inline ConjugacyResult conjugacy_check(const ControlSystem& S, const Metric& G,
                                       const Connection& C, const std::vector<double>& x0,
                                       const std::vector<double>& v0, const ControlSignal& u,
                                       const ControlSignal& u_fiber, double h = 1e-3,
                                       double T = 1.0) {
    const int n = S.n();
    LiftedSystem P = prolong(S);
    LiftedSystem E = gradient_extension(S, C);

    // stacked signal (u, u^p) shared by both lifted systems
    if (u.breakpoints != u_fiber.breakpoints)
        throw std::invalid_argument("conjugacy: control signals need matching breakpoints");
    std::vector<std::vector<double>> sv;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        std::vector<double> w = u.values[i];
        w.insert(w.end(), u_fiber.values[i].begin(), u_fiber.values[i].end());
        sv.push_back(std::move(w));
    }
    ControlSignal stacked(u.breakpoints, std::move(sv));

    auto flat_point = [&](const std::vector<double>& xv) {
        std::vector<double> xe(2 * n);
        auto Gm = G.evaluate(std::span<const double>(xv.data(), n));
        for (int a = 0; a < n; ++a) {
            xe[a] = xv[a];
            double p = 0.0;
            for (int b = 0; b < n; ++b) p += Gm[a][b] * xv[n + b];
            xe[n + a] = p;
        }
        return xe;
    };

    std::vector<double> xp0 = x0;
    xp0.insert(xp0.end(), v0.begin(), v0.end());
    Trajectory tp = integrate(P, xp0, stacked, h, T);
    Trajectory te = integrate(E, flat_point(xp0), stacked, h, T);

    ConjugacyResult res;
    for (std::size_t s = 0; s < tp.times.size(); ++s) {
        auto mapped = flat_point(tp.states[s]);
        for (int a = 0; a < 2 * n; ++a)
            res.state_residual =
                std::max(res.state_residual, std::abs(mapped[a] - te.states[s][a]));
        for (std::size_t j = 0; j < tp.outputs[s].size(); ++j)
            res.output_residual = std::max(
                res.output_residual, std::abs(tp.outputs[s][j] - te.outputs[s][j]));
    }
    return res;
}

inline void write_csv(std::ostream& os, const Trajectory& traj) {
    os << "t";
    for (std::size_t a = 0; a < traj.states.front().size(); ++a) os << ",x_" << a + 1;
    for (std::size_t j = 0; j < traj.outputs.front().size(); ++j) os << ",y_" << j + 1;
    os << "\n";
    os.precision(15);
    for (std::size_t s = 0; s < traj.times.size(); ++s) {
        os << traj.times[s];
        for (double x : traj.states[s]) os << ',' << x;
        for (double y : traj.outputs[s]) os << ',' << y;
        os << "\n";
    }
}

} // namespace gradiometer
