// Command line front end: characterize, compat, simulate, observability.
// Exit codes: 0 = locally gradient / pass, 1 = not gradient / fail,
// 2 = inconclusive, 3 = usage or input error.

#include <chrono>
#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "gradiometer/io.hpp"

namespace {

using namespace gradiometer;

struct CommonFlags {
    std::string path;
    int depth = 3;
    int samples = 64;
    std::uint64_t seed = kDefaultSeed;
    bool seed_given = false;
    double tol = 1e-8;
    double sim_tol = 1e-6;
    std::string out;
    std::string box;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("path", f.path, "system description (JSON)")->required();
    cmd->add_option("--depth", f.depth, "word depth bound")->capture_default_str();
    cmd->add_option("--samples", f.samples, "sample points per check")->capture_default_str();
    cmd->add_option("--seed", f.seed, "sampling seed")
        ->capture_default_str()
        ->each([&f](const std::string&) { f.seed_given = true; });
    cmd->add_option("--tol", f.tol, "identity tolerance")->capture_default_str();
    cmd->add_option("--sim-tol", f.sim_tol, "simulation tolerance")->capture_default_str();
    cmd->add_option("--out", f.out, "write the JSON report here");
    cmd->add_option("--box", f.box, "override chart box, e.g. \"-1:1,-1:1\"");
}

void resolve_seed(CommonFlags& f) {
    if (f.seed_given) return;
    if (const char* env = std::getenv("GRADIOMETER_SEED")) {
        char* end = nullptr;
        unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0') f.seed = v;
    }
}

std::vector<Interval> parse_box_flag(const std::string& s, int n) {
    std::vector<Interval> box;
    std::size_t pos = 0;
    while (pos < s.size()) {
        std::size_t comma = s.find(',', pos);
        std::string part = s.substr(pos, comma == std::string::npos ? comma : comma - pos);
        std::size_t colon = part.find(':');
        if (colon == std::string::npos)
            throw std::runtime_error("--box: expected lo:hi pairs separated by commas");
        box.push_back({std::stod(part.substr(0, colon)), std::stod(part.substr(colon + 1))});
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    if (static_cast<int>(box.size()) == 1 && n > 1) box.assign(n, box[0]);
    if (static_cast<int>(box.size()) != n)
        throw std::runtime_error("--box: expected 1 or dim intervals");
    return box;
}

SystemDescription load_with_flags(const CommonFlags& f) {
    SystemDescription desc = load_system_file(f.path);
    if (f.box.empty()) return desc;
    // expressions only hold coordinate indices, so swapping boxes is safe
    auto box = parse_box_flag(f.box, desc.system.chart.dim());
    desc.system.chart.set_box(box);
    desc.system.drift.chart.set_box(box);
    for (auto& g : desc.system.inputs) g.chart.set_box(box);
    desc.connection.chart.set_box(box);
    if (desc.metric) desc.metric->chart.set_box(box);
    return desc;
}

void emit(const nlohmann::json& j, const std::string& out) {
    if (out.empty()) {
        std::cout << j.dump(2) << "\n";
    } else {
        std::ofstream os(out);
        if (!os) throw std::runtime_error("cannot write " + out);
        os << j.dump(2) << "\n";
    }
}

nlohmann::json flags_json(const CommonFlags& f) {
    return {{"version", kToolVersion}, {"seed", f.seed},       {"depth", f.depth},
            {"samples", f.samples},    {"tolerance", f.tol},   {"sim_tolerance", f.sim_tol},
            {"input", f.path}};
}

int cmd_characterize(CommonFlags& f) {
    resolve_seed(f);
    SystemDescription desc = load_with_flags(f);
    CharacterizeOptions opt;
    opt.depth = f.depth;
    opt.samples = f.samples;
    opt.seed = f.seed;
    opt.tol.identity = f.tol;
    opt.tol.simulation = f.sim_tol;

    auto t0 = std::chrono::steady_clock::now();
    RealizationReport rep = characterize(desc.system, desc.connection, opt);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    emit(report_json(rep, opt.tol, f.samples, secs), f.out);
    switch (rep.verdict) {
        case Verdict::LocallyGradient: return 0;
        case Verdict::NotGradient: return 1;
        case Verdict::Inconclusive: return 2;
    }
    return 3;
}

int cmd_compat(CommonFlags& f) {
    resolve_seed(f);
    SystemDescription desc = load_with_flags(f);

    auto t0 = std::chrono::steady_clock::now();
    CompatReport a = check_condition_a(desc.system, desc.connection, std::min(f.depth, 2), f.tol,
                                       f.samples, f.seed);
    CompatReport b = check_condition_b(desc.system, desc.connection, std::min(f.depth, 1), f.tol,
                                       f.samples, f.seed);
    BasisCompatReport basis = check_compatibility_on_basis(desc.system, desc.connection, f.depth,
                                                           f.tol, f.samples, f.seed);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    auto cond = [](const CompatReport& r) {
        nlohmann::json j{{"passed", r.ok},
                         {"worst_residual", r.worst_residual},
                         {"identities_checked", r.identities_checked},
                         {"depth", r.depth}};
        if (!r.ok) {
            j["failing_identity"] = r.failing_identity;
            j["witness"] = r.witness;
        }
        return j;
    };
    nlohmann::json j = flags_json(f);
    j["condition_a"] = cond(a);
    j["condition_b"] = cond(b);
    j["basis"] = {{"passed", basis.ok}, {"s0_full_rank", basis.s0_full_rank}};
    if (!basis.error.empty()) j["basis"]["error"] = basis.error;
    bool inconclusive = !basis.s0_full_rank;
    bool pass = a.ok && b.ok && basis.ok;
    j["verdict"] = inconclusive ? "inconclusive" : (pass ? "compatible" : "incompatible");
    j["timing_seconds"] = secs;
    emit(j, f.out);
    return inconclusive ? 2 : (pass ? 0 : 1);
}

int cmd_simulate(CommonFlags& f, const std::string& signal_path, const std::string& csv_path,
                 double h, double T) {
    resolve_seed(f);
    SystemDescription desc = load_with_flags(f);
    const ControlSystem& S = desc.system;
    const int n = S.n();

    ControlSignal u = ControlSignal::seeded_test_signal(S.m(), T, f.seed);
    if (!signal_path.empty()) {
        std::ifstream in(signal_path);
        if (!in) throw std::runtime_error("cannot open " + signal_path);
        nlohmann::json js;
        in >> js;
        u = ControlSignal(js.at("breakpoints").get<std::vector<double>>(),
                          js.at("values").get<std::vector<std::vector<double>>>());
    }

    std::vector<double> x0(n), v0(n);
    detail::SplitMix rng(f.seed ^ 0x5109a7b3ULL);
    for (int a = 0; a < n; ++a) {
        const Interval& iv = S.chart.box(a);
        x0[a] = 0.5 * (iv.lo + iv.hi);
        v0[a] = rng.uniform() - 0.5;
    }

    auto t0 = std::chrono::steady_clock::now();
    nlohmann::json j = flags_json(f);
    j["step"] = h;
    j["duration"] = T;

    LiftedSystem P = prolong(S);
    std::vector<double> xp0 = x0;
    xp0.insert(xp0.end(), v0.begin(), v0.end());
    ControlSignal up = ControlSignal::seeded_test_signal(S.m(), T, f.seed ^ 0x9d2c5680ULL);
    std::vector<std::vector<double>> stacked_vals;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        auto w = u.values[i];
        w.insert(w.end(), up.values[i].begin(), up.values[i].end());
        stacked_vals.push_back(std::move(w));
    }
    Trajectory traj = integrate(P, xp0, ControlSignal(u.breakpoints, stacked_vals), h, T);

    if (!csv_path.empty()) {
        std::ofstream os(csv_path);
        if (!os) throw std::runtime_error("cannot write " + csv_path);
        write_csv(os, traj);
        j["csv"] = csv_path;
    }

    int code = 0;
    if (desc.metric) {
        ConjugacyResult conj =
            conjugacy_check(S, *desc.metric, desc.connection, x0, v0, u, up, h, T);
        double r = std::max(conj.state_residual, conj.output_residual);
        j["conjugacy"] = {{"state_residual", conj.state_residual},
                          {"output_residual", conj.output_residual},
                          {"passed", r <= f.sim_tol}};
        if (r > f.sim_tol) code = 1;
        j["verdict"] = code == 0 ? "conjugate" : "not-conjugate";
    } else {
        j["verdict"] = "integrated";
        j["note"] = "no metric in the connection block, conjugacy check skipped";
    }
    j["final_state"] = traj.states.back();
    j["timing_seconds"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    emit(j, f.out);
    return code;
}

int cmd_observability(CommonFlags& f) {
    resolve_seed(f);
    SystemDescription desc = load_with_flags(f);

    auto t0 = std::chrono::steady_clock::now();
    RankReport rep = observability_rank(desc.system, f.depth, kRankTol, f.samples, f.seed);
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    nlohmann::json j = flags_json(f);
    j["expected_rank"] = rep.expected;
    j["rank_at_samples"] = rep.rank_at_sample;
    j["uniform"] = rep.uniform;
    j["full_rank"] = rep.full;
    j["verdict"] = rep.full ? "observable" : "not-observable";
    j["timing_seconds"] = secs;
    emit(j, f.out);
    return rep.full ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"gradient control system analysis"};
    app.require_subcommand(1);

    CommonFlags fc, fo, fm, fs;
    auto* characterize = app.add_subcommand(
        "characterize", "full gradient-realization pipeline with verdict and exit code");
    add_common(characterize, fc);

    auto* compat = app.add_subcommand("compat", "connection compatibility conditions");
    add_common(compat, fm);

    std::string signal_path, csv_path;
    double h = 1e-3, T = 1.0;
    auto* simulate = app.add_subcommand("simulate", "integrate and run the conjugacy check");
    add_common(simulate, fs);
    simulate->add_option("--signal", signal_path, "control signal JSON (breakpoints, values)");
    simulate->add_option("--csv", csv_path, "dump the prolonged trajectory as CSV");
    simulate->add_option("--step", h, "integration step")->capture_default_str();
    simulate->add_option("--duration", T, "integration horizon")->capture_default_str();

    auto* observability =
        app.add_subcommand("observability", "observation space rank at sample points");
    add_common(observability, fo);

    CLI11_PARSE(app, argc, argv);

    try {
        if (characterize->parsed()) return cmd_characterize(fc);
        if (compat->parsed()) return cmd_compat(fm);
        if (simulate->parsed()) return cmd_simulate(fs, signal_path, csv_path, h, T);
        if (observability->parsed()) return cmd_observability(fo);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 3;
}
