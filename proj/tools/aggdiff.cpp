// Command-line driver: validate | extremal | thresholds | classify | dichotomy | evolve | selftest.

#include "aggdiff/aggdiff.hpp"
#include "aggdiff/verify/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace aggdiff;

namespace {

enum Exit : int { Ok = 0, ConfigFail = 1, RegimeFail = 2, NoConverge = 3, SelftestFail = 4, Mismatch = 5 };

struct Context {
    RunConfig cfg;
    fs::path out;
};

void write_json(const fs::path& path, const json& j) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error("cannot write " + path.string());
    os << j.dump(2) << '\n';
}

json params_json(const ModelParams& p) {
    return json{{"d", p.d}, {"s", p.s}, {"m", p.m}, {"eps", p.eps}};
}

std::string kappa_tag(double k) {
    std::ostringstream os;
    os << k;
    return os.str();
}

int cmd_validate(const Context& ctx) {
    const Exponents e = derive_exponents(ctx.cfg.params);
    std::printf("regime ok for d=%d s=%.12g m=%.12g eps=%.12g\n", e.d, e.s, e.m, ctx.cfg.params.eps);
    std::printf("%-8s %.15g\n", "p", e.p);
    std::printf("%-8s %.15g\n", "a", e.a);
    std::printf("%-8s %.15g\n", "a0", e.a0);
    std::printf("%-8s %.15g\n", "b0", e.b0);
    std::printf("%-8s %.15g\n", "beta", e.beta);
    std::printf("%-8s %.15g\n", "lambda", e.lambda);
    std::printf("%-8s %.15g\n", "c_ds", e.c_ds);
    std::printf("%-8s %.15g\n", "C_hls", hls_sharp_constant(e.d, e.lambda));
    return Ok;
}

void write_profile(const Context& ctx, const ExtremalProfile& p) {
    write_csv((ctx.out / "profile.csv").string(), p.w, "w");
    json side = profile_sidecar(p, ctx.cfg.params);
    side["hls_bound"] = hls_sharp_constant(ctx.cfg.params.d, ctx.cfg.params.d - 2.0 * ctx.cfg.params.s);
    write_json(ctx.out / "profile.json", side);
}

/// Solves for W or writes the partial profile and reports exit 3.
bool solve_or_report(const Context& ctx, std::size_t n, const ExtremalOptions& opt, ExtremalProfile& prof) {
    try {
        prof = solve_extremal(ctx.cfg.params, RadialGrid(n, ctx.cfg.grid_r_max), opt);
        return true;
    } catch (const NoConvergence& ex) {
        std::fprintf(stderr, "extremal: %s (best-so-far profile written)\n", ex.what());
        write_profile(ctx, ex.best());
        return false;
    }
}

int cmd_extremal(const Context& ctx) {
    ExtremalProfile p;
    if (!solve_or_report(ctx, ctx.cfg.grid_n, ctx.cfg.extremal, p))
        return NoConverge;
    write_profile(ctx, p);
    std::printf("cstar %.12g support_radius %.12g el_residual %.3e iterations %zu\n", p.cstar, p.support_radius,
                p.el_residual, p.iterations);
    return Ok;
}

int cmd_thresholds(const Context& ctx) {
    const Exponents e = derive_exponents(ctx.cfg.params);
    ExtremalProfile p;
    if (!solve_or_report(ctx, ctx.cfg.grid_n, ctx.cfg.extremal, p))
        return NoConverge;
    write_profile(ctx, p);
    const Thresholds t = compute_thresholds(p, e);
    write_csv((ctx.out / "threshold_profile.csv").string(), threshold_profile(p, e), "u");
    write_json(ctx.out / "thresholds.json", json(t));
    std::printf("x_star %.12g g_at_xstar %.12g cstar %.12g\n", t.x_star, t.g_at_xstar, t.cstar);
    return Ok;
}

ExtremalOptions dichotomy_options(const RunConfig& c) {
    ExtremalOptions o = c.extremal;
    o.tol_res = c.dichotomy_tol_res;
    o.tol_j = c.dichotomy_tol_j;
    return o;
}

int cmd_classify(const Context& ctx) {
    const Exponents e = derive_exponents(ctx.cfg.params);
    ExtremalProfile p;
    if (!solve_or_report(ctx, ctx.cfg.grid_n, ctx.cfg.extremal, p))
        return NoConverge;
    const Thresholds t = compute_thresholds(p, e);
    const RadialField u0 = ctx.cfg.input.empty() ? scale_values(threshold_profile(p, e), ctx.cfg.kappa)
                                                 : read_csv(ctx.cfg.input);
    const ReducedKernel k = build_kernel(u0.grid(), e.lambda);
    const Classification c = classify(u0, t, e, k, ctx.cfg.classify_tol);
    write_json(ctx.out / "classification.json", json(c));
    std::printf("verdict %s product/x_star %.9g energy_lhs/g %.9g\n", to_string(c.verdict), c.product / c.x_star,
                c.energy_lhs / c.g_at_xstar);
    return Ok;
}

/// Threshold profile on the dichotomy grid, padded with empty cells.
bool dichotomy_profile(const Context& ctx, const Exponents& e, RadialField& W, Thresholds& t) {
    ExtremalProfile p;
    if (!solve_or_report(ctx, ctx.cfg.dichotomy_n, dichotomy_options(ctx.cfg), p))
        return false;
    t = compute_thresholds(p, e);
    const RadialField thr = threshold_profile(p, e);
    const auto cells = static_cast<std::size_t>(std::ceil(ctx.cfg.dichotomy_pad * thr.support_end()));
    W = pad(thr, std::max(cells, thr.size()));
    return true;
}

void write_trace(const Context& ctx, const std::string& stem, const SimTrace& tr, const json& extra) {
    std::ofstream os(ctx.out / (stem + ".csv"), std::ios::binary);
    if (!os)
        throw Error("cannot write trace " + stem);
    write_trace_csv(os, tr);
    json footer = trace_footer(tr);
    footer["params"] = params_json(ctx.cfg.params);
    for (auto it = extra.begin(); it != extra.end(); ++it)
        footer[it.key()] = it.value();
    write_json(ctx.out / (stem + ".json"), footer);
}

int cmd_evolve(const Context& ctx) {
    const Exponents e = derive_exponents(ctx.cfg.params);
    RadialField u0;
    json extra;
    if (!ctx.cfg.input.empty()) {
        u0 = read_csv(ctx.cfg.input);
        extra["input"] = ctx.cfg.input;
    } else {
        RadialField W;
        Thresholds t;
        if (!dichotomy_profile(ctx, e, W, t))
            return NoConverge;
        u0 = scale_values(W, ctx.cfg.kappa);
        extra["kappa"] = ctx.cfg.kappa;
        extra["x_star"] = t.x_star;
    }
    const ReducedKernel k = build_kernel(u0.grid(), e.lambda, ctx.cfg.params.eps);
    const SimTrace tr = run(u0, k, e, ctx.cfg.sim);
    write_trace(ctx, "trace", tr, extra);
    write_csv((ctx.out / "final_state.csv").string(), tr.final_state, "u");
    std::printf("outcome %s t_final %.9g steps %zu mass_drift %.3e\n", to_string(tr.outcome.kind), tr.t_final,
                tr.steps, tr.max_mass_drift);
    return Ok;
}

int cmd_dichotomy(const Context& ctx) {
    const Exponents e = derive_exponents(ctx.cfg.params);
    RadialField W;
    Thresholds t;
    if (!dichotomy_profile(ctx, e, W, t))
        return NoConverge;
    const ReducedKernel k = build_kernel(W.grid(), e.lambda, ctx.cfg.params.eps);
    json rows = json::array();
    bool mismatch = false;
    for (double kappa : ctx.cfg.kappas) {
        const RadialField u0 = scale_values(W, kappa);
        const Classification c = classify(u0, t, e, k, ctx.cfg.classify_tol);
        const SimTrace tr = run(u0, k, e, ctx.cfg.sim);
        const BarrierReport b = barrier_check(tr, t, e);
        double linf_max = 0.0;
        for (const TraceRow& r : tr.rows)
            linf_max = std::max(linf_max, r.linf);
        const bool bounded = tr.outcome.kind == OutcomeKind::CompletedBounded && linf_max <= 2.0 * tr.linf0;
        const bool blew_up = tr.outcome.kind == OutcomeKind::BlowupDetected;
        json match = nullptr;
        if (c.verdict == Verdict::GlobalExistence)
            match = bounded && b.holds;
        else if (c.verdict == Verdict::FiniteTimeBlowup)
            match = blew_up && b.holds;
        if (match.is_boolean() && !match.get<bool>())
            mismatch = true;
        json extra{{"kappa", kappa}, {"x_star", t.x_star}, {"classification", c}, {"barrier", b}};
        write_trace(ctx, "trace_kappa_" + kappa_tag(kappa), tr, extra);
        rows.push_back(json{{"kappa", kappa},
                            {"verdict", to_string(c.verdict)},
                            {"outcome", to_string(tr.outcome.kind)},
                            {"t_detect", blew_up ? json(tr.outcome.t_detect) : json(nullptr)},
                            {"linf_max_over_initial", linf_max / tr.linf0},
                            {"barrier", b},
                            {"match", match}});
        std::printf("kappa %-6s verdict %-16s outcome %-16s%s\n", kappa_tag(kappa).c_str(), to_string(c.verdict),
                    to_string(tr.outcome.kind),
                    match.is_boolean() ? (match.get<bool>() ? "" : "  MISMATCH") : "  (no prediction)");
    }
    write_json(ctx.out / "summary.json", json{{"thresholds", t},
                                               {"params", params_json(ctx.cfg.params)},
                                               {"grid_cells", W.size()},
                                               {"rows", rows},
                                               {"mismatch", mismatch}});
    return mismatch ? Mismatch : Ok;
}

int cmd_selftest(const Context& ctx) {
    verify::SelftestOptions opt;
    opt.seed = ctx.cfg.seed;
    opt.fields = ctx.cfg.selftest_fields;
    opt.kernel_gain = ctx.cfg.corrupt_kernel;
    const auto results = verify::run_selftest(ctx.cfg.params, opt);
    json arr = json::array();
    bool ok = true;
    for (const auto& r : results) {
        std::printf("%s %-22s %s\n", r.passed ? "PASS" : "FAIL", r.name.c_str(), r.detail.c_str());
        arr.push_back(json{{"name", r.name}, {"passed", r.passed}, {"detail", r.detail}});
        ok = ok && r.passed;
    }
    write_json(ctx.out / "selftest.json", json{{"seed", opt.seed}, {"checks", arr}, {"passed", ok}});
    return ok ? Ok : SelftestFail;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Aggregation-diffusion numerical laboratory"};
    std::string command;
    std::string config;
    std::string out;
    app.add_option("command", command, "validate|extremal|thresholds|classify|dichotomy|evolve|selftest")
        ->required()
        ->check(CLI::IsMember({"validate", "extremal", "thresholds", "classify", "dichotomy", "evolve", "selftest"}));
    app.add_option("--config", config, "key=value configuration file")->required();
    app.add_option("--out", out, "output directory (overrides output.dir)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? Ok : ConfigFail;
    }

    try {
        Context ctx;
        ctx.cfg = load_config(config);
        ctx.out = out.empty() ? fs::path(ctx.cfg.out_dir) : fs::path(out);
        if (command != "validate")
            fs::create_directories(ctx.out);
        if (command == "validate")
            return cmd_validate(ctx);
        if (command == "extremal")
            return cmd_extremal(ctx);
        if (command == "thresholds")
            return cmd_thresholds(ctx);
        if (command == "classify")
            return cmd_classify(ctx);
        if (command == "dichotomy")
            return cmd_dichotomy(ctx);
        if (command == "evolve")
            return cmd_evolve(ctx);
        return cmd_selftest(ctx);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return ConfigFail;
    } catch (const RegimeError& e) {
        std::fprintf(stderr, "regime error: %s\n", e.what());
        return RegimeFail;
    } catch (const NotConverged& e) {
        std::fprintf(stderr, "not converged: %s\n", e.what());
        return NoConverge;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return ConfigFail;
    }
}
