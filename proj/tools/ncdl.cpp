#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "ncdl/harness.hpp"

using namespace ncdl;

namespace {

struct Common {
    std::string config, out, scenario, transition;
    int k_max = -1;
    int64_t seed = -1;
};

Transition default_transition(ScenarioId s) {
    switch (s) {
        case ScenarioId::G52_gen: return Transition::G52_char;
        case ScenarioId::G53_gen: return Transition::G53_gen_lower;
        case ScenarioId::G53_mid: return Transition::G53_mid_char;
        case ScenarioId::G54_gen: return Transition::G54_dpos;
        case ScenarioId::G56_gen: return Transition::G56_lower;
        case ScenarioId::H1_gen: return Transition::H1_char;
    }
    return Transition::FellOnly;
}

ExperimentConfig resolve(const Common& o) {
    ExperimentConfig c;
    if (!o.config.empty()) {
        c = load_config(o.config);
    } else {
        const auto s = parse_scenario(o.scenario.empty() ? "G53_gen" : o.scenario);
        if (!s) throw ConfigError("unknown scenario '" + o.scenario + "'");
        Transition t = default_transition(*s);
        if (!o.transition.empty()) {
            const auto tt = parse_transition(o.transition);
            if (!tt) throw ConfigError("unknown transition '" + o.transition + "'");
            t = *tt;
        }
        c = parse_config(default_config_json(*s, t));
    }
    if (!o.config.empty() && !o.scenario.empty()) {
        const auto s = parse_scenario(o.scenario);
        if (!s || *s != c.scenario) throw ConfigError("--scenario disagrees with the config file");
    }
    if (o.k_max >= 0) {
        if (o.k_max < c.seq.k_min) throw ConfigError("--k-max is below sequence.k_min");
        c.seq.k_max = o.k_max;
    }
    if (o.seed >= 0) c.norm.seed = static_cast<uint64_t>(o.seed);
    if (!o.out.empty()) c.output = o.out;
    return c;
}

void emit(const ExperimentConfig& c, const std::string& csv, const std::string& text) {
    if (c.output.empty()) {
        std::cout << csv;
        std::cerr << text;
        return;
    }
    std::ofstream f(c.output, std::ios::binary);
    if (!f) throw ConfigError("cannot write '" + c.output + "'");
    f << csv;
    std::cout << text;
}

void add_common(CLI::App* sub, Common& o) {
    sub->add_option("--config", o.config, "experiment config (JSON)");
    sub->add_option("--out", o.out, "CSV output path (stdout when absent)");
    sub->add_option("--scenario", o.scenario, "H1_gen, G52_gen, G53_gen, G53_mid, G54_gen, G56_gen");
    sub->add_option("--transition", o.transition, "transition when no config is given");
    sub->add_option("--k-max", o.k_max, "last sequence index");
    sub->add_option("--seed", o.seed, "norm estimator seed");
}

}  // namespace

std::string failure_line(const std::string& f) { return f.empty() ? "" : "numeric failure: " + f + "\n"; }

int main(int argc, char** argv) {
    CLI::App app{"Norm-controlled dual limit experiments"};
    app.require_subcommand(1);
    Common o;
    auto* conv = app.add_subcommand("converge", "difference norms along a sequence");
    auto* fell = app.add_subcommand("fell", "norm at the last index against the limit set");
    auto* cert = app.add_subcommand("certify", "continuity, uniform bound, convergence and adjoint clauses");
    auto* tiles = app.add_subcommand("tiles", "dump a tile family and its exactness report");
    auto* norm = app.add_subcommand("norm", "operator norm of pi at one sequence index");
    for (auto* s : {conv, fell, cert, norm}) add_common(s, o);
    double nu = 1.0 / 16, w_exp = -1, h_exp = -1;
    int N = 2, k = 1;
    tiles->add_option("--scenario", o.scenario, "G53_gen or G56_gen")->default_str("G53_gen");
    tiles->add_option("--nu", nu, "nu in (0, 1)");
    tiles->add_option("--N", N, "index range |i|, |j| <= N");
    tiles->add_option("--w-exp", w_exp, "tile width exponent (W = nu^-w)");
    tiles->add_option("--h-exp", h_exp, "tile height exponent (H = nu^-h)");
    tiles->add_option("--out", o.out, "CSV output path");
    norm->add_option("--k", k, "sequence index");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (conv->parsed()) {
            const ExperimentConfig c = resolve(o);
            const ConvergenceReport r = run_convergence(c);
            emit(c, to_csv(r), summary(r.verdicts) + failure_line(r.failure));
            return exit_code(r.passed(), r.nonconverged);
        }
        if (cert->parsed()) {
            const ExperimentConfig c = resolve(o);
            const CertificationReport r = certify(c);
            emit(c, to_csv(r.conv), summary(r.clauses) + failure_line(r.conv.failure));
            return exit_code(r.passed(), r.nonconverged);
        }
        if (fell->parsed()) {
            const ExperimentConfig c = resolve(o);
            const FellReport r = run_fell(c);
            char buf[256];
            std::snprintf(buf, sizeof buf, "k,pi_norm,limit_sup,reps,gap\n%d,%.9g,%.9g,%d,%.9g\n", c.seq.k_max,
                          r.pi_norm, r.limit_sup, r.reps, r.gap);
            emit(c, buf, "limit set: " + r.limit + "\n" + summary(r.verdicts));
            return exit_code(r.passed(), r.nonconverged);
        }
        if (norm->parsed()) {
            const ExperimentConfig c = resolve(o);
            const Symbol F = c.symbol();
            const OrbitDescriptor d = descriptor_at(c, k);
            const Discretization X = default_box(c.scenario, d, F, c.grid);
            const NormEstimate e = op_norm(*build_operator(c.scenario, d, F, X), c.norm);
            std::printf("scenario=%s k=%d param=%.9g grid=%s\nnorm=%.9g method=%s iterations=%d residual=%.3g%s\n",
                        std::string(scenario_name(c.scenario)).c_str(), k, param_at(c, k), X.describe().c_str(),
                        e.value, e.method.c_str(), e.iterations, e.residual, e.converged ? "" : " NOT CONVERGED");
            return e.converged ? 0 : 3;
        }
        if (tiles->parsed()) {
            const auto s = parse_scenario(o.scenario.empty() ? "G53_gen" : o.scenario);
            if (!s) throw ConfigError("unknown scenario '" + o.scenario + "'");
            const TileFamily T = tiling(*s, nu, N, w_exp, h_exp);
            std::string csv = "i,j,a_lo,a_hi,b_lo,b_hi,p_rho,p_mu\n";
            char buf[256];
            for (int j = -N; j <= N; ++j)
                for (int i = -N; i <= N; ++i) {
                    const auto p = T.p(i, j);
                    std::snprintf(buf, sizeof buf, "%d,%d,%.9g,%.9g,%.9g,%.9g,%.9g,%.9g\n", i, j, T.x(j), T.x(j + 1),
                                  T.y(i, j), T.y(i + 1, j), p[0], p[1]);
                    csv += buf;
                }
            const TilingReport rep = check_tiling(T);
            std::snprintf(buf, sizeof buf,
                          "W=%.9g H=%.9g eps=%.9g tiles=%d partition_exact=%d base_points_exact=%d "
                          "max_displacement=%.6g bound=%.6g\n",
                          T.W, T.H, T.eps(), rep.tiles, rep.partition_exact, rep.base_points_exact,
                          rep.max_displacement, rep.displacement_bound);
            ExperimentConfig c;
            c.output = o.out;
            emit(c, csv, buf + rep.detail + (rep.detail.empty() ? "" : "\n"));
            return rep.ok() ? 0 : 1;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ContractViolation& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const NonConvergence& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return 3;
    } catch (const SizingError& e) {
        std::cerr << "sizing: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
