#include "ncdl/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <json.hpp>
#include <numbers>
#include <sstream>

namespace ncdl {

namespace {

using json = nlohmann::json;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct TransitionInfo {
    Transition t;
    std::string_view name;
    ScenarioId scenario;  // the scenario the transition starts from (FellOnly accepts any)
};

constexpr TransitionInfo kTransitions[] = {
    {Transition::G52_char, "G52_gen->char", ScenarioId::G52_gen},
    {Transition::G53_gen_lower, "G53_gen->mid+char", ScenarioId::G53_gen},
    {Transition::G53_mid_char, "G53_mid->char", ScenarioId::G53_mid},
    {Transition::G54_dpos, "G54_dpos", ScenarioId::G54_gen},
    {Transition::G54_dzero, "G54_dzero", ScenarioId::G54_gen},
    {Transition::G56_lower, "G56_gen->lower", ScenarioId::G56_gen},
    {Transition::H1_char, "H1_gen->char", ScenarioId::H1_gen},
    {Transition::RiemannLebesgue, "RiemannLebesgue", ScenarioId::G53_gen},
    {Transition::FellOnly, "FellOnly", ScenarioId::G53_gen},
};

bool is_tiled(Transition t) { return t == Transition::G53_gen_lower || t == Transition::G56_lower; }
bool is_coherent(Transition t) {
    return t == Transition::G52_char || t == Transition::H1_char || t == Transition::G53_mid_char;
}
bool has_sigma(Transition t) { return t != Transition::RiemannLebesgue && t != Transition::FellOnly; }

// ---- config parsing ----

template <class T>
void take(const json& obj, const char* key, T& out, const std::string& where) {
    if (!obj.contains(key)) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError("config: wrong type for '" + where + key + "'");
    }
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!obj.is_object()) throw ConfigError("config: '" + where + "' must be an object");
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("config: unknown key '" + where + it.key() + "'");
    }
}

// ---- numerics helpers ----

struct Meter {
    int iters = 0;
    double residual = 0;
    const NormOptions& opt;
    explicit Meter(const NormOptions& o) : opt(o) {}
    double operator()(const LinearOperator& A) {
        const NormEstimate e = op_norm(A, opt);
        iters += e.iterations;
        // residuals of noise-level norms (accepted by the absolute floor) say nothing
        if (e.value > 1e3 * opt.abs_floor) residual = std::max(residual, e.residual);
        if (!e.converged)
            throw NonConvergence("op_norm (" + e.method + ") did not converge: residual " + std::to_string(e.residual) +
                                 " after " + std::to_string(e.iterations) + " iterations");
        return e.value;
    }
};

Grid2D window(double a_lo, double a_hi, double b_lo, double b_hi, double h, int64_t cap) {
    Grid2D g;
    g.h = h;
    g.a0 = std::floor(a_lo / h) * h;
    g.b0 = std::floor(b_lo / h) * h;
    g.na = static_cast<int>(std::ceil((a_hi - g.a0) / h));
    const int nb = static_cast<int>(std::ceil((b_hi - g.b0) / h));
    if (static_cast<int64_t>(g.na) * nb > cap) throw SizingError("window exceeds the grid cap");
    g.off.assign(g.na, 0);
    g.len.assign(g.na, nb);
    g.start.resize(g.na);
    for (int k = 0; k < g.na; ++k) g.start[k] = static_cast<int64_t>(k) * nb;
    return g;
}

// ν = 0 kernel operator of G5,3 / G5,6 at p = (ρ, μ, 0) on a window: the kernel-level form of
// the lower-layer field, translation covariant, so a finite window under-estimates its norm.
OpPtr nu0_operator(ScenarioId sc, const Symbol& F, const std::array<double, 3>& p, const GridPolicy& pol) {
    const double M = F.M_s, R = pol.R_q * F.q_scale, C = pol.const_box * M;
    double a_lo = -C, a_hi = C;
    if (sc == ScenarioId::G56_gen && p[1] != 0) {
        const double x0 = (-R - p[0]) / p[1], x1 = (R - p[0]) / p[1];
        a_lo = std::max(a_lo, std::min(x0, x1) - M);
        a_hi = std::min(a_hi, std::max(x0, x1) + M);
        if (a_lo >= a_hi) a_lo = -M, a_hi = M;
    }
    const Grid2D g = window(a_lo, a_hi, -C, C, pol.h2, pol.cap);
    TermFn terms = [sc, F, p](int, int, double a, double b, std::vector<NodeTerm>& out) {
        const double t[2] = {a, b};
        const QVec q = restricted_p(sc, t, p);
        const double D = F.w(q);
        if (D == 0.0) return;
        const Phase2 ph = kernel_phase(sc, q, a);
        out.push_back({D, ph.th1, ph.th2, 0, 0, -1});
    };
    return std::make_shared<Structured2D>(g, band_radius(M, pol.h2),
                                          [F](double da, double db) {
                                              const double s[2] = {da, db};
                                              return F.u(s);
                                          },
                                          terms);
}

// ---- coherent transitions ----

struct CoherentSetup {
    double r = 1;
    CoherentQuad quad;
    Eigen::MatrixXcd hvals;
};

CoherentSetup coherent_setup(const ExperimentConfig& c, const Symbol& F, const OrbitDescriptor& d, double extent) {
    CoherentSetup s;
    const double M = F.M_s;
    double sign = 1, fixed = 0;
    if (c.transition == Transition::G52_char) {
        s.r = std::hypot(d.params[1], d.params[2]);
        fixed = c.coherent_beta_limit ? c.seq.fixed : d.params[0];
    } else if (c.transition == Transition::H1_char) {
        s.r = std::abs(d.params[0]);
        sign = d.params[0] > 0 ? 1 : -1;
    } else {
        s.r = std::abs(d.params[1]);
        sign = d.params[1] > 0 ? 1 : -1;
        fixed = c.coherent_beta_limit ? c.seq.fixed : d.params[0];
    }
    // α where w exceeds 1e-8 of its sup, clipped so the coherent centres -α/r stay on the grid
    const double A = std::min(2.5 * F.q_scale, s.r * extent);
    const double da = 0.1 * std::sqrt(s.r);
    const int na = std::max(1, static_cast<int>(std::ceil(2 * A / da)));
    s.quad.alpha = Grid1D::make(-na * da / 2, na * da / 2, da);
    const double dr = 1 / (4 * M);
    const int nr = static_cast<int>(std::round(40 / M / dr));
    s.quad.rho = Grid1D::make(-nr * dr / 2, nr * dr / 2, dr);
    std::vector<cd> uhat(s.quad.rho.n);
    for (int ir = 0; ir < s.quad.rho.n; ++ir) {
        const double f = s.quad.rho.x(ir);
        uhat[ir] = char_value(F, {0, 0, 0, 0}, &f, 2000);
    }
    s.hvals.resize(s.quad.alpha.n, s.quad.rho.n);
    for (int ia = 0; ia < s.quad.alpha.n; ++ia) {
        const double al = s.quad.alpha.x(ia);
        QVec q{};
        if (c.transition == Transition::G52_char) q = {-al, fixed, 0, 0};
        else if (c.transition == Transition::H1_char) q = {sign * al, 0, 0, 0};
        else q = {-sign * al, fixed, 0, 0};
        const double w = F.w(q);
        for (int ir = 0; ir < s.quad.rho.n; ++ir) s.hvals(ia, ir) = w * uhat[ir];
    }
    return s;
}

// ---- one row ----

struct RowBuild {
    Discretization X;
    OpPtr pi, sigma;
    double bound = kNaN;
    double eps_half = kNaN;  // ε_k^{1/2} where the construction has one
    // extras
    std::function<double(Meter&)> field_sup;
    double sigma_const = kNaN, sigma_slack = 1.0;
    OpPtr defect;
    double defect_threshold = kNaN;
};

RowBuild build_row(const ExperimentConfig& c, const Symbol& F, int k, const GridPolicy& pol) {
    RowBuild rb;
    const OrbitDescriptor d = descriptor_at(c, k);
    const ScenarioId sc = c.scenario;
    rb.X = default_box(sc, d, F, pol);
    rb.pi = build_operator(sc, d, F, rb.X);
    const double lip = F.lipschitz_l1();
    switch (c.transition) {
        case Transition::G53_gen_lower:
        case Transition::G56_lower: {
            const TileFamily T = tiling(sc, d.params[0], 1, c.tile_w_exp, c.tile_h_exp);
            auto idx = tile_index(T, rb.X.g2);
            rb.sigma = c.sabotage ? sigma_tiled_sabotage(T, F, rb.X.g2, c.tile_mode, idx)
                                  : sigma_tiled(T, F, rb.X.g2, c.tile_mode, idx);
            rb.eps_half = T.sqrt_eps();
            rb.bound = T.displacement_bound() * lip;
            const int64_t cap = pol.cap;
            const Grid2D& g = rb.X.g2;
            const double h = pol.h2;
            const TileMode mode = c.tile_mode;
            // deterministic subset: the 3x3 block at the origin and the tiles at the box corners
            rb.field_sup = [T, F, g, h, cap, mode](Meter& m) {
                std::vector<std::pair<int, int>> tiles;
                for (int i = -1; i <= 1; ++i)
                    for (int j = -1; j <= 1; ++j) tiles.push_back({i, j});
                const double a0 = g.a(0), a1 = g.a(g.na - 1);
                for (double a : {a0, a1}) {
                    const int ia = a == a0 ? 0 : g.na - 1;
                    for (double b : {g.b(ia, 0), g.b(ia, g.len[ia] - 1)}) tiles.push_back({T.row(a, b), T.col(a)});
                }
                double sup = 0;
                for (const auto& [i, j] : tiles) sup = std::max(sup, m(*tile_operator(T, F, i, j, mode, h, cap)));
                return sup;
            };
            rb.sigma_const = 9;
            rb.defect = tiled_adjoint_defect(T, F, rb.X.g2, c.tile_mode, idx);
            rb.defect_threshold = 2 * rb.eps_half * lip;
            break;
        }
        case Transition::G52_char:
        case Transition::H1_char:
        case Transition::G53_mid_char: {
            const auto s = std::make_shared<CoherentSetup>(coherent_setup(c, F, d, rb.X.extent()));
            rb.sigma = sigma_coherent_band(s->hvals, s->quad, s->r, rb.X.g1, F.M_s);
            const double hs = s->hvals.cwiseAbs().maxCoeff();
            rb.field_sup = [hs](Meter&) { return hs; };
            rb.sigma_const = 1;
            rb.sigma_slack = 1.05;
            const auto star = sigma_coherent_band(s->hvals.conjugate(), s->quad, s->r, rb.X.g1, F.M_s);
            rb.defect = std::make_shared<LinearCombination>(
                std::vector<OpPtr>{std::make_shared<AdjointOperator>(rb.sigma), star}, std::vector<double>{1.0, -1.0});
            rb.defect_threshold = 1e-9 * hs;
            break;
        }
        case Transition::G54_dpos: {
            const G54Frame f = g54_frame(d.params[0], d.params[1], d.params[2]);
            rb.sigma = sigma_g54_dpos(f, F, rb.X.g1);
            rb.bound = (f.r * f.R * f.R / 2 + f.r * f.R + std::abs(f.mu) + std::abs(f.nu)) * lip;
            const double sd = std::sqrt(f.d);
            rb.field_sup = [F, sd, pol](Meter& m) {
                double sup = 0;
                for (double lam : {sd, -sd}) {
                    const OrbitDescriptor e{{GroupId::G54, 1}, {lam}};
                    sup = std::max(sup, m(*build_operator(ScenarioId::G54_gen, e, F,
                                                          default_box(ScenarioId::G54_gen, e, F, pol))));
                }
                return sup;
            };
            rb.sigma_const = 2;
            rb.defect = g54_dpos_adjoint_defect(f, F, rb.X.g1);
            rb.defect_threshold = 2 * rb.bound;
            break;
        }
        case Transition::G54_dzero: {
            const double r = std::hypot(d.params[1], d.params[2]);
            const G54Lattice L = g54_lattice(d.params[0], r, rb.X.g1);
            rb.sigma = sigma_g54_dzero(L, F, rb.X.g1);
            rb.eps_half = std::sqrt(L.eps);
            rb.bound = rb.eps_half * lip;
            const Grid1D g = rb.X.g1;
            rb.field_sup = [L, F, g](Meter& m) {
                double sup = 0;
                for (int j = L.jmin; j <= L.jmax; ++j) sup = std::max(sup, m(*g54_cell_operator(L, j, F, g)));
                return sup;
            };
            rb.sigma_const = 2;
            rb.defect = g54_dzero_adjoint_defect(L, F, rb.X.g1);
            rb.defect_threshold = 2 * rb.eps_half * lip;
            break;
        }
        case Transition::RiemannLebesgue:
        case Transition::FellOnly:
            break;
    }
    return rb;
}

double diff_of(const RowBuild& rb, Meter& m) {
    if (!rb.sigma) return m(*rb.pi);
    LinearCombination D({rb.pi, rb.sigma}, {1.0, -1.0});
    return m(D);
}

std::string fmt(double x) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.9g", x);
    return buf;
}

SequenceSpec strata_sequence(const ExperimentConfig& c) {
    SequenceSpec s;
    s.count = c.seq.k_max;
    const Series geo = Series::geometric(c.seq.start, c.seq.ratio);
    switch (c.scenario) {
        case ScenarioId::G53_gen:
            s.group = GroupId::G53, s.level = 2, s.params = {geo};
            break;
        case ScenarioId::G56_gen:
            s.group = GroupId::G56, s.level = 3, s.params = {geo};
            break;
        case ScenarioId::H1_gen:
            s.group = GroupId::H1, s.level = 1, s.params = {geo};
            break;
        case ScenarioId::G53_mid:
            s.group = GroupId::G53, s.level = 1, s.params = {Series::constant(c.seq.fixed), geo};
            break;
        case ScenarioId::G52_gen:
            s.group = GroupId::G52, s.level = 1;
            s.params = {Series::constant(c.seq.fixed) + Series::geometric(c.seq.beta, c.seq.ratio), geo};
            s.dir_mu = c.seq.dir_mu, s.dir_nu = c.seq.dir_nu;
            break;
        case ScenarioId::G54_gen: {
            s.group = GroupId::G54, s.level = 2;
            const bool dpos = c.transition == Transition::G54_dpos;
            const Series beta = dpos ? Series::geometric(-c.seq.d / (2 * c.seq.start), 1 / c.seq.ratio)
                                     : Series::constant(c.seq.beta);
            s.params = {beta, geo};
            s.dir_mu = c.seq.dir_mu, s.dir_nu = c.seq.dir_nu;
            break;
        }
    }
    return s;
}

}  // namespace

// ---- public: names and config ----

std::string_view transition_name(Transition t) {
    for (const auto& i : kTransitions)
        if (i.t == t) return i.name;
    return "?";
}

std::optional<Transition> parse_transition(std::string_view s) {
    for (const auto& i : kTransitions)
        if (i.name == s) return i.t;
    return std::nullopt;
}

Symbol ExperimentConfig::symbol() const {
    return zero_symbol ? ncdl::zero_symbol(scenario, M_s) : default_symbol(scenario, M_s, q_scale);
}

ExperimentConfig parse_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text, nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    check_keys(j, {"scenario", "transition", "sequence", "symbol", "grid", "norm", "tiles", "coherent", "verdict",
                   "timing", "output"},
               "");
    ExperimentConfig c;
    std::string sc = "G53_gen", tr;
    take(j, "scenario", sc, "");
    const auto s = parse_scenario(sc);
    if (!s) throw ConfigError("config: unknown scenario '" + sc + "'");
    c.scenario = *s;
    if (!j.contains("transition")) throw ConfigError("config: 'transition' is required");
    take(j, "transition", tr, "");
    const auto t = parse_transition(tr);
    if (!t) throw ConfigError("config: unknown transition '" + tr + "'");
    c.transition = *t;
    if (c.transition != Transition::FellOnly) {
        for (const auto& i : kTransitions)
            if (i.t == c.transition && i.scenario != c.scenario)
                throw ConfigError("config: transition '" + tr + "' does not start from scenario '" + sc + "'");
    }
    if (j.contains("sequence")) {
        const json& q = j["sequence"];
        check_keys(q, {"k_min", "k_max", "start", "ratio", "d", "beta", "fixed", "dir_mu", "dir_nu"}, "sequence.");
        take(q, "k_min", c.seq.k_min, "sequence.");
        take(q, "k_max", c.seq.k_max, "sequence.");
        take(q, "start", c.seq.start, "sequence.");
        take(q, "ratio", c.seq.ratio, "sequence.");
        take(q, "d", c.seq.d, "sequence.");
        take(q, "beta", c.seq.beta, "sequence.");
        take(q, "fixed", c.seq.fixed, "sequence.");
        take(q, "dir_mu", c.seq.dir_mu, "sequence.");
        take(q, "dir_nu", c.seq.dir_nu, "sequence.");
    }
    if (j.contains("symbol")) {
        const json& q = j["symbol"];
        check_keys(q, {"M_s", "q_scale", "zero"}, "symbol.");
        take(q, "M_s", c.M_s, "symbol.");
        take(q, "q_scale", c.q_scale, "symbol.");
        take(q, "zero", c.zero_symbol, "symbol.");
    }
    if (j.contains("grid")) {
        const json& q = j["grid"];
        check_keys(q, {"h1", "h2", "R_q", "cap", "const_box", "refine"}, "grid.");
        take(q, "h1", c.grid.h1, "grid.");
        take(q, "h2", c.grid.h2, "grid.");
        take(q, "R_q", c.grid.R_q, "grid.");
        take(q, "cap", c.grid.cap, "grid.");
        take(q, "const_box", c.grid.const_box, "grid.");
        take(q, "refine", c.refine, "grid.");
    }
    if (j.contains("norm")) {
        const json& q = j["norm"];
        check_keys(q, {"tol", "abs_floor", "max_iter", "seed", "restart_seed", "method", "dense_limit", "memory_budget"}, "norm.");
        take(q, "tol", c.norm.tol, "norm.");
        take(q, "abs_floor", c.norm.abs_floor, "norm.");
        take(q, "max_iter", c.norm.max_iter, "norm.");
        take(q, "seed", c.norm.seed, "norm.");
        take(q, "restart_seed", c.norm.restart_seed, "norm.");
        take(q, "method", c.norm.method, "norm.");
        take(q, "dense_limit", c.norm.dense_limit, "norm.");
        take(q, "memory_budget", c.norm.memory_budget, "norm.");
        if (c.norm.method != "auto" && c.norm.method != "dense-svd" && c.norm.method != "lanczos" &&
            c.norm.method != "power-iteration")
            throw ConfigError("config: unknown norm.method '" + c.norm.method + "'");
    }
    if (j.contains("tiles")) {
        const json& q = j["tiles"];
        check_keys(q, {"mode", "w_exp", "h_exp", "sabotage"}, "tiles.");
        std::string mode = "twisted";
        take(q, "mode", mode, "tiles.");
        if (mode == "twisted") c.tile_mode = TileMode::Twisted;
        else if (mode == "convolution") c.tile_mode = TileMode::Convolution;
        else throw ConfigError("config: tiles.mode must be 'twisted' or 'convolution'");
        take(q, "w_exp", c.tile_w_exp, "tiles.");
        take(q, "h_exp", c.tile_h_exp, "tiles.");
        take(q, "sabotage", c.sabotage, "tiles.");
    }
    if (j.contains("coherent")) {
        const json& q = j["coherent"];
        check_keys(q, {"beta"}, "coherent.");
        std::string b = "limit";
        take(q, "beta", b, "coherent.");
        if (b != "limit" && b != "k") throw ConfigError("config: coherent.beta must be 'limit' or 'k'");
        c.coherent_beta_limit = b == "limit";
    }
    if (j.contains("verdict")) {
        const json& q = j["verdict"];
        check_keys(q, {"decrease_ratio", "monotone", "fell_tol", "fell_budget"}, "verdict.");
        take(q, "decrease_ratio", c.decrease_ratio, "verdict.");
        take(q, "monotone", c.monotone, "verdict.");
        take(q, "fell_tol", c.fell_tol, "verdict.");
        take(q, "fell_budget", c.fell_budget, "verdict.");
    }
    take(j, "timing", c.timing, "");
    take(j, "output", c.output, "");

    if (c.seq.k_max < c.seq.k_min) throw ConfigError("config: sequence.k_max < sequence.k_min");
    if (!(c.seq.start > 0) || !(c.seq.ratio > 0)) throw ConfigError("config: sequence.start and ratio must be positive");
    if (!(c.M_s > 0) || !(c.q_scale > 0)) throw ConfigError("config: symbol.M_s and q_scale must be positive");
    if (!(c.grid.h1 > 0) || !(c.grid.h2 > 0) || c.grid.cap < 1) throw ConfigError("config: grid spacings and cap");
    if (!(c.norm.tol > 0) || c.norm.max_iter < 1) throw ConfigError("config: norm.tol and norm.max_iter");
    if (c.sabotage && !is_tiled(c.transition)) throw ConfigError("config: tiles.sabotage needs a tiled transition");
    if (c.transition == Transition::G54_dpos && !(c.seq.d > 0)) throw ConfigError("config: G54_dpos needs d > 0");
    if (is_tiled(c.transition))
        for (int k = c.seq.k_min; k <= c.seq.k_max; ++k) {
            const double nu = param_at(c, k);
            if (!(nu > 0 && nu < 1)) throw ConfigError("config: tiled transitions need 0 < nu_k < 1 for every k");
        }
    if (c.fell_budget < 1) throw ConfigError("config: verdict.fell_budget must be >= 1");
    return c;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string default_config_json(ScenarioId sc, Transition t) {
    json j;
    j["scenario"] = std::string(scenario_name(sc));
    j["transition"] = std::string(transition_name(t));
    json q;
    switch (t) {
        case Transition::G53_gen_lower: q = {{"k_min", 1}, {"k_max", 5}, {"start", 1}, {"ratio", 0.25}}; break;
        case Transition::G56_lower: q = {{"k_min", 1}, {"k_max", 4}, {"start", 1}, {"ratio", 0.25}}; break;
        case Transition::G54_dpos: q = {{"k_min", 2}, {"k_max", 7}, {"start", 1}, {"ratio", 0.5}, {"d", 1}}; break;
        case Transition::G54_dzero: q = {{"k_min", 2}, {"k_max", 7}, {"start", 1}, {"ratio", 0.5}, {"beta", 0}}; break;
        case Transition::RiemannLebesgue: q = {{"k_min", 0}, {"k_max", 6}, {"start", 1}, {"ratio", 2}}; break;
        case Transition::G52_char:
            q = {{"k_min", 1}, {"k_max", 6}, {"start", 1}, {"ratio", 0.5}, {"fixed", 0.5}};
            break;
        case Transition::G53_mid_char:
            q = {{"k_min", 1}, {"k_max", 6}, {"start", 1}, {"ratio", 0.5}, {"fixed", 0.3}};
            break;
        default: q = {{"k_min", 1}, {"k_max", 6}, {"start", 1}, {"ratio", 0.5}}; break;
    }
    j["sequence"] = q;
    if (t == Transition::G56_lower) j["verdict"] = {{"monotone", true}};
    return j.dump(2) + "\n";
}

double param_at(const ExperimentConfig& c, int k) { return c.seq.start * std::pow(c.seq.ratio, k); }

OrbitDescriptor descriptor_at(const ExperimentConfig& c, int k) {
    const double p = param_at(c, k);
    const double m = c.seq.dir_mu, n = c.seq.dir_nu, dn = std::hypot(m, n);
    switch (c.scenario) {
        case ScenarioId::G53_gen: return {{GroupId::G53, 2}, {p}};
        case ScenarioId::G56_gen: return {{GroupId::G56, 3}, {p}};
        case ScenarioId::H1_gen: return {{GroupId::H1, 1}, {p}};
        case ScenarioId::G53_mid: return {{GroupId::G53, 1}, {c.seq.fixed, p}};
        case ScenarioId::G52_gen:
            return {{GroupId::G52, 1}, {c.seq.fixed + c.seq.beta * std::pow(c.seq.ratio, k), p * m / dn, p * n / dn}};
        case ScenarioId::G54_gen: {
            const double beta = c.transition == Transition::G54_dpos ? -c.seq.d / (2 * p) : c.seq.beta;
            return {{GroupId::G54, 2}, {beta, p * m / dn, p * n / dn}};
        }
    }
    throw ConfigError("descriptor_at: unknown scenario");
}

// ---- reports ----

bool ConvergenceReport::passed() const {
    if (nonconverged) return false;
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

bool FellReport::passed() const {
    if (nonconverged) return false;
    for (const auto& v : verdicts)
        if (!v.pass) return false;
    return true;
}

bool CertificationReport::passed() const {
    if (nonconverged) return false;
    for (const auto& v : clauses)
        if (!v.pass) return false;
    return true;
}

int exit_code(bool passed, bool nonconverged) { return nonconverged ? 3 : (passed ? 0 : 1); }

std::string to_csv(const ConvergenceReport& r) {
    std::string out = "k,param,pi_norm,sigma_norm,diff_norm,bound,delta_grid,box,h,iters,residual,wall_ms\n";
    for (const auto& w : r.rows) {
        out += std::to_string(w.k) + "," + fmt(w.param) + "," + fmt(w.pi_norm) + "," + fmt(w.sigma_norm) + "," +
               fmt(w.diff_norm) + "," + fmt(w.bound) + "," + fmt(w.delta_grid) + "," + fmt(w.box) + "," + fmt(w.h) +
               "," + std::to_string(w.iters) + "," + fmt(w.residual) + "," + fmt(w.wall_ms) + "\n";
    }
    return out;
}

std::string summary(const std::vector<Verdict>& v) {
    std::string out;
    for (const auto& x : v) out += (x.pass ? "PASS " : "FAIL ") + x.name + ": " + x.detail + "\n";
    return out;
}

// ---- drivers ----

ConvergenceReport run_convergence(const ExperimentConfig& c, bool with_extras) {
    ConvergenceReport rep;
    const Symbol F = c.symbol();
    double carried = kNaN;
    try {
        for (int k = c.seq.k_min; k <= c.seq.k_max; ++k) {
            Row row;
            row.k = k;
            row.param = param_at(c, k);
            const auto t0 = std::chrono::steady_clock::now();
            RowBuild rb;
            try {
                rb = build_row(c, F, k, c.grid);
            } catch (const SizingError& e) {
                row.skipped = true;
                row.note = e.what();
                row.pi_norm = row.sigma_norm = row.diff_norm = row.bound = row.delta_grid = row.box = row.h = kNaN;
                row.residual = row.wall_ms = kNaN;
                row.field_sup = row.sigma_const = row.adjoint_defect = row.adjoint_threshold = kNaN;
                rep.rows.push_back(row);
                continue;
            }
            Meter m(c.norm);
            row.pi_norm = row.sigma_norm = row.diff_norm = row.delta_grid = kNaN;
            row.field_sup = row.sigma_const = row.adjoint_defect = row.adjoint_threshold = kNaN;
            try {
                row.box = rb.X.extent();
                row.h = rb.X.h();
                row.bound = rb.bound;
                row.pi_norm = m(*rb.pi);
                if (rb.sigma) {
                    row.sigma_norm = m(*rb.sigma);
                    row.diff_norm = diff_of(rb, m);
                } else {
                    row.sigma_norm = row.diff_norm = kNaN;
                }
                // δ_grid: the change of the measured quantity when h is halved
                row.delta_grid = kNaN;
                if (c.refine) {
                    GridPolicy fine = c.grid;
                    fine.h1 /= 2;
                    fine.h2 /= 2;
                    try {
                        const RowBuild rf = build_row(c, F, k, fine);
                        const double a = rb.sigma ? row.diff_norm : row.pi_norm;
                        row.delta_grid = std::abs(a - diff_of(rf, m));
                        carried = row.delta_grid;
                    } catch (const SizingError&) {
                        row.delta_grid = std::isnan(carried) ? 0.0 : carried;
                        row.delta_carried = true;
                        row.note = std::isnan(carried) ? "refined grid exceeds the cap; delta_grid unmeasured (0)"
                                                       : "refined grid exceeds the cap; delta_grid carried from the previous row";
                    }
                } else {
                    row.delta_grid = 0;
                }
                if (with_extras && rb.sigma) {
                    row.sigma_const = rb.sigma_const * rb.sigma_slack;
                    row.adjoint_threshold = rb.defect_threshold;
                    row.field_sup = rb.field_sup(m);
                    row.adjoint_defect = m(*rb.defect);
                }
            } catch (const NonConvergence& e) {
                // keep what was measured and mark the report non-converged
                rep.nonconverged = true;
                const std::string msg = "k=" + std::to_string(k) + ": " + e.what();
                rep.failure += rep.failure.empty() ? msg : "; " + msg;
                row.note = e.what();
            }
            row.iters = m.iters;
            row.residual = m.residual;
            const auto t1 = std::chrono::steady_clock::now();
            row.wall_ms = c.timing ? std::chrono::duration<double, std::milli>(t1 - t0).count() : 0.0;
            rep.rows.push_back(row);
        }
    } catch (const NonConvergence& e) {
        rep.nonconverged = true;
        rep.failure = e.what();
    }

    // verdicts
    std::vector<const Row*> meas;
    int skipped = 0;
    for (const auto& r : rep.rows) {
        if (r.skipped) ++skipped;
        else meas.push_back(&r);
    }
    {
        std::string detail = std::to_string(meas.size()) + " of " + std::to_string(c.seq.k_max - c.seq.k_min + 1) +
                             " rows measured";
        for (const auto& r : rep.rows)
            if (r.skipped) detail += "; k=" + std::to_string(r.k) + " skipped: " + r.note;
        if (rep.nonconverged) detail += "; numeric failure: " + rep.failure;
        rep.verdicts.push_back({"rows measured", skipped == 0 && !rep.nonconverged, detail});
    }
    if (c.transition == Transition::RiemannLebesgue) {
        bool dec = meas.size() >= 2;
        std::string d;
        for (size_t i = 1; i < meas.size(); ++i) {
            const double a = meas[i - 1]->pi_norm, b = meas[i]->pi_norm;
            // strictly decreasing while positive; once the norm underflows to 0 it stays there
            if (!(b < a || (a == 0 && b == 0))) dec = false;
        }
        d = "pi_norm strictly decreasing (until exact zero)";
        rep.verdicts.push_back({"pi_norm decreasing", dec, d});
        if (!meas.empty()) {
            const double first = meas.front()->pi_norm, last = meas.back()->pi_norm;
            rep.verdicts.push_back({"pi_norm decay", last <= 0.1 * first,
                                    "pi_norm(k_max)=" + fmt(last) + " <= 0.1*pi_norm(k_min)=" + fmt(0.1 * first)});
        }
    } else if (has_sigma(c.transition)) {
        if (!std::isnan(meas.empty() ? kNaN : meas.front()->bound)) {
            bool ok = !meas.empty();
            std::string d = "diff_norm <= bound + delta_grid:";
            for (const auto* r : meas) {
                const bool p = r->diff_norm <= r->bound + r->delta_grid;
                ok = ok && p;
                d += " k=" + std::to_string(r->k) + (p ? " ok" : " exceeds (" + fmt(r->diff_norm) + " > " +
                                                                      fmt(r->bound + r->delta_grid) + ")");
            }
            rep.verdicts.push_back({"diff within bound", ok, d});
        }
        if (meas.size() >= 2) {
            const double first = meas.front()->diff_norm, last = meas.back()->diff_norm;
            rep.verdicts.push_back({"diff decrease", last <= c.decrease_ratio * first,
                                    "diff_norm(k=" + std::to_string(meas.back()->k) + ")=" + fmt(last) + " <= " +
                                        fmt(c.decrease_ratio) + "*diff_norm(k=" + std::to_string(meas.front()->k) +
                                        ")=" + fmt(c.decrease_ratio * first)});
        } else {
            rep.verdicts.push_back({"diff decrease", false, "fewer than two measured rows"});
        }
        if (c.monotone) {
            bool ok = meas.size() >= 2;
            for (size_t i = 1; i < meas.size(); ++i) ok = ok && meas[i]->diff_norm <= meas[i - 1]->diff_norm;
            rep.verdicts.push_back({"diff monotone", ok, "diff_norm non-increasing in k over measured rows"});
        }
    }
    return rep;
}

FellReport run_fell(const ExperimentConfig& c) {
    FellReport fr;
    const Symbol F = c.symbol();
    Meter m(c.norm);
    const int k = c.seq.k_max;
    try {
        const OrbitDescriptor d = descriptor_at(c, k);
        const Discretization X = default_box(c.scenario, d, F, c.grid);
        fr.pi_norm = m(*build_operator(c.scenario, d, F, X));

        bool two_sided = false;
        double sup = 0;
        int n = 0;
        if (c.seq.ratio == 1.0) {
            fr.limit = "constant sequence: its own orbit";
            sup = fr.pi_norm;
            n = 1;
            two_sided = true;
        } else {
            const SequenceSpec seq = strata_sequence(c);
            const LimitSetDescriptor L = limit_set(seq);
            fr.limit = describe(L);
            if (L.kind == LimitKind::Infinity) {
                fr.verdicts.push_back({"limit set", false, "sequence diverges: the limit set is empty"});
                return fr;
            }
            if (L.kind == LimitKind::TwoOrbits) two_sided = true;
            if (c.scenario == ScenarioId::G56_gen) {
                // lower layers through the ν = 0 kernel operators on a (ρ, μ) lattice
                const int side = std::max(1, static_cast<int>(std::round(std::sqrt(c.fell_budget))));
                for (int a = 0; a < side; ++a)
                    for (int b = 0; b < side; ++b) {
                        const double rho = side == 1 ? 0 : -1.5 + 3.0 * a / (side - 1);
                        const double mu = side == 1 ? 0 : -1.5 + 3.0 * b / (side - 1);
                        sup = std::max(sup, m(*nu0_operator(ScenarioId::G56_gen, F, {rho, mu, 0}, c.grid)));
                        ++n;
                    }
            } else if (is_coherent(c.transition)) {
                // character plane: sup |h| over the coherent quadrature lattice
                const CoherentSetup s = coherent_setup(c, F, d, X.extent());
                sup = s.hvals.cwiseAbs().maxCoeff();
                n = static_cast<int>(s.hvals.size());
            } else {
                for (const auto& rd : sample_limit_reps(L, c.fell_budget)) {
                    ++n;
                    const LayerId& ly = rd.layer;
                    if (ly.group == GroupId::G54 && ly.level == 1) {
                        sup = std::max(sup, m(*build_operator(ScenarioId::G54_gen, rd, F,
                                                              default_box(ScenarioId::G54_gen, rd, F, c.grid))));
                    } else if (ly.group == GroupId::G54 && ly.level == 0) {
                        const double f = rd.params[0];
                        sup = std::max(sup, std::abs(char_value(F, {rd.params[1], 0, 0, 0}, &f)));
                    } else if (ly.group == GroupId::G53 && ly.level == 1) {
                        sup = std::max(sup, m(*build_operator(ScenarioId::G53_mid, rd, F,
                                                              default_box(ScenarioId::G53_mid, rd, F, c.grid))));
                    } else if (ly.group == GroupId::G53 && ly.level == 0) {
                        const double f[2] = {rd.params[0], rd.params[1]};
                        sup = std::max(sup, std::abs(char_value(F, {rd.params[2], 0, 0, 0}, f, 400)));
                    } else {
                        --n;
                    }
                }
            }
        }
        fr.limit_sup = sup;
        fr.reps = n;
        fr.gap = sup > 0 ? (fr.pi_norm - sup) / sup : (fr.pi_norm == 0 ? 0.0 : INFINITY);
        if (two_sided)
            fr.verdicts.push_back({"Fell gap", std::abs(fr.gap) <= c.fell_tol,
                                   "|pi_norm - max over limit reps| / max = " + fmt(std::abs(fr.gap)) +
                                       " <= " + fmt(c.fell_tol)});
        else
            fr.verdicts.push_back({"Fell one-sided", sup <= fr.pi_norm * (1 + c.fell_tol),
                                   "sup over " + std::to_string(n) + " sampled limit reps = " + fmt(sup) +
                                       " <= (1+" + fmt(c.fell_tol) + ")*pi_norm = " +
                                       fmt(fr.pi_norm * (1 + c.fell_tol))});
    } catch (const NonConvergence& e) {
        fr.nonconverged = true;
        fr.verdicts.push_back({"Fell", false, e.what()});
    } catch (const SizingError& e) {
        fr.verdicts.push_back({"Fell", false, std::string("sizing: ") + e.what()});
    }
    return fr;
}

CertificationReport certify(const ExperimentConfig& c) {
    CertificationReport cr;
    const Symbol F = c.symbol();

    // (i) continuity: each parameter of the first descriptor moved by 1e-3, same grid
    {
        Meter m(c.norm);
        const double thr = 0.1 * F.dominator_l1();
        double worst = 0;
        bool ok = true;
        std::string d;
        try {
            const OrbitDescriptor g0 = descriptor_at(c, c.seq.k_min);
            const Discretization X = default_box(c.scenario, g0, F, c.grid);
            const OpPtr P0 = build_operator(c.scenario, g0, F, X);
            for (size_t i = 0; i < g0.params.size(); ++i) {
                OrbitDescriptor g1 = g0;
                g1.params[i] += 1e-3;
                // keep the (μ̃, ν̃) frame of G5,2 / G5,4
                if ((c.scenario == ScenarioId::G54_gen || c.scenario == ScenarioId::G52_gen) && i > 0 && g0.params[i] == 0)
                    continue;
                LinearCombination D({P0, build_operator(c.scenario, g1, F, X)}, {1.0, -1.0});
                worst = std::max(worst, m(D));
            }
            ok = worst <= thr;
            d = "max ||pi_g - pi_g'|| = " + fmt(worst) + " <= 0.1*dominator_l1 = " + fmt(thr);
        } catch (const NonConvergence& e) {
            cr.nonconverged = true;
            ok = false;
            d = e.what();
        } catch (const SizingError& e) {
            ok = false;
            d = std::string("sizing: ") + e.what();
        }
        cr.clauses.push_back({"(i) continuity", ok, d});
    }

    cr.conv = run_convergence(c, true);
    cr.nonconverged = cr.nonconverged || cr.conv.nonconverged;
    std::vector<const Row*> meas;
    for (const auto& r : cr.conv.rows)
        if (!r.skipped) meas.push_back(&r);

    // (ii) uniform boundedness
    if (has_sigma(c.transition)) {
        bool ok = !meas.empty();
        std::string d = "sigma_norm <= C*sup_field:";
        for (const auto* r : meas) {
            const bool p = r->sigma_norm <= r->sigma_const * r->field_sup;
            ok = ok && p;
            d += " k=" + std::to_string(r->k) + " " + fmt(r->sigma_norm) + (p ? " <= " : " > ") +
                 fmt(r->sigma_const) + "*" + fmt(r->field_sup);
        }
        cr.clauses.push_back({"(ii) uniform bound", ok, d});
    } else {
        cr.clauses.push_back({"(ii) uniform bound", true, "no sigma for this transition"});
    }

    // (iii) convergence
    {
        bool ok = cr.conv.passed();
        std::string d;
        for (const auto& v : cr.conv.verdicts) d += (v.pass ? "[pass] " : "[fail] ") + v.name + "; ";
        cr.clauses.push_back({"(iii) convergence", ok, d});
    }

    // (iv) adjoint compatibility
    if (has_sigma(c.transition)) {
        bool ok = !meas.empty();
        std::string d = "||sigma(phi)* - sigma(phi*)|| <= threshold:";
        for (const auto* r : meas) {
            const bool p = r->adjoint_defect <= r->adjoint_threshold;
            ok = ok && p;
            d += " k=" + std::to_string(r->k) + " " + fmt(r->adjoint_defect) + (p ? " <= " : " > ") +
                 fmt(r->adjoint_threshold);
        }
        cr.clauses.push_back({"(iv) adjoint", ok, d});
    } else {
        cr.clauses.push_back({"(iv) adjoint", true, "no sigma for this transition"});
    }
    return cr;
}

}  // namespace ncdl
