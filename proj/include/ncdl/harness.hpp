#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ncdl/approximants.hpp"
#include "ncdl/spectral.hpp"

namespace ncdl {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

enum class Transition { G52_char, G53_gen_lower, G53_mid_char, G54_dpos, G54_dzero, G56_lower, H1_char, RiemannLebesgue, FellOnly };

std::string_view transition_name(Transition t);
std::optional<Transition> parse_transition(std::string_view s);

// k ↦ descriptor. The varying parameter is start·ratio^k:
//   ν (G53_gen, G56_gen), λ (H1_gen), μ (G53_mid, with ρ = fixed), r (G52_gen with β = fixed;
//   G54_gen with β = -d/(2r) for d > 0 or β = beta for the d = 0 transition).
struct SequenceConfig {
    int k_min = 1, k_max = 5;
    double start = 1, ratio = 0.25;
    double d = 1;
    double beta = 0;
    double fixed = 0;
    double dir_mu = 1, dir_nu = 0;
};

struct ExperimentConfig {
    ScenarioId scenario = ScenarioId::G53_gen;
    Transition transition = Transition::G53_gen_lower;
    SequenceConfig seq;
    double M_s = 1, q_scale = 1;
    bool zero_symbol = false;
    GridPolicy grid;
    NormOptions norm;
    std::string output;

    TileMode tile_mode = TileMode::Twisted;
    double tile_w_exp = -1, tile_h_exp = -1;  // -1: default tiling exponents
    bool coherent_beta_limit = true;           // evaluate the character field at β_∞ rather than β_k
    bool sabotage = false;                     // tiled transitions only: drop the input masks
    bool refine = true;                        // measure δ_grid by halving h when the cap allows
    bool timing = false;                       // wall_ms stays 0 unless set, so CSVs are reproducible
    double decrease_ratio = 0.5;
    bool monotone = false;                     // also require diff_norm to decrease row by row
    double fell_tol = 0.05;
    int fell_budget = 16;

    Symbol symbol() const;
    int kmax() const { return seq.k_max; }
};

// JSON text; unknown keys and type mismatches are ConfigErrors.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string default_config_json(ScenarioId sc, Transition t);

OrbitDescriptor descriptor_at(const ExperimentConfig& c, int k);
double param_at(const ExperimentConfig& c, int k);

struct Row {
    int k = 0;
    double param = 0;
    double pi_norm = 0, sigma_norm = 0, diff_norm = 0, bound = 0, delta_grid = 0, box = 0, h = 0;
    int iters = 0;
    double residual = 0, wall_ms = 0;
    bool skipped = false;
    bool delta_carried = false;
    std::string note;
    // certification extras (NaN when not measured)
    double field_sup = 0, sigma_const = 0, adjoint_defect = 0, adjoint_threshold = 0;
};

struct Verdict {
    std::string name;
    bool pass = false;
    std::string detail;
};

struct ConvergenceReport {
    std::vector<Row> rows;
    std::vector<Verdict> verdicts;
    bool nonconverged = false;
    std::string failure;  // message of a numeric failure
    bool passed() const;
};

std::string to_csv(const ConvergenceReport& r);
std::string summary(const std::vector<Verdict>& v);

// with_extras also measures the field sup norm and the adjoint defect per row
ConvergenceReport run_convergence(const ExperimentConfig& c, bool with_extras = false);

struct FellReport {
    double pi_norm = 0;    // at k_max
    double limit_sup = 0;  // over the sampled limit representations
    int reps = 0;
    double gap = 0;        // (pi_norm - limit_sup) / limit_sup
    std::string limit;
    std::vector<Verdict> verdicts;
    bool nonconverged = false;
    bool passed() const;
};

FellReport run_fell(const ExperimentConfig& c);

struct CertificationReport {
    ConvergenceReport conv;
    std::vector<Verdict> clauses;
    bool nonconverged = false;
    bool passed() const;
};

CertificationReport certify(const ExperimentConfig& c);

// 0 pass, 1 verdict failure, 3 numeric non-convergence (2 is reserved for config errors)
int exit_code(bool passed, bool nonconverged);

}  // namespace ncdl
