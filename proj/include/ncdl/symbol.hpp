#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string_view>

#include "ncdl/strata.hpp"

namespace ncdl {

using cd = std::complex<double>;

enum class ScenarioId { H1_gen, G52_gen, G53_gen, G53_mid, G54_gen, G56_gen };

inline constexpr std::array<ScenarioId, 6> kAllScenarios = {ScenarioId::H1_gen,  ScenarioId::G52_gen,
                                                            ScenarioId::G53_gen, ScenarioId::G53_mid,
                                                            ScenarioId::G54_gen, ScenarioId::G56_gen};

std::string_view scenario_name(ScenarioId s);
std::optional<ScenarioId> parse_scenario(std::string_view s);
int s_dim(ScenarioId s);
int q_dim(ScenarioId s);
GroupId scenario_group(ScenarioId s);

// q-coordinates on the polarization (unused trailing slots are zero):
//   H1_gen (q_Y, q_Z); G52_gen (q_A, q_B, q_Z, q_T); G53_gen / G56_gen (ρ, μ, ν) on span{C,U,V};
//   G53_mid (q_B, q_C, q_U, q_V); G54_gen (q_B, q_C, q_U, q_V) in the adapted frame.
using QVec = std::array<double, 4>;

// Separable symbol u(s) w(q): u(s) = ∏ (1 - (s_i/M_s)²)³ on the cube, w(q) = exp(-π |q/q_scale|²).
struct Symbol {
    ScenarioId scenario = ScenarioId::G53_gen;
    double M_s = 1.0;
    double q_scale = 1.0;
    double amplitude = 1.0;  // 0 gives the zero symbol

    int sdim() const { return s_dim(scenario); }
    int qdim() const { return q_dim(scenario); }
    double u1(double x) const {
        const double t = x / M_s;
        if (std::abs(t) >= 1) return 0.0;
        const double v = 1 - t * t;
        return v * v * v;
    }
    double u(const double* s) const;
    double w(const QVec& q) const;
    double eval(const double* s, const QVec& q) const { return u(s) * w(q); }

    // per-coordinate Lipschitz constant of w (ℓ¹ combination)
    double w_lipschitz() const;
    double dominator_l1() const;   // ‖ψ‖₁, ψ = amplitude |u|
    double lipschitz_l1() const;   // ‖φ‖₁, φ = Lip(w) ψ
};

Symbol default_symbol(ScenarioId s, double M_s = 1.0, double q_scale = 1.0);
Symbol zero_symbol(ScenarioId s, double M_s = 1.0);

// Restricted coadjoint action t·ℓ|_p for a descriptor (see the header comment of each case
// in symbol.cpp). t has s_dim coordinates. For H1_gen and G52_gen the kernels evaluate the
// q-point at the midpoint of output and input, which is what t is taken to be.
QVec restricted_coadjoint(ScenarioId sc, const double* t, const OrbitDescriptor& d);

// The same for a raw functional p = (ρ, μ, ν) on p = span{C,U,V} (G53_gen, G56_gen).
QVec restricted_p(ScenarioId sc, const double* t, const std::array<double, 3>& p);

// G5,4 generic functional β B_ℓ* + c C* + μ U* + ν V* moved by exp(s A_ℓ).
QVec g54_q(double s, double beta, double c, double r, double mu, double nu);

// Phase of the 2-D induced kernels as θ1 δ + θ2 δ² in δ = b_out - b_in, for the
// input's a-coordinate and the q-point at the input.
struct Phase2 {
    double th1 = 0, th2 = 0;
};
Phase2 kernel_phase(ScenarioId sc, const QVec& q_in, double a_in);

// Kernel of π_descriptor(F) at (output s, input t).
cd kernel_value(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const double* s, const double* t);

// ∫ F(s, q) e^{-2πi <freq, s>} ds over the s-support, midpoint rule with n nodes per axis.
cd char_value(const Symbol& F, const QVec& q, const double* freq, int n = 4000);

}  // namespace ncdl
