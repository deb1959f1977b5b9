#pragma once

#include <string>
#include <utility>
#include <vector>

#include "ncdl/groups.hpp"

namespace ncdl {

// Layer Γ_level of a group, numbered as in the orbit decompositions:
// H_n {1,0}; F4 {2,1,0}; F5 {3,2,1,0}; G52 {1,0}; G53 {2,1,0};
// G54 {2 = generic, 1 = Γ₁¹, 0 = Γ₀¹}; G56 {3 = generic, 2,1,0 = the F4 layers}.
struct LayerId {
    GroupId group = GroupId::H1;
    int level = 0;
    bool operator==(const LayerId&) const = default;
};

int top_level(GroupId g);
std::string layer_name(const LayerId& l);

// params per layer:
//   H_n Γ1: (λ)                      H_n Γ0: (x_1..x_n, y_1..y_n)
//   G52 Γ1: (β, μ, ν)                G52 Γ0: (α, β, ρ)
//   G53 Γ2: (ν)   Γ1: (ρ, μ)         Γ0: (α, β, ρ)
//   G54 Γ2: (β, μ, ν)  Γ1: (λ)       Γ0: (α, β)
//   G56 Γ3: (ν), then the F4 layers on (α, β, ρ, μ)
//   F4 Γ2: (β₀, μ)  Γ1: (ρ)  Γ0: (α, β)
//   F5 Γ3: (β', ρ', ν)  Γ2: (β₀, μ)  Γ1: (ρ)  Γ0: (α, β)
struct OrbitDescriptor {
    LayerId layer;
    std::vector<double> params;
};

inline constexpr double kSnap = 1e-12;

OrbitDescriptor classify(GroupId g, const DualPoint& ell);

// A canonical point of the orbit described by d (inverse of classify up to the orbit).
DualPoint representative(const OrbitDescriptor& d);

// Q = 2br − c² in the frame A_ℓ = μ̃A + ν̃B, B_ℓ = −ν̃A + μ̃B.
double invariant_q54(const DualPoint& ell);

// Exact asymptotics of closed-form sequences x_k = Σ c_i k^{p_i} ρ_i^k with ρ_i > 0.
struct Series {
    struct Term {
        double coef = 0;
        double power = 0;
        double base = 1;
    };
    std::vector<Term> terms;

    static Series constant(double c) { return Series{{{c, 0, 1}}}; }
    static Series geometric(double c, double ratio) { return Series{{{c, 0, ratio}}}; }
    static Series power(double c, double p) { return Series{{{c, p, 1}}}; }

    double at(double k) const;
    Series operator*(const Series& o) const;
    Series operator+(const Series& o) const;
    Series operator*(double s) const;
    Series operator-() const { return (*this) * -1.0; }

    // +inf / -inf / finite; terms with identical growth are merged first.
    double limit() const;
    // Sign of x_k for all large k (0 if identically zero).
    int eventual_sign() const;
};

struct SequenceSpec {
    GroupId group = GroupId::G53;
    int level = 0;  // layer the generated descriptors live in
    // Parameter series. Their meaning depends on the layer:
    //   G53/G56 generic, H_n generic: {ν} (resp. {λ})
    //   G53 middle: {ρ, μ}
    //   G52/G54 generic: {β, r} with constant direction (dir_mu, dir_nu)
    std::vector<Series> params;
    double dir_mu = 1.0;
    double dir_nu = 0.0;
    int count = 10;

    OrbitDescriptor at(double k) const;
};

enum class LimitKind { TwoOrbits, HalfPlane, FullCharacterPlane, LayerUnion, SingleAffinePlane, SingleOrbit, Infinity };

struct LimitSetDescriptor {
    LimitKind kind = LimitKind::Infinity;
    GroupId group = GroupId::G53;
    double sqrt_d = 0;             // TwoOrbits
    double beta_inf = 0;           // HalfPlane threshold / SingleAffinePlane B*-offset (G52)
    double rho = 0;                // SingleAffinePlane C*-offset (G53 middle)
    std::array<double, 2> a_inf{}; // A*_∞ as (A*, B*) coefficients
    std::array<double, 2> b_inf{}; // B*_∞
    std::vector<LayerId> layers;   // LayerUnion
    OrbitDescriptor orbit;         // SingleOrbit
};

struct SpecViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

bool diverges(const SequenceSpec& seq);
LimitSetDescriptor limit_set(const SequenceSpec& seq);

// Deterministic centered lattice in L; box is the half-width of the sampled region.
std::vector<OrbitDescriptor> sample_limit_reps(const LimitSetDescriptor& L, int budget, double box = 1.5);

std::string describe(const LimitSetDescriptor& L);

}  // namespace ncdl
