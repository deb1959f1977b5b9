#pragma once

#include <array>
#include <functional>
#include <memory>
#include <string>

#include "ncdl/kernels.hpp"

namespace ncdl {

// ---- operator fields ----

// Descriptor -> operator on a given transversal. Characters are 1x1 operators (the scalar).
struct OperatorField {
    std::function<OpPtr(const OrbitDescriptor&)> provider;
    bool adjoint = false;

    OpPtr at(const OrbitDescriptor& d) const;
};

OperatorField field_adjoint(const OperatorField& f);

// ---- coherent states ----

// r^{1/4} e^{2πisρ} η(√r (s + α/r)), η(s) = 2^{1/4} e^{-πs²}. Throws SizingError when the grid
// does not contain six standard deviations of |η|² around the centre.
CVec coherent_vector(double r, double alpha, double rho, const Grid1D& g);

// Discrete L² inner product ⟨x, y⟩ = h Σ conj(x) y.
cd grid_inner(const CVec& x, const CVec& y, double h);

struct CoherentQuad {
    Grid1D alpha, rho;
};

// (1/r) Σ h(α,ρ) Δα Δρ P_{α,ρ}, with hvals(ia, ir) sampled at the quadrature nodes.
// Low-rank form, exact up to the quadrature: meant for small grids.
OpPtr sigma_coherent_dense(const Eigen::MatrixXcd& hvals, const CoherentQuad& quad, double r, const Grid1D& g);

// Same operator as a band: kernel (1/r) Σ_α Δα g_α(s) g_α(t) H_α(s - t), H_α(δ) = Σ_ρ h e^{2πiρδ} Δρ,
// truncated to |s - t| ≤ band. For character fields of a symbol with s-support M_s, band = M_s
// only drops ρ-quadrature aliasing.
OpPtr sigma_coherent_band(const Eigen::MatrixXcd& hvals, const CoherentQuad& quad, double r, const Grid1D& g,
                          double band);

// ---- tiles of the 2-D transversal (G5,3 and G5,6) ----

struct TileFamily {
    ScenarioId scenario = ScenarioId::G53_gen;
    double nu = 0;
    double W = 1, H = 1;  // tile width in a, height in b
    double w_exp = 0.5, h_exp = 0.75;
    int N = 0;            // index range |i|, |j| ≤ N used by checks and dumps

    double eps() const;        // ν^{1/2} (G5,3) or ν^{3/4} (G5,6) at the default exponents; ν W in general
    double sqrt_eps() const { return nu * H; }
    double x(int j) const { return j * W; }
    double column_offset(int j) const { return scenario == ScenarioId::G56_gen ? -x(j) * x(j) / 2 : 0.0; }
    double y(int i, int j) const { return i * H + column_offset(j); }
    std::array<double, 3> p(int i, int j) const { return {nu * i * H, nu * j * W, 0.0}; }
    int col(double a) const;
    int row(double a, double b) const;
    // t·g_{ij}⁻¹·p_{ij}: the frozen functional seen from a point t of the tile
    QVec q_lim(int i, int j, double a, double b) const;
    double displacement_bound() const;  // 3ε^{1/2} (G5,3), 4ε^{1/2} (G5,6)
};

// Default exponents: G5,3 W = ν^{-1/2}, H = ν^{-3/4}; G5,6 W = ν^{-1/4}, H = ν^{-5/8}.
TileFamily tiling(ScenarioId sc, double nu, int N, double w_exp = -1, double h_exp = -1);

struct TilingReport {
    bool partition_exact = false;
    bool base_points_exact = false;
    double base_point_float_residual = 0;
    double max_displacement = 0;
    double displacement_bound = 0;
    int tiles = 0;
    int samples = 0;
    std::string detail;
    bool ok() const { return partition_exact && base_points_exact && max_displacement <= displacement_bound; }
};

// Rational-arithmetic partition and base-point checks over |i|,|j| ≤ N plus sampled displacements.
TilingReport check_tiling(const TileFamily& T, int samples_per_tile = 16);

enum class TileMode { Twisted, Convolution };

std::shared_ptr<TileIndex> tile_index(const TileFamily& T, const Grid2D& g);

// Σ_ij M_V φ(p_ij) M_U with the field of the symbol F (kernel level).
OpPtr sigma_tiled(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                  std::shared_ptr<const TileIndex> idx = nullptr);
// Negative control: input masks dropped (each input feeds every tile whose V reaches it).
OpPtr sigma_tiled_sabotage(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                           std::shared_ptr<const TileIndex> idx = nullptr);
// Σ_ij (M_U T_ij M_V − M_V T_ij M_U); its norm equals ‖σ(φ)* − σ(φ*)‖.
OpPtr tiled_adjoint_defect(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                           std::shared_ptr<const TileIndex> idx = nullptr);
// The unmasked field operator of tile (i, j) on a window around the tile.
OpPtr tile_operator(const TileFamily& T, const Symbol& F, int i, int j, TileMode mode, double h, int64_t cap);

// ---- G5,4 ----

struct Interval {
    double lo = 0, hi = 0;
    bool contains(double x) const { return lo <= x && x < hi; }
};

struct G54Frame {
    double beta = 0, mu = 0, nu = 0, r = 0, d = 0, t = 0, R = 0;
    Interval Ip, Im, I2p, I2m;
};

// R = r^{-R_exp}; requires d = -2βr > 0.
G54Frame g54_frame(double beta, double mu, double nu, double R_exp = 0.25);
OpPtr sigma_g54_dpos(const G54Frame& f, const Symbol& F, const Grid1D& g);

struct G54Lattice {
    double beta = 0, r = 0, eps = 0, spacing = 0;
    int jmin = 0, jmax = 0;
    double t(int j) const { return j * spacing; }
    double qB(int j) const { return beta + j * j * eps; }
    double qC(int j) const;
    int cell(double s) const { return static_cast<int>(std::floor(s / spacing)); }
};

// σ(φ)* − σ(φ*) for the two-term construction, with φ* the pointwise adjoint field.
OpPtr g54_dpos_adjoint_defect(const G54Frame& f, const Symbol& F, const Grid1D& g);

// ε = r^{eps_exp}; cells cover the grid.
G54Lattice g54_lattice(double beta, double r, const Grid1D& g, double eps_exp = 0.5);
// Terms j with input mask I_j and output mask I_{j-1} ∪ I_j ∪ I_{j+1}.
OpPtr sigma_g54_dzero(const G54Lattice& L, const Symbol& F, const Grid1D& g);
OpPtr g54_dzero_adjoint_defect(const G54Lattice& L, const Symbol& F, const Grid1D& g);
// The j-th limit operator, unmasked.
OpPtr g54_cell_operator(const G54Lattice& L, int j, const Symbol& F, const Grid1D& g);
// sup over sampled s in cell j of ‖exp((t_j+s)A)·p − exp(sA)·q_j‖₁
double g54_cell_displacement(const G54Lattice& L, int j, double mu, double nu, int samples = 64);

}  // namespace ncdl
