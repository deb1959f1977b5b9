#include "ncdl/approximants.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "ncdl/rational.hpp"

namespace ncdl {

namespace {

constexpr double kPi = std::numbers::pi;

// E diag(w) E^H with the grid weight h folded into E^H
class LowRankOperator final : public LinearOperator {
public:
    LowRankOperator(Eigen::MatrixXcd E, Eigen::VectorXcd w, double h) : E_(std::move(E)), w_(std::move(w)), h_(h) {}
    int64_t size() const override { return E_.rows(); }
    void apply(const cd* x, cd* y) const override { run(x, y, false); }
    void apply_adjoint(const cd* x, cd* y) const override { run(x, y, true); }
    std::string kind() const override { return "low-rank"; }
    Eigen::MatrixXcd dense() const override { return h_ * (E_ * w_.asDiagonal() * E_.adjoint()); }

private:
    void run(const cd* x, cd* y, bool adj) const {
        Eigen::Map<const Eigen::VectorXcd> vx(x, E_.rows());
        Eigen::Map<Eigen::VectorXcd> vy(y, E_.rows());
        Eigen::VectorXcd c = h_ * (E_.adjoint() * vx);
        c = (adj ? w_.conjugate() : w_).cwiseProduct(c);
        vy.noalias() = E_ * c;
    }
    Eigen::MatrixXcd E_;
    Eigen::VectorXcd w_;
    double h_;
};

double gauss_window(double r) { return 3.5 / std::sqrt(r); }  // e^{-πr x²} < 1e-16 beyond

}  // namespace

// ---- fields ----

OpPtr OperatorField::at(const OrbitDescriptor& d) const {
    OpPtr A = provider(d);
    if (!adjoint) return A;
    return std::make_shared<AdjointOperator>(A);
}

OperatorField field_adjoint(const OperatorField& f) {
    OperatorField g = f;
    g.adjoint = !f.adjoint;
    return g;
}

// ---- coherent states ----

CVec coherent_vector(double r, double alpha, double rho, const Grid1D& g) {
    if (!(r > 0)) throw ContractViolation("coherent_vector: r must be positive");
    const double c = -alpha / r;
    const double sigma = 1.0 / (2 * std::sqrt(kPi * r));
    if (c - 6 * sigma < g.lo || c + 6 * sigma > g.hi())
        throw SizingError("coherent_vector: grid does not contain the 6-sigma window of the state");
    const double amp = std::pow(r, 0.25) * std::pow(2.0, 0.25);
    CVec v(g.n);
    for (int i = 0; i < g.n; ++i) {
        const double s = g.x(i);
        const double x = s - c;
        v[i] = amp * std::exp(-kPi * r * x * x) * std::polar(1.0, 2 * kPi * s * rho);
    }
    return v;
}

cd grid_inner(const CVec& x, const CVec& y, double h) {
    cd s = 0;
    for (size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s * h;
}

OpPtr sigma_coherent_dense(const Eigen::MatrixXcd& hvals, const CoherentQuad& quad, double r, const Grid1D& g) {
    const int na = quad.alpha.n, nr = quad.rho.n;
    if (hvals.rows() != na || hvals.cols() != nr) throw ContractViolation("sigma_coherent_dense: hvals shape");
    Eigen::MatrixXcd E(g.n, static_cast<int64_t>(na) * nr);
    Eigen::VectorXcd w(static_cast<int64_t>(na) * nr);
    const double scale = quad.alpha.h * quad.rho.h / r;
    for (int ia = 0; ia < na; ++ia)
        for (int ir = 0; ir < nr; ++ir) {
            const int64_t col = static_cast<int64_t>(ia) * nr + ir;
            const CVec v = coherent_vector(r, quad.alpha.x(ia), quad.rho.x(ir), g);
            for (int i = 0; i < g.n; ++i) E(i, col) = v[i];
            w(col) = hvals(ia, ir) * scale;
        }
    return std::make_shared<LowRankOperator>(std::move(E), std::move(w), g.h);
}

OpPtr sigma_coherent_band(const Eigen::MatrixXcd& hvals, const CoherentQuad& quad, double r, const Grid1D& g,
                          double band) {
    const int na = quad.alpha.n, nr = quad.rho.n;
    if (hvals.rows() != na || hvals.cols() != nr) throw ContractViolation("sigma_coherent_band: hvals shape");
    if (!(r > 0)) throw ContractViolation("sigma_coherent_band: r must be positive");
    const int B = std::min(static_cast<int>(std::floor(band / g.h + 1e-9)), g.n - 1);
    BandOperator op(g.n, B);
    const double amp = std::pow(r, 0.25) * std::pow(2.0, 0.25);
    const double win = gauss_window(r);
    CVec H(2 * B + 1);
    std::vector<double> gv;
    for (int ia = 0; ia < na; ++ia) {
        const double alpha = quad.alpha.x(ia);
        const double c = -alpha / r;
        const int ilo = std::max(0, static_cast<int>(std::ceil((c - win - g.lo) / g.h - 0.5)));
        const int ihi = std::min(g.n - 1, static_cast<int>(std::floor((c + win - g.lo) / g.h - 0.5)));
        if (ilo > ihi) continue;
        bool any = false;
        for (int m = -B; m <= B; ++m) {
            cd acc = 0;
            for (int ir = 0; ir < nr; ++ir) {
                const cd hv = hvals(ia, ir);
                if (hv == cd(0)) continue;
                acc += hv * std::polar(1.0, 2 * kPi * quad.rho.x(ir) * m * g.h);
            }
            H[m + B] = acc * quad.rho.h;
            any = any || acc != cd(0);
        }
        if (!any) continue;
        gv.resize(ihi - ilo + 1);
        for (int i = ilo; i <= ihi; ++i) {
            const double x = g.x(i) - c;
            gv[i - ilo] = amp * std::exp(-kPi * r * x * x);
        }
        const double wa = quad.alpha.h / r;
        for (int i = ilo; i <= ihi; ++i) {
            const double gi = wa * gv[i - ilo] * g.h;
            for (int j = std::max(ilo, i - B); j <= std::min(ihi, i + B); ++j)
                op.at(i, j) += gi * gv[j - ilo] * H[i - j + B];
        }
    }
    op.finalize();
    return std::make_shared<BandOperator>(std::move(op));
}

// ---- tiles ----

double TileFamily::eps() const { return nu * W; }

int TileFamily::col(double a) const { return static_cast<int>(std::floor(a / W)); }

int TileFamily::row(double a, double b) const {
    return static_cast<int>(std::floor((b - column_offset(col(a))) / H));
}

QVec TileFamily::q_lim(int i, int j, double a, double) const {
    const auto pij = p(i, j);
    if (scenario == ScenarioId::G56_gen) return {pij[0] + pij[1] * (a - x(j)), pij[1], 0, 0};
    return {pij[0], pij[1], 0, 0};
}

double TileFamily::displacement_bound() const { return (scenario == ScenarioId::G56_gen ? 4.0 : 3.0) * sqrt_eps(); }

TileFamily tiling(ScenarioId sc, double nu, int N, double w_exp, double h_exp) {
    if (sc != ScenarioId::G53_gen && sc != ScenarioId::G56_gen)
        throw ContractViolation("tiling: only G53_gen and G56_gen have tile families");
    if (!(nu > 0 && nu < 1)) throw ContractViolation("tiling: need 0 < nu < 1");
    if (N < 1) throw ContractViolation("tiling: need N >= 1");
    TileFamily T;
    T.scenario = sc;
    T.nu = nu;
    T.N = N;
    T.w_exp = w_exp >= 0 ? w_exp : (sc == ScenarioId::G53_gen ? 0.5 : 0.25);
    T.h_exp = h_exp >= 0 ? h_exp : (sc == ScenarioId::G53_gen ? 0.75 : 0.625);
    T.W = std::pow(nu, -T.w_exp);
    T.H = std::pow(nu, -T.h_exp);
    return T;
}

TilingReport check_tiling(const TileFamily& T, int samples_per_tile) {
    TilingReport rep;
    rep.displacement_bound = T.displacement_bound();
    const Rational W = Rational::from_double(T.W), H = Rational::from_double(T.H), nu = Rational::from_double(T.nu);
    const bool g56 = T.scenario == ScenarioId::G56_gen;
    auto Y = [&](int j) { return g56 ? -(W * j) * (W * j) / Rational(2) : Rational(0); };
    std::ostringstream why;
    bool part = Rational(0) < W && Rational(0) < H;
    bool base = true;
    double float_res = 0;
    for (int j = -T.N; j <= T.N && part; ++j) {
        // columns abut: end of column j is the start of column j+1
        if (!(W * j + W == W * (j + 1))) {
            part = false;
            why << "column gap at j=" << j << "; ";
        }
        for (int i = -T.N; i <= T.N; ++i) {
            const Rational lo = Y(j) + H * i, hi = lo + H;
            if (!(hi == Y(j) + H * (i + 1))) {
                part = false;
                why << "row gap at (" << i << "," << j << "); ";
                break;
            }
            // base point g_{ij} = (x_j, y_ij) moves p_k = (0,0,ν) to p_ij + (0,0,ν)
            const Rational x = W * j, y = lo;
            const Rational q0 = g56 ? nu * y + nu * x * x / Rational(2) : nu * y;
            const Rational q1 = nu * x;
            const Rational p0 = nu * H * i, p1 = nu * W * j;
            if (!(q0 == p0 && q1 == p1)) {
                base = false;
                why << "base point mismatch at (" << i << "," << j << "); ";
            }
            const double t[2] = {T.x(j), T.y(i, j)};
            const QVec qf = restricted_p(T.scenario, t, {0, 0, T.nu});
            const auto pf = T.p(i, j);
            float_res = std::max({float_res, std::abs(qf[0] - pf[0]), std::abs(qf[1] - pf[1]), std::abs(qf[2] - T.nu)});
        }
    }
    // sampled points: the floor lookup agrees with the exact tile, and the displacement is bounded
    const int side = std::max(1, static_cast<int>(std::round(std::sqrt(samples_per_tile))));
    double disp = 0;
    int samples = 0;
    for (int j = -T.N; j <= T.N; ++j)
        for (int i = -T.N; i <= T.N; ++i)
            for (int u = 0; u < side; ++u)
                for (int v = 0; v < side; ++v) {
                    const double fa = (u + 0.5) / side, fb = (v + 0.5) / side;
                    const double a = T.x(j) + fa * T.W, b = T.y(i, j) + fb * T.H;
                    ++samples;
                    const Rational ar = Rational::from_double(a), br = Rational::from_double(b);
                    const Rational lo = Y(j) + H * i;
                    const bool inside = W * j <= ar && ar < W * (j + 1) && lo <= br && br < lo + H;
                    if (!inside || T.col(a) != j || T.row(a, b) != i) {
                        part = false;
                        why << "lookup mismatch near (" << i << "," << j << "); ";
                    }
                    const double t[2] = {a, b};
                    const QVec qt = restricted_p(T.scenario, t, {0, 0, T.nu});
                    const QVec ql = T.q_lim(i, j, a, b);
                    double d = 0;
                    for (int c = 0; c < 3; ++c) d += std::abs(qt[c] - ql[c]);
                    disp = std::max(disp, d);
                }
    rep.partition_exact = part;
    rep.base_points_exact = base;
    rep.base_point_float_residual = float_res;
    rep.max_displacement = disp;
    rep.tiles = (2 * T.N + 1) * (2 * T.N + 1);
    rep.samples = samples;
    rep.detail = why.str().substr(0, 400);
    return rep;
}

std::shared_ptr<TileIndex> tile_index(const TileFamily& T, const Grid2D& g) {
    return std::make_shared<TileIndex>(g, T.W, T.H, [T](int j) { return T.column_offset(j); });
}

namespace {

NodeTerm tile_term(const TileFamily& T, const Symbol& F, int i, int j, double a, double b, TileMode mode) {
    const QVec q = T.q_lim(i, j, a, b);
    NodeTerm t;
    t.D = F.w(q);
    t.ti = i;
    t.tj = j;
    if (mode == TileMode::Twisted) {
        const Phase2 ph = kernel_phase(T.scenario, q, a);
        t.th1 = ph.th1;
        t.th2 = ph.th2;
        const double xj = T.x(j), nu = T.nu;
        // conjugation by a function of b within the column, aligning the frozen phase at the base point
        if (T.scenario == ScenarioId::G53_gen) {
            t.th1 += kPi * nu * xj * xj;
        } else {
            t.th1 += -2 * kPi * (nu * xj * (b - T.y(i, j)) + nu * xj * xj * xj / 6);
            t.th2 += -kPi * nu * xj;
        }
    }
    return t;
}

// rows of column jo met by the b-band [anchor - H, anchor + 2H) (same arithmetic as Structured2D)
std::pair<int, int> band_rows(const TileFamily& T, double anchor, int jo) {
    const double Y = T.column_offset(jo);
    return {static_cast<int>(std::floor((anchor - T.H - Y) / T.H)),
            static_cast<int>(std::ceil((anchor + 2 * T.H - Y) / T.H)) - 1};
}

std::function<double(double, double)> stencil(const Symbol& F) {
    return [F](double da, double db) {
        const double s[2] = {da, db};
        return F.u(s);
    };
}

}  // namespace

OpPtr sigma_tiled(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                  std::shared_ptr<const TileIndex> idx) {
    if (!idx) idx = tile_index(T, g);
    const TileIndex* ix = idx.get();
    TermFn terms = [T, F, mode, ix](int ia, int ib, double a, double b, std::vector<NodeTerm>& out) {
        const int j = ix->col(ia), i = ix->row(ia, ib);
        NodeTerm t = tile_term(T, F, i, j, a, b, mode);
        if (t.D == 0.0) return;
        t.radius = 1;
        t.anchor = T.y(i, j);
        out.push_back(t);
    };
    return std::make_shared<Structured2D>(g, band_radius(F.M_s, g.h), stencil(F), std::move(terms), idx);
}

OpPtr sigma_tiled_sabotage(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                           std::shared_ptr<const TileIndex> idx) {
    if (!idx) idx = tile_index(T, g);
    const TileIndex* ix = idx.get();
    TermFn terms = [T, F, mode, ix](int ia, int ib, double a, double b, std::vector<NodeTerm>& out) {
        const int jn = ix->col(ia), in = ix->row(ia, ib);
        const double yn = T.y(in, jn);
        for (int j = jn - 2; j <= jn + 2; ++j) {
            const double Y = T.column_offset(j);
            const int i0 = static_cast<int>(std::floor((yn - 3 * T.H - Y) / T.H));
            const int i1 = static_cast<int>(std::ceil((yn + 3 * T.H - Y) / T.H));
            for (int i = i0; i <= i1; ++i) {
                NodeTerm t = tile_term(T, F, i, j, a, b, mode);
                if (t.D == 0.0) continue;
                t.radius = 1;
                t.anchor = T.y(i, j);
                out.push_back(t);
            }
        }
    };
    return std::make_shared<Structured2D>(g, band_radius(F.M_s, g.h), stencil(F), std::move(terms), idx);
}

OpPtr tiled_adjoint_defect(const TileFamily& T, const Symbol& F, const Grid2D& g, TileMode mode,
                           std::shared_ptr<const TileIndex> idx) {
    if (!idx) idx = tile_index(T, g);
    const TileIndex* ix = idx.get();
    TermFn terms = [T, F, mode, ix](int ia, int ib, double a, double b, std::vector<NodeTerm>& out) {
        const int jn = ix->col(ia), in = ix->row(ia, ib);
        // − M_V T_n M_U
        NodeTerm own = tile_term(T, F, in, jn, a, b, mode);
        own.D = -own.D;
        own.radius = 1;
        own.anchor = T.y(in, jn);
        if (own.D != 0.0) out.push_back(own);
        // + M_U T_ij M_V for every tile ij whose V contains this node's tile
        const double Yn = T.column_offset(jn);
        for (int j = jn - 1; j <= jn + 1; ++j) {
            const double Y = T.column_offset(j);
            const int i0 = static_cast<int>(std::floor((Yn + (in - 3) * T.H - Y) / T.H));
            const int i1 = static_cast<int>(std::ceil((Yn + (in + 3) * T.H - Y) / T.H));
            for (int i = i0; i <= i1; ++i) {
                const auto [r0, r1] = band_rows(T, T.y(i, j), jn);
                if (in < r0 || in > r1) continue;
                NodeTerm t = tile_term(T, F, i, j, a, b, mode);
                if (t.D == 0.0) continue;
                t.radius = 0;
                out.push_back(t);
            }
        }
    };
    return std::make_shared<Structured2D>(g, band_radius(F.M_s, g.h), stencil(F), std::move(terms), idx);
}

OpPtr tile_operator(const TileFamily& T, const Symbol& F, int i, int j, TileMode mode, double h, int64_t cap) {
    const double M = F.M_s;
    const double a_lo = T.x(j) - T.W - 2 * M, a_hi = T.x(j + 1) + T.W + 2 * M;
    const double b_lo = T.y(i, j) - T.H - 2 * M, b_hi = T.y(i + 1, j) + T.H + 2 * M;
    Grid2D g;
    g.h = h;
    g.a0 = std::floor(a_lo / h) * h;
    g.b0 = std::floor(b_lo / h) * h;
    g.na = static_cast<int>(std::ceil((a_hi - g.a0) / h));
    const int nb = static_cast<int>(std::ceil((b_hi - g.b0) / h));
    if (static_cast<int64_t>(g.na) * nb > cap) throw SizingError("tile_operator: window exceeds the grid cap");
    g.off.assign(g.na, 0);
    g.len.assign(g.na, nb);
    g.start.resize(g.na);
    for (int k = 0; k < g.na; ++k) g.start[k] = static_cast<int64_t>(k) * nb;
    TermFn terms = [T, F, i, j, mode](int, int, double a, double b, std::vector<NodeTerm>& out) {
        NodeTerm t = tile_term(T, F, i, j, a, b, mode);
        if (t.D != 0.0) out.push_back(t);
    };
    return std::make_shared<Structured2D>(g, band_radius(M, h), stencil(F), std::move(terms));
}

// ---- G5,4 ----

G54Frame g54_frame(double beta, double mu, double nu, double R_exp) {
    G54Frame f;
    f.beta = beta;
    f.mu = mu;
    f.nu = nu;
    f.r = std::hypot(mu, nu);
    if (!(f.r > 0)) throw ContractViolation("g54_frame: r must be positive");
    f.d = -2 * beta * f.r;
    if (!(f.d > 0)) throw ContractViolation("g54_frame: d = -2 beta r must be positive (wrong branch)");
    f.t = std::sqrt(f.d) / f.r;
    f.R = std::pow(f.r, -R_exp);
    f.Ip = {f.t - f.R, f.t + f.R};
    f.Im = {-f.t - f.R, -f.t + f.R};
    f.I2p = {f.t - 2 * f.R, f.t + 2 * f.R};
    f.I2m = {-f.t - 2 * f.R, -f.t + 2 * f.R};
    return f;
}

OpPtr sigma_g54_dpos(const G54Frame& f, const Symbol& F, const Grid1D& g) {
    const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
    const double sd = std::sqrt(f.d);
    return std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int io, int ii) -> cd {
        const double s = g.x(io), t = g.x(ii);
        const double delta = s - t;
        const double u = F.u(&delta);
        if (u == 0.0) return 0.0;
        double v = 0;
        if (f.Ip.contains(t) && f.I2p.contains(s)) v += F.w(g54_q(t - f.t, 0, sd, 0, 0, 0));
        if (f.Im.contains(t) && f.I2m.contains(s)) v += F.w(g54_q(t + f.t, 0, -sd, 0, 0, 0));
        return u * v;
    }));
}

OpPtr g54_dpos_adjoint_defect(const G54Frame& f, const Symbol& F, const Grid1D& g) {
    const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
    const double sd = std::sqrt(f.d);
    // the translated limit kernels are real, so T*(s, t) = u(t - s) w(q(s - t_k))
    return std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int io, int ii) -> cd {
        const double s = g.x(io), t = g.x(ii);
        const double delta = t - s;
        const double u = F.u(&delta);
        if (u == 0.0) return 0.0;
        double v = 0;
        const double wp = F.w(g54_q(s - f.t, 0, sd, 0, 0, 0)), wm = F.w(g54_q(s + f.t, 0, -sd, 0, 0, 0));
        v += wp * ((f.I2p.contains(s) && f.Ip.contains(t) ? 1.0 : 0.0) - (f.Ip.contains(s) && f.I2p.contains(t) ? 1.0 : 0.0));
        v += wm * ((f.I2m.contains(s) && f.Im.contains(t) ? 1.0 : 0.0) - (f.Im.contains(s) && f.I2m.contains(t) ? 1.0 : 0.0));
        return -u * v;
    }));
}

OpPtr g54_dzero_adjoint_defect(const G54Lattice& L, const Symbol& F, const Grid1D& g) {
    const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
    return std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int io, int ii) -> cd {
        const double s = g.x(io), t = g.x(ii);
        const int js = L.cell(s), jt = L.cell(t);
        if (std::abs(js - jt) > 1) return 0.0;
        const double delta = t - s;
        const double u = F.u(&delta);
        if (u == 0.0) return 0.0;
        // Σ_j T_j*(s,t) [1{s ∈ I_j} 1{t ∈ out_j} − 1{t ∈ I_j} 1{s ∈ out_j}]
        auto tstar = [&](int j) { return F.w(g54_q(s - L.t(j), L.qB(j), L.qC(j), 0, 0, 0)); };
        return u * (tstar(js) - tstar(jt));
    }));
}

double G54Lattice::qC(int j) const { return j * std::sqrt(2 * eps * r); }

G54Lattice g54_lattice(double beta, double r, const Grid1D& g, double eps_exp) {
    if (!(r > 0)) throw ContractViolation("g54_lattice: r must be positive");
    G54Lattice L;
    L.beta = beta;
    L.r = r;
    L.eps = std::pow(r, eps_exp);
    L.spacing = std::sqrt(2 * L.eps / r);
    L.jmin = L.cell(g.lo);
    L.jmax = L.cell(g.hi());
    return L;
}

OpPtr sigma_g54_dzero(const G54Lattice& L, const Symbol& F, const Grid1D& g) {
    const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
    return std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int io, int ii) -> cd {
        const double s = g.x(io), t = g.x(ii);
        const int j = L.cell(t);
        if (std::abs(L.cell(s) - j) > 1) return 0.0;
        const double delta = s - t;
        const double u = F.u(&delta);
        if (u == 0.0) return 0.0;
        return u * F.w(g54_q(t - L.t(j), L.qB(j), L.qC(j), 0, 0, 0));
    }));
}

OpPtr g54_cell_operator(const G54Lattice& L, int j, const Symbol& F, const Grid1D& g) {
    const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
    return std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int io, int ii) -> cd {
        const double s = g.x(io), t = g.x(ii);
        const double delta = s - t;
        const double u = F.u(&delta);
        if (u == 0.0) return 0.0;
        return u * F.w(g54_q(t - L.t(j), L.qB(j), L.qC(j), 0, 0, 0));
    }));
}

double g54_cell_displacement(const G54Lattice& L, int j, double mu, double nu, int samples) {
    double worst = 0;
    for (int k = 0; k < samples; ++k) {
        const double s = (k + 0.5) / samples * L.spacing;
        const QVec a = g54_q(L.t(j) + s, L.beta, 0, L.r, mu, nu);
        const QVec b = g54_q(s, L.qB(j), L.qC(j), 0, 0, 0);
        double d = 0;
        for (int c = 0; c < 4; ++c) d += std::abs(a[c] - b[c]);
        worst = std::max(worst, d);
    }
    return worst;
}

}  // namespace ncdl
