#include "ncdl/kernels.hpp"

#include <cmath>
#include <sstream>

namespace ncdl {

namespace {

void check_cap(int64_t n, int64_t cap) {
    if (n > cap)
        throw SizingError("grid of " + std::to_string(n) + " points exceeds the cap of " + std::to_string(cap));
}

bool depends_on_t(ScenarioId sc, const OrbitDescriptor& d) {
    const int lv = d.layer.level;
    switch (sc) {
        case ScenarioId::H1_gen:
        case ScenarioId::G52_gen: return lv == 1;
        case ScenarioId::G53_gen: return lv == 2;
        case ScenarioId::G56_gen: return lv >= 2;
        case ScenarioId::G53_mid: return lv == 1;
        case ScenarioId::G54_gen: return lv >= 1;
    }
    return false;
}

}  // namespace

double Discretization::extent() const {
    if (!two_d) return std::max(std::abs(g1.lo), std::abs(g1.hi()));
    double m = std::abs(g2.a0);
    for (int ia = 0; ia < g2.na; ++ia) {
        m = std::max(m, std::abs(g2.b0 + g2.off[ia] * g2.h));
        m = std::max(m, std::abs(g2.b0 + (g2.off[ia] + g2.len[ia]) * g2.h));
    }
    return m;
}

std::string Discretization::describe() const {
    std::ostringstream os;
    os.precision(6);
    if (!two_d) {
        os << "[" << g1.lo << "," << g1.hi() << "]";
    } else {
        os << "a[" << g2.a0 << "," << g2.a0 + g2.na * g2.h << "]x" << (g2.size() / std::max(1, g2.na)) << "avg";
    }
    return os.str();
}

int band_radius(double M_s, double h) { return std::max(0, static_cast<int>(std::ceil(M_s / h - 1e-12)) - 1); }

Discretization make_1d(double L, double h, int64_t cap) {
    Discretization X;
    X.g1 = Grid1D::symmetric(L, h);
    check_cap(X.g1.size(), cap);
    return X;
}

Discretization make_rect(double La, double Lb, double h, int64_t cap) {
    const double na = 2 * std::ceil(La / h - 1e-9), nb = 2 * std::ceil(Lb / h - 1e-9);
    check_cap(static_cast<int64_t>(na * nb), cap);
    Discretization X;
    X.two_d = true;
    X.g2 = Grid2D::rect(La, Lb, h);
    return X;
}

Discretization default_box(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const GridPolicy& pol) {
    const double R = pol.R_q * F.q_scale, M = F.M_s;
    const auto& p = d.params;
    if (!depends_on_t(sc, d)) {
        const double L = pol.const_box * M;
        return s_dim(sc) == 2 ? make_rect(L, L, pol.h2, pol.cap) : make_1d(L, pol.h1, pol.cap);
    }
    switch (sc) {
        case ScenarioId::H1_gen: return make_1d(R / std::abs(p[0]) + M, pol.h1, pol.cap);
        case ScenarioId::G52_gen: return make_1d(R / std::hypot(p[1], p[2]) + M, pol.h1, pol.cap);
        case ScenarioId::G53_mid: return make_1d(R / std::abs(p[1]) + M, pol.h1, pol.cap);
        case ScenarioId::G54_gen: {
            if (d.layer.level == 1) return make_1d(R / std::abs(p[0]) + M, pol.h1, pol.cap);
            const double r = std::hypot(p[1], p[2]), beta = p[0];
            const double s = std::min(R / r, std::sqrt(2 * std::max(R - beta, 0.0) / r));
            return make_1d(s + M, pol.h1, pol.cap);
        }
        case ScenarioId::G53_gen: {
            const double L = R / std::abs(p[0]) + M;
            return make_rect(L, L, pol.h2, pol.cap);
        }
        case ScenarioId::G56_gen: {
            if (d.layer.level == 2) {
                // (ρ + μa, μ, 0): only a is constrained
                const double La = R / std::abs(p[1]) + M;
                return make_rect(La, pol.const_box * M, pol.h2, pol.cap);
            }
            // |νa| ≤ R and |ν(b + a²/2)| ≤ R (inflated by the support in both directions)
            const double nu = std::abs(p[0]);
            const double La = R / nu + M;
            const double h = pol.h2;
            auto brange = [&](double a) {
                const double half = R / nu + M * (1 + std::abs(a)) + M * M / 2;
                return std::pair<double, double>{-a * a / 2 - half, -a * a / 2 + half};
            };
            // count first so the cap is checked before allocation
            const Grid1D ga = Grid1D::symmetric(La, h);
            double total = 0;
            for (int i = 0; i < ga.n; ++i) {
                const auto [lo, hi] = brange(ga.x(i));
                total += (hi - lo) / h + 2;
            }
            check_cap(static_cast<int64_t>(total), pol.cap);
            Discretization X;
            X.two_d = true;
            X.g2 = Grid2D::ragged(La, h, brange);
            return X;
        }
    }
    throw ContractViolation("default_box: unknown scenario");
}

OpPtr build_operator(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const Discretization& X) {
    if (X.two_d != (s_dim(sc) == 2)) throw ContractViolation("build_operator: grid dimension does not match scenario");
    if (!X.two_d) {
        const Grid1D& g = X.g1;
        const int B = std::min(band_radius(F.M_s, g.h), g.n - 1);
        auto op = std::make_shared<BandOperator>(BandOperator::from_kernel(g.n, B, g.h, [&](int i, int j) {
            const double s = g.x(i), t = g.x(j);
            return kernel_value(sc, d, F, &s, &t);
        }));
        return op;
    }
    const Grid2D& g = X.g2;
    const int B = band_radius(F.M_s, g.h);
    auto u = [F](double da, double db) {
        const double s[2] = {da, db};
        return F.u(s);
    };
    TermFn terms = [sc, d, F](int, int, double a, double b, std::vector<NodeTerm>& out) {
        const double t[2] = {a, b};
        const QVec q = restricted_coadjoint(sc, t, d);
        const double D = F.w(q);
        if (D == 0.0) return;
        const Phase2 ph = kernel_phase(sc, q, a);
        out.push_back({D, ph.th1, ph.th2, 0, 0, -1});
    };
    return std::make_shared<Structured2D>(g, B, u, std::move(terms));
}

}  // namespace ncdl
