#include "ncdl/strata.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace ncdl {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double snap(double x) { return std::abs(x) <= kSnap ? 0.0 : x; }

DualPoint snapped(const DualPoint& ell) {
    DualPoint r = ell;
    for (int i = 0; i < r.n; ++i) r[i] = snap(r[i]);
    return r;
}

// Orbits of F4 (and of G5,6 on ν = 0) on the coordinates (α, β, ρ, μ).
OrbitDescriptor classify_f4(GroupId g, double al, double be, double rh, double mu) {
    if (mu != 0.0) return {{g, 2}, {be - rh * rh / (2 * mu), mu}};
    if (rh != 0.0) return {{g, 1}, {rh}};
    return {{g, 0}, {al, be}};
}

// Factor n into `dims` integers as evenly as possible (product == n).
std::vector<int> balanced_factors(int n, int dims) {
    std::vector<int> f(dims, 1);
    int rest = n;
    for (int d = 0; d < dims; ++d) {
        const int left = dims - d;
        int target = static_cast<int>(std::lround(std::pow(static_cast<double>(rest), 1.0 / left)));
        target = std::max(1, target);
        // nearest divisor of rest to target
        int best = 1;
        for (int c = 1; c <= rest; ++c)
            if (rest % c == 0 && std::abs(c - target) < std::abs(best - target)) best = c;
        if (left == 1) best = rest;
        f[d] = best;
        rest /= best;
    }
    return f;
}

// Cell-centred lattice of n points in ∏[lo_d, hi_d].
std::vector<std::vector<double>> lattice(int n, const std::vector<std::pair<double, double>>& ranges) {
    const int dims = static_cast<int>(ranges.size());
    std::vector<std::vector<double>> pts;
    if (n <= 0) return pts;
    const auto f = balanced_factors(n, dims);
    std::vector<int> idx(dims, 0);
    for (int p = 0; p < n; ++p) {
        std::vector<double> x(dims);
        for (int d = 0; d < dims; ++d) {
            const auto [lo, hi] = ranges[d];
            x[d] = lo + (hi - lo) * (idx[d] + 0.5) / f[d];
        }
        pts.push_back(std::move(x));
        for (int d = 0; d < dims; ++d) {
            if (++idx[d] < f[d]) break;
            idx[d] = 0;
        }
    }
    return pts;
}

std::vector<std::pair<double, double>> cube(int dims, double box) {
    return std::vector<std::pair<double, double>>(dims, {-box, box});
}

}  // namespace

int top_level(GroupId g) {
    switch (g) {
        case GroupId::H1:
        case GroupId::H2:
        case GroupId::G52: return 1;
        case GroupId::F4:
        case GroupId::G53:
        case GroupId::G54: return 2;
        case GroupId::F5:
        case GroupId::G56: return 3;
    }
    return 0;
}

std::string layer_name(const LayerId& l) {
    std::ostringstream os;
    os << group_name(l.group) << ":Gamma" << l.level;
    return os.str();
}

OrbitDescriptor classify(GroupId g, const DualPoint& raw) {
    if (raw.n != dimension(g)) throw ContractViolation("classify: dimension mismatch");
    const DualPoint l = snapped(raw);
    switch (g) {
        case GroupId::H1:
        case GroupId::H2: {
            const int n = l.n;
            if (l[n - 1] != 0.0) return {{g, 1}, {l[n - 1]}};
            return {{g, 0}, std::vector<double>(l.c.begin(), l.c.begin() + n - 1)};
        }
        case GroupId::F4: return classify_f4(g, l[0], l[1], l[2], l[3]);
        case GroupId::F5: {
            const double nu = l[4];
            if (nu != 0.0) {
                // move along exp(tA) until the U*-coordinate vanishes
                // at t = -l3/ν, in closed form to avoid cancelling powers of t
                const double w = l[3] / nu;
                const double be = l[1] - w * l[2] + w * w * l[3] / 3;
                const double rh = l[2] - w * l[3] / 2;
                return {{g, 3}, {be, rh, nu}};
            }
            return classify_f4(g, l[0], l[1], l[2], l[3]);
        }
        case GroupId::G52: {
            const double mu = l[3], nu = l[4];
            const double r = std::hypot(mu, nu);
            if (r != 0.0) return {{g, 1}, {(nu * l[0] + mu * l[1]) / r, mu, nu}};
            return {{g, 0}, {l[0], l[1], l[2]}};
        }
        case GroupId::G53: {
            if (l[4] != 0.0) return {{g, 2}, {l[4]}};
            if (l[3] != 0.0) return {{g, 1}, {l[2], l[3]}};
            return {{g, 0}, {l[0], l[1], l[2]}};
        }
        case GroupId::G54: {
            const double mu = l[3], nu = l[4];
            const double r = std::hypot(mu, nu);
            if (r != 0.0) {
                const double b = (-nu * l[0] + mu * l[1]) / r;
                const double c = l[2];
                return {{g, 2}, {b - c * c / (2 * r), mu, nu}};
            }
            if (l[2] != 0.0) return {{g, 1}, {l[2]}};
            return {{g, 0}, {l[0], l[1]}};
        }
        case GroupId::G56: {
            if (l[4] != 0.0) return {{g, 3}, {l[4]}};
            return classify_f4(g, l[0], l[1], l[2], l[3]);
        }
    }
    return {};
}

DualPoint representative(const OrbitDescriptor& d) {
    const GroupId g = d.layer.group;
    const auto& p = d.params;
    DualPoint l(dimension(g));
    auto f4_like = [&](int level) {
        if (level == 2) { l[1] = p[0]; l[3] = p[1]; }
        else if (level == 1) l[2] = p[0];
        else { l[0] = p[0]; l[1] = p[1]; }
    };
    switch (g) {
        case GroupId::H1:
        case GroupId::H2:
            if (d.layer.level == 1) l[l.n - 1] = p[0];
            else
                for (int i = 0; i < l.n - 1; ++i) l[i] = p[i];
            break;
        case GroupId::F4: f4_like(d.layer.level); break;
        case GroupId::F5:
            if (d.layer.level == 3) { l[1] = p[0]; l[2] = p[1]; l[4] = p[2]; }
            else f4_like(d.layer.level);
            break;
        case GroupId::G52:
            if (d.layer.level == 1) {
                const double r = std::hypot(p[1], p[2]);
                l[0] = p[0] * p[2] / r;  // β B*_{μ,ν}, B*_{μ,ν} = ν̃A* + μ̃B*
                l[1] = p[0] * p[1] / r;
                l[3] = p[1];
                l[4] = p[2];
            } else { l[0] = p[0]; l[1] = p[1]; l[2] = p[2]; }
            break;
        case GroupId::G53:
            if (d.layer.level == 2) l[4] = p[0];
            else if (d.layer.level == 1) { l[2] = p[0]; l[3] = p[1]; }
            else { l[0] = p[0]; l[1] = p[1]; l[2] = p[2]; }
            break;
        case GroupId::G54:
            if (d.layer.level == 2) {
                const double r = std::hypot(p[1], p[2]);
                l[0] = -p[0] * p[2] / r;  // β B*_ℓ, B*_ℓ = −ν̃A* + μ̃B*
                l[1] = p[0] * p[1] / r;
                l[3] = p[1];
                l[4] = p[2];
            } else if (d.layer.level == 1) l[2] = p[0];
            else { l[0] = p[0]; l[1] = p[1]; }
            break;
        case GroupId::G56:
            if (d.layer.level == 3) l[4] = p[0];
            else f4_like(d.layer.level);
            break;
    }
    return l;
}

double invariant_q54(const DualPoint& ell) {
    if (ell.n != 5) throw ContractViolation("invariant_q54: G54 dual point expected");
    const double mu = ell[3], nu = ell[4];
    const double r = std::hypot(mu, nu);
    if (r == 0.0) throw ContractViolation("invariant_q54: r = 0 is outside the generic layer");
    const double b = (-nu * ell[0] + mu * ell[1]) / r;
    const double c = ell[2];
    return 2 * b * r - c * c;
}

// ---- Series ----

double Series::at(double k) const {
    double s = 0;
    for (const auto& t : terms) s += t.coef * std::pow(k, t.power) * std::pow(t.base, k);
    return s;
}

Series Series::operator*(const Series& o) const {
    Series r;
    for (const auto& a : terms)
        for (const auto& b : o.terms) r.terms.push_back({a.coef * b.coef, a.power + b.power, a.base * b.base});
    return r;
}

Series Series::operator+(const Series& o) const {
    Series r = *this;
    r.terms.insert(r.terms.end(), o.terms.begin(), o.terms.end());
    return r;
}

Series Series::operator*(double s) const {
    Series r = *this;
    for (auto& t : r.terms) t.coef *= s;
    return r;
}

namespace {

// Merged terms ordered by decreasing growth; zero coefficients dropped.
std::vector<Series::Term> dominant_order(const Series& s) {
    std::map<std::pair<double, double>, double> merged;
    for (const auto& t : s.terms) {
        if (!(t.base > 0)) throw ContractViolation("Series: bases must be positive");
        merged[{t.base, t.power}] += t.coef;
    }
    std::vector<Series::Term> out;
    for (auto it = merged.rbegin(); it != merged.rend(); ++it)
        if (it->second != 0.0) out.push_back({it->second, it->first.second, it->first.first});
    return out;
}

}  // namespace

double Series::limit() const {
    const auto t = dominant_order(*this);
    if (t.empty()) return 0.0;
    const auto& d = t.front();
    const bool grows = d.base > 1 || (d.base == 1 && d.power > 0);
    if (grows) return d.coef > 0 ? kInf : -kInf;
    if (d.base == 1 && d.power == 0) return d.coef;
    return 0.0;
}

int Series::eventual_sign() const {
    const auto t = dominant_order(*this);
    if (t.empty()) return 0;
    return t.front().coef > 0 ? 1 : -1;
}

// ---- sequences ----

OrbitDescriptor SequenceSpec::at(double k) const {
    auto v = [&](int i) { return params.at(i).at(k); };
    switch (group) {
        case GroupId::G52:
        case GroupId::G54:
            if (level == top_level(group)) {
                const double r = v(1);
                return {{group, level}, {v(0), dir_mu * r, dir_nu * r}};
            }
            break;
        case GroupId::G53:
            if (level == 2) return {{group, 2}, {v(0)}};
            if (level == 1) return {{group, 1}, {v(0), v(1)}};
            break;
        case GroupId::G56:
            if (level == 3) return {{group, 3}, {v(0)}};
            break;
        case GroupId::H1:
        case GroupId::H2:
            if (level == 1) return {{group, 1}, {v(0)}};
            break;
        default: break;
    }
    throw ContractViolation("SequenceSpec: unsupported group/layer rule");
}

namespace {

void check_rule(const SequenceSpec& s) {
    const size_t need = (s.group == GroupId::G52 || s.group == GroupId::G54 || (s.group == GroupId::G53 && s.level == 1)) ? 2 : 1;
    if (s.params.size() != need) throw ContractViolation("SequenceSpec: wrong number of parameter series");
    if (s.group == GroupId::G52 || s.group == GroupId::G54) {
        if (std::abs(std::hypot(s.dir_mu, s.dir_nu) - 1.0) > 1e-12)
            throw ContractViolation("SequenceSpec: direction must be a unit vector");
        if (s.params[1].eventual_sign() <= 0) throw ContractViolation("SequenceSpec: r_k must be positive");
    }
    (void)s.at(1);
}

}  // namespace

bool diverges(const SequenceSpec& s) {
    check_rule(s);
    switch (s.group) {
        case GroupId::G54: {
            const Series& be = s.params[0];
            const Series& r = s.params[1];
            // r + ε β + (ε − 1) β r with ε the eventual indicator of β > 0
            const Series e = be.eventual_sign() > 0 ? r + be : r + -(be * r);
            return e.limit() == kInf;
        }
        case GroupId::G52:
            return std::isinf(s.params[0].limit()) || s.params[1].limit() == kInf;
        case GroupId::G53:
            if (s.level == 1) return std::isinf(s.params[0].limit()) || std::isinf(s.params[1].limit());
            return std::isinf(s.params[0].limit());
        default:
            return std::isinf(s.params[0].limit());
    }
}

LimitSetDescriptor limit_set(const SequenceSpec& s) {
    LimitSetDescriptor L;
    L.group = s.group;
    if (diverges(s)) {
        L.kind = LimitKind::Infinity;
        return L;
    }
    auto single = [&](OrbitDescriptor d) {
        L.kind = LimitKind::SingleOrbit;
        L.orbit = std::move(d);
        return L;
    };
    switch (s.group) {
        case GroupId::G53:
            if (s.level == 2) {
                const double nu = s.params[0].limit();
                if (nu != 0.0) return single({{s.group, 2}, {nu}});
                L.kind = LimitKind::LayerUnion;
                L.layers = {{s.group, 1}, {s.group, 0}};
                return L;
            } else {
                const double rho = s.params[0].limit(), mu = s.params[1].limit();
                if (mu != 0.0) return single({{s.group, 1}, {rho, mu}});
                L.kind = LimitKind::SingleAffinePlane;
                L.a_inf = {1, 0};
                L.b_inf = {0, 1};
                L.rho = rho;
                return L;
            }
        case GroupId::G56: {
            const double nu = s.params[0].limit();
            if (nu != 0.0) return single({{s.group, 3}, {nu}});
            L.kind = LimitKind::LayerUnion;
            L.layers = {{s.group, 2}, {s.group, 1}, {s.group, 0}};
            return L;
        }
        case GroupId::H1:
        case GroupId::H2: {
            const double la = s.params[0].limit();
            if (la != 0.0) return single({{s.group, 1}, {la}});
            L.kind = LimitKind::LayerUnion;
            L.layers = {{s.group, 0}};
            return L;
        }
        case GroupId::G52: {
            const double be = s.params[0].limit(), r = s.params[1].limit();
            if (r != 0.0) return single({{s.group, 1}, {be, s.dir_mu * r, s.dir_nu * r}});
            L.kind = LimitKind::SingleAffinePlane;
            L.a_inf = {s.dir_mu, -s.dir_nu};  // dual of A_{μ,ν} = μ̃A − ν̃B
            L.b_inf = {s.dir_nu, s.dir_mu};   // dual of B_{μ,ν} = ν̃A + μ̃B
            L.beta_inf = be;
            return L;
        }
        case GroupId::G54: {
            const Series& be = s.params[0];
            const Series& r = s.params[1];
            const double rl = r.limit();
            if (rl != 0.0) return single({{s.group, 2}, {be.limit(), s.dir_mu * rl, s.dir_nu * rl}});
            const double d = (be * r * -2.0).limit();
            if (d < 0) throw SpecViolation("G54: d = lim(-2 beta_k r_k) < 0 has no limit set");
            L.a_inf = {s.dir_mu, s.dir_nu};   // dual of A_ℓ = μ̃A + ν̃B
            L.b_inf = {-s.dir_nu, s.dir_mu};  // dual of B_ℓ = −ν̃A + μ̃B
            if (d > 0) {
                L.kind = LimitKind::TwoOrbits;
                L.sqrt_d = std::sqrt(d);
                return L;
            }
            const double binf = be.limit();
            if (binf == -kInf) {
                L.kind = LimitKind::FullCharacterPlane;
                return L;
            }
            L.kind = LimitKind::HalfPlane;
            L.beta_inf = binf;
            return L;
        }
        default: break;
    }
    throw ContractViolation("limit_set: unsupported group (threadlike limit sets are out of scope)");
}

std::vector<OrbitDescriptor> sample_limit_reps(const LimitSetDescriptor& L, int budget, double box) {
    if (budget < 1) throw ContractViolation("sample_limit_reps: budget must be >= 1");
    std::vector<OrbitDescriptor> out;
    const GroupId g = L.group;
    auto plane_char = [&](double a, double b) {
        return std::array<double, 2>{a * L.a_inf[0] + b * L.b_inf[0], a * L.a_inf[1] + b * L.b_inf[1]};
    };
    switch (L.kind) {
        case LimitKind::Infinity: break;
        case LimitKind::SingleOrbit: out.push_back(L.orbit); break;
        case LimitKind::TwoOrbits:
            out.push_back({{g, 1}, {L.sqrt_d}});
            out.push_back({{g, 1}, {-L.sqrt_d}});
            break;
        case LimitKind::HalfPlane:
        case LimitKind::FullCharacterPlane: {
            const double lo = L.kind == LimitKind::HalfPlane ? L.beta_inf : -box;
            const double hi = L.kind == LimitKind::HalfPlane ? L.beta_inf + 2 * box : box;
            for (const auto& p : lattice(budget, {{-box, box}, {lo, hi}})) {
                const auto ab = plane_char(p[0], p[1]);
                out.push_back({{g, 0}, {ab[0], ab[1]}});
            }
            break;
        }
        case LimitKind::SingleAffinePlane: {
            for (const auto& p : lattice(budget, cube(2, box))) {
                if (g == GroupId::G52) {
                    const auto ab = plane_char(p[0], L.beta_inf);
                    out.push_back({{g, 0}, {ab[0], ab[1], p[1]}});
                } else {
                    out.push_back({{g, 0}, {p[0], p[1], L.rho}});
                }
            }
            break;
        }
        case LimitKind::LayerUnion: {
            const int m = static_cast<int>(L.layers.size());
            for (int i = 0; i < m; ++i) {
                const int n = budget / m + (i < budget % m ? 1 : 0);
                const LayerId lay = L.layers[i];
                // parameter count of the layer's descriptors
                int dims = 0;
                if (g == GroupId::G53) dims = lay.level == 1 ? 2 : 3;
                else if (g == GroupId::G56) dims = lay.level == 2 ? 2 : (lay.level == 1 ? 1 : 2);
                else dims = dimension(g) - 1;  // Heisenberg characters
                for (auto& p : lattice(n, cube(dims, box))) out.push_back({lay, p});
            }
            break;
        }
    }
    return out;
}

std::string describe(const LimitSetDescriptor& L) {
    std::ostringstream os;
    switch (L.kind) {
        case LimitKind::TwoOrbits: os << "TwoOrbits(+-" << L.sqrt_d << " C*)"; break;
        case LimitKind::HalfPlane: os << "HalfPlane(beta_inf=" << L.beta_inf << ")"; break;
        case LimitKind::FullCharacterPlane: os << "FullCharacterPlane"; break;
        case LimitKind::SingleAffinePlane: os << "SingleAffinePlane"; break;
        case LimitKind::SingleOrbit: os << "SingleOrbit(" << layer_name(L.orbit.layer) << ")"; break;
        case LimitKind::Infinity: os << "Infinity"; break;
        case LimitKind::LayerUnion: {
            os << "LayerUnion(";
            for (size_t i = 0; i < L.layers.size(); ++i) os << (i ? "," : "") << layer_name(L.layers[i]);
            os << ")";
            break;
        }
    }
    return os.str();
}

}  // namespace ncdl
