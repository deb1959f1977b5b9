#include "ncdl/symbol.hpp"

#include <numbers>

namespace ncdl {

namespace {
constexpr double kPi = std::numbers::pi;
}

std::string_view scenario_name(ScenarioId s) {
    switch (s) {
        case ScenarioId::H1_gen: return "H1_gen";
        case ScenarioId::G52_gen: return "G52_gen";
        case ScenarioId::G53_gen: return "G53_gen";
        case ScenarioId::G53_mid: return "G53_mid";
        case ScenarioId::G54_gen: return "G54_gen";
        case ScenarioId::G56_gen: return "G56_gen";
    }
    return "?";
}

std::optional<ScenarioId> parse_scenario(std::string_view s) {
    for (ScenarioId x : kAllScenarios)
        if (scenario_name(x) == s) return x;
    return std::nullopt;
}

int s_dim(ScenarioId s) { return (s == ScenarioId::G53_gen || s == ScenarioId::G56_gen) ? 2 : 1; }

int q_dim(ScenarioId s) {
    switch (s) {
        case ScenarioId::H1_gen: return 2;
        case ScenarioId::G53_gen:
        case ScenarioId::G56_gen: return 3;
        default: return 4;
    }
}

GroupId scenario_group(ScenarioId s) {
    switch (s) {
        case ScenarioId::H1_gen: return GroupId::H1;
        case ScenarioId::G52_gen: return GroupId::G52;
        case ScenarioId::G53_gen:
        case ScenarioId::G53_mid: return GroupId::G53;
        case ScenarioId::G54_gen: return GroupId::G54;
        case ScenarioId::G56_gen: return GroupId::G56;
    }
    return GroupId::H1;
}

double Symbol::u(const double* s) const {
    double p = amplitude;
    for (int i = 0; i < sdim(); ++i) p *= u1(s[i]);
    return p;
}

double Symbol::w(const QVec& q) const {
    double n2 = 0;
    for (int i = 0; i < qdim(); ++i) n2 += q[i] * q[i];
    return std::exp(-kPi * n2 / (q_scale * q_scale));
}

double Symbol::w_lipschitz() const { return std::sqrt(2 * kPi) / q_scale * std::exp(-0.5); }

double Symbol::dominator_l1() const { return std::abs(amplitude) * std::pow(32.0 / 35.0 * M_s, sdim()); }

double Symbol::lipschitz_l1() const { return w_lipschitz() * dominator_l1(); }

Symbol default_symbol(ScenarioId s, double M_s, double q_scale) {
    if (!(M_s > 0) || !(q_scale > 0)) throw ContractViolation("default_symbol: M_s and q_scale must be positive");
    return Symbol{s, M_s, q_scale, 1.0};
}

Symbol zero_symbol(ScenarioId s, double M_s) { return Symbol{s, M_s, 1.0, 0.0}; }

QVec g54_q(double s, double beta, double c, double r, double mu, double nu) {
    return {beta + c * s + r * s * s / 2, c + r * s, mu, nu};
}

QVec restricted_p(ScenarioId sc, const double* t, const std::array<double, 3>& p) {
    const double a = t[0], b = t[1];
    const auto [rho, mu, nu] = p;
    if (sc == ScenarioId::G53_gen) return {rho + nu * b, mu + nu * a, nu, 0};
    if (sc == ScenarioId::G56_gen) return {rho + mu * a + nu * b + nu * a * a / 2, mu + nu * a, nu, 0};
    throw ContractViolation("restricted_p: only G53_gen and G56_gen act on span{C,U,V}");
}

QVec restricted_coadjoint(ScenarioId sc, const double* t, const OrbitDescriptor& d) {
    if (d.layer.group != scenario_group(sc)) throw ContractViolation("restricted_coadjoint: scenario/descriptor mismatch");
    const auto& p = d.params;
    const int lv = d.layer.level;
    switch (sc) {
        case ScenarioId::H1_gen:
            if (lv == 1) return {-p[0] * t[0], p[0], 0, 0};
            break;
        case ScenarioId::G52_gen:
            if (lv == 1) {
                const double r = std::hypot(p[1], p[2]);
                return {r * t[0], p[0], r, 0};
            }
            break;
        case ScenarioId::G53_gen:
            if (lv == 2) return restricted_p(sc, t, {0, 0, p[0]});
            if (lv == 1) return {p[0], p[1], 0, 0};
            return {p[2], 0, 0, 0};
        case ScenarioId::G56_gen:
            if (lv == 3) return restricted_p(sc, t, {0, 0, p[0]});
            if (lv == 2) return restricted_p(sc, t, {0, p[1], 0});
            if (lv == 1) return {p[0], 0, 0, 0};
            return {0, 0, 0, 0};
        case ScenarioId::G53_mid:
            if (lv == 1) return {p[1] * t[0], p[0], p[1], 0};
            if (lv == 0) return {p[1], p[2], 0, 0};
            break;
        case ScenarioId::G54_gen:
            if (lv == 2) return g54_q(t[0], p[0], 0, std::hypot(p[1], p[2]), p[1], p[2]);
            if (lv == 1) return g54_q(t[0], 0, p[0], 0, 0, 0);
            return {p[1], 0, 0, 0};
    }
    throw ContractViolation("restricted_coadjoint: unsupported layer for this scenario");
}

Phase2 kernel_phase(ScenarioId sc, const QVec& q, double a) {
    // q = (q_C, q_U, q_V) on span{C,U,V}
    if (sc == ScenarioId::G53_gen) return {-2 * kPi * (q[1] * a - q[2] * a * a / 2), 0};
    if (sc == ScenarioId::G56_gen)
        return {-2 * kPi * (q[0] * a - q[1] * a * a / 2 + q[2] * a * a * a / 6), -kPi * q[2] * a};
    return {};
}

cd kernel_value(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const double* s, const double* t) {
    if (s_dim(sc) == 2) {
        const double delta[2] = {s[0] - t[0], s[1] - t[1]};
        const double uu = F.u(delta);
        if (uu == 0.0) return 0.0;
        const QVec q = restricted_coadjoint(sc, t, d);
        const Phase2 ph = kernel_phase(sc, q, t[0]);
        const double db = delta[1];
        return uu * F.w(q) * std::polar(1.0, ph.th1 * db + ph.th2 * db * db);
    }
    const double delta = s[0] - t[0];
    const double uu = F.u(&delta);
    if (uu == 0.0) return 0.0;
    double at = t[0];
    if (sc == ScenarioId::H1_gen || sc == ScenarioId::G52_gen) at = 0.5 * (s[0] + t[0]);
    return uu * F.w(restricted_coadjoint(sc, &at, d));
}

cd char_value(const Symbol& F, const QVec& q, const double* freq, int n) {
    const double h = 2 * F.M_s / n;
    cd prod = F.amplitude * F.w(q);
    for (int i = 0; i < F.sdim(); ++i) {
        cd acc = 0;
        for (int j = 0; j < n; ++j) {
            const double x = -F.M_s + (j + 0.5) * h;
            acc += F.u1(x) * std::polar(1.0, -2 * kPi * freq[i] * x);
        }
        prod *= acc * h;
    }
    return prod;
}

}  // namespace ncdl
