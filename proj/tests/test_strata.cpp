#include <doctest.h>

#include <cmath>
#include <random>

#include "ncdl/strata.hpp"

using namespace ncdl;

namespace {

DualPoint random_dual(GroupId g, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> d(-2.0, 2.0);
    DualPoint x(dimension(g));
    for (int i = 0; i < x.n; ++i) x[i] = d(rng);
    return x;
}

double param_diff(const OrbitDescriptor& a, const OrbitDescriptor& b) {
    if (!(a.layer == b.layer) || a.params.size() != b.params.size()) return INFINITY;
    double m = 0;
    for (size_t i = 0; i < a.params.size(); ++i) m = std::max(m, std::abs(a.params[i] - b.params[i]));
    return m;
}

Series inv_k(double c) { return Series::power(c, -1); }

SequenceSpec g54(Series beta, Series r, double mu = 1, double nu = 0) {
    SequenceSpec s;
    s.group = GroupId::G54;
    s.level = 2;
    s.params = {std::move(beta), std::move(r)};
    s.dir_mu = mu;
    s.dir_nu = nu;
    return s;
}

// Squared distance from a target (adapted coordinates a,b,c with μ = ν = 0) to the
// G5,4 orbit {a A* + (β + c²/2r) B* + c C* + r U*} (direction fixed at μ̃ = 1).
double dist_to_orbit54(double beta, double r, double bT, double cT) {
    auto f = [&](double c) {
        const double db = bT - beta - c * c / (2 * r);
        return db * db + (cT - c) * (cT - c);
    };
    std::vector<double> cands = {cT};
    if (bT > beta) {
        cands.push_back(std::sqrt(2 * r * (bT - beta)));
        cands.push_back(-std::sqrt(2 * r * (bT - beta)));
    }
    double best = INFINITY;
    for (double c0 : cands) {
        double lo = c0 - 2, hi = c0 + 2;
        const double gr = (std::sqrt(5.0) - 1) / 2;
        for (int it = 0; it < 200; ++it) {
            const double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
            if (f(x1) < f(x2)) hi = x2;
            else lo = x1;
        }
        best = std::min({best, f(0.5 * (lo + hi)), f(c0)});
    }
    return best + r * r;
}

}  // namespace

TEST_CASE("classification examples") {
    auto d = classify(GroupId::G52, {0, 0, 0, 1, 0});
    CHECK(d.layer == LayerId{GroupId::G52, 1});
    CHECK(param_diff(d, {{GroupId::G52, 1}, {0, 1, 0}}) == 0.0);

    d = classify(GroupId::G53, {1, 2, 3, 0, 0});
    CHECK(param_diff(d, {{GroupId::G53, 0}, {1, 2, 3}}) == 0.0);

    d = classify(GroupId::G54, {0, 3, 2, 1, 0});
    CHECK(param_diff(d, {{GroupId::G54, 2}, {1, 1, 0}}) == 0.0);

    CHECK(classify(GroupId::G53, {0, 0, 1, 2, 0}).layer == LayerId{GroupId::G53, 1});
    CHECK(classify(GroupId::G53, {0, 0, 1, 2, 1e-13}).layer == LayerId{GroupId::G53, 1});
    CHECK(classify(GroupId::G56, {0, 0, 1, 0, 0}).layer == LayerId{GroupId::G56, 1});
    CHECK(classify(GroupId::H1, {1, 1, 0}).layer == LayerId{GroupId::H1, 0});
    CHECK(classify(GroupId::F5, {0, 1, 0, 0, 2}).layer == LayerId{GroupId::F5, 3});
}

TEST_CASE("G54 invariant Q") {
    CHECK(invariant_q54({0, 1.5, 0, 2, 0}) == doctest::Approx(2 * 1.5 * 2));
    CHECK(invariant_q54({0, 3, 2, 1, 0}) == doctest::Approx(2.0));
    CHECK_THROWS_AS(invariant_q54({1, 1, 1, 0, 0}), ContractViolation);
    std::mt19937_64 rng(11);
    double worst = 0;
    for (int s = 0; s < 10000; ++s) {
        auto l = random_dual(GroupId::G54, rng);
        GroupElement g(5);
        for (int i = 0; i < 5; ++i) g[i] = random_dual(GroupId::G54, rng)[i];
        worst = std::max(worst, std::abs(invariant_q54(coadjoint(GroupId::G54, g, l)) - invariant_q54(l)));
    }
    CHECK(worst <= 1e-9);
}

TEST_CASE("classify is constant on orbits and representative round-trips") {
    std::mt19937_64 rng(99);
    for (GroupId g : kAllGroups) {
        CAPTURE(group_name(g));
        double worst = 0, round = 0;
        for (int s = 0; s < 10000; ++s) {
            auto l = random_dual(g, rng);
            // exercise the lower layers too
            if (s % 4 == 1) l[l.n - 1] = 0;
            if (s % 4 == 2 && l.n == 5) { l[3] = 0; l[4] = 0; }
            GroupElement x(dimension(g));
            for (int i = 0; i < x.n; ++i) x[i] = random_dual(g, rng)[i];
            const auto d = classify(g, l);
            worst = std::max(worst, param_diff(d, classify(g, coadjoint(g, x, l))));
            round = std::max(round, param_diff(d, classify(g, representative(d))));
        }
        CHECK(worst <= 1e-9);
        CHECK(round <= 1e-12);
    }
}

TEST_CASE("Series limits") {
    CHECK(Series::constant(2).limit() == 2);
    CHECK(Series::geometric(3, 0.25).limit() == 0);
    CHECK(std::isinf(Series::power(-1, 1).limit()));
    CHECK(Series::power(-1, 1).limit() < 0);
    auto s = Series::power(1, 1) + Series::power(-1, 1) + Series::constant(0.5);
    CHECK(s.limit() == 0.5);
    CHECK((Series::power(2, 1) * Series::power(3, -1)).limit() == doctest::Approx(6));
    CHECK(Series::geometric(1, 2).eventual_sign() == 1);
    CHECK((Series::constant(5) + Series::power(-1, 0.5)).eventual_sign() == -1);
}

TEST_CASE("divergence examples") {
    CHECK(diverges(g54(Series::power(1, 1), inv_k(1))));
    CHECK_FALSE(diverges(g54(Series::power(-1, 1), inv_k(0.5))));
    SequenceSpec s;
    s.group = GroupId::G53;
    s.level = 2;
    s.params = {Series::constant(0.7)};
    CHECK_FALSE(diverges(s));
    s.params = {Series::geometric(1, 2)};
    CHECK(diverges(s));
    CHECK(limit_set(s).kind == LimitKind::Infinity);
}

TEST_CASE("limit set examples") {
    SequenceSpec s;
    s.group = GroupId::G53;
    s.level = 2;
    s.params = {Series::geometric(1, 0.25)};
    auto L = limit_set(s);
    REQUIRE(L.kind == LimitKind::LayerUnion);
    CHECK(L.layers == std::vector<LayerId>{{GroupId::G53, 1}, {GroupId::G53, 0}});

    // r_k = 1/k, β_k = −1/(2 r_k) = −k/2
    L = limit_set(g54(Series::power(-0.5, 1), inv_k(1)));
    REQUIRE(L.kind == LimitKind::TwoOrbits);
    CHECK(L.sqrt_d == doctest::Approx(1.0));

    SequenceSpec s52;
    s52.group = GroupId::G52;
    s52.level = 1;
    s52.params = {Series::constant(2) + inv_k(1), inv_k(1)};
    L = limit_set(s52);
    REQUIRE(L.kind == LimitKind::SingleAffinePlane);
    CHECK(L.beta_inf == 2);
    CHECK(L.a_inf == std::array<double, 2>{1, 0});
    CHECK(L.b_inf == std::array<double, 2>{0, 1});

    // G52 frame: the duals of A_{μ,ν} = μ̃A − ν̃B and B_{μ,ν} = ν̃A + μ̃B
    s52.dir_mu = 0.6;
    s52.dir_nu = 0.8;
    L = limit_set(s52);
    const double A[2] = {0.6, -0.8}, B[2] = {0.8, 0.6};
    CHECK(L.a_inf[0] * A[0] + L.a_inf[1] * A[1] == doctest::Approx(1));
    CHECK(L.a_inf[0] * B[0] + L.a_inf[1] * B[1] == doctest::Approx(0).epsilon(1e-15));
    CHECK(L.b_inf[0] * B[0] + L.b_inf[1] * B[1] == doctest::Approx(1));

    L = limit_set(g54(Series::constant(2), inv_k(1)));
    REQUIRE(L.kind == LimitKind::HalfPlane);
    CHECK(L.beta_inf == 2);
    L = limit_set(g54(Series::power(-1, 0.5), inv_k(1)));
    CHECK(L.kind == LimitKind::FullCharacterPlane);
    L = limit_set(g54(Series::constant(2), Series::constant(1)));
    CHECK(L.kind == LimitKind::SingleOrbit);

    SequenceSpec g56;
    g56.group = GroupId::G56;
    g56.level = 3;
    g56.params = {Series::geometric(3, 0.5)};
    L = limit_set(g56);
    CHECK(L.layers.size() == 3);
}

TEST_CASE("diverges and limit_set are exclusive and exhaustive") {
    const std::vector<Series> betas = {Series::constant(1), Series::constant(-1), Series::power(1, 1),
                                       Series::power(-1, 1), Series::power(-0.5, 1), Series::power(-1, 0.5),
                                       Series::geometric(1, 2), Series::constant(0)};
    const std::vector<Series> rs = {inv_k(1), Series::constant(1), Series::geometric(1, 0.5), Series::power(1, 1),
                                    Series::power(1, -2)};
    for (const auto& b : betas)
        for (const auto& r : rs) {
            const auto s = g54(b, r);
            const bool div = diverges(s);
            try {
                const auto L = limit_set(s);
                CHECK((L.kind == LimitKind::Infinity) == div);
            } catch (const SpecViolation&) {
                FAIL("unexpected SpecViolation");
            }
        }
}

TEST_CASE("G54 limit sets agree with the point-sequence oracle") {
    auto dist_at = [](const SequenceSpec& s, double k, double bT, double cT) {
        const auto d = s.at(k);
        return std::sqrt(dist_to_orbit54(d.params[0], d.params[1], bT, cT));
    };
    // d = 1: ±C* are limits, B* and 0.5·C* are not
    auto s = g54(Series::power(-0.5, 1), inv_k(1));
    CHECK(dist_at(s, 1000000, 0, 1) < 1e-3);
    CHECK(dist_at(s, 1000000, 0, -1) < 1e-3);
    CHECK(dist_at(s, 1000000, 1, 0) > 0.5);
    CHECK(dist_at(s, 1000000, 0, 0.5) > 0.3);
    // the proof's points m_{k,±} = ±√(−2β_k r_k) C* + r_k U* lie on Ω_k exactly
    {
        const auto d = s.at(50);
        const double c = std::sqrt(-2 * d.params[0] * d.params[1]);
        const DualPoint m{0, 0, c, d.params[1], 0};
        CHECK(param_diff(classify(GroupId::G54, m), d) < 1e-12);
    }
    // half plane above β_∞ = 2
    s = g54(Series::constant(2), inv_k(1));
    CHECK(dist_at(s, 1000000, 3, 0) < 1e-2);
    CHECK(dist_at(s, 1000000, 2.5, 0) < 1e-2);
    CHECK(dist_at(s, 1000000, 1.5, 0) > 0.4);
    // full character plane
    s = g54(Series::power(-1, 0.5), inv_k(1));
    CHECK(dist_at(s, 1e10, -5, 0) < 1e-2);
    CHECK(dist_at(s, 1e10, 5, 0) < 1e-2);
    // divergence: every orbit point has |b| ≥ β_k → ∞
    s = g54(Series::power(1, 1), inv_k(1));
    CHECK(dist_at(s, 1000, 0, 0) > 900);
}

TEST_CASE("sampling limit sets") {
    auto L = limit_set(g54(Series::power(-0.5, 1), inv_k(1)));
    CHECK(sample_limit_reps(L, 5).size() == 2);

    L = limit_set(g54(Series::constant(2), inv_k(1)));
    auto reps = sample_limit_reps(L, 9);
    CHECK(reps.size() == 9);
    for (const auto& d : reps) {
        CHECK(d.layer == LayerId{GroupId::G54, 0});
        CHECK(d.params[1] >= 2);
    }

    SequenceSpec s;
    s.group = GroupId::G53;
    s.level = 2;
    s.params = {Series::geometric(1, 0.25)};
    reps = sample_limit_reps(limit_set(s), 16);
    REQUIRE(reps.size() == 16);
    int n1 = 0, n0 = 0;
    for (const auto& d : reps) {
        const auto c = classify(GroupId::G53, representative(d));
        CHECK(c.layer == d.layer);
        (d.layer.level == 1 ? n1 : n0)++;
        for (double p : d.params) CHECK(std::abs(p) <= 1.5);
    }
    CHECK(n1 == 8);
    CHECK(n0 == 8);

    LimitSetDescriptor inf;
    CHECK(sample_limit_reps(inf, 4).empty());
    CHECK_THROWS_AS(sample_limit_reps(inf, 0), ContractViolation);
}
