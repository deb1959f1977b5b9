#include "ncdl/groups.hpp"

#include <array>
#include <vector>

namespace ncdl {

namespace {

struct Bracket {
    int i, j, k;
    double coef;  // [e_i, e_j] = coef * e_k
};

// Structure constants read off the algebra presentations.
std::vector<Bracket> structure(GroupId g) {
    switch (g) {
        case GroupId::H1: return {{0, 1, 2, 1.0}};
        case GroupId::H2: return {{0, 2, 4, 1.0}, {1, 3, 4, 1.0}};
        case GroupId::F4: return {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}};
        case GroupId::F5: return {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}, {0, 3, 4, 1.0}};
        // [C,A] = -U, [C,B] = V
        case GroupId::G52: return {{0, 2, 3, 1.0}, {1, 2, 4, -1.0}};
        case GroupId::G53: return {{0, 1, 3, 1.0}, {0, 3, 4, 1.0}, {1, 2, 4, 1.0}};
        case GroupId::G54: return {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}, {1, 2, 4, 1.0}};
        case GroupId::G56: return {{0, 1, 2, 1.0}, {0, 2, 3, 1.0}, {0, 3, 4, 1.0}, {1, 2, 4, 1.0}};
    }
    return {};
}

// Coordinates of the first kind (H_n, G5,2) or of the second kind in basis order.
bool first_kind(GroupId g) { return g == GroupId::H1 || g == GroupId::H2 || g == GroupId::G52; }

using Mat = std::array<std::array<double, 5>, 5>;

Mat eye(int n) {
    Mat m{};
    for (int i = 0; i < n; ++i) m[i][i] = 1.0;
    return m;
}

Mat matmul(const Mat& a, const Mat& b, int n) {
    Mat r{};
    for (int i = 0; i < n; ++i)
        for (int k = 0; k < n; ++k) {
            if (a[i][k] == 0.0) continue;
            for (int j = 0; j < n; ++j) r[i][j] += a[i][k] * b[k][j];
        }
    return r;
}

// Column j of ad(X) holds [X, e_j].
Mat ad_matrix(GroupId g, const std::array<double, 5>& X, int n) {
    Mat m{};
    for (const auto& b : structure(g)) {
        m[b.k][b.j] += X[b.i] * b.coef;
        m[b.k][b.i] -= X[b.j] * b.coef;
    }
    (void)n;
    return m;
}

// exp of a nilpotent matrix: the series stops after n terms.
Mat expm_nilpotent(const Mat& a, int n) {
    Mat r = eye(n), p = eye(n);
    for (int k = 1; k <= n; ++k) {
        p = matmul(p, a, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) p[i][j] /= k;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) r[i][j] += p[i][j];
    }
    return r;
}

Mat Ad(GroupId g, const GroupElement& x) {
    const int n = dimension(g);
    if (first_kind(g)) return expm_nilpotent(ad_matrix(g, x.c, n), n);
    Mat r = eye(n);
    for (int i = 0; i < n; ++i) {
        if (x[i] == 0.0) continue;
        std::array<double, 5> e{};
        e[i] = x[i];
        r = matmul(r, expm_nilpotent(ad_matrix(g, e, n), n), n);
    }
    return r;
}

void check_dim(GroupId g, int n, const char* what) {
    if (n != dimension(g)) throw ContractViolation(std::string("dimension mismatch in ") + what);
}

}  // namespace

int dimension(GroupId g) {
    switch (g) {
        case GroupId::H1: return 3;
        case GroupId::F4: return 4;
        default: return 5;
    }
}

std::string_view group_name(GroupId g) {
    switch (g) {
        case GroupId::H1: return "H1";
        case GroupId::H2: return "H2";
        case GroupId::F4: return "F4";
        case GroupId::F5: return "F5";
        case GroupId::G52: return "G52";
        case GroupId::G53: return "G53";
        case GroupId::G54: return "G54";
        case GroupId::G56: return "G56";
    }
    return "?";
}

std::optional<GroupId> parse_group(std::string_view s) {
    for (GroupId g : kAllGroups)
        if (group_name(g) == s) return g;
    return std::nullopt;
}

std::string_view basis_label(GroupId g, int i) {
    static constexpr std::array<std::string_view, 3> h1 = {"X", "Y", "Z"};
    static constexpr std::array<std::string_view, 5> h2 = {"X1", "X2", "Y1", "Y2", "Z"};
    static constexpr std::array<std::string_view, 5> std5 = {"A", "B", "C", "U", "V"};
    if (g == GroupId::H1) return h1.at(i);
    if (g == GroupId::H2) return h2.at(i);
    return std5.at(i);
}

GroupElement identity(GroupId g) { return GroupElement(dimension(g)); }

GroupElement multiply(GroupId g, const GroupElement& x, const GroupElement& y) {
    check_dim(g, x.n, "multiply");
    check_dim(g, y.n, "multiply");
    GroupElement r(x.n);
    for (int i = 0; i < x.n; ++i) r[i] = x[i] + y[i];
    switch (g) {
        case GroupId::H1:
            r[2] += 0.5 * (x[0] * y[1] - y[0] * x[1]);
            break;
        case GroupId::H2:
            r[4] += 0.5 * (x[0] * y[2] - y[0] * x[2] + x[1] * y[3] - y[1] * x[3]);
            break;
        default: {
            const double a = x[0], b = x[1], c = x[2], u = x.n > 3 ? x[3] : 0.0;
            const double a_ = y[0], b_ = y[1], c_ = y[2];
            switch (g) {
                case GroupId::F4:
                    r[2] += -a_ * b;
                    r[3] += -a_ * c + a_ * a_ * b / 2;
                    break;
                case GroupId::F5:
                    r[2] += -a_ * b;
                    r[3] += -a_ * c + a_ * a_ * b / 2;
                    r[4] += -a_ * u + a_ * a_ * c / 2 - a_ * a_ * a_ * b / 6;
                    break;
                case GroupId::G52:
                    r[3] += 0.5 * (a * c_ - a_ * c);
                    r[4] += 0.5 * (b_ * c - b * c_);
                    break;
                case GroupId::G53:
                    r[3] += -a_ * b;
                    r[4] += -a_ * u + a_ * a_ * b / 2 - b_ * c / 2 + b * c_ / 2;
                    break;
                case GroupId::G54:
                    r[2] += -a_ * b;
                    r[3] += -a_ * c + a_ * a_ * b / 2;
                    r[4] += b * c_ / 2 - b_ * c / 2 + a_ * b_ * b / 2;
                    break;
                case GroupId::G56:
                    r[2] += -a_ * b;
                    r[3] += -a_ * c + a_ * a_ * b / 2;
                    r[4] += -a_ * u + b * c_ / 2 - b_ * c / 2 + a_ * b * b_ / 2 + a_ * a_ * c / 2 -
                            a_ * a_ * a_ * b / 6;
                    break;
                default: break;
            }
        }
    }
    return r;
}

// Every law has the form (gx)_k = g_k + x_k + poly(g, x_{<k}), so fixing the
// coordinates in order solves gx = e exactly.
GroupElement invert(GroupId g, const GroupElement& x) {
    check_dim(g, x.n, "invert");
    GroupElement r(x.n);
    for (int k = 0; k < x.n; ++k) {
        GroupElement p = multiply(g, x, r);
        r[k] -= p[k];
    }
    return r;
}

AlgebraElement bracket(GroupId g, const AlgebraElement& X, const AlgebraElement& Y) {
    check_dim(g, X.n, "bracket");
    check_dim(g, Y.n, "bracket");
    AlgebraElement r(X.n);
    for (const auto& b : structure(g)) r[b.k] += b.coef * (X[b.i] * Y[b.j] - X[b.j] * Y[b.i]);
    return r;
}

DualPoint coadjoint(GroupId g, const GroupElement& x, const DualPoint& ell) {
    check_dim(g, x.n, "coadjoint");
    check_dim(g, ell.n, "coadjoint");
    const int n = x.n;
    const Mat m = Ad(g, x);
    DualPoint r(n);
    for (int j = 0; j < n; ++j) {
        double s = 0;
        for (int k = 0; k < n; ++k) s += ell[k] * m[k][j];
        r[j] = s;
    }
    for (int k : central_dual_indices(g)) r[k] = ell[k];  // exact, not just to rounding
    return r;
}

GroupElement exp_basis(GroupId g, int i, double t) {
    GroupElement r(dimension(g));
    r[i] = t;
    return r;
}

std::vector<int> central_dual_indices(GroupId g) {
    switch (g) {
        case GroupId::H1: return {2};
        case GroupId::H2: return {4};
        case GroupId::F4: return {3};
        case GroupId::F5: return {4};
        case GroupId::G52: return {3, 4};
        case GroupId::G53: return {4};
        case GroupId::G54: return {3, 4};
        case GroupId::G56: return {4};
    }
    return {};
}

}  // namespace ncdl
