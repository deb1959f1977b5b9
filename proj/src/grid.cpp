#include "ncdl/grid.hpp"

#include <cmath>

#include "ncdl/groups.hpp"

namespace ncdl {

Grid1D Grid1D::make(double lo, double hi, double h) {
    if (!(h > 0) || !(hi > lo)) throw ContractViolation("grid: need h > 0 and hi > lo");
    const double cells = (hi - lo) / h;
    const double r = std::round(cells);
    if (std::abs(cells - r) > 1e-9 * std::max(1.0, cells))
        throw ContractViolation("grid: (hi - lo)/h must be an integer");
    return {lo, h, static_cast<int>(r)};
}

Grid1D Grid1D::symmetric(double L, double h) {
    const int half = static_cast<int>(std::ceil(L / h - 1e-9));
    return {-half * h, h, 2 * half};
}

Grid2D Grid2D::rect(double La, double Lb, double h) {
    const Grid1D ga = Grid1D::symmetric(La, h), gb = Grid1D::symmetric(Lb, h);
    Grid2D g;
    g.a0 = ga.lo;
    g.b0 = gb.lo;
    g.h = h;
    g.na = ga.n;
    g.off.assign(g.na, 0);
    g.len.assign(g.na, gb.n);
    g.start.resize(g.na);
    for (int i = 0; i < g.na; ++i) g.start[i] = static_cast<int64_t>(i) * gb.n;
    return g;
}

Grid2D Grid2D::ragged(double La, double h, const std::function<std::pair<double, double>(double)>& brange) {
    const Grid1D ga = Grid1D::symmetric(La, h);
    Grid2D g;
    g.a0 = ga.lo;
    g.b0 = 0;
    g.h = h;
    g.na = ga.n;
    g.off.resize(g.na);
    g.len.resize(g.na);
    g.start.resize(g.na);
    int64_t total = 0;
    for (int i = 0; i < g.na; ++i) {
        const auto [lo, hi] = brange(g.a(i));
        const int o = static_cast<int>(std::floor(lo / h + 1e-9));
        const int e = static_cast<int>(std::ceil(hi / h - 1e-9));
        g.off[i] = o;
        g.len[i] = std::max(1, e - o);
        g.start[i] = total;
        total += g.len[i];
    }
    return g;
}

}  // namespace ncdl
