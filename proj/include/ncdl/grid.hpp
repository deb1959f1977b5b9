#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

namespace ncdl {

// Midpoint nodes lo + (i + 1/2) h, i = 0..n-1, on [lo, lo + n h].
struct Grid1D {
    double lo = 0;
    double h = 1;
    int n = 0;

    double x(int i) const { return lo + (i + 0.5) * h; }
    double hi() const { return lo + n * h; }
    int64_t size() const { return n; }

    // (hi - lo)/h must be a positive integer (up to 1e-9 relative).
    static Grid1D make(double lo, double hi, double h);
    // Smallest grid [-L', L'] ⊇ [-L, L] with L' a multiple of h.
    static Grid1D symmetric(double L, double h);
};

// Ragged 2-D grid: row ia has a-coordinate a0 + (ia + 1/2) h and len[ia] nodes with
// b-coordinates b0 + (off[ia] + ib + 1/2) h. All rows share the b-lattice, so node
// differences are integer multiples of h in both directions. Storage is row-major.
struct Grid2D {
    double a0 = 0, b0 = 0, h = 1;
    int na = 0;
    std::vector<int> off, len;
    std::vector<int64_t> start;

    double a(int ia) const { return a0 + (ia + 0.5) * h; }
    double b(int ia, int ib) const { return b0 + (off[ia] + ib + 0.5) * h; }
    int64_t size() const { return start.empty() ? 0 : start.back() + len.back(); }

    // [-La, La] x [-Lb, Lb], both snapped outward to multiples of h.
    static Grid2D rect(double La, double Lb, double h);
    // a in [-La, La]; row with centre a covers brange(a) = [lo, hi] (snapped outward).
    static Grid2D ragged(double La, double h, const std::function<std::pair<double, double>(double)>& brange);
};

}  // namespace ncdl
