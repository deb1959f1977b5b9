#pragma once

#include <stdexcept>
#include <string>

#include "ncdl/operators.hpp"
#include "ncdl/symbol.hpp"

namespace ncdl {

struct GridPolicy {
    double h1 = 0.05;          // spacing for 1-D transversals
    double h2 = 0.25;          // spacing for 2-D transversals
    double R_q = 2.0;          // q-radius (in units of q_scale) kept in the box; w(R_q) = e^{-4π}
    int64_t cap = 4'000'000;   // grid points
    double const_box = 10.0;   // half-width in units of M_s when the q-point does not depend on t
};

struct SizingError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A discretized transversal: either 1-D or (ragged) 2-D.
struct Discretization {
    bool two_d = false;
    Grid1D g1;
    Grid2D g2;
    int64_t size() const { return two_d ? g2.size() : g1.size(); }
    double h() const { return two_d ? g2.h : g1.h; }
    double extent() const;  // max |coordinate| covered
    std::string describe() const;
};

Discretization make_1d(double L, double h, int64_t cap);
Discretization make_rect(double La, double Lb, double h, int64_t cap);

// Box where the kernel of π_descriptor(F) is not negligible (see GridPolicy).
Discretization default_box(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const GridPolicy& pol);

// Discretized π_descriptor(F) on the given transversal.
OpPtr build_operator(ScenarioId sc, const OrbitDescriptor& d, const Symbol& F, const Discretization& X);

// Band radius in nodes: nodes with |m h| < M_s.
int band_radius(double M_s, double h);

}  // namespace ncdl
