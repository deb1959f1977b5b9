#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "ncdl/operators.hpp"

namespace ncdl {

struct NormOptions {
    double tol = 1e-7;           // relative residual ‖A*Av − λv‖/λ
    double abs_floor = 1e-12;    // or ‖A*Av − λv‖ ≤ abs_floor², i.e. the norm is fixed to ~abs_floor
    int max_iter = 300;          // matvec pairs per seed
    uint64_t seed = 0x5eed0001;
    uint64_t restart_seed = 0x5eed0002;
    std::string method = "auto";  // auto | dense-svd | lanczos | power-iteration
    int64_t dense_limit = 600;    // dense eigenvalue of M*M when N ≤ this
    double memory_budget = 1.2e9;  // bytes for the Krylov basis
};

struct NormEstimate {
    double value = 0;
    std::string method;
    double residual = 0;
    int iterations = 0;
    bool converged = true;
};

struct NonConvergence : std::runtime_error {
    using std::runtime_error::runtime_error;
};

NormEstimate op_norm(const LinearOperator& A, const NormOptions& opt = {});

// Midpoint rule for ∫|f| over [lo, hi]; (hi − lo)/h must be an integer.
double l1_quadrature(const std::function<double(double)>& f, double lo, double hi, double h);

// |op_norm(builder(h)) − op_norm(builder(h/2))|
double refine_check(const std::function<OpPtr(double)>& builder, double h, const NormOptions& opt = {});

// Deterministic pseudo-random unit vector (platform independent).
CVec seeded_unit_vector(int64_t n, uint64_t seed);

}  // namespace ncdl
