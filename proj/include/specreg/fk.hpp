#pragma once

#include "specreg/linalg.hpp"
#include "specreg/seed.hpp"

namespace specreg {

/// Singular values below this floor are clamped before taking logs, so
/// grid arithmetic downstream stays finite; the clamp is reported.
inline constexpr double kSingularValueFloor = 1e-150;

/// |det a|^{1/n}, evaluated as exp of the mean log singular value.
/// A singular matrix yields exactly 0.
double fk_determinant(const ComplexMatrix& a);

struct TraceLog {
    double value = 0.0;
    bool clamped = false; // some singular value hit the floor
};

/// (1/n)·Σ ln max(sᵢ(a − λI), floor).
TraceLog trace_log_abs(const ComplexMatrix& a, Complex lambda);

/// Sequential projection lengths l₁..l_N of the columns and the running
/// "complex volumes" Vᵢ = l₁⋯lᵢ, so V_N = |det|.
struct GramVolumes {
    Eigen::VectorXd lengths;
    Eigen::VectorXd volumes;
};

GramVolumes gram_volumes(const ComplexMatrix& g);

/// Exact inverse moment E lᵢ^{−h} = n^{h/2}·Γ(n−i+1−h/2)/Γ(n−i+1) of the
/// i-th projection length of a standard Gaussian matrix. Requires
/// h < 2(n−i+1); beyond that the moment diverges (domain_error).
double l_moment_oracle(int n, int i, double h);

struct McEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    long trials = 0;
};

/// Monte Carlo mean/stderr of tr ln|G| over fresh Ginibre samples.
/// Trials are keyed by stream index, so the estimate is independent of
/// execution order.
McEstimate mc_fk_gaussian(int n, long trials, const SeedSpec& seed);

} // namespace specreg
