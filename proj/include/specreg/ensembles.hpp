#pragma once

#include <string>
#include <vector>

#include "specreg/linalg.hpp"
#include "specreg/seed.hpp"

namespace specreg {

/// Random-matrix model plus everything needed to realize it. `scale`
/// multiplies the realization, so sums like Ξ + √t·G are specs too.
struct EnsembleSpec {
    enum class Model { ginibre, gue, elliptic, nilpotent_shift, diagonal, file, sum };

    Model model = Model::ginibre;
    int n = 1;
    double tau = 0.0;                 // elliptic only, in [-1, 1]
    Eigen::VectorXcd diagonal_values; // diagonal only
    std::string path;                 // file only
    Complex scale{1.0, 0.0};
    std::vector<EnsembleSpec> terms;  // sum only

    static EnsembleSpec ginibre(int n);
    static EnsembleSpec gue(int n);
    static EnsembleSpec elliptic(int n, double tau);
    static EnsembleSpec nilpotent_shift(int n);
    static EnsembleSpec diagonal(Eigen::VectorXcd values);
    static EnsembleSpec file(std::string path);
    static EnsembleSpec sum(std::vector<EnsembleSpec> terms);

    EnsembleSpec scaled(Complex factor) const;
    std::string model_name() const;
};

/// All 2n² real coordinates independent N(0, 1/(2n)).
ComplexMatrix sample_ginibre(int n, const SeedSpec& seed);

/// Hermitian; off-diagonal real/imag parts N(0, 1/(2n)), diagonal real
/// N(0, 1/n), so E tr H² = 1.
ComplexMatrix sample_gue(int n, const SeedSpec& seed);

/// √((1+τ)/2)·H₁ + i·√((1−τ)/2)·H₂ with independent GUE H₁, H₂.
/// Interpolates Ginibre (τ=0) to GUE (τ=1); E X_ij X_ji = τ/n.
ComplexMatrix sample_elliptic(int n, double tau, const SeedSpec& seed);

/// Matrix Brownian increment over dt: entries' real/imag parts
/// independent N(0, dt/(2n)).
ComplexMatrix brownian_increment(int n, double dt, const SeedSpec& seed);

/// Ones on the first subdiagonal, zero elsewhere.
ComplexMatrix nilpotent_shift(int n);

/// Realizes the spec. Deterministic in (spec, seed); each summand of a
/// sum draws from its own lane so terms are independent.
ComplexMatrix realize(const EnsembleSpec& spec, const SeedSpec& seed);

/// Text matrix format: first line "n", then n lines of 2n floats
/// (re im re im ...), row-major. The writer emits 17 significant digits.
ComplexMatrix read_matrix_file(const std::string& path);
void write_matrix_file(const std::string& path, const ComplexMatrix& m);

} // namespace specreg
