#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "specreg/seed.hpp"

namespace specreg {

template <typename Scalar>
using ComplexMat = Eigen::Matrix<std::complex<Scalar>, Eigen::Dynamic, Eigen::Dynamic>;

/// Dense square complex matrix, the carrier for every model in the library.
using ComplexMatrix = ComplexMat<double>;
using Complex = std::complex<double>;

/// One letter of a ⋆-word: the matrix itself or its conjugate transpose.
enum class Letter { plain, star };

/// Finite word over {plain, star}; must be nonempty when evaluated.
struct StarWord {
    std::vector<Letter> letters;
};

/// k repetitions of (plain, star), the words whose moments probe |a|^2.
StarWord alternating_word(int k);

/// Spectrum of one sampled matrix plus the metadata needed to reproduce it.
struct SpectrumSample {
    enum class Kind { eigenvalues, singular_values };

    Kind kind = Kind::eigenvalues;
    Eigen::VectorXcd eigenvalues;     // kind == eigenvalues, any order
    Eigen::VectorXd singular_values;  // kind == singular_values, descending
    int source_n = 0;
    long trial_id = 0;
    SeedSpec seed;
};

/// Normalized trace (1/n)·Tr a. Works on any square Eigen expression.
template <typename Derived>
std::complex<typename Eigen::NumTraits<typename Derived::Scalar>::Real>
normalized_trace(const Eigen::MatrixBase<Derived>& a) {
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    return std::complex<Real>(a.trace()) / Real(a.rows());
}

/// Singular values of a, descending. Throws NumericError if the
/// decomposition does not converge.
Eigen::VectorXd singular_values(const ComplexMatrix& a);

/// Eigenvalues of a counted with multiplicity, in no particular order.
/// Throws NumericError if the decomposition does not converge.
Eigen::VectorXcd eigenvalues(const ComplexMatrix& a);

/// tr_n of the word a^{s_1} ... a^{s_k}; star letters use the conjugate
/// transpose. Throws std::invalid_argument on an empty word.
Complex word_moment(const ComplexMatrix& a, const StarWord& word);

SpectrumSample make_eigenvalue_sample(const ComplexMatrix& a, long trial_id = 0,
                                      const SeedSpec& seed = {});
SpectrumSample make_singular_value_sample(const ComplexMatrix& a, long trial_id = 0,
                                          const SeedSpec& seed = {});

} // namespace specreg
