#include "specreg/linalg.hpp"

#include <algorithm>
#include <stdexcept>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "specreg/errors.hpp"

namespace specreg {

StarWord alternating_word(int k) {
    StarWord w;
    w.letters.reserve(2 * static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) {
        w.letters.push_back(Letter::plain);
        w.letters.push_back(Letter::star);
    }
    return w;
}

namespace {
void require_square(const ComplexMatrix& a, const char* who) {
    if (a.rows() == 0 || a.rows() != a.cols())
        throw std::invalid_argument(std::string(who) + ": need a nonempty square matrix");
}
} // namespace

Eigen::VectorXd singular_values(const ComplexMatrix& a) {
    require_square(a, "singular_values");
    Eigen::BDCSVD<ComplexMatrix> svd(a);
    if (svd.info() != Eigen::Success)
        throw NumericError("singular value decomposition did not converge (n=" +
                           std::to_string(a.rows()) + ")");
    return svd.singularValues();  // Eigen returns them descending
}

Eigen::VectorXcd eigenvalues(const ComplexMatrix& a) {
    require_square(a, "eigenvalues");
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(a, /*computeEigenvectors=*/false);
    if (solver.info() != Eigen::Success)
        throw NumericError("eigenvalue decomposition did not converge (n=" +
                           std::to_string(a.rows()) + ")");
    return solver.eigenvalues();
}

Complex word_moment(const ComplexMatrix& a, const StarWord& word) {
    require_square(a, "word_moment");
    if (word.letters.empty())
        throw std::invalid_argument("word_moment: empty word");
    ComplexMatrix product =
        word.letters.front() == Letter::plain ? a : ComplexMatrix(a.adjoint());
    for (std::size_t i = 1; i < word.letters.size(); ++i) {
        if (word.letters[i] == Letter::plain)
            product = product * a;
        else
            product = product * a.adjoint();
    }
    return normalized_trace(product);
}

SpectrumSample make_eigenvalue_sample(const ComplexMatrix& a, long trial_id,
                                      const SeedSpec& seed) {
    SpectrumSample s;
    s.kind = SpectrumSample::Kind::eigenvalues;
    s.eigenvalues = eigenvalues(a);
    s.source_n = static_cast<int>(a.rows());
    s.trial_id = trial_id;
    s.seed = seed;
    return s;
}

SpectrumSample make_singular_value_sample(const ComplexMatrix& a, long trial_id,
                                          const SeedSpec& seed) {
    SpectrumSample s;
    s.kind = SpectrumSample::Kind::singular_values;
    s.singular_values = singular_values(a);
    s.source_n = static_cast<int>(a.rows());
    s.trial_id = trial_id;
    s.seed = seed;
    return s;
}

} // namespace specreg
