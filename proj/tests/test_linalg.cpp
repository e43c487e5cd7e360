#include <doctest.h>

#include <algorithm>
#include <complex>

#include "oracles.hpp"
#include "specreg/ensembles.hpp"
#include "specreg/linalg.hpp"
#include "specreg/seed.hpp"

using namespace specreg;

namespace {

ComplexMatrix random_matrix(int n, std::uint64_t seed) {
    return sample_ginibre(n, SeedSpec{seed, 0});
}

// Unitary factor of a random matrix; Householder QR keeps it exactly unitary
// to rounding.
ComplexMatrix random_unitary(int n, std::uint64_t seed) {
    Eigen::HouseholderQR<ComplexMatrix> qr(random_matrix(n, seed));
    return qr.householderQ() * ComplexMatrix::Identity(n, n);
}

std::vector<Complex> sorted_by_re_im(const Eigen::VectorXcd& v) {
    std::vector<Complex> out(v.data(), v.data() + v.size());
    std::sort(out.begin(), out.end(), [](Complex a, Complex b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
    return out;
}

} // namespace

TEST_CASE("alternating_word builds plain-star pairs") {
    const StarWord w = alternating_word(3);
    REQUIRE(w.letters.size() == 6);
    for (std::size_t i = 0; i < w.letters.size(); ++i)
        CHECK(w.letters[i] == (i % 2 == 0 ? Letter::plain : Letter::star));
    CHECK(alternating_word(0).letters.empty());
}

TEST_CASE("normalized_trace of identity is one") {
    const ComplexMatrix id = ComplexMatrix::Identity(5, 5);
    CHECK(normalized_trace(id) == Complex(1.0, 0.0));
}

TEST_CASE("singular_values match the 2x2 closed form") {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
        const ComplexMatrix m = random_matrix(2, seed);
        const Eigen::VectorXd s = singular_values(m);
        const Eigen::Vector2d ref = oracles::svd2x2(m);
        REQUIRE(s.size() == 2);
        CHECK(s(0) >= s(1));
        CHECK(s(0) == doctest::Approx(ref(0)).epsilon(1e-12));
        CHECK(s(1) == doctest::Approx(ref(1)).epsilon(1e-12));
    }
}

TEST_CASE("singular_values of a diagonal matrix are the moduli") {
    Eigen::VectorXcd d(3);
    d << Complex(3.0, 4.0), Complex(0.0, -2.0), Complex(0.5, 0.0);
    const ComplexMatrix m = d.asDiagonal();
    const Eigen::VectorXd s = singular_values(m);
    CHECK(s(0) == doctest::Approx(5.0).epsilon(1e-14));
    CHECK(s(1) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(s(2) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("singular_values rejects non-square input") {
    ComplexMatrix m(2, 3);
    m.setZero();
    CHECK_THROWS_AS(singular_values(m), std::invalid_argument);
    CHECK_THROWS_AS(eigenvalues(m), std::invalid_argument);
    CHECK_THROWS_AS(singular_values(ComplexMatrix()), std::invalid_argument);
}

TEST_CASE("eigenvalues of a diagonal matrix are its entries") {
    Eigen::VectorXcd d(4);
    d << Complex(1.0, 1.0), Complex(-2.0, 0.0), Complex(0.0, 3.0), Complex(0.5, -0.5);
    const ComplexMatrix m = d.asDiagonal();
    const auto got = sorted_by_re_im(eigenvalues(m));
    const auto want = sorted_by_re_im(d);
    for (std::size_t i = 0; i < want.size(); ++i)
        CHECK(std::abs(got[i] - want[i]) < 1e-13);
}

TEST_CASE("eigenvalue sum equals the trace") {
    const ComplexMatrix m = random_matrix(40, 11);
    const Eigen::VectorXcd ev = eigenvalues(m);
    CHECK(std::abs(ev.sum() - m.trace()) < 1e-10);
}

TEST_CASE("word_moment is evaluated letter by letter") {
    ComplexMatrix a(2, 2);
    a << Complex(0.0, 1.0), Complex(2.0, 0.0), Complex(0.0, 0.0), Complex(1.0, -1.0);
    StarWord w;
    w.letters = {Letter::plain, Letter::star};
    // tr a a* / 2 = (|i|^2 + |2|^2 + |1-i|^2) / 2
    CHECK(word_moment(a, w) == Complex(3.5, 0.0));
    StarWord single;
    single.letters = {Letter::star};
    CHECK(std::abs(word_moment(a, single) - std::conj(normalized_trace(a))) < 1e-15);
}

TEST_CASE("word_moment rejects empty words") {
    const ComplexMatrix a = ComplexMatrix::Identity(2, 2);
    CHECK_THROWS_AS(word_moment(a, StarWord{}), std::invalid_argument);
}

TEST_CASE("word moments are unitary invariant") {
    const ComplexMatrix a = random_matrix(12, 21);
    const ComplexMatrix u = random_unitary(12, 22);
    const ComplexMatrix b = u * a * u.adjoint();
    for (int k = 1; k <= 3; ++k) {
        const StarWord w = alternating_word(k);
        CHECK(std::abs(word_moment(a, w) - word_moment(b, w)) < 1e-12);
    }
    StarWord mixed;
    mixed.letters = {Letter::plain, Letter::plain, Letter::star};
    CHECK(std::abs(word_moment(a, mixed) - word_moment(b, mixed)) < 1e-12);
}

TEST_CASE("alternating word moments equal singular value power sums") {
    const ComplexMatrix a = random_matrix(10, 33);
    const Eigen::VectorXd s = singular_values(a);
    for (int k = 1; k <= 3; ++k) {
        double power_sum = 0.0;
        for (Eigen::Index i = 0; i < s.size(); ++i) power_sum += std::pow(s(i), 2 * k);
        power_sum /= static_cast<double>(s.size());
        const Complex m = word_moment(a, alternating_word(k));
        CHECK(std::abs(m.real() - power_sum) < 1e-11);
        CHECK(std::abs(m.imag()) < 1e-12);
    }
}

TEST_CASE("spectrum samples carry their provenance") {
    const ComplexMatrix a = random_matrix(6, 5);
    const SeedSpec seed{5, 7};
    const SpectrumSample ev = make_eigenvalue_sample(a, 3, seed);
    CHECK(ev.kind == SpectrumSample::Kind::eigenvalues);
    CHECK(ev.eigenvalues.size() == 6);
    CHECK(ev.source_n == 6);
    CHECK(ev.trial_id == 3);
    CHECK(ev.seed.root_seed == 5);
    CHECK(ev.seed.stream_id == 7);

    const SpectrumSample sv = make_singular_value_sample(a, 4, seed);
    CHECK(sv.kind == SpectrumSample::Kind::singular_values);
    REQUIRE(sv.singular_values.size() == 6);
    for (Eigen::Index i = 0; i + 1 < sv.singular_values.size(); ++i)
        CHECK(sv.singular_values(i) >= sv.singular_values(i + 1));
}

TEST_CASE("seed derivation separates streams and lanes") {
    const SeedSpec a{1, 0};
    const SeedSpec b{1, 1};
    const SeedSpec c{2, 0};
    CHECK(derive_seed(a) != derive_seed(b));
    CHECK(derive_seed(a) != derive_seed(c));
    CHECK(derive_seed(a, 0) != derive_seed(a, 1));
    CHECK(derive_seed(a) == derive_seed(SeedSpec{1, 0}));
    CHECK(stream_for_trial(a, 9).stream_id == 9);
    CHECK(stream_for_trial(a, 9).root_seed == 1);
}
