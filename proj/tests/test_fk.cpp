#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "oracles.hpp"
#include "specreg/ensembles.hpp"
#include "specreg/fk.hpp"

using namespace specreg;

namespace {
constexpr double kEulerGamma = 0.57721566490153286061;
}

TEST_CASE("fk determinant on closed-form cases") {
    CHECK(fk_determinant(ComplexMatrix::Identity(7, 7)) == doctest::Approx(1.0).epsilon(1e-14));

    Eigen::VectorXcd d(3);
    d << Complex(2.0, 0.0), Complex(0.0, 4.0), Complex(-1.0, 0.0);
    const ComplexMatrix diag = d.asDiagonal();
    CHECK(fk_determinant(diag) == doctest::Approx(2.0).epsilon(1e-13)); // (2·4·1)^(1/3)

    ComplexMatrix singular(2, 2);
    singular << Complex(1.0, 0.0), Complex(2.0, 0.0), Complex(2.0, 0.0), Complex(4.0, 0.0);
    CHECK(fk_determinant(singular) == 0.0);
}

TEST_CASE("fk determinant is multiplicative and unitary invariant") {
    const SeedSpec seed{101, 0};
    const ComplexMatrix a = sample_ginibre(6, seed);
    const ComplexMatrix b = sample_ginibre(6, SeedSpec{101, 1});
    CHECK(fk_determinant(a * b) ==
          doctest::Approx(fk_determinant(a) * fk_determinant(b)).epsilon(1e-10));

    Eigen::HouseholderQR<ComplexMatrix> qr(sample_ginibre(6, SeedSpec{101, 2}));
    const ComplexMatrix u = qr.householderQ() * ComplexMatrix::Identity(6, 6);
    CHECK(fk_determinant(u * a) == doctest::Approx(fk_determinant(a)).epsilon(1e-12));
    CHECK(fk_determinant(u) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("trace_log_abs agrees with the fk determinant") {
    const ComplexMatrix a = sample_ginibre(5, SeedSpec{103, 0});
    const Complex lambda(0.3, -0.2);
    const TraceLog tl = trace_log_abs(a, lambda);
    const ComplexMatrix shifted = a - lambda * ComplexMatrix::Identity(5, 5);
    CHECK(tl.value == doctest::Approx(std::log(fk_determinant(shifted))).epsilon(1e-12));
    CHECK_FALSE(tl.clamped);
}

TEST_CASE("trace_log_abs clamps on exact atoms") {
    Eigen::VectorXcd d(2);
    d << Complex(1.0, 0.0), Complex(3.0, 0.0);
    const ComplexMatrix a = d.asDiagonal();
    const TraceLog tl = trace_log_abs(a, Complex(1.0, 0.0));
    CHECK(tl.clamped);
    // One singular value sits on the floor, the other equals 2.
    CHECK(tl.value == doctest::Approx(0.5 * (std::log(kSingularValueFloor) + std::log(2.0)))
                          .epsilon(1e-12));
}

TEST_CASE("gram volumes of the identity are all ones") {
    const GramVolumes gv = gram_volumes(ComplexMatrix::Identity(4, 4));
    REQUIRE(gv.lengths.size() == 4);
    REQUIRE(gv.volumes.size() == 4);
    for (int i = 0; i < 4; ++i) {
        CHECK(gv.lengths(i) == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(gv.volumes(i) == doctest::Approx(1.0).epsilon(1e-14));
    }
}

TEST_CASE("gram volume product recovers the determinant modulus") {
    for (std::uint64_t s = 0; s < 6; ++s) {
        const ComplexMatrix g = sample_ginibre(7, SeedSpec{107, s});
        const GramVolumes gv = gram_volumes(g);
        double prod = 1.0;
        for (int i = 0; i < 7; ++i) {
            CHECK(gv.lengths(i) > 0.0);
            prod *= gv.lengths(i);
            CHECK(gv.volumes(i) == doctest::Approx(prod).epsilon(1e-10));
        }
        CHECK(gv.volumes(6) == doctest::Approx(std::abs(g.determinant())).epsilon(1e-8));
    }
}

TEST_CASE("gram volumes rejects non-square input") {
    ComplexMatrix m(3, 2);
    m.setZero();
    CHECK_THROWS_AS(gram_volumes(m), std::invalid_argument);
}

TEST_CASE("l moment oracle closed forms") {
    // First column of a 1×1 standard complex Gaussian: l₁² ~ Exp(1) scaled
    // by n=1, so E l₁⁻¹ = Γ(1/2) = √π.
    CHECK(l_moment_oracle(1, 1, 1.0) == doctest::Approx(std::sqrt(M_PI)).epsilon(1e-12));
    // h = 0 is the trivial moment.
    CHECK(l_moment_oracle(5, 2, 0.0) == doctest::Approx(1.0).epsilon(1e-14));
    // Last pivot at h just below the divergence threshold still finite.
    CHECK(std::isfinite(l_moment_oracle(10, 10, 1.9)));
    CHECK_THROWS_AS(l_moment_oracle(10, 10, 2.0), std::domain_error);
    CHECK_THROWS_AS(l_moment_oracle(10, 11, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(l_moment_oracle(0, 1, 1.0), std::invalid_argument);
}

TEST_CASE("l moment oracle matches monte carlo pivots") {
    const int n = 6;
    const int trials = 4000;
    Eigen::VectorXd acc = Eigen::VectorXd::Zero(n);
    for (int t = 0; t < trials; ++t) {
        const ComplexMatrix g = sample_ginibre(n, SeedSpec{109, static_cast<std::uint64_t>(t)});
        const GramVolumes gv = gram_volumes(g);
        for (int i = 0; i < n; ++i) acc(i) += 1.0 / gv.lengths(i);
    }
    for (int i = 1; i <= 3; ++i) {
        const double mc = acc(i - 1) / trials;
        const double exact = l_moment_oracle(n, i, 1.0);
        CHECK(mc == doctest::Approx(exact).epsilon(0.05));
    }
}

TEST_CASE("gaussian log determinant mean closed form") {
    // n = 1 reduces to E ln|g| for a single standard complex Gaussian.
    CHECK(oracles::fk_log_mean_exact(1) ==
          doctest::Approx(oracles::complex_gaussian_log_mean_quadrature()).epsilon(1e-8));
    CHECK(oracles::fk_log_mean_exact(1) == doctest::Approx(-kEulerGamma / 2.0).epsilon(1e-12));

    double prev = oracles::fk_log_mean_exact(1);
    for (int n = 2; n <= 64; n *= 2) {
        const double cur = oracles::fk_log_mean_exact(n);
        CHECK(cur < prev);          // decreasing in n
        CHECK(cur > -0.5);          // approaches -1/2 from above
        CHECK(std::abs(cur + 0.5) <= 0.5 / n);
        prev = cur;
    }
}

TEST_CASE("mc_fk_gaussian is unbiased against the exact mean") {
    const int n = 8;
    const long trials = 2000;
    const McEstimate est = mc_fk_gaussian(n, trials, SeedSpec{113, 0});
    CHECK(est.trials == trials);
    CHECK(est.std_error > 0.0);
    const double exact = oracles::fk_log_mean_exact(n);
    CHECK(std::abs(est.mean - exact) < 4.0 * est.std_error);
}

TEST_CASE("mc_fk_gaussian is deterministic across thread counts") {
    const SeedSpec seed{127, 0};
    const McEstimate a = mc_fk_gaussian(6, 64, seed);
    const McEstimate b = mc_fk_gaussian(6, 64, seed);
    CHECK(a.mean == b.mean);
    CHECK(a.std_error == b.std_error);

    char* saved = std::getenv("SPECREG_THREADS");
    const std::string restore = saved ? saved : "";
    setenv("SPECREG_THREADS", "1", 1);
    const McEstimate serial = mc_fk_gaussian(6, 64, seed);
    setenv("SPECREG_THREADS", "3", 1);
    const McEstimate threaded = mc_fk_gaussian(6, 64, seed);
    if (saved)
        setenv("SPECREG_THREADS", restore.c_str(), 1);
    else
        unsetenv("SPECREG_THREADS");
    CHECK(serial.mean == threaded.mean);
    CHECK(serial.std_error == threaded.std_error);
    CHECK(serial.mean == a.mean);
}

TEST_CASE("mc_fk_gaussian validates its arguments") {
    CHECK_THROWS_AS(mc_fk_gaussian(0, 10, SeedSpec{1, 0}), std::invalid_argument);
    CHECK_THROWS_AS(mc_fk_gaussian(4, 0, SeedSpec{1, 0}), std::invalid_argument);
}
