#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

namespace specreg {

struct MeanStdError {
    double mean = 0.0;
    double std_error = 0.0;
};

/// Sample mean and standard error (sample stddev / sqrt(count)).
MeanStdError mean_std_error(const std::vector<double>& values);

/// Two-sample energy distance 2·E|X−Y| − E|X−X'| − E|Y−Y'| between point
/// clouds (one row per point, d columns). V-statistic form; nonnegative up
/// to rounding, zero iff the clouds coincide.
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Weighted variant; weights must each sum to 1.
double energy_distance_weighted(const Eigen::MatrixXd& a, const Eigen::VectorXd& wa,
                                const Eigen::MatrixXd& b, const Eigen::VectorXd& wb);

struct EnergyTest {
    double statistic = 0.0;      // observed energy distance
    double critical_value = 0.0; // permutation quantile at the given level
    bool below_critical = false;
    int permutations = 0;
};

/// Label-permutation test of "same law" for two equal-weight samples.
/// critical_value is the ceil((1-alpha)(B+1))-th order statistic of the
/// permuted energy distances, the standard exact-test threshold.
EnergyTest energy_permutation_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   int permutations, double alpha, std::uint64_t seed);

} // namespace specreg
