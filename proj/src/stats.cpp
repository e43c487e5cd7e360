#include "specreg/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "specreg/seed.hpp"

namespace specreg {

MeanStdError mean_std_error(const std::vector<double>& values) {
    if (values.empty()) throw std::invalid_argument("mean_std_error: empty sample");
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

namespace {

// Coordinates are held column-wise in float for throughput; distances are
// accumulated in double. The permutation loop below visits every pair of
// pooled points per shuffle, so this inner kernel dominates the runtime.
struct PointsF {
    int dim = 0;
    std::vector<std::vector<float>> coord; // coord[d][i]

    explicit PointsF(const Eigen::MatrixXd& m)
        : dim(static_cast<int>(m.cols())), coord(static_cast<size_t>(m.cols())) {
        for (int d = 0; d < dim; ++d) {
            coord[static_cast<size_t>(d)].resize(static_cast<size_t>(m.rows()));
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                coord[static_cast<size_t>(d)][static_cast<size_t>(i)] = static_cast<float>(m(i, d));
        }
    }
};

template <int Dim>
double pair_sum_block(const PointsF& p, const std::vector<int>& idx, size_t lo, size_t hi) {
    double total = 0.0;
    for (size_t i = lo; i < hi; ++i) {
        float ci[Dim];
        for (int d = 0; d < Dim; ++d) ci[d] = p.coord[static_cast<size_t>(d)][static_cast<size_t>(idx[i])];
        double acc = 0.0;
        for (size_t j = i + 1; j < hi; ++j) {
            float s = 0.0f;
            for (int d = 0; d < Dim; ++d) {
                const float diff = p.coord[static_cast<size_t>(d)][static_cast<size_t>(idx[j])] - ci[d];
                s += diff * diff;
            }
            acc += std::sqrt(static_cast<double>(s));
        }
        total += acc;
    }
    return total;
}

double pair_sum_generic(const PointsF& p, const std::vector<int>& idx, size_t lo, size_t hi) {
    double total = 0.0;
    const int dim = p.dim;
    for (size_t i = lo; i < hi; ++i) {
        for (size_t j = i + 1; j < hi; ++j) {
            float s = 0.0f;
            for (int d = 0; d < dim; ++d) {
                const float diff = p.coord[static_cast<size_t>(d)][static_cast<size_t>(idx[j])] -
                                   p.coord[static_cast<size_t>(d)][static_cast<size_t>(idx[i])];
                s += diff * diff;
            }
            total += std::sqrt(static_cast<double>(s));
        }
    }
    return total;
}

double pair_sum(const PointsF& p, const std::vector<int>& idx, size_t lo, size_t hi) {
    switch (p.dim) {
        case 1: return pair_sum_block<1>(p, idx, lo, hi);
        case 2: return pair_sum_block<2>(p, idx, lo, hi);
        case 3: return pair_sum_block<3>(p, idx, lo, hi);
        default: return pair_sum_generic(p, idx, lo, hi);
    }
}

double point_distance(const Eigen::MatrixXd& a, Eigen::Index i, const Eigen::MatrixXd& b, Eigen::Index j) {
    return (a.row(i) - b.row(j)).norm();
}

} // namespace

double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance: dimension mismatch");
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("energy_distance: empty sample");
    const size_t na = static_cast<size_t>(a.rows());
    const size_t nb = static_cast<size_t>(b.rows());

    Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
    pooled.topRows(a.rows()) = a;
    pooled.bottomRows(b.rows()) = b;
    PointsF pts(pooled);
    std::vector<int> idx(na + nb);
    std::iota(idx.begin(), idx.end(), 0);

    const double within_a = pair_sum(pts, idx, 0, na);
    const double within_b = pair_sum(pts, idx, na, na + nb);
    const double total = pair_sum(pts, idx, 0, na + nb);
    const double cross = total - within_a - within_b;

    return 2.0 * cross / (static_cast<double>(na) * static_cast<double>(nb)) -
           2.0 * within_a / (static_cast<double>(na) * static_cast<double>(na)) -
           2.0 * within_b / (static_cast<double>(nb) * static_cast<double>(nb));
}

double energy_distance_weighted(const Eigen::MatrixXd& a, const Eigen::VectorXd& wa,
                                const Eigen::MatrixXd& b, const Eigen::VectorXd& wb) {
    if (a.cols() != b.cols()) throw std::invalid_argument("energy_distance_weighted: dimension mismatch");
    if (a.rows() != wa.size() || b.rows() != wb.size())
        throw std::invalid_argument("energy_distance_weighted: weight count mismatch");
    if (a.rows() == 0 || b.rows() == 0) throw std::invalid_argument("energy_distance_weighted: empty sample");

    double cross = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        double acc = 0.0;
        for (Eigen::Index j = 0; j < b.rows(); ++j) acc += wb(j) * point_distance(a, i, b, j);
        cross += wa(i) * acc;
    }
    double within_a = 0.0;
    for (Eigen::Index i = 0; i < a.rows(); ++i)
        for (Eigen::Index j = i + 1; j < a.rows(); ++j)
            within_a += 2.0 * wa(i) * wa(j) * point_distance(a, i, a, j);
    double within_b = 0.0;
    for (Eigen::Index i = 0; i < b.rows(); ++i)
        for (Eigen::Index j = i + 1; j < b.rows(); ++j)
            within_b += 2.0 * wb(i) * wb(j) * point_distance(b, i, b, j);

    return 2.0 * cross - within_a - within_b;
}

EnergyTest energy_permutation_test(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b,
                                   int permutations, double alpha, std::uint64_t seed) {
    if (a.rows() != b.rows()) throw std::invalid_argument("energy_permutation_test: unequal sample sizes");
    if (a.cols() != b.cols()) throw std::invalid_argument("energy_permutation_test: dimension mismatch");
    if (permutations < 1) throw std::invalid_argument("energy_permutation_test: need at least one permutation");
    if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("energy_permutation_test: alpha in (0,1)");

    const size_t n = static_cast<size_t>(a.rows());
    const size_t total_n = 2 * n;

    Eigen::MatrixXd pooled(a.rows() + b.rows(), a.cols());
    pooled.topRows(a.rows()) = a;
    pooled.bottomRows(b.rows()) = b;
    PointsF pts(pooled);

    std::vector<int> idx(total_n);
    std::iota(idx.begin(), idx.end(), 0);
    const double grand_total = pair_sum(pts, idx, 0, total_n);

    const double inv_nn = 1.0 / (static_cast<double>(n) * static_cast<double>(n));
    auto statistic_for = [&](const std::vector<int>& order) {
        const double wa = pair_sum(pts, order, 0, n);
        const double wb = pair_sum(pts, order, n, total_n);
        const double cross = grand_total - wa - wb;
        return 2.0 * inv_nn * (cross - wa - wb);
    };

    EnergyTest result;
    result.permutations = permutations;
    result.statistic = statistic_for(idx);

    auto engine = make_engine({seed, 0});
    std::vector<double> permuted(static_cast<size_t>(permutations));
    for (int p = 0; p < permutations; ++p) {
        std::shuffle(idx.begin(), idx.end(), engine);
        permuted[static_cast<size_t>(p)] = statistic_for(idx);
    }
    std::sort(permuted.begin(), permuted.end());
    // ceil((1-alpha)(B+1))-th smallest, 1-based; clamp into range.
    const int rank = std::min<int>(permutations,
        std::max<int>(1, static_cast<int>(std::ceil((1.0 - alpha) * (permutations + 1)))));
    result.critical_value = permuted[static_cast<size_t>(rank - 1)];
    result.below_critical = result.statistic < result.critical_value;
    return result;
}

} // namespace specreg
