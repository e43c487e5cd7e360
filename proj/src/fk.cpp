#include "specreg/fk.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

#include "specreg/ensembles.hpp"
#include "specreg/parallel.hpp"

namespace specreg {

double fk_determinant(const ComplexMatrix& a) {
    const Eigen::VectorXd s = singular_values(a);
    double log_sum = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        if (s[i] <= 0.0) return 0.0;
        log_sum += std::log(s[i]);
    }
    return std::exp(log_sum / static_cast<double>(s.size()));
}

TraceLog trace_log_abs(const ComplexMatrix& a, Complex lambda) {
    ComplexMatrix shifted = a;
    shifted.diagonal().array() -= lambda;
    const Eigen::VectorXd s = singular_values(shifted);

    TraceLog out;
    double log_sum = 0.0;
    for (Eigen::Index i = 0; i < s.size(); ++i) {
        double v = s[i];
        if (v < kSingularValueFloor) {
            v = kSingularValueFloor;
            out.clamped = true;
        }
        log_sum += std::log(v);
    }
    out.value = log_sum / static_cast<double>(s.size());
    return out;
}

GramVolumes gram_volumes(const ComplexMatrix& g) {
    if (g.rows() == 0 || g.rows() != g.cols())
        throw std::invalid_argument("gram_volumes: need a nonempty square matrix");
    const Eigen::Index n = g.rows();
    GramVolumes out;
    out.lengths.resize(n);
    out.volumes.resize(n);

    // Modified Gram-Schmidt: project each column against the orthonormal
    // frame built so far; the residual norm is the projection length.
    Eigen::MatrixXcd frame(n, n);
    Eigen::Index frame_size = 0;
    double running_volume = 1.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::VectorXcd v = g.col(i);
        for (Eigen::Index k = 0; k < frame_size; ++k)
            v -= frame.col(k).dot(v) * frame.col(k);
        const double len = v.norm();
        out.lengths[i] = len;
        running_volume *= len;
        out.volumes[i] = running_volume;
        if (len > 0.0) {
            frame.col(frame_size) = v / len;
            ++frame_size;
        }
    }
    return out;
}

double l_moment_oracle(int n, int i, double h) {
    if (i < 1 || i > n)
        throw std::invalid_argument("l_moment_oracle: need 1 <= i <= n");
    const double codim = static_cast<double>(n - i + 1);
    if (!(h < 2.0 * codim))
        throw std::domain_error("l_moment_oracle: moment diverges, need h < 2(n-i+1)");
    return std::exp(0.5 * h * std::log(static_cast<double>(n)) +
                    std::lgamma(codim - 0.5 * h) - std::lgamma(codim));
}

McEstimate mc_fk_gaussian(int n, long trials, const SeedSpec& seed) {
    if (trials < 2)
        throw std::invalid_argument("mc_fk_gaussian: need at least 2 trials");

    std::vector<double> values(static_cast<std::size_t>(trials));
    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t t) {
        SeedSpec stream = stream_for_trial(seed, seed.stream_id + t);
        ComplexMatrix g = sample_ginibre(n, stream);
        values[t] = trace_log_abs(g, Complex(0.0, 0.0)).value;
    });

    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(trials);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sample_var = ss / static_cast<double>(trials - 1);

    McEstimate est;
    est.mean = mean;
    est.std_error = std::sqrt(sample_var / static_cast<double>(trials));
    est.trials = trials;
    return est;
}

} // namespace specreg
