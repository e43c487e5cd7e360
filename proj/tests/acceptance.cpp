// Acceptance gate. Each criterion below is an end-to-end check of a shipped
// claim, run at its stated tolerance and runtime budget. Every criterion
// prints exactly one PASS/FAIL line with the measured numbers; the binary
// exits nonzero if any fail. Seeds are pinned so a green run stays green.

#include <chrono>
#include <cinttypes>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "specreg/brown.hpp"
#include "specreg/ensembles.hpp"
#include "specreg/fk.hpp"
#include "specreg/flow.hpp"
#include "specreg/linalg.hpp"
#include "specreg/pipeline.hpp"
#include "specreg/stats.hpp"

using namespace specreg;

namespace {

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list args;
    va_start(args, f);
    std::vsnprintf(buf, sizeof buf, f, args);
    va_end(args);
    return buf;
}

std::vector<Complex> to_points(const Eigen::VectorXcd& v) {
    return std::vector<Complex>(v.data(), v.data() + v.size());
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Unitary factor of a square Ginibre draw.
ComplexMatrix random_unitary(int n, const SeedSpec& seed) {
    const ComplexMatrix g = sample_ginibre(n, seed);
    return Eigen::HouseholderQR<ComplexMatrix>(g).householderQ();
}

// Three singular values with order-one gaps between the squares, so the
// perturbation formula and the repulsion Laplacian stay well conditioned.
Eigen::Vector3d gapped_triple(std::mt19937_64& engine) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::Vector3d s;
    s << 2.5 + u(engine), 1.5 + 0.7 * u(engine), 0.5 + 0.6 * u(engine);
    return s;
}

bool criterion1(std::string& detail) {
    const McEstimate est = mc_fk_gaussian(200, 20, SeedSpec{11190, 0});
    detail = fmt("mean %.5f (se %.5f), want in [-0.55, -0.45]", est.mean, est.std_error);
    return est.mean >= -0.55 && est.mean <= -0.45;
}

bool criterion2(std::string& detail) {
    const int n = 10;
    const long trials = 100000;
    std::vector<double> inv_first, inv_last;
    inv_first.reserve(trials);
    inv_last.reserve(trials);
    const SeedSpec root{22334, 0};
    for (long trial = 0; trial < trials; ++trial) {
        const GramVolumes gv = gram_volumes(sample_ginibre(n, stream_for_trial(root, trial)));
        inv_first.push_back(1.0 / gv.lengths(0));
        inv_last.push_back(1.0 / gv.lengths(n - 1));
    }
    const MeanStdError m1 = mean_std_error(inv_first);
    const MeanStdError mn = mean_std_error(inv_last);
    const double want1 = l_moment_oracle(n, 1, 1.0);
    const double wantn = l_moment_oracle(n, n, 1.0);
    const double z1 = std::abs(m1.mean - want1) / m1.std_error;
    const double zn = std::abs(mn.mean - wantn) / mn.std_error;
    detail = fmt("E 1/l_1 %.4f vs %.4f (z %.2f), E 1/l_10 %.4f vs %.4f (z %.2f), gate 3",
                 m1.mean, want1, z1, mn.mean, wantn, zn);
    return z1 <= 3.0 && zn <= 3.0;
}

bool criterion3(std::string& detail) {
    Eigen::VectorXd lower(2), upper(2);
    lower << 1.0, 0.5;
    upper << 2.0, 1.0;
    long broken_order = 0, broken_sum = 0, broken_log = 0;
    double min_gap = 1e300;
    for (long trial = 0; trial < 1000; ++trial) {
        const CoupledComparison cc =
            coupled_compare(lower, upper, 0.5, 1e-3, SeedSpec{33445, static_cast<std::uint64_t>(trial)});
        if (!cc.preserved) ++broken_order;
        min_gap = std::min(min_gap, cc.min_gap);
        for (size_t k = 0; k < cc.lower.states.size(); ++k) {
            const Eigen::VectorXd& lo = cc.lower.states[k].values;
            const Eigen::VectorXd& hi = cc.upper.states[k].values;
            if (hi.sum() < lo.sum()) ++broken_sum;
            if (hi.array().log1p().sum() < lo.array().log1p().sum()) ++broken_log;
        }
    }
    detail = fmt("order breaks %ld, tr r breaks %ld, tr log(1+r) breaks %ld, min gap %.4f over 1000 seeds",
                 broken_order, broken_sum, broken_log, min_gap);
    return broken_order == 0 && broken_sum == 0 && broken_log == 0 && min_gap > 0.0;
}

bool criterion4(std::string& detail) {
    const int count = 10000;
    Eigen::VectorXd initial(2);
    initial << 2.0, 1.0;
    FlowOptions options;
    options.record_states = false;
    Eigen::MatrixXd endpoints(count, 2), direct(count, 2);
    for (int trial = 0; trial < count; ++trial) {
        const FlowTrajectory run = simulate_flow(initial, 0.25, 5e-4,
                                                 SeedSpec{44556, static_cast<std::uint64_t>(trial)}, options);
        endpoints(trial, 0) = run.final_state().values(0);
        endpoints(trial, 1) = run.final_state().values(1);
        ComplexMatrix m = 0.5 * sample_ginibre(2, SeedSpec{44557, static_cast<std::uint64_t>(trial)});
        m(0, 0) += 2.0;
        m(1, 1) += 1.0;
        const Eigen::VectorXd s = singular_values(m);
        direct(trial, 0) = s(0);
        direct(trial, 1) = s(1);
    }
    const EnergyTest test = energy_permutation_test(endpoints, direct, 99, 0.01, 44558);
    detail = fmt("energy statistic %.3e vs 1%% critical %.3e (99 permutations)", test.statistic,
                 test.critical_value);
    return test.below_critical;
}

bool criterion5(std::string& detail) {
    const std::vector<double> eps = {1e-1, 3e-2, 1e-2, 3e-3, 1e-3};
    const int reps = 50;
    std::vector<double> mean_err(eps.size(), 0.0);
    for (int rep = 0; rep < reps; ++rep) {
        auto engine = make_engine(SeedSpec{55667, static_cast<std::uint64_t>(rep)});
        const Eigen::Vector3d s = gapped_triple(engine);
        const ComplexMatrix u = random_unitary(3, SeedSpec{55668, static_cast<std::uint64_t>(rep)});
        const ComplexMatrix v = random_unitary(3, SeedSpec{55669, static_cast<std::uint64_t>(rep)});
        ComplexMatrix dir = sample_ginibre(3, SeedSpec{55670, static_cast<std::uint64_t>(rep)});
        dir /= dir.norm();
        const ComplexMatrix base = u * s.asDiagonal() * v.adjoint();
        for (size_t e = 0; e < eps.size(); ++e) {
            const ComplexMatrix delta = eps[e] * dir;
            const Eigen::VectorXd predicted = sv_perturbation(s, u.adjoint() * delta * v);
            const Eigen::VectorXd actual = singular_values(base + delta);
            mean_err[e] += (predicted - actual).cwiseAbs().maxCoeff() / reps;
        }
    }
    // Least-squares slope of log err against log eps.
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (size_t e = 0; e < eps.size(); ++e) {
        const double x = std::log(eps[e]), y = std::log(mean_err[e]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    const double m = static_cast<double>(eps.size());
    const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
    detail = fmt("log-log error slope %.3f over eps 1e-1..1e-3, want in [2.7, 3.3]", slope);
    return slope >= 2.7 && slope <= 3.3;
}

bool criterion6(std::string& detail) {
    const auto log_gaps = [](const ComplexMatrix& m) {
        const Eigen::VectorXd s = singular_values(m);
        double acc = 0.0;
        for (int i = 0; i < s.size(); ++i)
            for (int j = i + 1; j < s.size(); ++j) acc += std::log(std::abs(s(i) * s(i) - s(j) * s(j)));
        return acc;
    };
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        auto engine = make_engine(SeedSpec{66778, static_cast<std::uint64_t>(k)});
        const Eigen::Vector3d s = gapped_triple(engine);
        const ComplexMatrix u = random_unitary(3, SeedSpec{66779, static_cast<std::uint64_t>(k)});
        const ComplexMatrix v = random_unitary(3, SeedSpec{66780, static_cast<std::uint64_t>(k)});
        const ComplexMatrix m = u * s.asDiagonal() * v.adjoint();
        const double closed = repulsion_laplacian(singular_values(m));
        const double fd = oracles::finite_difference_laplacian(log_gaps, m, 1e-3);
        worst = std::max(worst, std::abs(closed - fd) / std::abs(closed));
    }
    detail = fmt("worst relative error %.2e over 20 random 3x3 matrices, gate 1e-3", worst);
    return worst <= 1e-3;
}

bool criterion7(std::string& detail) {
    const ComplexMatrix shift = nilpotent_shift(100);
    const ReferenceMeasure circle = oracle_brown(BrownOracle::haar_unitary());
    const double root_t = std::sqrt(1e-2);
    double mean_fraction = 0.0, mean_distance = 0.0;
    for (int trial = 0; trial < 10; ++trial) {
        const ComplexMatrix m =
            shift + root_t * sample_ginibre(100, SeedSpec{77889, static_cast<std::uint64_t>(trial)});
        const Eigen::VectorXcd ev = eigenvalues(m);
        long in_annulus = 0;
        for (Eigen::Index i = 0; i < ev.size(); ++i) {
            const double r = std::abs(ev(i));
            if (r >= 0.75 && r <= 1.15) ++in_annulus;
        }
        mean_fraction += static_cast<double>(in_annulus) / static_cast<double>(ev.size()) / 10.0;
        mean_distance += measure_distance(EmpiricalMeasure::from_points(to_points(ev)), circle,
                                          DistanceMethod::radial_ks) / 10.0;
    }
    detail = fmt("annulus fraction %.3f (want >= 0.9), mean radial_ks %.4f (want <= 0.1)",
                 mean_fraction, mean_distance);
    return mean_fraction >= 0.9 && mean_distance <= 0.1;
}

bool criterion8(std::string& detail) {
    const std::vector<double> t_list = {1e-40, 1e-10, 1e-2, 0.3};
    const SweepResult sweep = sweep_t(EnsembleSpec::nilpotent_shift(100), 100, t_list, 10,
                                      BrownOracle::haar_unitary(), DistanceMethod::radial_ks, 88990);
    bool minimal = true;
    for (size_t i = 0; i < sweep.rows.size(); ++i)
        if (i != 2 && !(sweep.rows[2].mean_distance < sweep.rows[i].mean_distance)) minimal = false;
    const double median = sweep.rows[1].median_modulus;
    detail = fmt("distances %.3f / %.3f / %.3f / %.3f, median |ev| at t=1e-10 %.3f (want 0.89 +/- 0.06)",
                 sweep.rows[0].mean_distance, sweep.rows[1].mean_distance, sweep.rows[2].mean_distance,
                 sweep.rows[3].mean_distance, median);
    return minimal && median >= 0.83 && median <= 0.95;
}

bool criterion9(std::string& detail) {
    const ComplexMatrix g = sample_ginibre(500, SeedSpec{99001, 0});
    const double dist = measure_distance(EmpiricalMeasure::from_points(to_points(eigenvalues(g))),
                                         oracle_brown(BrownOracle::circular_scaled(1.0)),
                                         DistanceMethod::radial_ks);
    const Eigen::VectorXd s = singular_values(g);
    double worst_rel = 0.0;
    for (int k = 1; k <= 5; ++k) {
        const double moment = s.array().pow(2 * k).mean();
        worst_rel = std::max(worst_rel, std::abs(moment - oracles::catalan(k)) / oracles::catalan(k));
    }
    detail = fmt("radial_ks %.4f (gate 0.05), worst Catalan moment error %.3f (gate 0.05)", dist,
                 worst_rel);
    return dist <= 0.05 && worst_rel <= 0.05;
}

bool criterion10(std::string& detail) {
    const int n = 16;
    const GridSpec grid; // default window, h = 0.032
    const double guard = 4.0 * grid.spacing();
    double worst_mass = 0.0;
    for (int k = 0; k < 20; ++k) {
        auto engine = make_engine(SeedSpec{10010, static_cast<std::uint64_t>(k)});
        std::uniform_real_distribution<double> box(-1.2, 1.2), off(-0.25, 0.25), rad(0.5, 0.9);
        const Complex center(off(engine), off(engine));
        const double radius = rad(engine);
        Eigen::VectorXcd diag(n);
        for (int i = 0; i < n; ++i) {
            Complex z;
            do {
                z = Complex(box(engine), box(engine));
            } while (std::abs(std::abs(z - center) - radius) < guard);
            diag(i) = z;
        }
        ComplexMatrix m = ComplexMatrix::Zero(n, n);
        m.diagonal() = diag;
        const BrownDensityGrid density = brown_density(log_potential_field(m, grid));
        const double got = region_mass(density, [&](Complex z) { return std::abs(z - center) <= radius; });
        long inside = 0;
        for (int i = 0; i < n; ++i)
            if (std::abs(diag(i) - center) <= radius) ++inside;
        worst_mass = std::max(worst_mass, std::abs(got - static_cast<double>(inside) / n));
    }

    const GridSpec fine{Complex(0, 0), 1.6, 161}; // h = 0.02
    const BrownDensityGrid disk =
        brown_density(log_potential_field(BrownOracle::circular_scaled(1.0), fine));
    const double h = fine.spacing();
    double worst_density = 0.0;
    for (int iy = 0; iy < disk.grid.nodes; ++iy) {
        for (int ix = 0; ix < disk.grid.nodes; ++ix) {
            const Complex z = disk.grid.node(ix, iy);
            if (std::abs(z) <= 1.0 - 3.0 * h)
                worst_density = std::max(worst_density, std::abs(disk.density(iy, ix) * M_PI - 1.0));
        }
    }
    detail = fmt("worst region-mass error %.4f (gate 0.05), worst interior density deviation %.4f of 1/pi (gate 0.05)",
                 worst_mass, worst_density);
    return worst_mass <= 0.05 && worst_density <= 0.05;
}

bool criterion11(std::string& detail) {
    const std::vector<double> ts = {0.01, 0.1, 0.5, 1.0};
    const ComplexMatrix shift = nilpotent_shift(20);
    std::vector<std::vector<double>> samples(ts.size());
    for (long trial = 0; trial < 200; ++trial) {
        const ComplexMatrix g = sample_ginibre(20, SeedSpec{11011, static_cast<std::uint64_t>(trial)});
        for (size_t k = 0; k < ts.size(); ++k)
            samples[k].push_back(trace_log_abs(shift + std::sqrt(ts[k]) * g, Complex(0.5, 0)).value);
    }
    std::vector<MeanStdError> stats;
    for (const auto& v : samples) stats.push_back(mean_std_error(v));
    bool monotone = true;
    for (size_t k = 0; k + 1 < stats.size(); ++k) {
        const double slack = 2.0 * std::hypot(stats[k].std_error, stats[k + 1].std_error);
        if (stats[k + 1].mean < stats[k].mean - slack) monotone = false;
    }
    detail = fmt("means %.4f / %.4f / %.4f / %.4f across t = 0.01, 0.1, 0.5, 1", stats[0].mean,
                 stats[1].mean, stats[2].mean, stats[3].mean);
    return monotone;
}

bool criterion12(std::string& detail) {
    namespace fs = std::filesystem;
    const fs::path base = fs::temp_directory_path() / "specreg-acceptance";
    fs::remove_all(base);
    fs::create_directories(base);

    ExperimentConfig config;
    config.ensemble = EnsembleSpec::ginibre(8);
    config.schedule = Schedule::fixed(0.1);
    config.n_list = {24, 32};
    config.trials = 3;
    config.target = BrownOracle::circular_scaled(1.1);
    config.seed = 121212;

    const auto run_to = [&](const fs::path& dir) {
        ExperimentReport report = run_regularization(config);
        emit_report(report, dir.string());
        return slurp(dir / "report.json");
    };
    const std::string first = run_to(base / "a");
    const std::string second = run_to(base / "b");

    const char* saved = std::getenv("SPECREG_THREADS");
    const std::string saved_value = saved ? saved : "";
    setenv("SPECREG_THREADS", "3", 1);
    const std::string threaded = run_to(base / "c");
    if (saved)
        setenv("SPECREG_THREADS", saved_value.c_str(), 1);
    else
        unsetenv("SPECREG_THREADS");

    const std::string csv_a = slurp(base / "a" / "cells" / "n24_trial0_eigenvalues.csv");
    const std::string csv_c = slurp(base / "c" / "cells" / "n24_trial0_eigenvalues.csv");

    const auto sweep_once = [] {
        return sweep_to_json(sweep_t(EnsembleSpec::nilpotent_shift(40), 40, {1e-3, 1e-1}, 2,
                                     BrownOracle::haar_unitary(), DistanceMethod::radial_ks, 777));
    };
    const std::string sweep1 = sweep_once();
    const std::string sweep2 = sweep_once();
    fs::remove_all(base);

    const bool report_stable = !first.empty() && first == second && first == threaded;
    const bool csv_stable = !csv_a.empty() && csv_a == csv_c;
    const bool sweep_stable = !sweep1.empty() && sweep1 == sweep2;
    detail = fmt("report rerun %s, report across thread counts %s, cell csv %s, sweep json %s",
                 first == second ? "identical" : "DIFFERS", first == threaded ? "identical" : "DIFFERS",
                 csv_stable ? "identical" : "DIFFERS", sweep_stable ? "identical" : "DIFFERS");
    return report_stable && csv_stable && sweep_stable;
}

struct Criterion {
    int id;
    const char* label;
    double budget_seconds; // 0 = no stated budget
    bool (*run)(std::string&);
};

const Criterion kCriteria[] = {
    {1, "fk determinant of Gaussian matrices", 30, criterion1},
    {2, "inverse projection-length moments", 60, criterion2},
    {3, "monotone coupling of the singular-value flow", 120, criterion3},
    {4, "flow endpoints match direct singular values", 300, criterion4},
    {5, "perturbation expansion cubic error", 30, criterion5},
    {6, "repulsion Laplacian closed form", 30, criterion6},
    {7, "regularized shift fills the unit circle", 60, criterion7},
    {8, "sweep picks the informative t", 120, criterion8},
    {9, "circular law and Catalan moments", 60, criterion9},
    {10, "density mass counting", 120, criterion10},
    {11, "log potential monotone in t", 60, criterion11},
    {12, "bit-identical reports", 0, criterion12},
};

} // namespace

int main() {
    int failures = 0;
    for (const Criterion& c : kCriteria) {
        std::string detail;
        bool ok = false;
        const auto start = std::chrono::steady_clock::now();
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = fmt("exception: %s", e.what());
            ok = false;
        }
        const double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        if (c.budget_seconds > 0 && elapsed >= c.budget_seconds) {
            ok = false;
            detail += fmt(" [over budget %.0fs]", c.budget_seconds);
        }
        std::printf("%s criterion %d (%s): %s; %.1fs%s\n", ok ? "PASS" : "FAIL", c.id, c.label,
                    detail.c_str(), elapsed,
                    c.budget_seconds > 0 ? fmt(" (budget %.0fs)", c.budget_seconds).c_str() : "");
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    std::printf("acceptance: %d/12 passed\n", 12 - failures);
    return failures == 0 ? 0 : 1;
}
