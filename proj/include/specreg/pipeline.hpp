#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "specreg/brown.hpp"
#include "specreg/ensembles.hpp"
#include "specreg/seed.hpp"
#include "specreg/stats.hpp"

namespace specreg {

/// Regularization strength as a function of matrix size.
struct Schedule {
    enum class Kind { power, fixed, list };
    Kind kind = Kind::power;
    double t0 = 1.0;    // power: t(n) = t0 * n^(-alpha)
    double alpha = 1.0;
    double t_fixed = 0.0;
    std::vector<std::pair<int, double>> points; // list: exact per-n entries

    static Schedule power(double t0, double alpha);
    static Schedule fixed(double t);
    static Schedule from_points(std::vector<std::pair<int, double>> points);
};

double schedule_t(const Schedule& schedule, int n);

struct ExperimentConfig {
    EnsembleSpec ensemble;   // its n field is replaced per n_list entry
    Schedule schedule;
    std::vector<int> n_list;
    long trials = 1;
    bool emit_fields = false; // write field/density grids per cell (costly)
    GridSpec grid;
    std::optional<BrownOracle> target;
    DistanceMethod distance = DistanceMethod::radial_ks;
    std::uint64_t seed = 0;
};

struct CellFiles {
    std::string eigenvalues;
    std::string field;
    std::string density;
};

struct CellResult {
    int n = 0;
    double t = 0.0;
    long trial = 0;
    double distance = std::numeric_limits<double>::quiet_NaN();
    double correction_norm = 0.0; // sqrt(t) * largest singular value of the Gaussian
    double fk_det = 0.0;          // FK determinant of the corrected matrix
    Eigen::VectorXcd eigenvalues;
    std::optional<LogPotentialField> field_data;   // kept when fields are emitted
    std::optional<BrownDensityGrid> density_data;
    CellFiles files;
    std::string error; // failed cells carry a diagnostic and no data

    bool failed() const { return !error.empty(); }
};

struct SummaryRow {
    int n = 0;
    double t = 0.0;
    long cells_ok = 0;
    long cells_failed = 0;
    double mean_distance = std::numeric_limits<double>::quiet_NaN();
    double stderr_distance = std::numeric_limits<double>::quiet_NaN();
    double max_correction_norm = 0.0;
};

struct ExperimentReport {
    ExperimentConfig config;
    std::vector<CellResult> cells;
    std::vector<SummaryRow> summary;
};

/// Stream for the matrix with the given role (0 = base, 1 = Gaussian
/// correction) inside cell (n, trial). Derivation depends only on these
/// labels, never on execution order, so reports are reproducible under any
/// parallel split.
SeedSpec cell_seed(std::uint64_t root, int n, int role, long trial);

/// Template spec specialised to dimension n: sized models get n, diagonal
/// patterns are cycled to length n (n must be a multiple of the pattern),
/// file and sum specs pass through unchanged.
EnsembleSpec ensemble_for_n(const EnsembleSpec& tpl, int n);

/// For each n in n_list and each trial: realize the base matrix, add
/// sqrt(t(n)) times an independent Ginibre draw, and record spectrum, FK
/// determinant, correction norm, and (when a target is set) the distance to
/// the target measure. A failing cell records its diagnostic; other cells
/// proceed.
ExperimentReport run_regularization(const ExperimentConfig& config);

struct SweepRow {
    double t = 0.0;
    long cells_ok = 0;
    double mean_distance = std::numeric_limits<double>::quiet_NaN();
    double stderr_distance = std::numeric_limits<double>::quiet_NaN();
    double median_modulus = std::numeric_limits<double>::quiet_NaN(); // pooled |eigenvalue| median
    double max_correction_norm = 0.0;
    bool below_float_floor = false; // sqrt(t) under 1e3 * eps * |A|_op: correction numerically invisible
};

struct SweepResult {
    int n = 0;
    long trials = 0;
    std::uint64_t seed = 0;
    std::vector<SweepRow> rows;
};

/// Distance-to-target as a function of t at fixed n, with common random
/// numbers: the base and Gaussian draws per trial are shared across every t.
SweepResult sweep_t(const EnsembleSpec& ensemble, int n, const std::vector<double>& t_list,
                    long trials, const BrownOracle& target, DistanceMethod method,
                    std::uint64_t seed);

/// Write report.json plus per-cell eigenvalue CSVs (and field/density CSVs
/// when configured) under out_dir, filling each cell's file map with paths
/// relative to out_dir. Emission is deterministic: same report, same bytes.
void emit_report(ExperimentReport& report, const std::string& out_dir);

ExperimentReport load_report(const std::string& path);

std::string sweep_to_json(const SweepResult& result);

/// Flat key = value text, '#' comments, dot-namespaced keys; unknown keys are
/// rejected. Later duplicates win.
ExperimentConfig parse_config_file(const std::string& path);
ExperimentConfig parse_config_text(const std::string& text);

struct CliOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<long> trials;
    std::optional<int> n;
    std::optional<double> t;
};

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides);

/// "1,2.5,3e-4" or whitespace-separated; at least one entry.
std::vector<double> parse_double_list(const std::string& text);
/// "re,im" or "re im"; a single real is taken as re with zero imaginary part.
Complex parse_complex_pair(const std::string& text);

/// Entry point behind the command-line tool; args exclude the program name.
/// Returns 0 on success, 2 for configuration or usage errors, 3 for numeric
/// failures, 4 for I/O failures.
int run_cli(const std::vector<std::string>& args);

} // namespace specreg
