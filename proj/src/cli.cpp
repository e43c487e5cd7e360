#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "specreg/errors.hpp"
#include "specreg/fk.hpp"
#include "specreg/flow.hpp"
#include "specreg/pipeline.hpp"

namespace specreg {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

// Flags shared by the subcommands that realize a single model.
struct ModelFlags {
    std::string config_path;
    std::string model;
    double tau = 0.0;
    std::string matrix_path;
    std::string diagonal;
};

void add_model_flags(CLI::App* cmd, ModelFlags& flags) {
    cmd->add_option("--config", flags.config_path, "config file supplying the ensemble");
    cmd->add_option("--model", flags.model,
                    "ginibre | gue | elliptic | nilpotent_shift | diagonal | file")
        ->check(CLI::IsMember({"ginibre", "gue", "elliptic", "nilpotent_shift", "diagonal", "file"}));
    cmd->add_option("--tau", flags.tau, "elliptic asymmetry in [-1, 1]");
    cmd->add_option("--path", flags.matrix_path, "matrix file for --model file");
    cmd->add_option("--diag", flags.diagonal, "diagonal pattern as re,im pairs");
}

EnsembleSpec resolve_ensemble(const ModelFlags& flags) {
    if (!flags.model.empty()) {
        if (flags.model == "ginibre") return EnsembleSpec::ginibre(1);
        if (flags.model == "gue") return EnsembleSpec::gue(1);
        if (flags.model == "elliptic") return EnsembleSpec::elliptic(1, flags.tau);
        if (flags.model == "nilpotent_shift") return EnsembleSpec::nilpotent_shift(1);
        if (flags.model == "diagonal") {
            if (flags.diagonal.empty()) throw ConfigError("--model diagonal needs --diag");
            const std::vector<double> parts = parse_double_list(flags.diagonal);
            if (parts.size() % 2 != 0) throw ConfigError("--diag: expected re,im pairs");
            Eigen::VectorXcd values(static_cast<Eigen::Index>(parts.size() / 2));
            for (std::size_t i = 0; i < parts.size(); i += 2)
                values(static_cast<Eigen::Index>(i / 2)) = Complex(parts[i], parts[i + 1]);
            return EnsembleSpec::diagonal(std::move(values));
        }
        if (flags.model == "file") {
            if (flags.matrix_path.empty()) throw ConfigError("--model file needs --path");
            return EnsembleSpec::file(flags.matrix_path);
        }
        throw ConfigError("unknown model: " + flags.model);
    }
    if (!flags.config_path.empty()) return parse_config_file(flags.config_path).ensemble;
    throw ConfigError("specify --model or --config");
}

/// Realized matrix A + sqrt(t) G with the same stream derivation the
/// pipeline uses, so single-shot CLI runs match report cells exactly.
ComplexMatrix corrected_matrix(const EnsembleSpec& tpl, int n, double t, std::uint64_t seed,
                               long trial) {
    const EnsembleSpec base = ensemble_for_n(tpl, n);
    ComplexMatrix a = realize(base, cell_seed(seed, n, 0, trial));
    if (a.rows() != n)
        throw ConfigError("matrix is " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                          " but --n is " + std::to_string(n));
    if (t > 0.0) a += std::sqrt(t) * sample_ginibre(n, cell_seed(seed, n, 1, trial));
    return a;
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

Eigen::VectorXd vector_from_list(const std::string& text) {
    const std::vector<double> parts = parse_double_list(text);
    Eigen::VectorXd v(static_cast<Eigen::Index>(parts.size()));
    for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parts[i];
    return v;
}

GridSpec grid_from_flags(const std::string& center, double half_width, int nodes) {
    GridSpec grid;
    grid.center = parse_complex_pair(center);
    grid.half_width = half_width;
    grid.nodes = nodes;
    grid.validate();
    return grid;
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"Gaussian regularization of spectra of non-normal matrices"};
    app.require_subcommand(1);

    // sample-spectrum
    auto* sample = app.add_subcommand("sample-spectrum",
                                      "eigenvalues or singular values of A + sqrt(t) G");
    ModelFlags sample_model;
    add_model_flags(sample, sample_model);
    int sample_n = 100;
    double sample_t = 0.0;
    std::string sample_kind = "eig";
    long sample_trials = 1;
    std::uint64_t sample_seed = 0;
    std::string sample_out = "spectrum.csv";
    sample->add_option("--n", sample_n, "matrix dimension")->check(CLI::PositiveNumber);
    sample->add_option("--t", sample_t, "Gaussian correction variance (0 = none)");
    sample->add_option("--kind", sample_kind, "eig | sv")->check(CLI::IsMember({"eig", "sv"}));
    sample->add_option("--trials", sample_trials, "independent draws")->check(CLI::PositiveNumber);
    sample->add_option("--seed", sample_seed, "root seed");
    sample->add_option("--out", sample_out, "output CSV path");
    sample->callback([&] {
        if (!(sample_t >= 0.0)) throw ConfigError("--t must be nonnegative");
        const EnsembleSpec tpl = resolve_ensemble(sample_model);
        std::FILE* f = std::fopen(sample_out.c_str(), "w");
        if (!f) throw IoError("cannot open for writing: " + sample_out);
        std::fputs(sample_kind == "eig" ? "trial,index,re,im\n" : "trial,index,value\n", f);
        for (long trial = 0; trial < sample_trials; ++trial) {
            const ComplexMatrix m = corrected_matrix(tpl, sample_n, sample_t, sample_seed, trial);
            if (sample_kind == "eig") {
                const Eigen::VectorXcd ev = eigenvalues(m);
                for (Eigen::Index i = 0; i < ev.size(); ++i)
                    std::fprintf(f, "%ld,%ld,%.17g,%.17g\n", trial, static_cast<long>(i),
                                 ev(i).real(), ev(i).imag());
            } else {
                const Eigen::VectorXd sv = singular_values(m);
                for (Eigen::Index i = 0; i < sv.size(); ++i)
                    std::fprintf(f, "%ld,%ld,%.17g\n", trial, static_cast<long>(i), sv(i));
            }
        }
        std::fclose(f);
        std::cout << "wrote " << sample_out << "\n";
    });

    // fk-det
    auto* fk = app.add_subcommand("fk-det",
                                  "FK determinant of one realization, or the Monte Carlo mean of "
                                  "tr log|G| over Ginibre draws");
    ModelFlags fk_model;
    add_model_flags(fk, fk_model);
    int fk_n = 100;
    double fk_t = 0.0;
    long fk_trials = 1000;
    std::uint64_t fk_seed = 0;
    std::string fk_out;
    fk->add_option("--n", fk_n, "matrix dimension")->check(CLI::PositiveNumber);
    fk->add_option("--t", fk_t, "Gaussian correction variance (single-matrix mode)");
    fk->add_option("--trials", fk_trials, "Monte Carlo trials (estimator mode)")
        ->check(CLI::PositiveNumber);
    fk->add_option("--seed", fk_seed, "root seed");
    fk->add_option("--out", fk_out, "also write the JSON to this path");
    fk->callback([&] {
        json doc;
        if (fk_model.model.empty() && fk_model.config_path.empty()) {
            const McEstimate est = mc_fk_gaussian(fk_n, fk_trials, SeedSpec{fk_seed, 0});
            doc["n"] = fk_n;
            doc["trials"] = est.trials;
            doc["mean"] = est.mean;
            doc["stderr"] = est.std_error;
            doc["seed"] = fk_seed;
        } else {
            if (!(fk_t >= 0.0)) throw ConfigError("--t must be nonnegative");
            const EnsembleSpec tpl = resolve_ensemble(fk_model);
            const ComplexMatrix m = corrected_matrix(tpl, fk_n, fk_t, fk_seed, 0);
            doc["n"] = fk_n;
            doc["t"] = fk_t;
            doc["fk_det"] = fk_determinant(m);
            doc["seed"] = fk_seed;
        }
        const std::string text = doc.dump(2) + "\n";
        std::cout << text;
        if (!fk_out.empty()) write_text(fk_out, text);
    });

    // field / density share flags
    struct GridFlags {
        std::string center = "0,0";
        double half_width = 1.6;
        int nodes = 101;
    };

    auto* field = app.add_subcommand("field", "log-potential field of A + sqrt(t) G on a grid");
    ModelFlags field_model;
    add_model_flags(field, field_model);
    int field_n = 100;
    double field_t = 0.0;
    std::uint64_t field_seed = 0;
    GridFlags field_grid;
    std::string field_out = "field.csv";
    field->add_option("--n", field_n, "matrix dimension")->check(CLI::PositiveNumber);
    field->add_option("--t", field_t, "Gaussian correction variance");
    field->add_option("--seed", field_seed, "root seed");
    field->add_option("--center", field_grid.center, "grid centre as re,im");
    field->add_option("--half-width", field_grid.half_width, "grid half-width");
    field->add_option("--nodes", field_grid.nodes, "grid nodes per side (odd)");
    field->add_option("--out", field_out, "output CSV path");
    field->callback([&] {
        if (!(field_t >= 0.0)) throw ConfigError("--t must be nonnegative");
        const ComplexMatrix m =
            corrected_matrix(resolve_ensemble(field_model), field_n, field_t, field_seed, 0);
        const GridSpec grid = grid_from_flags(field_grid.center, field_grid.half_width, field_grid.nodes);
        write_field_csv(log_potential_field(m, grid), field_out);
        std::cout << "wrote " << field_out << "\n";
    });

    auto* density = app.add_subcommand("density",
                                       "Brown-measure density from the log-potential Laplacian");
    ModelFlags density_model;
    add_model_flags(density, density_model);
    int density_n = 100;
    double density_t = 0.0;
    std::uint64_t density_seed = 0;
    GridFlags density_grid;
    std::string density_out = "density.csv";
    density->add_option("--n", density_n, "matrix dimension")->check(CLI::PositiveNumber);
    density->add_option("--t", density_t, "Gaussian correction variance");
    density->add_option("--seed", density_seed, "root seed");
    density->add_option("--center", density_grid.center, "grid centre as re,im");
    density->add_option("--half-width", density_grid.half_width, "grid half-width");
    density->add_option("--nodes", density_grid.nodes, "grid nodes per side (odd)");
    density->add_option("--out", density_out, "output CSV path");
    density->callback([&] {
        if (!(density_t >= 0.0)) throw ConfigError("--t must be nonnegative");
        const ComplexMatrix m =
            corrected_matrix(resolve_ensemble(density_model), density_n, density_t, density_seed, 0);
        const GridSpec grid =
            grid_from_flags(density_grid.center, density_grid.half_width, density_grid.nodes);
        const BrownDensityGrid d = brown_density(log_potential_field(m, grid));
        write_density_csv(d, density_out);
        std::cout << "wrote " << density_out << " (mass " << d.total_mass() << ")\n";
    });

    // sv-flow
    auto* flow = app.add_subcommand("sv-flow", "integrate the singular-value flow");
    std::string flow_initial;
    double flow_t = 1.0;
    double flow_dt = 1e-3;
    double flow_dt_min = 1e-12;
    std::uint64_t flow_seed = 0;
    bool flow_no_noise = false;
    std::string flow_out = "trajectory.csv";
    flow->add_option("--initial", flow_initial, "starting values, e.g. 2,1")->required();
    flow->add_option("--t", flow_t, "final time");
    flow->add_option("--dt", flow_dt, "initial step size")->check(CLI::PositiveNumber);
    flow->add_option("--dt-min", flow_dt_min, "abort once rejections push the step below this")
        ->check(CLI::PositiveNumber);
    flow->add_option("--seed", flow_seed, "root seed");
    flow->add_flag("--suppress-noise", flow_no_noise, "integrate the drift ODE only");
    flow->add_option("--out", flow_out, "trajectory CSV path");
    flow->callback([&] {
        FlowOptions options;
        options.suppress_noise = flow_no_noise;
        options.dt_min = flow_dt_min;
        const FlowTrajectory trajectory =
            simulate_flow(vector_from_list(flow_initial), flow_t, flow_dt, SeedSpec{flow_seed, 0}, options);
        write_trajectory_csv(trajectory, flow_out);
        const FlowState& last = trajectory.final_state();
        std::cout << "wrote " << flow_out << "; final time " << last.time << ", values";
        for (Eigen::Index i = 0; i < last.values.size(); ++i) std::cout << " " << last.values(i);
        std::cout << "\n";
    });

    // compare-flow
    auto* compare = app.add_subcommand("compare-flow",
                                       "couple two flows on one noise path and check domination");
    std::string compare_lower;
    std::string compare_upper;
    double compare_t = 1.0;
    double compare_dt = 1e-3;
    std::uint64_t compare_seed = 0;
    std::string compare_out = ".";
    compare->add_option("--lower", compare_lower, "dominated starting values")->required();
    compare->add_option("--upper", compare_upper, "dominating starting values")->required();
    compare->add_option("--t", compare_t, "final time");
    compare->add_option("--dt", compare_dt, "initial step size")->check(CLI::PositiveNumber);
    compare->add_option("--seed", compare_seed, "root seed");
    compare->add_option("--out", compare_out, "output directory");
    compare->callback([&] {
        const CoupledComparison result =
            coupled_compare(vector_from_list(compare_lower), vector_from_list(compare_upper),
                            compare_t, compare_dt, SeedSpec{compare_seed, 0});
        std::error_code ec;
        fs::create_directories(compare_out, ec);
        if (ec) throw IoError("cannot create output directory " + compare_out + ": " + ec.message());
        write_trajectory_csv(result.lower, (fs::path(compare_out) / "lower.csv").string());
        write_trajectory_csv(result.upper, (fs::path(compare_out) / "upper.csv").string());
        json verdict;
        verdict["preserved"] = result.preserved;
        verdict["steps"] = result.steps;
        verdict["min_gap"] = result.min_gap;
        const std::string text = verdict.dump(2) + "\n";
        write_text((fs::path(compare_out) / "verdict.json").string(), text);
        std::cout << text;
    });

    // run
    auto* run = app.add_subcommand("run", "full regularization experiment from a config file");
    std::string run_config;
    std::string run_out;
    CliOverrides run_overrides;
    run->add_option("--config", run_config, "experiment config file")->required();
    run->add_option("--out", run_out, "output directory")->required();
    run->add_option("--seed", [&](const CLI::results_t& r) {
        run_overrides.seed = static_cast<std::uint64_t>(std::stoull(r.at(0)));
        return true;
    }, "override config seed");
    run->add_option("--trials", [&](const CLI::results_t& r) {
        run_overrides.trials = std::stol(r.at(0));
        return true;
    }, "override config trials");
    run->add_option("--n", [&](const CLI::results_t& r) {
        run_overrides.n = std::stoi(r.at(0));
        return true;
    }, "run a single n instead of the config list");
    run->add_option("--t", [&](const CLI::results_t& r) {
        run_overrides.t = std::stod(r.at(0));
        return true;
    }, "fix t, overriding the schedule");
    run->callback([&] {
        ExperimentConfig config = parse_config_file(run_config);
        apply_overrides(config, run_overrides);
        ExperimentReport report = run_regularization(config);
        emit_report(report, run_out);
        for (const CellResult& cell : report.cells)
            if (cell.failed())
                std::cerr << "cell n=" << cell.n << " trial=" << cell.trial
                          << " failed: " << cell.error << "\n";
        for (const SummaryRow& row : report.summary) {
            std::cout << "n=" << row.n << " t=" << row.t << " cells_ok=" << row.cells_ok;
            if (row.cells_failed > 0) std::cout << " cells_failed=" << row.cells_failed;
            if (std::isfinite(row.mean_distance))
                std::cout << " mean_distance=" << row.mean_distance
                          << " stderr=" << row.stderr_distance;
            std::cout << " max_correction=" << row.max_correction_norm << "\n";
        }
        std::cout << "report: " << (fs::path(run_out) / "report.json").string() << "\n";
    });

    // sweep-t
    auto* sweep = app.add_subcommand("sweep-t",
                                     "distance to target versus t at fixed n, common random numbers");
    std::string sweep_config;
    int sweep_n = 0;
    std::string sweep_tlist;
    long sweep_trials = 0;
    std::uint64_t sweep_seed = 0;
    bool sweep_seed_set = false;
    std::string sweep_out = "sweep.json";
    sweep->add_option("--config", sweep_config, "config with ensemble and target")->required();
    sweep->add_option("--n", sweep_n, "matrix dimension")->check(CLI::PositiveNumber);
    sweep->add_option("--t-list", sweep_tlist, "comma-separated t values")->required();
    sweep->add_option("--trials", sweep_trials, "trials per t")->check(CLI::PositiveNumber);
    sweep->add_option("--seed", [&](const CLI::results_t& r) {
        sweep_seed = static_cast<std::uint64_t>(std::stoull(r.at(0)));
        sweep_seed_set = true;
        return true;
    }, "override config seed");
    sweep->add_option("--out", sweep_out, "output JSON path");
    sweep->callback([&] {
        const ExperimentConfig config = parse_config_file(sweep_config);
        if (!config.target) throw ConfigError("sweep-t needs target.model in the config");
        int n = sweep_n;
        if (n == 0) {
            if (config.n_list.size() != 1)
                throw ConfigError("pass --n or a single-entry run.n_list");
            n = config.n_list.front();
        }
        const long trials = sweep_trials > 0 ? sweep_trials : config.trials;
        const std::uint64_t seed = sweep_seed_set ? sweep_seed : config.seed;
        const SweepResult result = sweep_t(config.ensemble, n, parse_double_list(sweep_tlist),
                                           trials, *config.target, config.distance, seed);
        const std::string text = sweep_to_json(result);
        write_text(sweep_out, text);
        for (const SweepRow& row : result.rows) {
            std::cout << "t=" << row.t << " mean_distance=" << row.mean_distance
                      << " stderr=" << row.stderr_distance
                      << " max_correction=" << row.max_correction_norm << "\n";
            if (row.below_float_floor)
                std::cerr << "warning: t=" << row.t
                          << ": sqrt(t) is below the double-precision floor of the base matrix; "
                             "the correction is numerically invisible\n";
        }
        std::cout << "wrote " << sweep_out << "\n";
    });

    std::vector<std::string> full;
    full.reserve(args.size() + 1);
    full.push_back("specreg");
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    argv.reserve(full.size());
    for (const std::string& s : full) argv.push_back(s.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args) {
    try {
        return dispatch(args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "domain error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return 3;
    } catch (const IoError& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 4;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}

} // namespace specreg
