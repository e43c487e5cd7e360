#include "specreg/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <cfloat>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "specreg/errors.hpp"
#include "specreg/fk.hpp"
#include "specreg/parallel.hpp"

namespace specreg {

namespace {

constexpr const char* kVersion = "0.1.0";

using json = nlohmann::ordered_json;

std::string eigen_version() {
    return std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
           "." + std::to_string(EIGEN_MINOR_VERSION);
}

// ---- value parsing ----------------------------------------------------

std::string trim(const std::string& s) {
    size_t b = 0;
    size_t e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

std::vector<std::string> split_any(const std::string& text, const char* seps) {
    std::vector<std::string> out;
    std::string current;
    for (char c : text) {
        if (std::strchr(seps, c)) {
            if (!current.empty()) out.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (!current.empty()) out.push_back(current);
    return out;
}

double parse_double(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key + ": empty value");
    char* end = nullptr;
    const double d = std::strtod(v.c_str(), &end);
    if (end != v.c_str() + v.size())
        throw ConfigError(key + ": cannot parse \"" + value + "\" as a number");
    if (!std::isfinite(d)) throw ConfigError(key + ": value must be finite");
    return d;
}

long parse_long(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key + ": empty value");
    char* end = nullptr;
    const long l = std::strtol(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        throw ConfigError(key + ": cannot parse \"" + value + "\" as an integer");
    return l;
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v.empty()) throw ConfigError(key + ": empty value");
    char* end = nullptr;
    const unsigned long long u = std::strtoull(v.c_str(), &end, 10);
    if (end != v.c_str() + v.size())
        throw ConfigError(key + ": cannot parse \"" + value + "\" as an unsigned integer");
    return static_cast<std::uint64_t>(u);
}

bool parse_bool(const std::string& key, const std::string& value) {
    const std::string v = trim(value);
    if (v == "true" || v == "1") return true;
    if (v == "false" || v == "0") return false;
    throw ConfigError(key + ": expected true/false, got \"" + value + "\"");
}

} // namespace

std::vector<double> parse_double_list(const std::string& text) {
    std::vector<double> out;
    for (const std::string& tok : split_any(text, ", \t"))
        out.push_back(parse_double("list entry", tok));
    if (out.empty()) throw ConfigError("expected at least one number in \"" + text + "\"");
    return out;
}

Complex parse_complex_pair(const std::string& text) {
    const std::vector<double> parts = parse_double_list(text);
    if (parts.size() == 1) return Complex(parts[0], 0.0);
    if (parts.size() == 2) return Complex(parts[0], parts[1]);
    throw ConfigError("expected \"re,im\", got \"" + text + "\"");
}

// ---- schedules ---------------------------------------------------------

Schedule Schedule::power(double t0, double alpha) {
    if (!(t0 >= 0.0) || !std::isfinite(t0)) throw ConfigError("schedule: t0 must be finite and nonnegative");
    if (!std::isfinite(alpha)) throw ConfigError("schedule: alpha must be finite");
    Schedule s;
    s.kind = Kind::power;
    s.t0 = t0;
    s.alpha = alpha;
    return s;
}

Schedule Schedule::fixed(double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("schedule: t must be finite and nonnegative");
    Schedule s;
    s.kind = Kind::fixed;
    s.t_fixed = t;
    return s;
}

Schedule Schedule::from_points(std::vector<std::pair<int, double>> points) {
    if (points.empty()) throw ConfigError("schedule: point list is empty");
    for (const auto& [n, t] : points) {
        if (n < 1) throw ConfigError("schedule: point with nonpositive n");
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("schedule: point with bad t");
    }
    Schedule s;
    s.kind = Kind::list;
    s.points = std::move(points);
    return s;
}

double schedule_t(const Schedule& schedule, int n) {
    if (n < 1) throw ConfigError("schedule: n must be positive");
    switch (schedule.kind) {
        case Schedule::Kind::power:
            return schedule.t0 * std::pow(static_cast<double>(n), -schedule.alpha);
        case Schedule::Kind::fixed:
            return schedule.t_fixed;
        case Schedule::Kind::list:
            for (const auto& [pn, pt] : schedule.points)
                if (pn == n) return pt;
            throw ConfigError("schedule: no entry for n = " + std::to_string(n));
    }
    throw ConfigError("schedule: unknown kind");
}

// ---- experiment driver --------------------------------------------------

SeedSpec cell_seed(std::uint64_t root, int n, int role, long trial) {
    const std::uint64_t derived =
        derive_seed(SeedSpec{root, static_cast<std::uint64_t>(n)}, static_cast<std::uint64_t>(role));
    return SeedSpec{derived, static_cast<std::uint64_t>(trial)};
}

EnsembleSpec ensemble_for_n(const EnsembleSpec& tpl, int n) {
    EnsembleSpec base = tpl;
    switch (tpl.model) {
        case EnsembleSpec::Model::ginibre:
        case EnsembleSpec::Model::gue:
        case EnsembleSpec::Model::elliptic:
        case EnsembleSpec::Model::nilpotent_shift:
            base.n = n;
            return base;
        case EnsembleSpec::Model::diagonal: {
            // The configured values act as a pattern cycled along the
            // diagonal, so one config covers every n in the list.
            const Eigen::Index p = tpl.diagonal_values.size();
            if (n % p != 0)
                throw ConfigError("diagonal pattern of length " + std::to_string(p) +
                                  " does not divide n = " + std::to_string(n));
            Eigen::VectorXcd tiled(n);
            for (Eigen::Index i = 0; i < n; ++i) tiled(i) = tpl.diagonal_values(i % p);
            base.diagonal_values = std::move(tiled);
            base.n = n;
            return base;
        }
        case EnsembleSpec::Model::file:
        case EnsembleSpec::Model::sum:
            // Dimension fixed by the spec itself; checked after realization.
            return base;
    }
    return base;
}

namespace {

void fill_cell(CellResult& cell, const ExperimentConfig& config) {
    const EnsembleSpec base = ensemble_for_n(config.ensemble, cell.n);
    const ComplexMatrix a = realize(base, cell_seed(config.seed, cell.n, 0, cell.trial));
    if (a.rows() != cell.n)
        throw ConfigError("base matrix is " + std::to_string(a.rows()) + "x" +
                          std::to_string(a.cols()) + " but the cell asks for n = " +
                          std::to_string(cell.n));
    const ComplexMatrix g = sample_ginibre(cell.n, cell_seed(config.seed, cell.n, 1, cell.trial));
    const double root_t = std::sqrt(cell.t);

    ComplexMatrix m = a;
    if (root_t != 0.0) m += root_t * g;

    cell.correction_norm = root_t * singular_values(g)(0);
    cell.eigenvalues = eigenvalues(m);
    cell.fk_det = fk_determinant(m);

    if (config.target) {
        std::vector<Complex> atoms(cell.eigenvalues.data(), cell.eigenvalues.data() + cell.eigenvalues.size());
        const EmpiricalMeasure mu = EmpiricalMeasure::from_points(atoms);
        cell.distance = measure_distance(mu, oracle_brown(*config.target), config.distance);
    }
    if (config.emit_fields) {
        cell.field_data = log_potential_field(m, config.grid);
        cell.density_data = brown_density(*cell.field_data);
    }
}

std::vector<SummaryRow> build_summary(const std::vector<CellResult>& cells,
                                      const std::vector<int>& n_list, bool has_target) {
    std::vector<SummaryRow> rows;
    for (int n : n_list) {
        SummaryRow row;
        row.n = n;
        std::vector<double> distances;
        bool seen = false;
        for (const CellResult& cell : cells) {
            if (cell.n != n) continue;
            row.t = cell.t;
            seen = true;
            if (cell.failed()) {
                ++row.cells_failed;
                continue;
            }
            ++row.cells_ok;
            row.max_correction_norm = std::max(row.max_correction_norm, cell.correction_norm);
            if (has_target && std::isfinite(cell.distance)) distances.push_back(cell.distance);
        }
        if (!seen) continue;
        if (!distances.empty()) {
            const MeanStdError ms = mean_std_error(distances);
            row.mean_distance = ms.mean;
            row.stderr_distance = ms.std_error;
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace

ExperimentReport run_regularization(const ExperimentConfig& config) {
    if (config.trials < 0) throw ConfigError("trials must be nonnegative");
    {
        std::set<int> seen;
        for (int n : config.n_list) {
            if (n < 1) throw ConfigError("n_list entries must be positive");
            if (!seen.insert(n).second)
                throw ConfigError("duplicate n = " + std::to_string(n) + " in n_list");
        }
    }
    if (config.emit_fields) config.grid.validate();

    ExperimentReport report;
    report.config = config;

    for (int n : config.n_list) {
        const double t = schedule_t(config.schedule, n);
        if (!(t >= 0.0) || !std::isfinite(t))
            throw ConfigError("schedule gives bad t for n = " + std::to_string(n));
        for (long trial = 0; trial < config.trials; ++trial) {
            CellResult cell;
            cell.n = n;
            cell.t = t;
            cell.trial = trial;
            report.cells.push_back(std::move(cell));
        }
    }

    parallel_for(report.cells.size(), [&](std::size_t k) {
        CellResult& cell = report.cells[k];
        try {
            fill_cell(cell, config);
        } catch (const std::exception& e) {
            cell.error = e.what();
            cell.eigenvalues.resize(0);
            cell.field_data.reset();
            cell.density_data.reset();
        }
    });

    report.summary = build_summary(report.cells, config.n_list, config.target.has_value());
    return report;
}

SweepResult sweep_t(const EnsembleSpec& ensemble, int n, const std::vector<double>& t_list,
                    long trials, const BrownOracle& target, DistanceMethod method,
                    std::uint64_t seed) {
    if (n < 1) throw ConfigError("sweep: n must be positive");
    if (trials < 1) throw ConfigError("sweep: need at least one trial");
    if (t_list.empty()) throw ConfigError("sweep: empty t list");
    for (double t : t_list)
        if (!(t >= 0.0) || !std::isfinite(t)) throw ConfigError("sweep: t values must be finite and nonnegative");

    const ReferenceMeasure ref = oracle_brown(target);
    const std::size_t nt = t_list.size();

    struct TrialRow {
        std::vector<double> distance;
        std::vector<double> correction;
        std::vector<bool> floor_hit;
        std::vector<std::vector<double>> moduli;
        std::string error;
    };
    std::vector<TrialRow> per_trial(static_cast<std::size_t>(trials));

    parallel_for(static_cast<std::size_t>(trials), [&](std::size_t k) {
        TrialRow& row = per_trial[k];
        try {
            const long trial = static_cast<long>(k);
            const EnsembleSpec base = ensemble_for_n(ensemble, n);
            const ComplexMatrix a = realize(base, cell_seed(seed, n, 0, trial));
            if (a.rows() != n)
                throw ConfigError("base matrix dimension does not match sweep n");
            const ComplexMatrix g = sample_ginibre(n, cell_seed(seed, n, 1, trial));
            const double a_norm = singular_values(a)(0);
            const double g_norm = singular_values(g)(0);
            row.distance.resize(nt);
            row.correction.resize(nt);
            row.floor_hit.resize(nt);
            row.moduli.resize(nt);
            for (std::size_t it = 0; it < nt; ++it) {
                const double root_t = std::sqrt(t_list[it]);
                ComplexMatrix m = a;
                if (root_t != 0.0) m += root_t * g;
                const Eigen::VectorXcd ev = eigenvalues(m);
                std::vector<Complex> atoms(ev.data(), ev.data() + ev.size());
                row.distance[it] = measure_distance(EmpiricalMeasure::from_points(atoms), ref, method);
                row.correction[it] = root_t * g_norm;
                row.moduli[it].reserve(atoms.size());
                for (const Complex& z : atoms) row.moduli[it].push_back(std::abs(z));
                // Below this the correction is smaller than rounding noise of
                // the base matrix itself and the sweep reads as t = 0.
                row.floor_hit[it] = t_list[it] > 0.0 && root_t < 1e3 * DBL_EPSILON * a_norm;
            }
        } catch (const std::exception& e) {
            row.error = e.what();
        }
    });

    SweepResult result;
    result.n = n;
    result.trials = trials;
    result.seed = seed;
    for (std::size_t it = 0; it < nt; ++it) {
        SweepRow row;
        row.t = t_list[it];
        std::vector<double> distances;
        std::vector<double> pooled_moduli;
        for (const TrialRow& tr : per_trial) {
            if (!tr.error.empty()) continue;
            ++row.cells_ok;
            distances.push_back(tr.distance[it]);
            pooled_moduli.insert(pooled_moduli.end(), tr.moduli[it].begin(), tr.moduli[it].end());
            row.max_correction_norm = std::max(row.max_correction_norm, tr.correction[it]);
            if (tr.floor_hit[it]) row.below_float_floor = true;
        }
        if (!distances.empty()) {
            const MeanStdError ms = mean_std_error(distances);
            row.mean_distance = ms.mean;
            row.stderr_distance = ms.std_error;
        }
        if (!pooled_moduli.empty()) {
            std::sort(pooled_moduli.begin(), pooled_moduli.end());
            const std::size_t m = pooled_moduli.size();
            row.median_modulus = m % 2 == 1 ? pooled_moduli[m / 2]
                                            : 0.5 * (pooled_moduli[m / 2 - 1] + pooled_moduli[m / 2]);
        }
        result.rows.push_back(row);
    }
    return result;
}

// ---- JSON encoding -------------------------------------------------------

namespace {

json complex_to_json(Complex z) { return json::array({z.real(), z.imag()}); }

Complex complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) throw IoError("expected [re, im] pair in report");
    return Complex(j[0].get<double>(), j[1].get<double>());
}

json finite_or_null(double v) {
    if (std::isfinite(v)) return json(v);
    return json(nullptr);
}

double double_or_nan(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
    return j.get<double>();
}

json ensemble_to_json(const EnsembleSpec& spec) {
    json j;
    j["model"] = spec.model_name();
    j["n"] = spec.n;
    switch (spec.model) {
        case EnsembleSpec::Model::elliptic:
            j["tau"] = spec.tau;
            break;
        case EnsembleSpec::Model::diagonal: {
            json diag = json::array();
            for (Eigen::Index i = 0; i < spec.diagonal_values.size(); ++i)
                diag.push_back(complex_to_json(spec.diagonal_values(i)));
            j["diagonal"] = diag;
            break;
        }
        case EnsembleSpec::Model::file:
            j["path"] = spec.path;
            break;
        case EnsembleSpec::Model::sum: {
            json terms = json::array();
            for (const EnsembleSpec& term : spec.terms) terms.push_back(ensemble_to_json(term));
            j["terms"] = terms;
            break;
        }
        default:
            break;
    }
    if (spec.scale != Complex(1.0, 0.0)) j["scale"] = complex_to_json(spec.scale);
    return j;
}

EnsembleSpec ensemble_from_json(const json& j) {
    const std::string model = j.at("model").get<std::string>();
    EnsembleSpec spec;
    if (model == "ginibre") spec = EnsembleSpec::ginibre(j.at("n").get<int>());
    else if (model == "gue") spec = EnsembleSpec::gue(j.at("n").get<int>());
    else if (model == "elliptic") spec = EnsembleSpec::elliptic(j.at("n").get<int>(), j.at("tau").get<double>());
    else if (model == "nilpotent_shift") spec = EnsembleSpec::nilpotent_shift(j.at("n").get<int>());
    else if (model == "diagonal") {
        const json& diag = j.at("diagonal");
        Eigen::VectorXcd values(static_cast<Eigen::Index>(diag.size()));
        for (std::size_t i = 0; i < diag.size(); ++i)
            values(static_cast<Eigen::Index>(i)) = complex_from_json(diag[i]);
        spec = EnsembleSpec::diagonal(std::move(values));
        spec.n = j.at("n").get<int>();
    } else if (model == "file") {
        spec = EnsembleSpec::file(j.at("path").get<std::string>());
        spec.n = j.at("n").get<int>();
    } else if (model == "sum") {
        std::vector<EnsembleSpec> terms;
        for (const json& term : j.at("terms")) terms.push_back(ensemble_from_json(term));
        spec = EnsembleSpec::sum(std::move(terms));
        spec.n = j.at("n").get<int>();
    } else {
        throw IoError("unknown ensemble model in report: " + model);
    }
    if (j.contains("scale")) spec.scale = complex_from_json(j["scale"]);
    return spec;
}

json schedule_to_json(const Schedule& s) {
    json j;
    switch (s.kind) {
        case Schedule::Kind::power:
            j["kind"] = "power";
            j["t0"] = s.t0;
            j["alpha"] = s.alpha;
            return j;
        case Schedule::Kind::fixed:
            j["kind"] = "fixed";
            j["t"] = s.t_fixed;
            return j;
        case Schedule::Kind::list: {
            j["kind"] = "list";
            json pts = json::array();
            for (const auto& [n, t] : s.points) pts.push_back(json::array({n, t}));
            j["points"] = pts;
            return j;
        }
    }
    throw IoError("unknown schedule kind");
}

Schedule schedule_from_json(const json& j) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "power") return Schedule::power(j.at("t0").get<double>(), j.at("alpha").get<double>());
    if (kind == "fixed") return Schedule::fixed(j.at("t").get<double>());
    if (kind == "list") {
        std::vector<std::pair<int, double>> points;
        for (const json& p : j.at("points"))
            points.emplace_back(p.at(0).get<int>(), p.at(1).get<double>());
        return Schedule::from_points(std::move(points));
    }
    throw IoError("unknown schedule kind in report: " + kind);
}

std::string oracle_model_name(BrownOracle::Model model) {
    switch (model) {
        case BrownOracle::Model::circular_scaled: return "circular_scaled";
        case BrownOracle::Model::haar_unitary: return "haar_unitary";
        case BrownOracle::Model::atom: return "atom";
        case BrownOracle::Model::elliptic: return "elliptic";
    }
    return "unknown";
}

json target_to_json(const std::optional<BrownOracle>& target) {
    if (!target) return json(nullptr);
    json j;
    j["model"] = oracle_model_name(target->model);
    switch (target->model) {
        case BrownOracle::Model::circular_scaled:
            j["t"] = target->t;
            j["shift"] = complex_to_json(target->shift);
            break;
        case BrownOracle::Model::atom:
            j["shift"] = complex_to_json(target->shift);
            break;
        case BrownOracle::Model::elliptic:
            j["tau"] = target->tau;
            break;
        case BrownOracle::Model::haar_unitary:
            break;
    }
    return j;
}

std::optional<BrownOracle> target_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    const std::string model = j.at("model").get<std::string>();
    if (model == "circular_scaled")
        return BrownOracle::circular_scaled(j.at("t").get<double>(), complex_from_json(j.at("shift")));
    if (model == "haar_unitary") return BrownOracle::haar_unitary();
    if (model == "atom") return BrownOracle::atom(complex_from_json(j.at("shift")));
    if (model == "elliptic") return BrownOracle::elliptic(j.at("tau").get<double>());
    throw IoError("unknown target model in report: " + model);
}

const char* distance_name(DistanceMethod m) {
    return m == DistanceMethod::radial_ks ? "radial_ks" : "energy";
}

DistanceMethod distance_from_name(const std::string& name) {
    if (name == "radial_ks") return DistanceMethod::radial_ks;
    if (name == "energy") return DistanceMethod::energy;
    throw ConfigError("unknown distance method: " + name + " (use radial_ks or energy)");
}

json config_to_json(const ExperimentConfig& config) {
    json j;
    j["ensemble"] = ensemble_to_json(config.ensemble);
    j["schedule"] = schedule_to_json(config.schedule);
    j["n_list"] = config.n_list;
    j["trials"] = config.trials;
    j["emit_fields"] = config.emit_fields;
    j["grid"] = {{"center", complex_to_json(config.grid.center)},
                 {"half_width", config.grid.half_width},
                 {"nodes", config.grid.nodes}};
    j["target"] = target_to_json(config.target);
    j["distance"] = distance_name(config.distance);
    j["seed"] = config.seed;
    return j;
}

ExperimentConfig config_from_json(const json& j) {
    ExperimentConfig config;
    config.ensemble = ensemble_from_json(j.at("ensemble"));
    config.schedule = schedule_from_json(j.at("schedule"));
    config.n_list = j.at("n_list").get<std::vector<int>>();
    config.trials = j.at("trials").get<long>();
    config.emit_fields = j.at("emit_fields").get<bool>();
    const json& grid = j.at("grid");
    config.grid.center = complex_from_json(grid.at("center"));
    config.grid.half_width = grid.at("half_width").get<double>();
    config.grid.nodes = grid.at("nodes").get<int>();
    config.target = target_from_json(j.at("target"));
    config.distance = distance_from_name(j.at("distance").get<std::string>());
    config.seed = j.at("seed").get<std::uint64_t>();
    return config;
}

json report_to_json(const ExperimentReport& report) {
    json j;
    j["config"] = config_to_json(report.config);
    j["versions"] = {{"specreg", kVersion}, {"eigen", eigen_version()}};
    json cells = json::array();
    for (const CellResult& cell : report.cells) {
        json c;
        c["n"] = cell.n;
        c["t"] = cell.t;
        c["trial"] = cell.trial;
        c["distance"] = finite_or_null(cell.distance);
        c["correction_norm"] = cell.correction_norm;
        c["fk_det"] = cell.fk_det;
        json files = json::object();
        if (!cell.files.eigenvalues.empty()) files["eigenvalues"] = cell.files.eigenvalues;
        if (!cell.files.field.empty()) files["field"] = cell.files.field;
        if (!cell.files.density.empty()) files["density"] = cell.files.density;
        c["files"] = files;
        if (cell.failed()) c["error"] = cell.error;
        cells.push_back(c);
    }
    j["cells"] = cells;
    json summary = json::array();
    for (const SummaryRow& row : report.summary) {
        summary.push_back({{"n", row.n},
                           {"t", row.t},
                           {"cells_ok", row.cells_ok},
                           {"cells_failed", row.cells_failed},
                           {"mean_distance", finite_or_null(row.mean_distance)},
                           {"stderr_distance", finite_or_null(row.stderr_distance)},
                           {"max_correction_norm", row.max_correction_norm}});
    }
    j["summary"] = summary;
    return j;
}

void write_eigenvalues_csv(const CellResult& cell, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    std::fputs("trial,index,re,im\n", f);
    for (Eigen::Index i = 0; i < cell.eigenvalues.size(); ++i)
        std::fprintf(f, "%ld,%ld,%.17g,%.17g\n", cell.trial, static_cast<long>(i),
                     cell.eigenvalues(i).real(), cell.eigenvalues(i).imag());
    std::fclose(f);
}

} // namespace

void emit_report(ExperimentReport& report, const std::string& out_dir) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(fs::path(out_dir) / "cells", ec);
    if (ec) throw IoError("cannot create output directory " + out_dir + ": " + ec.message());

    for (CellResult& cell : report.cells) {
        if (cell.failed()) continue;
        const std::string stem = "cells/n" + std::to_string(cell.n) + "_trial" + std::to_string(cell.trial);
        cell.files.eigenvalues = stem + "_eigenvalues.csv";
        write_eigenvalues_csv(cell, (fs::path(out_dir) / cell.files.eigenvalues).string());
        if (cell.field_data) {
            cell.files.field = stem + "_field.csv";
            write_field_csv(*cell.field_data, (fs::path(out_dir) / cell.files.field).string());
        }
        if (cell.density_data) {
            cell.files.density = stem + "_density.csv";
            write_density_csv(*cell.density_data, (fs::path(out_dir) / cell.files.density).string());
        }
    }

    const std::string path = (fs::path(out_dir) / "report.json").string();
    std::ofstream out(path);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << report_to_json(report).dump(2) << "\n";
    if (!out) throw IoError("write failed: " + path);
}

ExperimentReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open: " + path);
    json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad report " + path + ": " + e.what());
    }
    try {
        ExperimentReport report;
        report.config = config_from_json(j.at("config"));
        for (const json& c : j.at("cells")) {
            CellResult cell;
            cell.n = c.at("n").get<int>();
            cell.t = c.at("t").get<double>();
            cell.trial = c.at("trial").get<long>();
            cell.distance = double_or_nan(c.at("distance"));
            cell.correction_norm = c.at("correction_norm").get<double>();
            cell.fk_det = c.at("fk_det").get<double>();
            const json& files = c.at("files");
            if (files.contains("eigenvalues")) cell.files.eigenvalues = files["eigenvalues"].get<std::string>();
            if (files.contains("field")) cell.files.field = files["field"].get<std::string>();
            if (files.contains("density")) cell.files.density = files["density"].get<std::string>();
            if (c.contains("error")) cell.error = c["error"].get<std::string>();
            report.cells.push_back(std::move(cell));
        }
        for (const json& s : j.at("summary")) {
            SummaryRow row;
            row.n = s.at("n").get<int>();
            row.t = s.at("t").get<double>();
            row.cells_ok = s.at("cells_ok").get<long>();
            row.cells_failed = s.at("cells_failed").get<long>();
            row.mean_distance = double_or_nan(s.at("mean_distance"));
            row.stderr_distance = double_or_nan(s.at("stderr_distance"));
            row.max_correction_norm = s.at("max_correction_norm").get<double>();
            report.summary.push_back(row);
        }
        return report;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("bad report " + path + ": " + e.what());
    }
}

std::string sweep_to_json(const SweepResult& result) {
    json j;
    j["n"] = result.n;
    j["trials"] = result.trials;
    j["seed"] = result.seed;
    json rows = json::array();
    for (const SweepRow& row : result.rows) {
        rows.push_back({{"t", row.t},
                        {"cells_ok", row.cells_ok},
                        {"mean_distance", finite_or_null(row.mean_distance)},
                        {"stderr_distance", finite_or_null(row.stderr_distance)},
                        {"median_modulus", finite_or_null(row.median_modulus)},
                        {"max_correction_norm", row.max_correction_norm},
                        {"below_float_floor", row.below_float_floor}});
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

// ---- config files ---------------------------------------------------------

namespace {

std::vector<std::pair<int, double>> parse_schedule_points(const std::string& value) {
    std::vector<std::pair<int, double>> points;
    for (const std::string& tok : split_any(value, ", \t")) {
        const auto colon = tok.find(':');
        if (colon == std::string::npos)
            throw ConfigError("schedule.points: expected n:t entries, got \"" + tok + "\"");
        points.emplace_back(static_cast<int>(parse_long("schedule.points", tok.substr(0, colon))),
                            parse_double("schedule.points", tok.substr(colon + 1)));
    }
    if (points.empty()) throw ConfigError("schedule.points: empty list");
    return points;
}

Eigen::VectorXcd parse_diagonal_values(const std::string& value) {
    const std::vector<double> parts = parse_double_list(value);
    if (parts.size() % 2 != 0)
        throw ConfigError("ensemble.diagonal: expected re im pairs, got an odd count");
    Eigen::VectorXcd out(static_cast<Eigen::Index>(parts.size() / 2));
    for (std::size_t i = 0; i < parts.size(); i += 2)
        out(static_cast<Eigen::Index>(i / 2)) = Complex(parts[i], parts[i + 1]);
    return out;
}

} // namespace

ExperimentConfig parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty()) throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
        kv[key] = value; // later duplicates win
    }

    ExperimentConfig config;
    std::string ensemble_model;
    double ensemble_tau = 0.0;
    bool have_tau = false;
    std::string ensemble_path;
    Eigen::VectorXcd ensemble_diagonal;
    std::string schedule_kind = "power";
    double t0 = 1.0, alpha = 1.0, t_fixed = 0.0;
    bool have_t_fixed = false;
    std::vector<std::pair<int, double>> schedule_points;
    std::string target_model = "none";
    double target_t = 0.0;
    bool have_target_t = false;
    Complex target_shift{0.0, 0.0};
    double target_tau = 0.0;
    bool have_target_tau = false;

    for (const auto& [key, value] : kv) {
        if (key == "ensemble.model") ensemble_model = value;
        else if (key == "ensemble.tau") { ensemble_tau = parse_double(key, value); have_tau = true; }
        else if (key == "ensemble.path") ensemble_path = value;
        else if (key == "ensemble.diagonal") ensemble_diagonal = parse_diagonal_values(value);
        else if (key == "schedule.kind") schedule_kind = value;
        else if (key == "schedule.t0") t0 = parse_double(key, value);
        else if (key == "schedule.alpha") alpha = parse_double(key, value);
        else if (key == "schedule.t") { t_fixed = parse_double(key, value); have_t_fixed = true; }
        else if (key == "schedule.points") schedule_points = parse_schedule_points(value);
        else if (key == "run.n_list") {
            config.n_list.clear();
            for (double v : parse_double_list(value)) {
                if (v != std::floor(v) || v < 1.0)
                    throw ConfigError("run.n_list: entries must be positive integers");
                config.n_list.push_back(static_cast<int>(v));
            }
        }
        else if (key == "run.trials") config.trials = parse_long(key, value);
        else if (key == "run.emit_fields") config.emit_fields = parse_bool(key, value);
        else if (key == "grid.center") config.grid.center = parse_complex_pair(value);
        else if (key == "grid.half_width") config.grid.half_width = parse_double(key, value);
        else if (key == "grid.nodes") config.grid.nodes = static_cast<int>(parse_long(key, value));
        else if (key == "target.model") target_model = value;
        else if (key == "target.t") { target_t = parse_double(key, value); have_target_t = true; }
        else if (key == "target.shift") target_shift = parse_complex_pair(value);
        else if (key == "target.tau") { target_tau = parse_double(key, value); have_target_tau = true; }
        else if (key == "distance.method") config.distance = distance_from_name(value);
        else if (key == "seed") config.seed = parse_u64(key, value);
        else throw ConfigError("unknown config key: " + key);
    }

    if (ensemble_model.empty()) throw ConfigError("missing required key ensemble.model");
    if (ensemble_model == "ginibre") config.ensemble = EnsembleSpec::ginibre(1);
    else if (ensemble_model == "gue") config.ensemble = EnsembleSpec::gue(1);
    else if (ensemble_model == "elliptic") {
        if (!have_tau) throw ConfigError("ensemble.model = elliptic needs ensemble.tau");
        config.ensemble = EnsembleSpec::elliptic(1, ensemble_tau);
    } else if (ensemble_model == "nilpotent_shift") config.ensemble = EnsembleSpec::nilpotent_shift(1);
    else if (ensemble_model == "diagonal") {
        if (ensemble_diagonal.size() == 0)
            throw ConfigError("ensemble.model = diagonal needs ensemble.diagonal");
        config.ensemble = EnsembleSpec::diagonal(std::move(ensemble_diagonal));
    } else if (ensemble_model == "file") {
        if (ensemble_path.empty()) throw ConfigError("ensemble.model = file needs ensemble.path");
        config.ensemble = EnsembleSpec::file(ensemble_path);
    } else {
        throw ConfigError("unknown ensemble.model: " + ensemble_model);
    }

    if (schedule_kind == "power") config.schedule = Schedule::power(t0, alpha);
    else if (schedule_kind == "fixed") {
        if (!have_t_fixed) throw ConfigError("schedule.kind = fixed needs schedule.t");
        config.schedule = Schedule::fixed(t_fixed);
    } else if (schedule_kind == "list") {
        if (schedule_points.empty()) throw ConfigError("schedule.kind = list needs schedule.points");
        config.schedule = Schedule::from_points(std::move(schedule_points));
    } else {
        throw ConfigError("unknown schedule.kind: " + schedule_kind);
    }

    if (target_model == "none") config.target.reset();
    else if (target_model == "circular_scaled") {
        if (!have_target_t) throw ConfigError("target.model = circular_scaled needs target.t");
        config.target = BrownOracle::circular_scaled(target_t, target_shift);
    } else if (target_model == "haar_unitary") config.target = BrownOracle::haar_unitary();
    else if (target_model == "atom") config.target = BrownOracle::atom(target_shift);
    else if (target_model == "elliptic") {
        if (!have_target_tau) throw ConfigError("target.model = elliptic needs target.tau");
        config.target = BrownOracle::elliptic(target_tau);
    } else {
        throw ConfigError("unknown target.model: " + target_model);
    }

    return config;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return parse_config_text(buffer.str());
}

void apply_overrides(ExperimentConfig& config, const CliOverrides& overrides) {
    if (overrides.seed) config.seed = *overrides.seed;
    if (overrides.trials) {
        if (*overrides.trials < 0) throw ConfigError("trials must be nonnegative");
        config.trials = *overrides.trials;
    }
    if (overrides.n) {
        if (*overrides.n < 1) throw ConfigError("n must be positive");
        config.n_list = {*overrides.n};
    }
    if (overrides.t) config.schedule = Schedule::fixed(*overrides.t);
}

} // namespace specreg
