#include "specreg/ensembles.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <utility>

#include "specreg/errors.hpp"

namespace specreg {

namespace {

void require_dimension(int n, const char* who) {
    if (n < 1)
        throw std::invalid_argument(std::string(who) + ": dimension must be >= 1, got " +
                                    std::to_string(n));
}

// Lane indices for the independent sub-streams of one realization.
constexpr std::uint64_t kLaneEntries = 0;
constexpr std::uint64_t kLaneSecond = 1;   // second GUE factor of the elliptic model
constexpr std::uint64_t kLaneSumBase = 16; // summand k draws from lane 16 + k

ComplexMatrix gaussian_entries(int n, double coord_variance, std::mt19937_64& engine) {
    std::normal_distribution<double> gauss(0.0, std::sqrt(coord_variance));
    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            double re = gauss(engine);
            double im = gauss(engine);
            m(i, j) = Complex(re, im);
        }
    return m;
}

ComplexMatrix gue_from_engine(int n, std::mt19937_64& engine) {
    std::normal_distribution<double> off(0.0, std::sqrt(1.0 / (2.0 * n)));
    std::normal_distribution<double> diag(0.0, std::sqrt(1.0 / n));
    ComplexMatrix h(n, n);
    for (int i = 0; i < n; ++i) {
        h(i, i) = Complex(diag(engine), 0.0);
        for (int j = i + 1; j < n; ++j) {
            double re = off(engine);
            double im = off(engine);
            h(i, j) = Complex(re, im);
            h(j, i) = Complex(re, -im);
        }
    }
    return h;
}

} // namespace

EnsembleSpec EnsembleSpec::ginibre(int n) {
    require_dimension(n, "EnsembleSpec::ginibre");
    EnsembleSpec s;
    s.model = Model::ginibre;
    s.n = n;
    return s;
}

EnsembleSpec EnsembleSpec::gue(int n) {
    require_dimension(n, "EnsembleSpec::gue");
    EnsembleSpec s;
    s.model = Model::gue;
    s.n = n;
    return s;
}

EnsembleSpec EnsembleSpec::elliptic(int n, double tau) {
    require_dimension(n, "EnsembleSpec::elliptic");
    if (tau < -1.0 || tau > 1.0)
        throw std::invalid_argument("EnsembleSpec::elliptic: tau must lie in [-1, 1], got " +
                                    std::to_string(tau));
    EnsembleSpec s;
    s.model = Model::elliptic;
    s.n = n;
    s.tau = tau;
    return s;
}

EnsembleSpec EnsembleSpec::nilpotent_shift(int n) {
    require_dimension(n, "EnsembleSpec::nilpotent_shift");
    EnsembleSpec s;
    s.model = Model::nilpotent_shift;
    s.n = n;
    return s;
}

EnsembleSpec EnsembleSpec::diagonal(Eigen::VectorXcd values) {
    if (values.size() < 1)
        throw std::invalid_argument("EnsembleSpec::diagonal: need at least one value");
    EnsembleSpec s;
    s.model = Model::diagonal;
    s.n = static_cast<int>(values.size());
    s.diagonal_values = std::move(values);
    return s;
}

EnsembleSpec EnsembleSpec::file(std::string path) {
    EnsembleSpec s;
    s.model = Model::file;
    s.path = std::move(path);
    s.n = 0; // fixed by the file on realization
    return s;
}

EnsembleSpec EnsembleSpec::sum(std::vector<EnsembleSpec> terms) {
    if (terms.empty())
        throw std::invalid_argument("EnsembleSpec::sum: need at least one term");
    EnsembleSpec s;
    s.model = Model::sum;
    s.n = terms.front().n;
    s.terms = std::move(terms);
    return s;
}

EnsembleSpec EnsembleSpec::scaled(Complex factor) const {
    EnsembleSpec s = *this;
    s.scale *= factor;
    return s;
}

std::string EnsembleSpec::model_name() const {
    switch (model) {
        case Model::ginibre: return "ginibre";
        case Model::gue: return "gue";
        case Model::elliptic: return "elliptic";
        case Model::nilpotent_shift: return "nilpotent_shift";
        case Model::diagonal: return "diagonal";
        case Model::file: return "file";
        case Model::sum: return "sum";
    }
    return "unknown";
}

ComplexMatrix sample_ginibre(int n, const SeedSpec& seed) {
    require_dimension(n, "sample_ginibre");
    auto engine = make_engine(seed, kLaneEntries);
    return gaussian_entries(n, 1.0 / (2.0 * n), engine);
}

ComplexMatrix sample_gue(int n, const SeedSpec& seed) {
    require_dimension(n, "sample_gue");
    auto engine = make_engine(seed, kLaneEntries);
    return gue_from_engine(n, engine);
}

ComplexMatrix sample_elliptic(int n, double tau, const SeedSpec& seed) {
    require_dimension(n, "sample_elliptic");
    if (tau < -1.0 || tau > 1.0)
        throw std::invalid_argument("sample_elliptic: tau must lie in [-1, 1]");
    auto engine1 = make_engine(seed, kLaneEntries);
    auto engine2 = make_engine(seed, kLaneSecond);
    ComplexMatrix h1 = gue_from_engine(n, engine1);
    ComplexMatrix h2 = gue_from_engine(n, engine2);
    return std::sqrt((1.0 + tau) / 2.0) * h1 +
           Complex(0.0, std::sqrt((1.0 - tau) / 2.0)) * h2;
}

ComplexMatrix brownian_increment(int n, double dt, const SeedSpec& seed) {
    require_dimension(n, "brownian_increment");
    if (!(dt > 0.0))
        throw std::invalid_argument("brownian_increment: dt must be positive");
    auto engine = make_engine(seed, kLaneEntries);
    return gaussian_entries(n, dt / (2.0 * n), engine);
}

ComplexMatrix nilpotent_shift(int n) {
    require_dimension(n, "nilpotent_shift");
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (int i = 0; i + 1 < n; ++i) m(i + 1, i) = 1.0;
    return m;
}

ComplexMatrix realize(const EnsembleSpec& spec, const SeedSpec& seed) {
    ComplexMatrix m;
    switch (spec.model) {
        case EnsembleSpec::Model::ginibre:
            m = sample_ginibre(spec.n, seed);
            break;
        case EnsembleSpec::Model::gue:
            m = sample_gue(spec.n, seed);
            break;
        case EnsembleSpec::Model::elliptic:
            m = sample_elliptic(spec.n, spec.tau, seed);
            break;
        case EnsembleSpec::Model::nilpotent_shift:
            m = nilpotent_shift(spec.n);
            break;
        case EnsembleSpec::Model::diagonal:
            m = ComplexMatrix(spec.diagonal_values.asDiagonal());
            break;
        case EnsembleSpec::Model::file:
            m = read_matrix_file(spec.path);
            break;
        case EnsembleSpec::Model::sum: {
            if (spec.terms.empty())
                throw std::invalid_argument("realize: sum spec has no terms");
            for (std::size_t k = 0; k < spec.terms.size(); ++k) {
                SeedSpec term_seed{derive_seed(seed, kLaneSumBase + k), seed.stream_id};
                ComplexMatrix term = realize(spec.terms[k], term_seed);
                if (k == 0)
                    m = std::move(term);
                else if (term.rows() != m.rows())
                    throw std::invalid_argument("realize: sum terms have mismatched dimensions");
                else
                    m += term;
            }
            break;
        }
    }
    if (spec.scale != Complex(1.0, 0.0)) m *= spec.scale;
    return m;
}

ComplexMatrix read_matrix_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open matrix file: " + path);

    std::string line;
    if (!std::getline(in, line)) throw IoError(path + ": empty file, expected dimension line");
    int n = 0;
    {
        std::istringstream head(line);
        if (!(head >> n) || n < 1)
            throw IoError(path + ": line 1: expected positive dimension, got \"" + line + "\"");
        std::string extra;
        if (head >> extra)
            throw IoError(path + ": line 1: trailing content after dimension");
    }

    ComplexMatrix m(n, n);
    for (int i = 0; i < n; ++i) {
        if (!std::getline(in, line))
            throw IoError(path + ": line " + std::to_string(i + 2) + ": missing matrix row");
        std::istringstream row(line);
        for (int j = 0; j < n; ++j) {
            double re, im;
            if (!(row >> re >> im))
                throw IoError(path + ": line " + std::to_string(i + 2) + ": element " +
                              std::to_string(j + 1) + ": expected two floats (re im)");
            m(i, j) = Complex(re, im);
        }
        std::string extra;
        if (row >> extra)
            throw IoError(path + ": line " + std::to_string(i + 2) + ": extra content \"" +
                          extra + "\" after " + std::to_string(n) + " elements");
    }
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag()))
                throw IoError(path + ": line " + std::to_string(i + 2) + ": element " +
                              std::to_string(j + 1) + ": non-finite value");
    return m;
}

void write_matrix_file(const std::string& path, const ComplexMatrix& m) {
    if (m.rows() != m.cols())
        throw std::invalid_argument("write_matrix_file: matrix must be square");
    std::ofstream out(path);
    if (!out) throw IoError("cannot open matrix file for writing: " + path);
    const int n = static_cast<int>(m.rows());
    out << n << "\n";
    char buf[64];
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g %.17g", m(i, j).real(), m(i, j).imag());
            out << buf << (j + 1 < n ? " " : "");
        }
        out << "\n";
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace specreg
