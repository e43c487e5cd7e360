#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specreg/linalg.hpp"

namespace specreg {

/// Square node-centred grid over a window of the complex plane.
/// nodes is odd so the centre lies on a node; spacing h = 2*half_width/(nodes-1).
struct GridSpec {
    Complex center{0.0, 0.0};
    double half_width = 1.6;
    int nodes = 101;

    double spacing() const { return 2.0 * half_width / (nodes - 1); }
    /// Node at column ix (real direction), row iy (imaginary direction).
    Complex node(int ix, int iy) const {
        return center + Complex(-half_width + ix * spacing(), -half_width + iy * spacing());
    }
    void validate() const;
};

/// Sampled log-potential L(lambda) = tr log|a - lambda| on a grid.
/// values(iy, ix) matches GridSpec::node(ix, iy); clamped marks nodes where
/// the singular-value floor was hit (lambda at or numerically on the spectrum).
struct LogPotentialField {
    GridSpec grid;
    Eigen::ArrayXXd values;
    Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic> clamped;
};

/// Density (1/2pi) * discrete Laplacian of a log-potential field, defined on
/// the interior nodes of the parent grid (grid here is the parent grid
/// shrunk by one node on each side).
struct BrownDensityGrid {
    GridSpec grid;
    Eigen::ArrayXXd density;
    double total_mass() const;
};

/// Finite atomic measure in the plane.
struct EmpiricalMeasure {
    std::vector<Complex> atoms;
    std::vector<double> weights;

    static EmpiricalMeasure from_spectrum(const SpectrumSample& sample);
    static EmpiricalMeasure from_points(const std::vector<Complex>& points);
    void validate() const;
};

/// Closed-form limit descriptors.
struct BrownOracle {
    enum class Model { circular_scaled, haar_unitary, atom, elliptic };
    Model model = Model::circular_scaled;
    double t = 1.0;       // circular_scaled: variance of the Gaussian part
    Complex shift{0.0, 0.0};
    double tau = 0.0;     // elliptic asymmetry in [-1, 1]

    static BrownOracle circular_scaled(double t, Complex shift = Complex(0.0, 0.0));
    static BrownOracle haar_unitary();
    static BrownOracle atom(Complex a);
    static BrownOracle elliptic(double tau);
};

/// oracle_potential(circular_scaled(t,s), lambda) with r = |lambda-s|/sqrt(t):
///   log(sqrt(t)) + (r^2-1)/2 inside the unit of r, log(sqrt(t)) + log(r) outside.
/// haar_unitary: max(0, log|lambda|).  atom(a): log|lambda - a|, clamped at the
/// singular-value floor.  circular_scaled with t = 0 degenerates to atom(shift).
double oracle_potential(const BrownOracle& oracle, Complex lambda);

/// Support of the limit measure, for distance computations.
struct ReferenceMeasure {
    enum class Kind { disk, circle, point, ellipse };
    Kind kind = Kind::disk;
    Complex center{0.0, 0.0};
    double radius = 1.0;   // disk/circle radius
    double semi_re = 1.0;  // ellipse semi-axes
    double semi_im = 1.0;

    bool rotation_invariant() const;
    /// Mass within distance r of the centre; only for rotation-invariant kinds.
    double radial_cdf(double r) const;
    /// Deterministic low-discrepancy discretization into equal-weight points.
    std::vector<Complex> discretize(int count) const;
};

ReferenceMeasure oracle_brown(const BrownOracle& oracle);

enum class DistanceMethod { radial_ks, energy };

/// radial_ks: completed-graph sup gap (Levy metric) between the weighted
/// radial CDF of mu (radii measured from the reference centre) and the
/// reference radial CDF: the least eps such that each CDF stays inside the
/// other's graph fattened by eps both vertically and horizontally. Never
/// exceeds the plain vertical sup-distance, and unlike it stays informative
/// against atomic references (circle, point), where the vertical sup
/// saturates at 1 for every continuous cloud; fully separated unit masses a
/// distance d <= 1 apart still score exactly d. Requires a rotation-invariant
/// reference. energy: weighted energy distance against a 2048-point
/// discretization of the reference.
double measure_distance(const EmpiricalMeasure& mu, const ReferenceMeasure& ref, DistanceMethod method);

LogPotentialField log_potential_field(const ComplexMatrix& a, const GridSpec& grid);
LogPotentialField log_potential_field(const BrownOracle& oracle, const GridSpec& grid);

BrownDensityGrid brown_density(const LogPotentialField& field);

/// h^2-weighted sum of density over nodes selected by the predicate.
double region_mass(const BrownDensityGrid& density, const std::function<bool(Complex)>& inside);

void write_field_csv(const LogPotentialField& field, const std::string& path);

/// Plot export: negative discretization residue is clipped to 0 in the file;
/// the in-memory grid keeps the signed values.
void write_density_csv(const BrownDensityGrid& density, const std::string& path);
void write_measure_json(const EmpiricalMeasure& mu, const std::string& path);
EmpiricalMeasure read_measure_json(const std::string& path);

} // namespace specreg
