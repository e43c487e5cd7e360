#pragma once

#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "specreg/linalg.hpp"
#include "specreg/seed.hpp"

namespace specreg {

/// Singular values at one time, kept strictly decreasing and positive.
struct FlowState {
    double time = 0.0;
    Eigen::VectorXd values;

    void validate() const;
};

/// Per-step Gaussian increments, recorded so a run can be replayed exactly.
struct NoisePath {
    std::vector<double> dt;
    std::vector<Eigen::VectorXd> increments;
};

struct FlowOptions {
    double dt_min = 1e-12;      // refusal to shrink below this aborts the run
    double tie_jitter = 1e-9;   // splitting applied to exactly tied initial values
    bool suppress_noise = false; // integrate the drift ODE only
    bool record_states = true;
    bool record_noise = false;
};

struct FlowTrajectory {
    std::vector<FlowState> states; // first and last always present
    std::vector<double> dt_history;
    NoisePath noise;               // filled when record_noise is set
    SeedSpec seed;
    bool jittered = false;
    long rejected_steps = 0;

    const FlowState& initial_state() const { return states.front(); }
    const FlowState& final_state() const { return states.back(); }
};

/// Drift of the singular-value system: component i gets
///   (1/(2 x_i)) * (1 - 1/(2n) + (1/n) * sum_{j != i} (x_i^2 + x_j^2)/(x_i^2 - x_j^2)).
/// Values must be strictly decreasing and positive.
Eigen::VectorXd flow_drift(const Eigen::VectorXd& values);

/// One Euler-Maruyama step with the given noise increments. Returns nothing
/// when the step breaks ordering or positivity, signalling a rejection.
std::optional<FlowState> em_step(const FlowState& state, double dt, const Eigen::VectorXd& noise);

/// Integrate from the initial values to t_final. Steps that violate ordering
/// are retried at half the step size with fresh noise; the step size grows
/// back after acceptances but never beyond dt_init. Noise per component is
/// N(0, dt/(2n)). Exactly tied initial values are split by adding
/// tie_jitter * (rank below the top) and flagged in the trajectory.
FlowTrajectory simulate_flow(const Eigen::VectorXd& initial, double t_final, double dt_init,
                             const SeedSpec& seed, const FlowOptions& options = {});

/// Replay with a fixed noise path (dt sequence and increments both reused).
FlowTrajectory replay_flow(const Eigen::VectorXd& initial, const NoisePath& path,
                           const FlowOptions& options = {});

struct CoupledComparison {
    bool preserved = false;  // strict entrywise domination held at every accepted step
    double min_gap = 0.0;    // smallest upper_i - lower_i seen
    long steps = 0;
    FlowTrajectory lower;
    FlowTrajectory upper;
};

/// Run two copies of the flow on one shared noise path. Requires
/// lower_i < upper_i for every i at time zero; a step is accepted only when
/// both systems accept it and strict entrywise domination survives, so a
/// crossing attempt is retried at half step like any other rejection. The
/// run throws NumericError if the step collapses below dt_min.
CoupledComparison coupled_compare(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                  double t_final, double dt_init, const SeedSpec& seed,
                                  const FlowOptions& options = {});

/// Second-order singular-value response to an additive perturbation delta:
///   (s'_i)^2 = s_i^2 + 2 s_i Re delta_ii + sum_j |delta_ji|^2
///            + sum_{j != i} (s_i^2 |delta_ij|^2 + 2 s_i s_j Re(delta_ij delta_ji)
///                            + s_j^2 |delta_ji|^2) / (s_i^2 - s_j^2),
/// accurate to third order in delta. s must be pairwise distinct and positive;
/// negative squared responses are clamped to zero.
Eigen::VectorXd sv_perturbation(const Eigen::VectorXd& s, const ComplexMatrix& delta);

/// Laplacian, over the real matrix coordinates, of sum_{i<j} log|s_i^2-s_j^2|:
///   4 * sum_{i<j} (s_i^2 + s_j^2)/(s_i^2 - s_j^2)^2.
double repulsion_laplacian(const Eigen::VectorXd& s);

void write_trajectory_csv(const FlowTrajectory& trajectory, const std::string& path);

} // namespace specreg
