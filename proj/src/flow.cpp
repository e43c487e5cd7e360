#include "specreg/flow.hpp"

#include <cmath>
#include <cstdio>
#include <random>
#include <sstream>
#include <stdexcept>

#include "specreg/errors.hpp"

namespace specreg {

namespace {

bool strictly_ordered_positive(const Eigen::VectorXd& v) {
    if (v.size() == 0) return false;
    for (Eigen::Index i = 0; i < v.size(); ++i)
        if (!std::isfinite(v(i)) || !(v(i) > 0.0)) return false;
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
        if (!(v(i) > v(i + 1))) return false;
    return true;
}

Eigen::VectorXd split_ties(Eigen::VectorXd v, double jitter, bool& applied) {
    applied = false;
    if (jitter <= 0.0) return v;
    bool tie = false;
    for (Eigen::Index i = 0; i + 1 < v.size(); ++i)
        if (v(i) == v(i + 1)) tie = true;
    if (!tie) return v;
    const Eigen::Index n = v.size();
    for (Eigen::Index i = 0; i < n; ++i) v(i) += jitter * static_cast<double>(n - 1 - i);
    applied = true;
    return v;
}

std::string describe_values(const Eigen::VectorXd& v) {
    std::ostringstream os;
    os << "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (i) os << ", ";
        os << v(i);
    }
    os << "]";
    return os.str();
}

struct IntegrateTally {
    long accepted = 0;
    long rejected = 0;
};

// Shared Euler-Maruyama loop. All systems advance with one noise vector per
// attempt; a step commits only when every system keeps ordering and
// positivity and the candidate passes `admissible`, otherwise it is retried
// at half size with fresh noise.
template <typename Admissible, typename OnAccept>
IntegrateTally integrate(std::vector<FlowState>& systems, double t_final, double dt_init,
                         const FlowOptions& options, std::mt19937_64& engine,
                         Admissible&& admissible, OnAccept&& on_accept) {
    const Eigen::Index n = systems.front().values.size();
    std::normal_distribution<double> unit(0.0, 1.0);
    Eigen::VectorXd noise = Eigen::VectorXd::Zero(n);
    std::vector<FlowState> candidate(systems.size());

    IntegrateTally tally;
    double dt = dt_init;
    while (systems.front().time < t_final) {
        const double remaining = t_final - systems.front().time;
        const double step = std::min(dt, remaining);
        if (!options.suppress_noise) {
            const double sd = std::sqrt(step / (2.0 * static_cast<double>(n)));
            for (Eigen::Index i = 0; i < n; ++i) noise(i) = sd * unit(engine);
        }
        bool ok = true;
        for (size_t k = 0; k < systems.size(); ++k) {
            auto next = em_step(systems[k], step, noise);
            if (!next) {
                ok = false;
                break;
            }
            if (step == remaining) next->time = t_final;
            candidate[k] = std::move(*next);
        }
        if (ok && !admissible(candidate)) ok = false;
        if (ok) {
            systems.swap(candidate);
            ++tally.accepted;
            on_accept(step, noise);
            dt = std::min(dt * 2.0, dt_init);
        } else {
            ++tally.rejected;
            dt = step / 2.0;
            if (dt < options.dt_min) {
                std::ostringstream os;
                os << "flow step collapsed below dt_min=" << options.dt_min << " at time "
                   << systems.front().time << " with values " << describe_values(systems.front().values);
                throw NumericError(os.str());
            }
        }
    }
    return tally;
}

void check_common_arguments(const Eigen::VectorXd& initial, double t_final, double dt_init,
                            const FlowOptions& options) {
    if (initial.size() == 0) throw std::invalid_argument("flow: empty initial state");
    if (!(t_final >= 0.0) || !std::isfinite(t_final))
        throw std::invalid_argument("flow: t_final must be finite and nonnegative");
    if (!(dt_init > 0.0)) throw std::invalid_argument("flow: dt_init must be positive");
    if (!(options.dt_min > 0.0)) throw std::invalid_argument("flow: dt_min must be positive");
}

} // namespace

void FlowState::validate() const {
    if (!strictly_ordered_positive(values))
        throw std::invalid_argument("flow state must be strictly decreasing and positive");
    if (!std::isfinite(time)) throw std::invalid_argument("flow state time must be finite");
}

Eigen::VectorXd flow_drift(const Eigen::VectorXd& values) {
    if (!strictly_ordered_positive(values))
        throw std::invalid_argument("flow_drift needs strictly decreasing positive values");
    const Eigen::Index n = values.size();
    const double inv_n = 1.0 / static_cast<double>(n);
    Eigen::VectorXd drift(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double xi2 = values(i) * values(i);
        double interaction = 0.0;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double xj2 = values(j) * values(j);
            interaction += (xi2 + xj2) / (xi2 - xj2);
        }
        drift(i) = (1.0 - 0.5 * inv_n + inv_n * interaction) / (2.0 * values(i));
    }
    return drift;
}

std::optional<FlowState> em_step(const FlowState& state, double dt, const Eigen::VectorXd& noise) {
    if (noise.size() != state.values.size())
        throw std::invalid_argument("em_step: noise size mismatch");
    if (!(dt > 0.0)) throw std::invalid_argument("em_step: dt must be positive");
    FlowState next;
    next.time = state.time + dt;
    next.values = state.values + dt * flow_drift(state.values) + noise;
    if (!strictly_ordered_positive(next.values)) return std::nullopt;
    return next;
}

FlowTrajectory simulate_flow(const Eigen::VectorXd& initial, double t_final, double dt_init,
                             const SeedSpec& seed, const FlowOptions& options) {
    check_common_arguments(initial, t_final, dt_init, options);

    FlowTrajectory out;
    out.seed = seed;
    Eigen::VectorXd start = split_ties(initial, options.tie_jitter, out.jittered);
    if (!strictly_ordered_positive(start))
        throw std::invalid_argument("flow: initial values must be strictly decreasing and positive "
                                    "(exact ties are split automatically)");

    std::vector<FlowState> systems{FlowState{0.0, start}};
    out.states.push_back(systems.front());

    auto engine = make_engine(seed);
    const IntegrateTally tally = integrate(systems, t_final, dt_init, options, engine,
        [](const std::vector<FlowState>&) { return true; },
        [&](double dt, const Eigen::VectorXd& noise) {
            out.dt_history.push_back(dt);
            if (options.record_states) out.states.push_back(systems.front());
            if (options.record_noise) {
                out.noise.dt.push_back(dt);
                out.noise.increments.push_back(noise);
            }
        });
    out.rejected_steps = tally.rejected;
    if (!options.record_states && tally.accepted > 0) out.states.push_back(systems.front());
    return out;
}

FlowTrajectory replay_flow(const Eigen::VectorXd& initial, const NoisePath& path,
                           const FlowOptions& options) {
    if (path.dt.size() != path.increments.size())
        throw std::invalid_argument("replay_flow: malformed noise path");
    FlowTrajectory out;
    Eigen::VectorXd start = split_ties(initial, options.tie_jitter, out.jittered);
    if (!strictly_ordered_positive(start))
        throw std::invalid_argument("replay_flow: initial values must be strictly decreasing and positive");
    FlowState state{0.0, start};
    out.states.push_back(state);
    for (size_t k = 0; k < path.dt.size(); ++k) {
        auto next = em_step(state, path.dt[k], path.increments[k]);
        if (!next)
            throw NumericError("replay_flow: recorded step " + std::to_string(k) +
                               " rejected on replay");
        state = std::move(*next);
        out.dt_history.push_back(path.dt[k]);
        if (options.record_states) out.states.push_back(state);
    }
    if (!options.record_states && !path.dt.empty()) out.states.push_back(state);
    return out;
}

CoupledComparison coupled_compare(const Eigen::VectorXd& lower, const Eigen::VectorXd& upper,
                                  double t_final, double dt_init, const SeedSpec& seed,
                                  const FlowOptions& options) {
    check_common_arguments(lower, t_final, dt_init, options);
    if (lower.size() != upper.size())
        throw std::invalid_argument("coupled_compare: size mismatch");

    CoupledComparison out;
    out.lower.seed = seed;
    out.upper.seed = seed;
    Eigen::VectorXd lo = split_ties(lower, options.tie_jitter, out.lower.jittered);
    Eigen::VectorXd hi = split_ties(upper, options.tie_jitter, out.upper.jittered);
    if (!strictly_ordered_positive(lo) || !strictly_ordered_positive(hi))
        throw std::invalid_argument("coupled_compare: both states must be strictly decreasing and positive");
    for (Eigen::Index i = 0; i < lo.size(); ++i)
        if (!(lo(i) < hi(i)))
            throw std::invalid_argument("coupled_compare: needs strict entrywise domination at time zero");

    std::vector<FlowState> systems{FlowState{0.0, lo}, FlowState{0.0, hi}};
    out.lower.states.push_back(systems[0]);
    out.upper.states.push_back(systems[1]);
    out.preserved = true;
    out.min_gap = (hi - lo).minCoeff();

    auto engine = make_engine(seed);
    // Domination is part of step acceptance. The shared noise cancels in the
    // difference, whose drift cannot push an entry through zero from above,
    // so any crossing is Euler overshoot (the 1/(2x) term near x = 0 can move
    // a value by O(dt/x) in one step); halving the step removes it.
    const IntegrateTally tally = integrate(systems, t_final, dt_init, options, engine,
        [](const std::vector<FlowState>& candidate) {
            return ((candidate[1].values - candidate[0].values).array() > 0.0).all();
        },
        [&](double dt, const Eigen::VectorXd& noise) {
            ++out.steps;
            const double gap = (systems[1].values - systems[0].values).minCoeff();
            out.min_gap = std::min(out.min_gap, gap);
            if (!(gap > 0.0)) out.preserved = false;
            out.lower.dt_history.push_back(dt);
            out.upper.dt_history.push_back(dt);
            if (options.record_states) {
                out.lower.states.push_back(systems[0]);
                out.upper.states.push_back(systems[1]);
            }
            if (options.record_noise) {
                out.lower.noise.dt.push_back(dt);
                out.lower.noise.increments.push_back(noise);
                out.upper.noise.dt.push_back(dt);
                out.upper.noise.increments.push_back(noise);
            }
        });
    out.lower.rejected_steps = tally.rejected;
    out.upper.rejected_steps = tally.rejected;
    if (!options.record_states && tally.accepted > 0) {
        out.lower.states.push_back(systems[0]);
        out.upper.states.push_back(systems[1]);
    }
    return out;
}

Eigen::VectorXd sv_perturbation(const Eigen::VectorXd& s, const ComplexMatrix& delta) {
    const Eigen::Index n = s.size();
    if (n == 0) throw std::invalid_argument("sv_perturbation: empty spectrum");
    if (delta.rows() != n || delta.cols() != n)
        throw std::invalid_argument("sv_perturbation: perturbation shape mismatch");
    for (Eigen::Index i = 0; i < n; ++i)
        if (!(s(i) > 0.0)) throw std::invalid_argument("sv_perturbation: values must be positive");
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j)
            if (s(i) == s(j))
                throw std::domain_error("sv_perturbation: coincident singular values");

    Eigen::VectorXd out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double si = s(i);
        double sq = si * si + 2.0 * si * delta(i, i).real();
        for (Eigen::Index j = 0; j < n; ++j) sq += std::norm(delta(j, i));
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const double sj = s(j);
            const double mixed = si * si * std::norm(delta(i, j)) +
                                 2.0 * si * sj * (delta(i, j) * delta(j, i)).real() +
                                 sj * sj * std::norm(delta(j, i));
            sq += mixed / (si * si - sj * sj);
        }
        out(i) = std::sqrt(std::max(0.0, sq));
    }
    return out;
}

double repulsion_laplacian(const Eigen::VectorXd& s) {
    const Eigen::Index n = s.size();
    if (n == 0) throw std::invalid_argument("repulsion_laplacian: empty spectrum");
    double acc = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            const double a = s(i) * s(i);
            const double b = s(j) * s(j);
            if (a == b) throw std::domain_error("repulsion_laplacian: coincident singular values");
            acc += (a + b) / ((a - b) * (a - b));
        }
    }
    return 4.0 * acc;
}

void write_trajectory_csv(const FlowTrajectory& trajectory, const std::string& path) {
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) throw IoError("cannot open for writing: " + path);
    const Eigen::Index n = trajectory.states.empty() ? 0 : trajectory.states.front().values.size();
    std::fputs("time", f);
    for (Eigen::Index i = 0; i < n; ++i) std::fprintf(f, ",lambda_%ld", static_cast<long>(i + 1));
    std::fputc('\n', f);
    for (const FlowState& state : trajectory.states) {
        std::fprintf(f, "%.17g", state.time);
        for (Eigen::Index i = 0; i < n; ++i) std::fprintf(f, ",%.17g", state.values(i));
        std::fputc('\n', f);
    }
    std::fclose(f);
}

} // namespace specreg
