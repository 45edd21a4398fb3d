#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/errors.hpp"
#include "diffnet/rng.hpp"

namespace diffnet {

enum class InputKind { iid_gaussian, ar1 };

/// Statistical description of one node's regressor stream.
///  - iid_gaussian: x(n) ~ N(0, variance * I_L)
///  - ar1: scalar stream s(n) = rho s(n-1) + sqrt((1-rho^2) variance) w(n),
///    regressor is the sliding window [s(n), s(n-1), ..., s(n-L+1)]^T, so the
///    stationary covariance is variance * Toeplitz(1, rho, rho^2, ...).
struct InputSpec {
    InputKind kind = InputKind::iid_gaussian;
    double variance = 1.0;
    double ar_coefficient = 0.0;  // rho, only for ar1
    int dimension = 2;            // L

    /// Stationary regressor covariance (symmetric positive definite).
    Eigen::MatrixXd covariance() const;
};

enum class TrajectoryKind { constant, circle, piecewise_linear };

/// One linear-interpolation episode of a piecewise schedule. Within
/// [start_n, end_n] the value moves linearly from start_value to end_value.
struct TrajectorySegment {
    double start_n = 0.0;
    double end_n = 0.0;
    Eigen::VectorXd start_value;
    Eigen::VectorXd end_value;
};

/// Deterministic part of a node's optimum vector over time.
///  - constant: base forever,
///  - circle: center + radius [cos(angle), sin(angle)] (time-invariant),
///  - piecewise_linear: interpolates inside segments, holds the nearest
///    stage value outside them.
struct OptimumTrajectory {
    TrajectoryKind kind = TrajectoryKind::constant;
    Eigen::VectorXd base;          // constant value
    Eigen::VectorXd circle_center; // circle: w_o
    double circle_radius = 0.0;
    double circle_angle = 0.0;     // theta
    std::vector<TrajectorySegment> segments;  // sorted by start_n, non-overlapping

    Eigen::VectorXd value_at(double n) const;
    bool time_invariant() const { return kind != TrajectoryKind::piecewise_linear; }
    int dimension() const;
};

/// Circle placement used by the ring-of-optima experiments:
/// w_k = center + radius [cos t, sin t], t = 2 pi (k-1)/N + pi/8 (k 1-based).
OptimumTrajectory circle_optimum(const Eigen::Vector2d& center, double radius, int node_1based,
                                 int n_agents);

OptimumTrajectory constant_optimum(Eigen::VectorXd value);

/// Everything that defines one node's data stream: regressor statistics,
/// observation noise variance, optimum trajectory, and the variance of the
/// isotropic random perturbation added to the optimum at each instant.
struct NodeEnvironment {
    InputSpec input;
    double noise_variance = 0.0;         // sigma_z^2
    double perturbation_variance = 0.0;  // sigma_eps^2 (per component)
    OptimumTrajectory optimum;
};

/// One streaming observation: d = x^T w*(n) + z.
struct Sample {
    Eigen::VectorXd x;
    double d = 0.0;
    long n = 0;
};

/// Draws the next regressor. For ar1 inputs, `previous_x` carries the lagged
/// window; the first call (nullopt) bootstraps from the stationary law.
Eigen::VectorXd draw_regressor(const NodeEnvironment& env, RngStream& rng,
                               const std::optional<Eigen::VectorXd>& previous_x = std::nullopt);

/// Returns (deterministic trajectory value at n, that value + perturbation).
std::pair<Eigen::VectorXd, Eigen::VectorXd> optimum_at(const NodeEnvironment& env, long n,
                                                       RngStream& rng);

/// Stateful per-(realization, node) generator that advances all three random
/// sources together. Exclusive to one realization; not shared across threads.
class NodeSignalGenerator {
public:
    NodeSignalGenerator(const NodeEnvironment& env, RngStream x_stream, RngStream z_stream,
                        RngStream eps_stream);

    struct Draw {
        Sample sample;
        Eigen::VectorXd w_star_fixed;    // trajectory value at n
        Eigen::VectorXd w_star_instant;  // trajectory value + perturbation
    };

    Draw next(long n);
    const NodeEnvironment& environment() const { return *env_; }

private:
    const NodeEnvironment* env_;
    RngStream x_stream_;
    RngStream z_stream_;
    RngStream eps_stream_;
    std::optional<Eigen::VectorXd> prev_x_;
};

/// Linear state-space world for the multi-target tracking experiment.
/// Target states evolve as x_i(n+1) = T_i x_i(n) + z_i(n); each node
/// observes its assigned target through additive isotropic noise.
struct TrackingWorld {
    std::vector<Eigen::Matrix2d> transitions;     // T_i, one per target
    std::vector<Eigen::Vector2d> initial_states;  // x_i(0)
    double state_noise_std = 0.0;                 // sigma_z
    double obs_noise_std = 0.0;                   // sigma_u
    std::vector<int> assignment;                  // node k -> target index (0-based)

    int n_targets() const { return static_cast<int>(transitions.size()); }
    int n_nodes() const { return static_cast<int>(assignment.size()); }
};

/// Advances the tracking world and emits, per node, the observation pair
/// (obs of x(n), obs of x(n+1)) used as regressor / desired output. Each
/// observation is drawn once: the pair emitted at n shares its second
/// element with the first element of the pair at n+1.
class TrackingSimulator {
public:
    TrackingSimulator(const TrackingWorld& world, std::uint64_t seed, std::uint64_t run);

    struct Step {
        std::vector<Eigen::Vector2d> states;  // true x_i(n+1)
        std::vector<Eigen::Vector2d> obs_now;   // x~_k(n)
        std::vector<Eigen::Vector2d> obs_next;  // x~_k(n+1)
    };

    /// Advances from time n to n+1 (call with n = 0, 1, ...).
    Step step();

    const std::vector<Eigen::Vector2d>& states() const { return states_; }

private:
    std::vector<Eigen::Vector2d> observe();

    const TrackingWorld* world_;
    std::vector<Eigen::Vector2d> states_;
    std::vector<Eigen::Vector2d> current_obs_;
    std::vector<RngStream> state_streams_;  // one per target
    std::vector<RngStream> obs_streams_;    // one per node
};

}  // namespace diffnet
