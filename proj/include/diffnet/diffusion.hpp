#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/network.hpp"
#include "diffnet/scenario.hpp"
#include "diffnet/signal_model.hpp"

namespace diffnet {

/// Per-node filter state of the diffusion recursion. `phi` and `psi` are the
/// two intermediate stages; `w` is the running estimate. All start at zero.
struct AgentState {
    Eigen::VectorXd w;
    Eigen::VectorXd psi;
    Eigen::VectorXd phi;
    double step_size = 0.0;
};

std::vector<AgentState> make_agent_states(int n_agents, int dimension,
                                          const std::vector<double>& step_sizes);

/// One iteration of the general diffusion recursion:
///   phi_k = sum_{l in N_k} a1(l,k) w_l
///   psi_k = phi_k + mu_k sum_{l in N_k} c(l,k) x_l (d_l - x_l^T phi_k)
///   w_k   = sum_{l in N_k} a2(l,k) psi_l
/// All right-hand sides use the pre-step values, in the stated order.
void step_general(std::vector<AgentState>& states, const NetworkModel& network,
                  const std::vector<Sample>& samples);

/// Adapt-then-combine special case (a1 = identity).
void step_atc(std::vector<AgentState>& states, const NetworkModel& network,
              const std::vector<Sample>& samples);

/// Time-varying combination/exchange weights of the adaptive-clustering
/// algorithm. Both start at identity.
struct AdaptiveWeights {
    Eigen::MatrixXd a;  // left-stochastic on the topology support
    Eigen::MatrixXd c;  // right-stochastic; equals a^T under reciprocity
    AdaptiveOptions options;

    static AdaptiveWeights identity_init(int n_agents, AdaptiveOptions options);
};

/// Squared distances below this floor are clamped before inversion in the
/// combination rule, so that a coinciding neighbor receives (almost) all of
/// the weight instead of producing a division by zero.
inline constexpr double kDistanceFloor = 1e-12;

/// Recomputes column k of A from the freshly adapted psi vectors:
///   q_k = (d_k - x_k^T psi_k) x_k, optionally normalized to q/(||q||+xi);
///   a(l,k) ~ || psi_k + mu_k q_k - psi_l ||^{-2} on N_k, normalized.
/// With reciprocity on, also sets c = a^T.
void clustering_update(const std::vector<AgentState>& states, AdaptiveWeights& weights,
                       const Topology& topology, const std::vector<Sample>& samples);

/// One iteration of ATC diffusion with adaptive clustering:
/// adapt with C(n), update A(n+1) (and C(n+1) under reciprocity), then
/// combine with A(n+1).
void step_atc_adaptive(std::vector<AgentState>& states, AdaptiveWeights& weights,
                       const Topology& topology, const std::vector<Sample>& samples);

/// Matrix-valued agent state for the transition-matrix estimation task.
struct MatrixAgentState {
    Eigen::Matrix2d T;
    Eigen::Matrix2d psi_T;
    double step_size = 0.0;
};

/// ATC step on matrix estimates from observation pairs (obs_now, obs_next):
///   psi_k = T_k + mu_k e_k obs_now_k^T,  e_k = obs_next_k - T_k obs_now_k,
/// then adaptive clustering with Frobenius distances and combination with
/// A(n+1). Exchange is identity (each node adapts on its own pair).
void step_atc_matrix(std::vector<MatrixAgentState>& states, AdaptiveWeights& weights,
                     const Topology& topology, const std::vector<Eigen::Vector2d>& obs_now,
                     const std::vector<Eigen::Vector2d>& obs_next);

/// Non-cooperative matrix LMS (no combination), for baseline comparisons.
void step_noncoop_matrix(std::vector<MatrixAgentState>& states,
                         const std::vector<Eigen::Vector2d>& obs_now,
                         const std::vector<Eigen::Vector2d>& obs_next);

/// Averaged combination matrix over a window of iterations.
struct AveragedCombination {
    long at_n = 0;
    int window = 0;
    Eigen::MatrixXd mean_a;
};

/// Full per-iteration record of one realization.
struct RealizationResult {
    /// sq_error(n, k) = ||w_k(n) - w*_k(n)||^2, recorded before the update
    /// at iteration n (instantaneous optimum, perturbation included).
    Eigen::MatrixXd sq_error;
    /// Optional horizon x (N*L) matrix of stacked weight vectors w(n).
    std::optional<Eigen::MatrixXd> weights;
    /// Window-averaged A at each requested checkpoint.
    std::vector<AveragedCombination> a_checkpoints;
    /// Per-iteration combination matrices (only with record_a_history).
    std::vector<Eigen::MatrixXd> a_history;
    bool diverged = false;
    long diverged_at = -1;
};

/// Effective combination/exchange matrices implied by the variant
/// (identities substituted as appropriate).
NetworkModel effective_network(const Scenario& scenario);

/// Runs one realization of the scenario with the given run seed.
/// Deterministic: identical (scenario, run_seed) pairs produce bit-identical
/// results. For tracking scenarios, sq_error holds squared Frobenius errors
/// of the transition-matrix estimates.
RealizationResult run_realization(const Scenario& scenario, std::uint64_t run_seed);

}  // namespace diffnet
