#include "diffnet/diffusion.hpp"

#include <cmath>

namespace diffnet {

std::vector<AgentState> make_agent_states(int n_agents, int dimension,
                                          const std::vector<double>& step_sizes) {
    std::vector<AgentState> states(n_agents);
    for (int k = 0; k < n_agents; ++k) {
        states[k].w = Eigen::VectorXd::Zero(dimension);
        states[k].psi = Eigen::VectorXd::Zero(dimension);
        states[k].phi = Eigen::VectorXd::Zero(dimension);
        states[k].step_size = step_sizes[k];
    }
    return states;
}

namespace {

void check_dimensions(const std::vector<AgentState>& states, const NetworkModel& network,
                      const std::vector<Sample>& samples) {
    const int n = network.topology.n_agents;
    if (static_cast<int>(states.size()) != n || static_cast<int>(samples.size()) != n) {
        throw DimensionMismatchError("states/samples count does not match network size");
    }
    for (int k = 0; k < n; ++k) {
        if (samples[k].x.size() != states[k].w.size()) {
            throw DimensionMismatchError("sample dimension mismatch at node " +
                                         std::to_string(k + 1));
        }
    }
}

/// psi_k = base_k + mu_k sum_{l in N_k} c(l,k) x_l (d_l - x_l^T base_k).
/// `base` is phi for the general recursion and w for the ATC form.
void adapt_stage(std::vector<AgentState>& states, const Topology& topology,
                 const Eigen::MatrixXd& c, const std::vector<Sample>& samples,
                 bool base_is_phi) {
    const int n = topology.n_agents;
    for (int k = 0; k < n; ++k) {
        const Eigen::VectorXd& base = base_is_phi ? states[k].phi : states[k].w;
        Eigen::VectorXd grad = Eigen::VectorXd::Zero(base.size());
        for (int l : topology.neighborhoods[k]) {
            const double weight = c(l, k);
            if (weight == 0.0) continue;
            const Sample& s = samples[l];
            grad.noalias() += (weight * (s.d - s.x.dot(base))) * s.x;
        }
        states[k].psi = base + states[k].step_size * grad;
    }
}

/// w_k = sum_{l in N_k} a(l,k) psi_l, written into a scratch buffer first so
/// every node combines the same pre-step psi values.
void combine_stage(std::vector<AgentState>& states, const Topology& topology,
                   const Eigen::MatrixXd& a) {
    const int n = topology.n_agents;
    std::vector<Eigen::VectorXd> combined(n);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(states[k].w.size());
        for (int l : topology.neighborhoods[k]) {
            const double weight = a(l, k);
            if (weight == 0.0) continue;
            acc.noalias() += weight * states[l].psi;
        }
        combined[k] = std::move(acc);
    }
    for (int k = 0; k < n; ++k) states[k].w = std::move(combined[k]);
}

}  // namespace

void step_general(std::vector<AgentState>& states, const NetworkModel& network,
                  const std::vector<Sample>& samples) {
    check_dimensions(states, network, samples);
    const Topology& topo = network.topology;
    const int n = topo.n_agents;
    // Stage 1: phi_k from the pre-step w values.
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(states[k].w.size());
        for (int l : topo.neighborhoods[k]) {
            const double weight = network.a1.entries(l, k);
            if (weight == 0.0) continue;
            acc.noalias() += weight * states[l].w;
        }
        states[k].phi = std::move(acc);
    }
    adapt_stage(states, topo, network.c.entries, samples, /*base_is_phi=*/true);
    combine_stage(states, topo, network.a2.entries);
}

void step_atc(std::vector<AgentState>& states, const NetworkModel& network,
              const std::vector<Sample>& samples) {
    check_dimensions(states, network, samples);
    const Topology& topo = network.topology;
    for (int k = 0; k < topo.n_agents; ++k) states[k].phi = states[k].w;
    adapt_stage(states, topo, network.c.entries, samples, /*base_is_phi=*/true);
    combine_stage(states, topo, network.a2.entries);
}

AdaptiveWeights AdaptiveWeights::identity_init(int n_agents, AdaptiveOptions options) {
    AdaptiveWeights w;
    w.a = Eigen::MatrixXd::Identity(n_agents, n_agents);
    w.c = Eigen::MatrixXd::Identity(n_agents, n_agents);
    w.options = options;
    return w;
}

void clustering_update(const std::vector<AgentState>& states, AdaptiveWeights& weights,
                       const Topology& topology, const std::vector<Sample>& samples) {
    const int n = topology.n_agents;
    for (int k = 0; k < n; ++k) {
        const Sample& s = samples[k];
        Eigen::VectorXd q = (s.d - s.x.dot(states[k].psi)) * s.x;
        if (weights.options.normalize_gradient) {
            q /= q.norm() + weights.options.xi;
        }
        const Eigen::VectorXd target = states[k].psi + states[k].step_size * q;
        weights.a.col(k).setZero();
        double total = 0.0;
        for (int l : topology.neighborhoods[k]) {
            const double d2 = std::max((target - states[l].psi).squaredNorm(), kDistanceFloor);
            const double inv = 1.0 / d2;
            weights.a(l, k) = inv;
            total += inv;
        }
        weights.a.col(k) /= total;
    }
    if (weights.options.reciprocity) weights.c = weights.a.transpose();
}

void step_atc_adaptive(std::vector<AgentState>& states, AdaptiveWeights& weights,
                       const Topology& topology, const std::vector<Sample>& samples) {
    const int n = topology.n_agents;
    if (static_cast<int>(states.size()) != n || static_cast<int>(samples.size()) != n) {
        throw DimensionMismatchError("states/samples count does not match network size");
    }
    for (int k = 0; k < n; ++k) states[k].phi = states[k].w;
    adapt_stage(states, topology, weights.c, samples, /*base_is_phi=*/true);
    clustering_update(states, weights, topology, samples);
    combine_stage(states, topology, weights.a);
}

void step_atc_matrix(std::vector<MatrixAgentState>& states, AdaptiveWeights& weights,
                     const Topology& topology, const std::vector<Eigen::Vector2d>& obs_now,
                     const std::vector<Eigen::Vector2d>& obs_next) {
    const int n = topology.n_agents;
    if (static_cast<int>(states.size()) != n || static_cast<int>(obs_now.size()) != n ||
        static_cast<int>(obs_next.size()) != n) {
        throw DimensionMismatchError("states/observations count does not match network size");
    }
    // Adapt: rank-one LMS update on each node's own observation pair.
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d err = obs_next[k] - states[k].T * obs_now[k];
        states[k].psi_T = states[k].T + states[k].step_size * err * obs_now[k].transpose();
    }
    // Combination weights from Frobenius distances to the one-step target.
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d err = obs_next[k] - states[k].psi_T * obs_now[k];
        Eigen::Matrix2d q = err * obs_now[k].transpose();
        if (weights.options.normalize_gradient) {
            q /= q.norm() + weights.options.xi;
        }
        const Eigen::Matrix2d target = states[k].psi_T + states[k].step_size * q;
        weights.a.col(k).setZero();
        double total = 0.0;
        for (int l : topology.neighborhoods[k]) {
            const double d2 = std::max((target - states[l].psi_T).squaredNorm(), kDistanceFloor);
            const double inv = 1.0 / d2;
            weights.a(l, k) = inv;
            total += inv;
        }
        weights.a.col(k) /= total;
    }
    if (weights.options.reciprocity) weights.c = weights.a.transpose();
    // Combine with the fresh weights.
    std::vector<Eigen::Matrix2d> combined(n);
    for (int k = 0; k < n; ++k) {
        Eigen::Matrix2d acc = Eigen::Matrix2d::Zero();
        for (int l : topology.neighborhoods[k]) {
            const double weight = weights.a(l, k);
            if (weight == 0.0) continue;
            acc += weight * states[l].psi_T;
        }
        combined[k] = acc;
    }
    for (int k = 0; k < n; ++k) states[k].T = combined[k];
}

void step_noncoop_matrix(std::vector<MatrixAgentState>& states,
                         const std::vector<Eigen::Vector2d>& obs_now,
                         const std::vector<Eigen::Vector2d>& obs_next) {
    const int n = static_cast<int>(states.size());
    for (int k = 0; k < n; ++k) {
        const Eigen::Vector2d err = obs_next[k] - states[k].T * obs_now[k];
        states[k].T += states[k].step_size * err * obs_now[k].transpose();
        states[k].psi_T = states[k].T;
    }
}

NetworkModel effective_network(const Scenario& scenario) {
    NetworkModel net = scenario.network;
    const int n = net.topology.n_agents;
    switch (scenario.variant) {
        case Variant::general: break;
        case Variant::atc: net.a1 = identity_matrix(n); break;
        case Variant::cta: net.a2 = identity_matrix(n); break;
        case Variant::noncoop:
            net.a1 = identity_matrix(n);
            net.a2 = identity_matrix(n);
            net.c = identity_matrix(n);
            break;
        case Variant::atc_adaptive_clustering:
            net.a1 = identity_matrix(n);
            break;
    }
    return net;
}

namespace {

/// Tracks per-checkpoint window sums of the combination matrix in use.
class CheckpointAccumulator {
public:
    CheckpointAccumulator(const std::vector<ClusterCheckpoint>& checkpoints, int n_agents)
        : checkpoints_(checkpoints) {
        sums_.resize(checkpoints.size(), Eigen::MatrixXd::Zero(n_agents, n_agents));
    }

    void observe(long n, const Eigen::MatrixXd& a, std::vector<AveragedCombination>& out) {
        for (std::size_t i = 0; i < checkpoints_.size(); ++i) {
            const auto& cp = checkpoints_[i];
            if (n > cp.n || n <= cp.n - cp.window) continue;
            sums_[i] += a;
            if (n == cp.n) {
                out.push_back({cp.n, cp.window, sums_[i] / static_cast<double>(cp.window)});
            }
        }
    }

private:
    std::vector<ClusterCheckpoint> checkpoints_;
    std::vector<Eigen::MatrixXd> sums_;
};

bool any_state_diverged(const std::vector<AgentState>& states, double guard) {
    for (const auto& s : states) {
        const double n2 = s.w.squaredNorm();
        if (!std::isfinite(n2) || n2 > guard * guard) return true;
    }
    return false;
}

RealizationResult run_tracking_realization(const Scenario& scenario, std::uint64_t run_seed) {
    const TrackingWorld& world = *scenario.tracking;
    const int n = scenario.n_agents();
    const long horizon = scenario.horizon;
    const bool adaptive = scenario.variant == Variant::atc_adaptive_clustering;

    RealizationResult result;
    result.sq_error = Eigen::MatrixXd::Zero(horizon, n);

    TrackingSimulator sim(world, run_seed, 0);
    std::vector<MatrixAgentState> states(n);
    for (int k = 0; k < n; ++k) {
        states[k].T = Eigen::Matrix2d::Identity();
        states[k].psi_T = states[k].T;
        states[k].step_size = scenario.step_sizes[k];
    }
    AdaptiveWeights weights = AdaptiveWeights::identity_init(n, scenario.adaptive);
    CheckpointAccumulator checkpoints(scenario.metrics.cluster_checkpoints, n);

    for (long it = 0; it < horizon; ++it) {
        for (int k = 0; k < n; ++k) {
            const Eigen::Matrix2d& truth = world.transitions[world.assignment[k]];
            result.sq_error(it, k) = (states[k].T - truth).squaredNorm();
        }
        const auto step = sim.step();
        if (adaptive) {
            step_atc_matrix(states, weights, scenario.network.topology, step.obs_now,
                            step.obs_next);
        } else {
            step_noncoop_matrix(states, step.obs_now, step.obs_next);
        }
        checkpoints.observe(it, weights.a, result.a_checkpoints);
        if (scenario.metrics.record_a_history) result.a_history.push_back(weights.a);
        bool bad = false;
        for (const auto& s : states) {
            const double n2 = s.T.squaredNorm();
            if (!std::isfinite(n2) ||
                n2 > scenario.metrics.divergence_guard * scenario.metrics.divergence_guard) {
                bad = true;
                break;
            }
        }
        if (bad) {
            result.diverged = true;
            result.diverged_at = it;
            break;
        }
    }
    return result;
}

}  // namespace

RealizationResult run_realization(const Scenario& scenario, std::uint64_t run_seed) {
    if (scenario.tracking) return run_tracking_realization(scenario, run_seed);

    const int n = scenario.n_agents();
    const int dim = scenario.dimension();
    const long horizon = scenario.horizon;
    const bool adaptive = scenario.variant == Variant::atc_adaptive_clustering;

    RealizationResult result;
    result.sq_error = Eigen::MatrixXd::Zero(horizon, n);
    if (scenario.metrics.record_weights) {
        result.weights = Eigen::MatrixXd::Zero(horizon, static_cast<long>(n) * dim);
    }

    const NetworkModel net = effective_network(scenario);
    std::vector<AgentState> states = make_agent_states(n, dim, scenario.step_sizes);
    AdaptiveWeights weights = AdaptiveWeights::identity_init(n, scenario.adaptive);
    CheckpointAccumulator checkpoints(scenario.metrics.cluster_checkpoints, n);

    std::vector<NodeSignalGenerator> generators;
    generators.reserve(n);
    for (int k = 0; k < n; ++k) {
        generators.emplace_back(
            scenario.environments[k],
            RngStream(run_seed, 0, static_cast<std::uint64_t>(k), RandomSource::regressor),
            RngStream(run_seed, 0, static_cast<std::uint64_t>(k), RandomSource::noise),
            RngStream(run_seed, 0, static_cast<std::uint64_t>(k), RandomSource::perturbation));
    }

    std::vector<Sample> samples(n);
    for (long it = 0; it < horizon; ++it) {
        for (int k = 0; k < n; ++k) {
            auto draw = generators[k].next(it);
            samples[k] = std::move(draw.sample);
            result.sq_error(it, k) = (states[k].w - draw.w_star_instant).squaredNorm();
        }
        if (result.weights) {
            for (int k = 0; k < n; ++k) {
                result.weights->row(it).segment(static_cast<long>(k) * dim, dim) =
                    states[k].w.transpose();
            }
        }
        if (adaptive) {
            step_atc_adaptive(states, weights, net.topology, samples);
            checkpoints.observe(it, weights.a, result.a_checkpoints);
            if (scenario.metrics.record_a_history) result.a_history.push_back(weights.a);
        } else {
            step_general(states, net, samples);
            checkpoints.observe(it, net.a2.entries, result.a_checkpoints);
            if (scenario.metrics.record_a_history) result.a_history.push_back(net.a2.entries);
        }
        if (any_state_diverged(states, scenario.metrics.divergence_guard)) {
            result.diverged = true;
            result.diverged_at = it;
            break;
        }
    }
    return result;
}

}  // namespace diffnet
