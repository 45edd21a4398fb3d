#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffnet/network.hpp"
#include "diffnet/signal_model.hpp"

namespace diffnet {

enum class Variant { general, atc, cta, noncoop, atc_adaptive_clustering };

std::string to_string(Variant v);
Variant variant_from_string(const std::string& s);

/// Options of the adaptive-clustering variant.
struct AdaptiveOptions {
    bool normalize_gradient = false;
    double xi = 0.01;         // regularizer of the gradient normalization
    bool reciprocity = false; // C(n+1) = A(n+1)^T
};

/// Window-averaged combination-matrix snapshot request: averages A(n) over
/// the `window` iterations ending at `n` (inclusive, 0-based iterations).
struct ClusterCheckpoint {
    long n = 0;
    int window = 100;
};

struct MetricOptions {
    bool per_node = false;        // keep per-node MSD columns
    bool record_weights = false;  // keep per-iteration mean weight trajectories
    bool record_a_history = false;  // keep every combination matrix (memory-heavy)
    std::vector<ClusterCheckpoint> cluster_checkpoints;
    int summary_window = 100;    // trailing window of steady-state summaries
    double divergence_guard = 1e9;
    double divergence_budget = 0.05;  // tolerated fraction of diverged runs
};

/// A fully resolved experiment description. All randomness derives from
/// `seed`; rerunning the same scenario is bit-reproducible.
struct Scenario {
    std::string name;
    std::uint64_t seed = 1;
    int runs = 100;
    long horizon = 1000;
    int threads = 0;  // 0 = library default
    Variant variant = Variant::atc;
    AdaptiveOptions adaptive;
    MetricOptions metrics;
    NetworkModel network;
    std::vector<NodeEnvironment> environments;
    std::vector<double> step_sizes;
    std::optional<TrackingWorld> tracking;  // set for tracking scenarios

    int n_agents() const { return network.topology.n_agents; }
    int dimension() const;

    /// Validates cross-references (sizes, matrices, step sizes).
    void validate() const;
};

}  // namespace diffnet
