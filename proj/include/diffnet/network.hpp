#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/errors.hpp"

namespace diffnet {

/// Undirected agent graph. Neighborhoods always include the node itself.
/// Immutable after construction; safe to share across threads.
struct Topology {
    int n_agents = 0;
    /// neighborhoods[k] = sorted indices of N_k (0-based), k included.
    std::vector<std::vector<int>> neighborhoods;

    bool contains_edge(int l, int k) const;  // true also for l == k
    int degree(int k) const { return static_cast<int>(neighborhoods[k].size()); }
    /// Undirected edge list (1-based pairs, l < k), self-loops omitted.
    std::vector<std::pair<int, int>> edge_list() const;
};

enum class StochasticKind { left, right, doubly };

std::string to_string(StochasticKind kind);
StochasticKind stochastic_kind_from_string(const std::string& s);

/// Nonnegative combination/exchange matrix constrained to the topology
/// support. Convention: entries(l, k) couples node l into node k's update.
/// left  => every column sums to 1 (combination matrices),
/// right => every row sums to 1 (exchange matrices).
struct StochasticMatrix {
    Eigen::MatrixXd entries;
    StochasticKind kind = StochasticKind::left;
};

struct CheckResult {
    bool ok = true;
    double deviation = 0.0;  // worst |sum - 1| or most negative entry, etc.
};

/// Per-property stochasticity report; `pass` reflects the declared kind
/// plus nonnegativity and support compliance.
struct ValidationReport {
    CheckResult left;     // column sums
    CheckResult right;    // row sums
    CheckResult nonneg;   // entrywise >= 0
    CheckResult support;  // zero outside neighborhoods
    bool kind_ok = false;
    bool pass() const { return kind_ok && nonneg.ok && support.ok; }
};

/// Tolerance on row/column sums of stochastic matrices.
inline constexpr double kStochasticTol = 1e-12;

/// Builds a topology from a 1-based undirected edge list.
/// Throws IndexOutOfRangeError or DisconnectedGraphError.
Topology build_topology(int n_agents, const std::vector<std::pair<int, int>>& edges);

/// Places nodes uniformly in the unit square and connects pairs within
/// `radius`. Retries placement (up to a bounded number of attempts) until
/// the graph is connected; deterministic for a given seed.
/// Throws ConnectivityFailureError when no attempt yields a connected graph.
Topology random_geometric_topology(int n_agents, double radius, std::uint64_t seed,
                                   int max_attempts = 200);

/// a(l,k) = 1/|N_k| for l in N_k: column-stochastic neighborhood averaging.
StochasticMatrix uniform_combination(const Topology& topology);

/// c(l,k) = 1/|N_l| for k in N_l: row-stochastic uniform data exchange.
StochasticMatrix uniform_exchange(const Topology& topology);

/// Identity matrix tagged with a stochasticity kind (doubly by default).
StochasticMatrix identity_matrix(int n, StochasticKind kind = StochasticKind::doubly);

ValidationReport validate(const StochasticMatrix& matrix, const Topology& topology);

/// Agent graph plus the three matrices of the diffusion recursion:
/// two combination matrices (left-stochastic) and one exchange matrix
/// (right-stochastic), all supported on the topology.
struct NetworkModel {
    Topology topology;
    StochasticMatrix a1;
    StochasticMatrix a2;
    StochasticMatrix c;
};

/// Validates all three matrices against the topology; throws ConfigError
/// naming the offending matrix when a check fails.
void validate_network(const NetworkModel& network);

/// Connected components of an undirected boolean relation (N x N), as
/// sorted lists of 0-based node indices; components sorted by first node.
std::vector<std::vector<int>> connected_components(const Eigen::MatrixXi& undirected);

}  // namespace diffnet
