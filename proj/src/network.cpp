#include "diffnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

#include "diffnet/rng.hpp"

namespace diffnet {

bool Topology::contains_edge(int l, int k) const {
    const auto& nb = neighborhoods[k];
    return std::binary_search(nb.begin(), nb.end(), l);
}

std::vector<std::pair<int, int>> Topology::edge_list() const {
    std::vector<std::pair<int, int>> edges;
    for (int k = 0; k < n_agents; ++k) {
        for (int l : neighborhoods[k]) {
            if (l < k) edges.emplace_back(l + 1, k + 1);
        }
    }
    return edges;
}

std::string to_string(StochasticKind kind) {
    switch (kind) {
        case StochasticKind::left: return "left";
        case StochasticKind::right: return "right";
        case StochasticKind::doubly: return "doubly";
    }
    return "left";
}

StochasticKind stochastic_kind_from_string(const std::string& s) {
    if (s == "left") return StochasticKind::left;
    if (s == "right") return StochasticKind::right;
    if (s == "doubly") return StochasticKind::doubly;
    throw ConfigError("unknown stochastic kind '" + s + "'", "kind");
}

namespace {

bool is_connected(const std::vector<std::vector<int>>& neighborhoods) {
    const int n = static_cast<int>(neighborhoods.size());
    if (n == 0) return false;
    std::vector<char> seen(n, 0);
    std::queue<int> queue;
    queue.push(0);
    seen[0] = 1;
    int count = 1;
    while (!queue.empty()) {
        const int k = queue.front();
        queue.pop();
        for (int l : neighborhoods[k]) {
            if (!seen[l]) {
                seen[l] = 1;
                ++count;
                queue.push(l);
            }
        }
    }
    return count == n;
}

Topology topology_from_neighbor_sets(int n, std::vector<std::vector<int>> neighborhoods) {
    for (int k = 0; k < n; ++k) {
        auto& nb = neighborhoods[k];
        nb.push_back(k);
        std::sort(nb.begin(), nb.end());
        nb.erase(std::unique(nb.begin(), nb.end()), nb.end());
    }
    if (!is_connected(neighborhoods)) {
        throw DisconnectedGraphError("graph is not connected");
    }
    Topology topo;
    topo.n_agents = n;
    topo.neighborhoods = std::move(neighborhoods);
    return topo;
}

}  // namespace

Topology build_topology(int n_agents, const std::vector<std::pair<int, int>>& edges) {
    if (n_agents <= 0) throw ConfigError("n_agents must be positive", "n_agents");
    std::vector<std::vector<int>> neighborhoods(n_agents);
    for (const auto& [a, b] : edges) {
        if (a < 1 || a > n_agents || b < 1 || b > n_agents) {
            throw IndexOutOfRangeError("edge (" + std::to_string(a) + "," + std::to_string(b) +
                                       ") outside [1.." + std::to_string(n_agents) + "]");
        }
        if (a == b) continue;  // self-loops are implicit
        neighborhoods[a - 1].push_back(b - 1);
        neighborhoods[b - 1].push_back(a - 1);
    }
    return topology_from_neighbor_sets(n_agents, std::move(neighborhoods));
}

Topology random_geometric_topology(int n_agents, double radius, std::uint64_t seed,
                                   int max_attempts) {
    if (n_agents <= 0) throw ConfigError("n_agents must be positive", "n_agents");
    if (radius <= 0.0) throw ConfigError("radius must be positive", "radius");
    RngStream rng(derive_seed(seed, static_cast<std::uint64_t>(RandomSource::placement)));
    const double r2 = radius * radius;
    for (int attempt = 0; attempt < max_attempts; ++attempt) {
        std::vector<double> px(n_agents), py(n_agents);
        for (int k = 0; k < n_agents; ++k) {
            px[k] = rng.uniform01();
            py[k] = rng.uniform01();
        }
        std::vector<std::vector<int>> neighborhoods(n_agents);
        for (int k = 0; k < n_agents; ++k) {
            for (int l = k + 1; l < n_agents; ++l) {
                const double dx = px[k] - px[l];
                const double dy = py[k] - py[l];
                if (dx * dx + dy * dy <= r2) {
                    neighborhoods[k].push_back(l);
                    neighborhoods[l].push_back(k);
                }
            }
        }
        try {
            return topology_from_neighbor_sets(n_agents, std::move(neighborhoods));
        } catch (const DisconnectedGraphError&) {
            continue;
        }
    }
    throw ConnectivityFailureError("no connected placement found after " +
                                   std::to_string(max_attempts) + " attempts");
}

StochasticMatrix uniform_combination(const Topology& topology) {
    const int n = topology.n_agents;
    StochasticMatrix m;
    m.kind = StochasticKind::left;
    m.entries = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        const double w = 1.0 / static_cast<double>(topology.degree(k));
        for (int l : topology.neighborhoods[k]) m.entries(l, k) = w;
    }
    return m;
}

StochasticMatrix uniform_exchange(const Topology& topology) {
    const int n = topology.n_agents;
    StochasticMatrix m;
    m.kind = StochasticKind::right;
    m.entries = Eigen::MatrixXd::Zero(n, n);
    for (int l = 0; l < n; ++l) {
        const double w = 1.0 / static_cast<double>(topology.degree(l));
        for (int k : topology.neighborhoods[l]) m.entries(l, k) = w;
    }
    return m;
}

StochasticMatrix identity_matrix(int n, StochasticKind kind) {
    return StochasticMatrix{Eigen::MatrixXd::Identity(n, n), kind};
}

ValidationReport validate(const StochasticMatrix& matrix, const Topology& topology) {
    const int n = topology.n_agents;
    if (matrix.entries.rows() != n || matrix.entries.cols() != n) {
        throw DimensionMismatchError("matrix is " + std::to_string(matrix.entries.rows()) + "x" +
                                     std::to_string(matrix.entries.cols()) + ", topology has N=" +
                                     std::to_string(n));
    }
    ValidationReport report;
    for (int k = 0; k < n; ++k) {
        report.left.deviation =
            std::max(report.left.deviation, std::abs(matrix.entries.col(k).sum() - 1.0));
        report.right.deviation =
            std::max(report.right.deviation, std::abs(matrix.entries.row(k).sum() - 1.0));
    }
    report.left.ok = report.left.deviation <= kStochasticTol;
    report.right.ok = report.right.deviation <= kStochasticTol;

    double min_entry = matrix.entries.minCoeff();
    report.nonneg.ok = min_entry >= 0.0;
    report.nonneg.deviation = std::min(min_entry, 0.0);

    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (!topology.contains_edge(l, k) && matrix.entries(l, k) != 0.0) {
                report.support.ok = false;
                report.support.deviation =
                    std::max(report.support.deviation, std::abs(matrix.entries(l, k)));
            }
        }
    }

    switch (matrix.kind) {
        case StochasticKind::left: report.kind_ok = report.left.ok; break;
        case StochasticKind::right: report.kind_ok = report.right.ok; break;
        case StochasticKind::doubly: report.kind_ok = report.left.ok && report.right.ok; break;
    }
    return report;
}

void validate_network(const NetworkModel& network) {
    const auto check = [&](const StochasticMatrix& m, StochasticKind required,
                           const std::string& name) {
        if (m.kind != required && m.kind != StochasticKind::doubly) {
            throw ConfigError("matrix '" + name + "' must be " + to_string(required) +
                                  "-stochastic",
                              name);
        }
        const auto report = validate(m, network.topology);
        if (!report.pass()) {
            throw ConfigError("matrix '" + name + "' fails stochasticity/support validation",
                              name);
        }
    };
    check(network.a1, StochasticKind::left, "a1");
    check(network.a2, StochasticKind::left, "a2");
    check(network.c, StochasticKind::right, "c");
}

std::vector<std::vector<int>> connected_components(const Eigen::MatrixXi& undirected) {
    const int n = static_cast<int>(undirected.rows());
    std::vector<int> label(n, -1);
    int next = 0;
    for (int s = 0; s < n; ++s) {
        if (label[s] >= 0) continue;
        label[s] = next;
        std::queue<int> queue;
        queue.push(s);
        while (!queue.empty()) {
            const int k = queue.front();
            queue.pop();
            for (int l = 0; l < n; ++l) {
                if (label[l] < 0 && (undirected(k, l) != 0 || undirected(l, k) != 0)) {
                    label[l] = next;
                    queue.push(l);
                }
            }
        }
        ++next;
    }
    std::vector<std::vector<int>> components(next);
    for (int k = 0; k < n; ++k) components[label[k]].push_back(k);
    return components;
}

}  // namespace diffnet
