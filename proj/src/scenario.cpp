#include "diffnet/scenario.hpp"

namespace diffnet {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::general: return "general";
        case Variant::atc: return "atc";
        case Variant::cta: return "cta";
        case Variant::noncoop: return "noncoop";
        case Variant::atc_adaptive_clustering: return "atc_adaptive_clustering";
    }
    return "general";
}

Variant variant_from_string(const std::string& s) {
    if (s == "general") return Variant::general;
    if (s == "atc") return Variant::atc;
    if (s == "cta") return Variant::cta;
    if (s == "noncoop") return Variant::noncoop;
    if (s == "atc_adaptive_clustering") return Variant::atc_adaptive_clustering;
    throw ConfigError("unknown variant '" + s + "'", "variant");
}

int Scenario::dimension() const {
    if (tracking) return 2;
    return environments.empty() ? 0 : environments.front().input.dimension;
}

void Scenario::validate() const {
    const int n = n_agents();
    if (n <= 0) throw ConfigError("network has no agents", "network");
    if (runs <= 0) throw ConfigError("runs must be positive", "runs");
    if (horizon <= 0) throw ConfigError("horizon must be positive", "horizon");
    if (static_cast<int>(step_sizes.size()) != n) {
        throw ConfigError("expected one step size per agent", "step_sizes");
    }
    for (double mu : step_sizes) {
        if (!(mu >= 0.0)) throw ConfigError("step sizes must be nonnegative", "step_sizes");
    }
    validate_network(network);
    if (tracking) {
        if (static_cast<int>(tracking->assignment.size()) != n) {
            throw ConfigError("tracking assignment must cover all agents", "tracking.assignment");
        }
        if (tracking->transitions.empty()) {
            throw ConfigError("tracking world has no targets", "tracking.transitions");
        }
        return;
    }
    if (static_cast<int>(environments.size()) != n) {
        throw ConfigError("expected one environment per agent", "environments");
    }
    const int L = dimension();
    for (int k = 0; k < n; ++k) {
        const auto& env = environments[k];
        if (env.input.dimension != L) {
            throw ConfigError("inconsistent regressor dimension at node " + std::to_string(k + 1),
                              "environments");
        }
        if (env.optimum.dimension() != L) {
            throw ConfigError("optimum dimension mismatch at node " + std::to_string(k + 1),
                              "environments");
        }
        if (env.noise_variance < 0.0 || env.perturbation_variance < 0.0) {
            throw ConfigError("variances must be nonnegative at node " + std::to_string(k + 1),
                              "environments");
        }
        if (env.input.kind == InputKind::ar1 &&
            !(std::abs(env.input.ar_coefficient) < 1.0)) {
            throw ConfigError("ar coefficient must lie in (-1, 1)", "environments");
        }
    }
}

}  // namespace diffnet
