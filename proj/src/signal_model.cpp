#include "diffnet/signal_model.hpp"

#include <algorithm>
#include <cmath>

namespace diffnet {

Eigen::MatrixXd InputSpec::covariance() const {
    const int L = dimension;
    Eigen::MatrixXd cov(L, L);
    switch (kind) {
        case InputKind::iid_gaussian:
            cov = variance * Eigen::MatrixXd::Identity(L, L);
            break;
        case InputKind::ar1:
            for (int i = 0; i < L; ++i) {
                for (int j = 0; j < L; ++j) {
                    cov(i, j) = variance * std::pow(ar_coefficient, std::abs(i - j));
                }
            }
            break;
    }
    return cov;
}

Eigen::VectorXd OptimumTrajectory::value_at(double n) const {
    switch (kind) {
        case TrajectoryKind::constant:
            return base;
        case TrajectoryKind::circle: {
            Eigen::VectorXd v = circle_center;
            v(0) += circle_radius * std::cos(circle_angle);
            v(1) += circle_radius * std::sin(circle_angle);
            return v;
        }
        case TrajectoryKind::piecewise_linear:
            break;
    }
    // Inside a segment: linear interpolation. Outside all segments: hold the
    // nearest stage value (previous segment's end, or first segment's start).
    if (segments.empty()) return base;
    const TrajectorySegment* prev = nullptr;
    for (const auto& seg : segments) {
        if (n < seg.start_n) {
            return prev ? prev->end_value : seg.start_value;
        }
        if (n <= seg.end_n) {
            const double t = (n - seg.start_n) / (seg.end_n - seg.start_n);
            return seg.start_value + t * (seg.end_value - seg.start_value);
        }
        prev = &seg;
    }
    return segments.back().end_value;
}

int OptimumTrajectory::dimension() const {
    switch (kind) {
        case TrajectoryKind::constant: return static_cast<int>(base.size());
        case TrajectoryKind::circle: return static_cast<int>(circle_center.size());
        case TrajectoryKind::piecewise_linear:
            return segments.empty() ? static_cast<int>(base.size())
                                    : static_cast<int>(segments.front().start_value.size());
    }
    return 0;
}

OptimumTrajectory circle_optimum(const Eigen::Vector2d& center, double radius, int node_1based,
                                 int n_agents) {
    OptimumTrajectory t;
    t.kind = TrajectoryKind::circle;
    t.circle_center = center;
    t.circle_radius = radius;
    t.circle_angle = 2.0 * M_PI * (node_1based - 1) / static_cast<double>(n_agents) + M_PI / 8.0;
    return t;
}

OptimumTrajectory constant_optimum(Eigen::VectorXd value) {
    OptimumTrajectory t;
    t.kind = TrajectoryKind::constant;
    t.base = std::move(value);
    return t;
}

namespace {

/// Draws a fresh stationary AR(1) window [s(L-1), ..., s(0)] (newest first).
Eigen::VectorXd bootstrap_ar1(const InputSpec& spec, RngStream& rng) {
    const int L = spec.dimension;
    const double rho = spec.ar_coefficient;
    const double sigma = std::sqrt(spec.variance);
    const double innov = std::sqrt((1.0 - rho * rho) * spec.variance);
    Eigen::VectorXd window(L);
    double s = sigma * rng.normal();
    window(L - 1) = s;
    for (int j = L - 2; j >= 0; --j) {
        s = rho * s + innov * rng.normal();
        window(j) = s;
    }
    return window;
}

}  // namespace

Eigen::VectorXd draw_regressor(const NodeEnvironment& env, RngStream& rng,
                               const std::optional<Eigen::VectorXd>& previous_x) {
    const InputSpec& spec = env.input;
    const int L = spec.dimension;
    switch (spec.kind) {
        case InputKind::iid_gaussian: {
            const double sigma = std::sqrt(spec.variance);
            Eigen::VectorXd x(L);
            for (int i = 0; i < L; ++i) x(i) = sigma * rng.normal();
            return x;
        }
        case InputKind::ar1: {
            if (!previous_x) return bootstrap_ar1(spec, rng);
            if (previous_x->size() != L) {
                throw DimensionMismatchError("previous regressor has wrong dimension");
            }
            const double rho = spec.ar_coefficient;
            const double innov = std::sqrt((1.0 - rho * rho) * spec.variance);
            Eigen::VectorXd x(L);
            x(0) = rho * (*previous_x)(0) + innov * rng.normal();
            x.tail(L - 1) = previous_x->head(L - 1);
            return x;
        }
    }
    throw ConfigError("unknown input kind");
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> optimum_at(const NodeEnvironment& env, long n,
                                                       RngStream& rng) {
    Eigen::VectorXd fixed = env.optimum.value_at(static_cast<double>(n));
    Eigen::VectorXd instant = fixed;
    if (env.perturbation_variance > 0.0) {
        const double sigma = std::sqrt(env.perturbation_variance);
        for (int i = 0; i < instant.size(); ++i) instant(i) += sigma * rng.normal();
    }
    return {std::move(fixed), std::move(instant)};
}

NodeSignalGenerator::NodeSignalGenerator(const NodeEnvironment& env, RngStream x_stream,
                                         RngStream z_stream, RngStream eps_stream)
    : env_(&env),
      x_stream_(x_stream),
      z_stream_(z_stream),
      eps_stream_(eps_stream) {}

NodeSignalGenerator::Draw NodeSignalGenerator::next(long n) {
    Draw draw;
    draw.sample.n = n;
    draw.sample.x = draw_regressor(*env_, x_stream_, prev_x_);
    prev_x_ = draw.sample.x;
    auto [fixed, instant] = optimum_at(*env_, n, eps_stream_);
    draw.w_star_fixed = std::move(fixed);
    draw.w_star_instant = std::move(instant);
    double z = 0.0;
    if (env_->noise_variance > 0.0) {
        z = std::sqrt(env_->noise_variance) * z_stream_.normal();
    }
    draw.sample.d = draw.sample.x.dot(draw.w_star_instant) + z;
    return draw;
}

TrackingSimulator::TrackingSimulator(const TrackingWorld& world, std::uint64_t seed,
                                     std::uint64_t run)
    : world_(&world), states_(world.initial_states) {
    if (world.initial_states.size() != world.transitions.size()) {
        throw DimensionMismatchError("tracking world: one initial state per target required");
    }
    for (int i = 0; i < world.n_targets(); ++i) {
        state_streams_.emplace_back(seed, run, static_cast<std::uint64_t>(i),
                                    RandomSource::tracking_state);
    }
    for (int k = 0; k < world.n_nodes(); ++k) {
        const int target = world.assignment[k];
        if (target < 0 || target >= world.n_targets()) {
            throw IndexOutOfRangeError("tracking assignment out of range at node " +
                                       std::to_string(k + 1));
        }
        obs_streams_.emplace_back(seed, run, static_cast<std::uint64_t>(k),
                                  RandomSource::tracking_observation);
    }
    current_obs_ = observe();
}

std::vector<Eigen::Vector2d> TrackingSimulator::observe() {
    std::vector<Eigen::Vector2d> obs(world_->n_nodes());
    for (int k = 0; k < world_->n_nodes(); ++k) {
        obs[k] = states_[world_->assignment[k]];
        if (world_->obs_noise_std > 0.0) {
            obs[k](0) += world_->obs_noise_std * obs_streams_[k].normal();
            obs[k](1) += world_->obs_noise_std * obs_streams_[k].normal();
        }
    }
    return obs;
}

TrackingSimulator::Step TrackingSimulator::step() {
    Step out;
    out.obs_now = current_obs_;
    for (int i = 0; i < world_->n_targets(); ++i) {
        Eigen::Vector2d next = world_->transitions[i] * states_[i];
        if (world_->state_noise_std > 0.0) {
            next(0) += world_->state_noise_std * state_streams_[i].normal();
            next(1) += world_->state_noise_std * state_streams_[i].normal();
        }
        states_[i] = next;
    }
    out.states = states_;
    current_obs_ = observe();
    out.obs_next = current_obs_;
    return out;
}

}  // namespace diffnet
