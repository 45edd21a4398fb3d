#include "diffnet/harness.hpp"

#include <algorithm>
#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace diffnet {

double to_db(double linear) {
    if (linear < 1e-300) return -3000.0;
    return 10.0 * std::log10(linear);
}

double MetricSeries::window_mean_db(long begin, long end) const {
    begin = std::max<long>(begin, 0);
    end = std::min<long>(end, static_cast<long>(msd.size()));
    if (begin >= end) return -3000.0;
    double acc = 0.0;
    for (long n = begin; n < end; ++n) acc += msd[n];
    return to_db(acc / static_cast<double>(end - begin));
}

double MetricSeries::trailing_mean_db(int window) const {
    const long end = static_cast<long>(msd.size());
    return window_mean_db(end - window, end);
}

namespace {

/// Order-fixed reduction of per-run results into the series accumulators.
/// Runs are always folded in ascending run index, which makes the result
/// independent of how the realizations were scheduled.
class SeriesAccumulator {
public:
    SeriesAccumulator(const Scenario& scenario)
        : scenario_(scenario),
          n_(scenario.n_agents()),
          dim_(scenario.tracking ? 4 : scenario.dimension()),
          sq_sum_(Eigen::MatrixXd::Zero(scenario.horizon, n_)) {
        if (scenario.metrics.record_weights && !scenario.tracking) {
            weight_sum_ = Eigen::MatrixXd::Zero(scenario.horizon,
                                                static_cast<long>(n_) * scenario.dimension());
            final_mean_ = Eigen::VectorXd::Zero(static_cast<long>(n_) * scenario.dimension());
            final_m2_ = Eigen::VectorXd::Zero(static_cast<long>(n_) * scenario.dimension());
        }
        run_checkpoints_.resize(scenario.runs);
    }

    void fold(int run_index, const RealizationResult& result) {
        ++total_;
        if (result.diverged) {
            ++diverged_;
            return;
        }
        run_checkpoints_[run_index] = result.a_checkpoints;
        sq_sum_ += result.sq_error;
        if (result.weights) {
            weight_sum_ += *result.weights;
            ++weight_count_;
            const Eigen::VectorXd last = result.weights->row(result.weights->rows() - 1);
            const Eigen::VectorXd delta = last - final_mean_;
            final_mean_ += delta / static_cast<double>(weight_count_);
            final_m2_ += delta.cwiseProduct(last - final_mean_);
        }
    }

    MetricSeries finish() {
        MetricSeries out;
        out.total_runs = total_;
        out.diverged_runs = diverged_;
        out.run_checkpoints = std::move(run_checkpoints_);
        const int valid = total_ - diverged_;
        if (valid == 0) return out;
        const double inv = 1.0 / static_cast<double>(valid);
        out.msd.resize(scenario_.horizon);
        out.msd_db.resize(scenario_.horizon);
        for (long it = 0; it < scenario_.horizon; ++it) {
            out.msd[it] = sq_sum_.row(it).sum() * inv / static_cast<double>(n_);
            out.msd_db[it] = to_db(out.msd[it]);
        }
        if (scenario_.metrics.per_node) out.per_node = sq_sum_ * inv;
        if (weight_count_ > 0) {
            out.mean_weights = weight_sum_ / static_cast<double>(weight_count_);
            out.final_weight_mean = final_mean_;
            if (weight_count_ > 1) {
                out.final_weight_stderr =
                    (final_m2_ / static_cast<double>(weight_count_ - 1)).cwiseSqrt() /
                    std::sqrt(static_cast<double>(weight_count_));
            }
        }
        return out;
    }

private:
    const Scenario& scenario_;
    int n_;
    int dim_;
    Eigen::MatrixXd sq_sum_;
    Eigen::MatrixXd weight_sum_;
    Eigen::VectorXd final_mean_;
    Eigen::VectorXd final_m2_;
    std::vector<std::vector<AveragedCombination>> run_checkpoints_;
    int total_ = 0;
    int diverged_ = 0;
    int weight_count_ = 0;
};

}  // namespace

MetricSeries run_monte_carlo(const Scenario& scenario, ExecutionMode mode) {
    scenario.validate();
    if (mode == ExecutionMode::serial) return run_monte_carlo_serial_reference(scenario);

    SeriesAccumulator acc(scenario);
    int chunk = 1;
#ifdef _OPENMP
    chunk = scenario.threads > 0 ? scenario.threads : omp_get_max_threads();
#endif
    chunk = std::max(chunk, 1);
    std::vector<RealizationResult> slab(chunk);
    for (int base = 0; base < scenario.runs; base += chunk) {
        const int count = std::min(chunk, scenario.runs - base);
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 1) num_threads(chunk)
#endif
        for (int i = 0; i < count; ++i) {
            slab[i] = run_realization(scenario,
                                      derive_seed(scenario.seed, static_cast<std::uint64_t>(base + i)));
        }
        for (int i = 0; i < count; ++i) acc.fold(base + i, slab[i]);
    }
    return acc.finish();
}

MetricSeries run_monte_carlo_serial_reference(const Scenario& scenario) {
    scenario.validate();
    SeriesAccumulator acc(scenario);
    for (int run = 0; run < scenario.runs; ++run) {
        acc.fold(run, run_realization(scenario,
                                      derive_seed(scenario.seed, static_cast<std::uint64_t>(run))));
    }
    return acc.finish();
}

bool theory_applicable(const Scenario& scenario, std::string* why) {
    const auto fail = [&](const std::string& reason) {
        if (why) *why = reason;
        return false;
    };
    if (scenario.tracking) return fail("tracking scenarios have no analytical model");
    if (scenario.variant == Variant::atc_adaptive_clustering) {
        return fail("adaptive clustering has time-varying combination weights");
    }
    for (const auto& env : scenario.environments) {
        if (!env.optimum.time_invariant()) {
            return fail("optimum trajectories must be static");
        }
    }
    const long nl = static_cast<long>(scenario.n_agents()) * scenario.dimension();
    if (nl > MomentModelOptions{}.max_block_size) {
        return fail("block size " + std::to_string(nl) + " exceeds the analytical bound");
    }
    return true;
}

MomentModel moment_model_for(const Scenario& scenario) {
    std::string why;
    if (!theory_applicable(scenario, &why)) throw TheoryNotApplicableError(why);
    Scenario effective = scenario;
    effective.network = effective_network(scenario);
    return build_moment_model(effective.network, effective.environments, effective.step_sizes);
}

TheoryComparison compare_theory(const Scenario& scenario, int burn_in, ExecutionMode mode) {
    TheoryComparison out;
    out.burn_in = burn_in;
    const MomentModel model = moment_model_for(scenario);
    const Eigen::VectorXd v0 = -model.optimum_block;  // zero-initialized filters
    out.theory = transient_msd(model, v0, scenario.horizon);
    out.steady = steady_state_msd(model);
    out.sim = run_monte_carlo(scenario, mode);

    out.max_abs_gap_db = 0.0;
    for (long n = burn_in; n < scenario.horizon; ++n) {
        const double gap = std::abs(out.sim.msd_db[n] - to_db(out.theory.zeta[n]));
        if (gap > out.max_abs_gap_db) {
            out.max_abs_gap_db = gap;
            out.max_gap_at = n;
        }
    }
    out.steady_gap_db = std::abs(out.sim.trailing_mean_db(scenario.metrics.summary_window) -
                                 to_db(out.steady.msd_network));
    return out;
}

ConnectivityEstimate extract_clusters(const AveragedCombination& averaged,
                                      const Topology& topology, double threshold) {
    const int n = topology.n_agents;
    if (averaged.mean_a.rows() != n || averaged.mean_a.cols() != n) {
        throw DimensionMismatchError("averaged combination matrix does not match topology");
    }
    ConnectivityEstimate out;
    out.at_n = averaged.at_n;
    out.window = averaged.window;
    out.threshold = threshold;
    out.mean_a = averaged.mean_a;
    out.connections = Eigen::MatrixXi::Zero(n, n);
    for (int k = 0; k < n; ++k) {
        for (int l = 0; l < n; ++l) {
            if (l != k && averaged.mean_a(l, k) > threshold) out.connections(l, k) = 1;
        }
    }
    out.partition = connected_components(out.connections);
    return out;
}

ConnectivityEstimate extract_clusters(const RealizationResult& trace, const Topology& topology,
                                      double threshold, int window) {
    if (window <= 0) throw WindowTooLongError("window must be positive");
    if (static_cast<int>(trace.a_history.size()) < window) {
        throw WindowTooLongError("trace holds " + std::to_string(trace.a_history.size()) +
                                 " combination matrices, window needs " + std::to_string(window));
    }
    AveragedCombination averaged;
    averaged.at_n = static_cast<long>(trace.a_history.size()) - 1;
    averaged.window = window;
    averaged.mean_a = Eigen::MatrixXd::Zero(topology.n_agents, topology.n_agents);
    for (int i = 0; i < window; ++i) {
        averaged.mean_a += trace.a_history[trace.a_history.size() - 1 - i];
    }
    averaged.mean_a /= static_cast<double>(window);
    return extract_clusters(averaged, topology, threshold);
}

VariantComparison compare_variants(const Scenario& scenario, const std::vector<Variant>& variants,
                                   ExecutionMode mode) {
    VariantComparison out;
    out.variants = variants;
    for (Variant v : variants) {
        Scenario s = scenario;
        s.variant = v;
        out.series.push_back(run_monte_carlo(s, mode));
        out.trailing_db.push_back(
            out.series.back().trailing_mean_db(scenario.metrics.summary_window));
    }
    return out;
}

}  // namespace diffnet
