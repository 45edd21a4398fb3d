#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/diffusion.hpp"
#include "diffnet/scenario.hpp"
#include "diffnet/theory.hpp"

namespace diffnet {

/// 10 log10(x) with a -3000 dB sentinel below 1e-300 (documented floor).
double to_db(double linear);

/// Monte Carlo averages over the non-diverged realizations of a scenario.
struct MetricSeries {
    std::vector<double> msd;     // network MSD per iteration, linear
    std::vector<double> msd_db;  // same in dB
    Eigen::MatrixXd per_node;       // horizon x N (empty unless requested)
    Eigen::MatrixXd mean_weights;   // horizon x N*L (empty unless requested)
    Eigen::VectorXd final_weight_mean;    // across-run stats of the stacked
    Eigen::VectorXd final_weight_stderr;  // weights at the last iteration
    std::vector<std::vector<AveragedCombination>> run_checkpoints;  // [run][checkpoint]
    int diverged_runs = 0;
    int total_runs = 0;

    /// Mean of the linear MSD over [begin, end), reported in dB.
    double window_mean_db(long begin, long end) const;
    /// Trailing-window steady-state summary in dB.
    double trailing_mean_db(int window) const;
};

enum class ExecutionMode { parallel, serial };

/// Runs `scenario.runs` independent realizations (seeds derived from the
/// scenario seed) and averages squared errors pointwise. Realizations
/// execute concurrently under OpenMP; the reduction is performed in fixed
/// run order, so parallel and serial execution produce identical bits.
MetricSeries run_monte_carlo(const Scenario& scenario,
                             ExecutionMode mode = ExecutionMode::parallel);

/// Plain-loop reference implementation kept for testing the parallel path.
MetricSeries run_monte_carlo_serial_reference(const Scenario& scenario);

/// True when the analytical model covers the scenario (static optimum
/// statistics, non-adaptive variant, block size within bounds).
bool theory_applicable(const Scenario& scenario, std::string* why = nullptr);

/// Moment model of the scenario's effective configuration.
MomentModel moment_model_for(const Scenario& scenario);

struct TheoryComparison {
    MetricSeries sim;
    TransientSeries theory;
    SteadyStateMsd steady;
    double max_abs_gap_db = 0.0;  // over n >= burn_in
    long max_gap_at = 0;
    double steady_gap_db = 0.0;   // trailing empirical vs steady-state level
    int burn_in = 50;
};

/// Overlays the transient prediction and steady-state level on a Monte
/// Carlo run of the same scenario. Throws TheoryNotApplicableError.
TheoryComparison compare_theory(const Scenario& scenario, int burn_in = 50,
                                ExecutionMode mode = ExecutionMode::parallel);

/// Thresholded window-averaged combination matrix and the node partition
/// it induces (connected components of the symmetrized connection graph).
struct ConnectivityEstimate {
    long at_n = 0;
    int window = 0;
    double threshold = 0.05;
    Eigen::MatrixXd mean_a;
    Eigen::MatrixXi connections;              // directed, diagonal excluded
    std::vector<std::vector<int>> partition;  // 0-based, each sorted
};

ConnectivityEstimate extract_clusters(const AveragedCombination& averaged,
                                      const Topology& topology, double threshold = 0.05);

/// Averages the trailing `window` entries of the trace's combination-matrix
/// history (requires the scenario to have recorded it; throws
/// WindowTooLongError when the stored history is shorter than the window).
ConnectivityEstimate extract_clusters(const RealizationResult& trace, const Topology& topology,
                                      double threshold, int window);

struct VariantComparison {
    std::vector<Variant> variants;
    std::vector<MetricSeries> series;
    std::vector<double> trailing_db;  // summary over metrics.summary_window
};

/// Runs the scenario once per variant with identical seeds and environments
/// (paired comparison) and summarizes trailing-window steady-state levels.
VariantComparison compare_variants(const Scenario& scenario, const std::vector<Variant>& variants,
                                   ExecutionMode mode = ExecutionMode::parallel);

}  // namespace diffnet
