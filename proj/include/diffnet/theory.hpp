#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "diffnet/network.hpp"
#include "diffnet/signal_model.hpp"

namespace diffnet {

/// Frozen second-order description of a diffusion LMS configuration. With
/// N agents and parameter dimension L, the block quantities live in R^{NL}
/// (vectors) and R^{NL x NL} (matrices), node k occupying block k.
///
/// The weight-error mean evolves as  E v(n+1) = transition * E v(n) - drive,
/// where v stacks the per-node errors against the fixed optima. `drive`
/// splits into a task-difference part (drive_task) and a combination-leak
/// part (drive_combine), drive = drive_task - drive_combine.
struct MomentModel {
    int n_agents = 0;  // N
    int dim = 0;       // L

    std::vector<double> step_sizes;
    std::vector<Eigen::MatrixXd> input_cov;         // per-node regressor covariance
    std::vector<double> noise_var;                  // per-node observation noise variance
    std::vector<double> perturbation_var;           // per-node optimum perturbation variance
    std::vector<Eigen::MatrixXd> neighborhood_cov;  // exchange-weighted covariance sums

    Eigen::MatrixXd transition;    // B
    Eigen::MatrixXd noise_moment;  // second moment of the gradient-noise term
    Eigen::VectorXd task_gap_drive;  // stacked exchange-weighted covariance * task gaps
    Eigen::VectorXd drive_task;      // r_u
    Eigen::VectorXd drive_combine;   // r_w
    Eigen::VectorXd drive;           // r = r_u - r_w
    Eigen::VectorXd optimum_block;   // stacked fixed optima

    double rho_transition = 0.0;  // spectral radius of `transition`
    NetworkModel network;         // matrices the model was built from

    int block_size() const { return n_agents * dim; }
    /// Additive network-MSD contribution of the optimum perturbations,
    /// (L/N) * sum_k perturbation_var[k].
    double perturbation_floor() const;
};

struct MomentModelOptions {
    int max_block_size = 4096;  // reject configurations with NL beyond this
};

/// Computes all model fields from definitions. Throws DimensionMismatchError
/// or NonSpdInputError (covariances must be symmetric positive definite,
/// including all exchange-weighted neighborhood sums).
MomentModel build_moment_model(const NetworkModel& network,
                               const std::vector<NodeEnvironment>& environments,
                               const std::vector<double>& step_sizes,
                               const MomentModelOptions& options = {});

struct MeanStabilityReport {
    std::vector<double> step_size_bounds;  // 2 / lambda_max(neighborhood_cov[k])
    bool pass = false;                     // 0 < mu_k < bound_k for all k
    double spectral_radius = 0.0;          // rho(transition)
};

MeanStabilityReport check_mean_stability(const MomentModel& model);

struct MeanSquareStabilityReport {
    double spectral_radius = 0.0;  // rho of the weighted-norm propagator
    bool pass = false;
};

/// Small-step mean-square propagator is transition^T (x) transition^T, whose
/// spectral radius equals rho(transition)^2.
MeanSquareStabilityReport check_ms_stability(const MomentModel& model);

/// Sequence E v(0..horizon-1) of the mean error recursion from v0.
std::vector<Eigen::VectorXd> mean_recursion(const MomentModel& model, const Eigen::VectorXd& v0,
                                            long horizon);

/// Asymptotic mean error: solves (I - transition) x = -drive.
/// Throws SingularSystemError when the system is numerically singular
/// (spectral radius >= 1). Appends condition warnings when requested.
Eigen::VectorXd bias(const MomentModel& model, std::vector<std::string>* warnings = nullptr);

/// Transient network MSD prediction.
struct TransientSeries {
    std::vector<double> zeta;       // predicted MSD per iteration
    std::vector<double> zeta_star;  // perturbation-free component
    Eigen::MatrixXd per_node;       // horizon x N per-node MSD (set when requested)
};

/// Evaluates the transient MSD recursion from initial error v0 without ever
/// forming the (NL)^2 propagator: the weighting vector is carried as an
/// NL x NL matrix S (S <- B^T S B) and the correction functional as an
/// NL x NL matrix P with Gamma(vec X) = sum_ij P_ij X_ij.
/// Throws UnstableModelError when the model is not mean-square stable.
TransientSeries transient_msd(const MomentModel& model, const Eigen::VectorXd& v0, long horizon,
                              bool per_node = false);

/// Reference implementation that materializes the dense (NL)^2 propagator.
/// Only valid for NL <= 64; used as the test oracle for transient_msd.
TransientSeries transient_msd_explicit(const MomentModel& model, const Eigen::VectorXd& v0,
                                       long horizon);

/// Solves S - B^T S B = Q by fixed-point iteration (geometric convergence
/// for stable B) with a dense vectorized solve as fallback for NL <= 64.
/// Throws UnstableModelError / LyapunovSolveFailureError.
Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q);

/// Frobenius residual ||S - B^T S B - Q||_F / ||Q||_F of a Lyapunov solution.
double lyapunov_residual(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& s);

struct SteadyStateMsd {
    double msd_network = 0.0;
    double zeta_star_network = 0.0;  // msd_network minus the perturbation floor
    double perturbation_floor = 0.0;
    Eigen::VectorXd msd_per_node;  // N entries (empty unless requested)
    std::vector<std::string> warnings;
};

/// Steady-state MSD via the Lyapunov route. Per-node values use the
/// block-selector weighting (no 1/N factor); their average equals the
/// network value.
SteadyStateMsd steady_state_msd(const MomentModel& model, bool per_node = false);

struct SeriesMsd {
    double msd_network = 0.0;
    long terms = 0;
    bool converged = false;
};

/// Steady-state network MSD as the truncated trace series
///   floor + (1/N) sum_j trace{B^j (G + (I + 2B(I-B)^{-1}) r r^T) B^j^T},
/// stopped when a term falls below `rel_tol` times the accumulated sum.
SeriesMsd steady_state_msd_series(const MomentModel& model, double rel_tol = 1e-12,
                                  long max_terms = 1000000);

/// Small-step closed form of the average non-cooperative LMS steady-state
/// MSD: (1/N) sum_k mu_k sigma_z_k^2 L / 2.
double noncoop_msd_closed_form(const std::vector<NodeEnvironment>& environments,
                               const std::vector<double>& step_sizes, int dim);

struct Theorem3Decomposition {
    double delta_msd_network = 0.0;  // cooperation gain, independent of the drive
    double delta_msd_multi = 0.0;    // degradation caused by the multitask drive
    bool condition_holds = false;    // diffusion beats non-cooperative
};

/// Splits MSD(noncoop) - MSD(diffusion) into the cooperation gain (series
/// difference) and the multitask degradation (closed form in the drive).
/// The closed form requires a uniform data profile: equal input covariances
/// and step sizes, symmetric doubly stochastic combination matrices, and a
/// doubly stochastic exchange matrix; throws AssumptionViolationError
/// otherwise. `model_lms` must be the same environment with identity
/// matrices.
Theorem3Decomposition theorem3_decomposition(const MomentModel& model,
                                             const MomentModel& model_lms);

/// Dense Kronecker product (test oracle helper).
Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

/// Column-stacking vectorization and its inverse.
Eigen::VectorXd vectorize(const Eigen::MatrixXd& m);
Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int rows, int cols);

double spectral_radius(const Eigen::MatrixXd& m);

}  // namespace diffnet
