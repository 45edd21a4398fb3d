#include "diffnet/theory.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

namespace diffnet {

namespace {

/// A (x) I_L, the block expansion taking an N x N coupling matrix to the
/// NL x NL operator acting on stacked per-node vectors.
Eigen::MatrixXd block_expand(const Eigen::MatrixXd& a, int dim) {
    const int n = static_cast<int>(a.rows());
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<long>(n) * dim,
                                                static_cast<long>(n) * dim);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            if (a(i, j) != 0.0) {
                out.block(static_cast<long>(i) * dim, static_cast<long>(j) * dim, dim, dim) =
                    a(i, j) * Eigen::MatrixXd::Identity(dim, dim);
            }
        }
    }
    return out;
}

double lambda_max_sym(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().maxCoeff();
}

double lambda_min_sym(const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

void require_spd(const Eigen::MatrixXd& m, const std::string& what) {
    if (m.rows() != m.cols()) throw DimensionMismatchError(what + " is not square");
    if (!m.isApprox(m.transpose(), 1e-10)) {
        throw NonSpdInputError(what + " is not symmetric");
    }
    if (lambda_min_sym(m) <= 0.0) {
        throw NonSpdInputError(what + " is not positive definite");
    }
}

/// Appends a warning when the linear system is badly conditioned. Exact
/// singular values are only computed for moderate sizes.
void warn_if_ill_conditioned(const Eigen::MatrixXd& m, const std::string& what,
                             std::vector<std::string>* warnings) {
    if (!warnings || m.rows() > 256) return;
    Eigen::BDCSVD<Eigen::MatrixXd> svd(m);
    const auto& sv = svd.singularValues();
    const double smin = sv(sv.size() - 1);
    if (smin <= 0.0 || sv(0) / smin > 1e12) {
        warnings->push_back(what + ": condition number above 1e12");
    }
}

/// Perturbation contribution under an arbitrary block-diagonal-style
/// weighting: sum_k sigma_eps_k^2 * trace(block kk of sel).
double perturbation_term(const MomentModel& model, const Eigen::MatrixXd& sel) {
    double total = 0.0;
    for (int k = 0; k < model.n_agents; ++k) {
        total += model.perturbation_var[k] *
                 sel.block(static_cast<long>(k) * model.dim, static_cast<long>(k) * model.dim,
                           model.dim, model.dim)
                     .trace();
    }
    return total;
}

Eigen::MatrixXd node_selector(int n_agents, int dim, int k) {
    Eigen::MatrixXd sel = Eigen::MatrixXd::Zero(static_cast<long>(n_agents) * dim,
                                                static_cast<long>(n_agents) * dim);
    sel.block(static_cast<long>(k) * dim, static_cast<long>(k) * dim, dim, dim)
        .setIdentity();
    return sel;
}

void require_stable(const MomentModel& model) {
    if (!(model.rho_transition < 1.0)) {
        throw UnstableModelError("error-transition spectral radius is " +
                                 std::to_string(model.rho_transition) + " >= 1");
    }
}

bool matrices_equal(const std::vector<Eigen::MatrixXd>& ms, double tol) {
    for (std::size_t i = 1; i < ms.size(); ++i) {
        if (!((ms[i] - ms[0]).cwiseAbs().maxCoeff() <= tol)) return false;
    }
    return true;
}

bool doubly_stochastic(const Eigen::MatrixXd& m, double tol) {
    const int n = static_cast<int>(m.rows());
    if (m.minCoeff() < -tol) return false;
    for (int i = 0; i < n; ++i) {
        if (std::abs(m.col(i).sum() - 1.0) > tol) return false;
        if (std::abs(m.row(i).sum() - 1.0) > tol) return false;
    }
    return true;
}

}  // namespace

double MomentModel::perturbation_floor() const {
    double total = 0.0;
    for (double s : perturbation_var) total += s;
    return static_cast<double>(dim) / static_cast<double>(n_agents) * total;
}

double spectral_radius(const Eigen::MatrixXd& m) {
    if (m.rows() <= 512) {
        Eigen::EigenSolver<Eigen::MatrixXd> es(m, /*computeEigenvectors=*/false);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    // Power iteration is sufficient at sizes where a full eigensolve is
    // impractical; stability gating only needs a good estimate.
    Eigen::VectorXd v = Eigen::VectorXd::Ones(m.rows()).normalized();
    double rho = 0.0;
    for (int it = 0; it < 300; ++it) {
        Eigen::VectorXd w = m * v;
        const double norm = w.norm();
        if (norm == 0.0) return 0.0;
        rho = norm;
        v = w / norm;
    }
    return rho;
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    Eigen::MatrixXd out(a.rows() * b.rows(), a.cols() * b.cols());
    for (long i = 0; i < a.rows(); ++i) {
        for (long j = 0; j < a.cols(); ++j) {
            out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
        }
    }
    return out;
}

Eigen::VectorXd vectorize(const Eigen::MatrixXd& m) {
    return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size());
}

Eigen::MatrixXd unvectorize(const Eigen::VectorXd& v, int rows, int cols) {
    return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

MomentModel build_moment_model(const NetworkModel& network,
                               const std::vector<NodeEnvironment>& environments,
                               const std::vector<double>& step_sizes,
                               const MomentModelOptions& options) {
    const int n = network.topology.n_agents;
    const int dim = environments.empty() ? 0 : environments.front().input.dimension;
    if (static_cast<int>(environments.size()) != n ||
        static_cast<int>(step_sizes.size()) != n) {
        throw DimensionMismatchError("one environment and one step size per agent required");
    }
    const long nl = static_cast<long>(n) * dim;
    if (nl > options.max_block_size) {
        throw TheoryNotApplicableError("block size " + std::to_string(nl) +
                                       " exceeds the analytical bound " +
                                       std::to_string(options.max_block_size));
    }
    validate_network(network);

    MomentModel model;
    model.n_agents = n;
    model.dim = dim;
    model.step_sizes = step_sizes;
    model.network = network;

    for (int k = 0; k < n; ++k) {
        model.input_cov.push_back(environments[k].input.covariance());
        require_spd(model.input_cov.back(), "input covariance of node " + std::to_string(k + 1));
        model.noise_var.push_back(environments[k].noise_variance);
        model.perturbation_var.push_back(environments[k].perturbation_variance);
    }

    const Eigen::MatrixXd& c = network.c.entries;
    for (int k = 0; k < n; ++k) {
        Eigen::MatrixXd rk = Eigen::MatrixXd::Zero(dim, dim);
        for (int l : network.topology.neighborhoods[k]) {
            if (c(l, k) != 0.0) rk += c(l, k) * model.input_cov[l];
        }
        require_spd(rk, "neighborhood covariance of node " + std::to_string(k + 1));
        model.neighborhood_cov.push_back(std::move(rk));
    }

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(nl, nl);
    Eigen::VectorXd u_diag(nl);
    for (int k = 0; k < n; ++k) {
        h.block(static_cast<long>(k) * dim, static_cast<long>(k) * dim, dim, dim) =
            model.neighborhood_cov[k];
        u_diag.segment(static_cast<long>(k) * dim, dim).setConstant(step_sizes[k]);
    }

    model.optimum_block.resize(nl);
    for (int k = 0; k < n; ++k) {
        model.optimum_block.segment(static_cast<long>(k) * dim, dim) =
            environments[k].optimum.value_at(0.0);
    }

    const Eigen::MatrixXd a1t = block_expand(network.a1.entries.transpose(), dim);
    const Eigen::MatrixXd a2t = block_expand(network.a2.entries.transpose(), dim);
    const Eigen::MatrixXd cb = block_expand(c, dim);
    const Eigen::MatrixXd identity = Eigen::MatrixXd::Identity(nl, nl);
    const Eigen::MatrixXd i_minus_uh = identity - u_diag.asDiagonal() * h;

    model.transition = a2t * i_minus_uh * a1t;

    Eigen::MatrixXd noise_blocks = Eigen::MatrixXd::Zero(nl, nl);
    for (int k = 0; k < n; ++k) {
        noise_blocks.block(static_cast<long>(k) * dim, static_cast<long>(k) * dim, dim, dim) =
            model.noise_var[k] * model.input_cov[k];
    }
    model.noise_moment = a2t * u_diag.asDiagonal() * cb.transpose() * noise_blocks * cb *
                         u_diag.asDiagonal() * a2t.transpose();

    model.task_gap_drive.resize(nl);
    for (int k = 0; k < n; ++k) {
        Eigen::VectorXd acc = Eigen::VectorXd::Zero(dim);
        const Eigen::VectorXd wk = model.optimum_block.segment(static_cast<long>(k) * dim, dim);
        for (int l : network.topology.neighborhoods[k]) {
            if (c(l, k) == 0.0) continue;
            const Eigen::VectorXd wl =
                model.optimum_block.segment(static_cast<long>(l) * dim, dim);
            acc.noalias() += c(l, k) * (model.input_cov[l] * (wk - wl));
        }
        model.task_gap_drive.segment(static_cast<long>(k) * dim, dim) = acc;
    }

    model.drive_task = a2t * (u_diag.asDiagonal() * model.task_gap_drive);
    model.drive_combine =
        (a2t * i_minus_uh * (a1t - identity) + (a2t - identity)) * model.optimum_block;
    model.drive = model.drive_task - model.drive_combine;
    model.rho_transition = spectral_radius(model.transition);
    return model;
}

MeanStabilityReport check_mean_stability(const MomentModel& model) {
    MeanStabilityReport report;
    report.pass = true;
    for (int k = 0; k < model.n_agents; ++k) {
        const double bound = 2.0 / lambda_max_sym(model.neighborhood_cov[k]);
        report.step_size_bounds.push_back(bound);
        const double mu = model.step_sizes[k];
        if (!(mu > 0.0 && mu < bound)) report.pass = false;
    }
    report.spectral_radius = model.rho_transition;
    return report;
}

MeanSquareStabilityReport check_ms_stability(const MomentModel& model) {
    MeanSquareStabilityReport report;
    report.spectral_radius = model.rho_transition * model.rho_transition;
    report.pass = report.spectral_radius < 1.0;
    return report;
}

std::vector<Eigen::VectorXd> mean_recursion(const MomentModel& model, const Eigen::VectorXd& v0,
                                            long horizon) {
    std::vector<Eigen::VectorXd> seq;
    seq.reserve(horizon);
    Eigen::VectorXd v = v0;
    for (long n = 0; n < horizon; ++n) {
        seq.push_back(v);
        v = model.transition * v - model.drive;
    }
    return seq;
}

Eigen::VectorXd bias(const MomentModel& model, std::vector<std::string>* warnings) {
    const long nl = model.block_size();
    if (!(model.rho_transition < 1.0)) {
        throw SingularSystemError("mean recursion has no fixed point: spectral radius " +
                                  std::to_string(model.rho_transition) + " >= 1");
    }
    const Eigen::MatrixXd system =
        Eigen::MatrixXd::Identity(nl, nl) - model.transition;
    warn_if_ill_conditioned(system, "bias solve", warnings);
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(system);
    Eigen::VectorXd x = lu.solve(-model.drive);
    const double denom = std::max(model.drive.norm(), 1e-300);
    if ((system * x + model.drive).norm() / denom > 1e-8) {
        throw SingularSystemError("bias solve failed the residual check");
    }
    return x;
}

namespace {

struct TransientWeighting {
    Eigen::MatrixXd selector;  // initial weighting matrix
    double floor = 0.0;        // perturbation contribution under the selector
};

/// Shared driver of the production path: propagates S, the correction
/// matrix P, and the mean error, producing one weighted-error series per
/// requested selector in lockstep.
std::vector<std::vector<double>> run_transient(const MomentModel& model,
                                               const Eigen::VectorXd& v0, long horizon,
                                               const std::vector<Eigen::MatrixXd>& selectors) {
    const Eigen::MatrixXd& b = model.transition;
    const Eigen::VectorXd& r = model.drive;
    const std::size_t m = selectors.size();

    std::vector<Eigen::MatrixXd> s(selectors);
    std::vector<Eigen::MatrixXd> p(m, Eigen::MatrixXd::Zero(b.rows(), b.cols()));
    std::vector<std::vector<double>> zeta_star(m);
    for (std::size_t i = 0; i < m; ++i) {
        zeta_star[i].reserve(horizon);
        zeta_star[i].push_back(v0.dot(selectors[i] * v0));
    }

    Eigen::VectorXd ev = v0;
    for (long n = 0; n + 1 < horizon; ++n) {
        const Eigen::VectorXd bev = b * ev;
        const Eigen::MatrixXd mt = r * bev.transpose();
        const Eigen::MatrixXd bmt = b * mt * b.transpose();
        for (std::size_t i = 0; i < m; ++i) {
            const Eigen::MatrixXd bsb = b.transpose() * s[i] * b;
            const double term_noise = model.noise_moment.cwiseProduct(s[i]).sum();
            const double term_drive = r.dot(s[i] * r);
            const double term_init = v0.dot((s[i] - bsb) * v0);
            const double term_gamma = p[i].cwiseProduct(selectors[i]).sum();
            const double term_cross = mt.cwiseProduct(selectors[i]).sum();
            zeta_star[i].push_back(zeta_star[i].back() + term_noise + term_drive - term_init -
                                   2.0 * (term_gamma + term_cross));
            p[i] = b * p[i] * b.transpose() + bmt - mt;
            s[i] = bsb;
        }
        ev = bev - r;
    }
    return zeta_star;
}

}  // namespace

TransientSeries transient_msd(const MomentModel& model, const Eigen::VectorXd& v0, long horizon,
                              bool per_node) {
    require_stable(model);
    if (v0.size() != model.block_size()) {
        throw DimensionMismatchError("initial error vector has wrong size");
    }
    const long nl = model.block_size();
    std::vector<Eigen::MatrixXd> selectors;
    selectors.push_back(Eigen::MatrixXd::Identity(nl, nl) /
                        static_cast<double>(model.n_agents));
    if (per_node) {
        for (int k = 0; k < model.n_agents; ++k) {
            selectors.push_back(node_selector(model.n_agents, model.dim, k));
        }
    }
    const auto series = run_transient(model, v0, horizon, selectors);

    TransientSeries out;
    out.zeta_star = series[0];
    const double floor = model.perturbation_floor();
    out.zeta.reserve(horizon);
    for (double z : out.zeta_star) out.zeta.push_back(z + floor);
    if (per_node) {
        out.per_node.resize(horizon, model.n_agents);
        for (int k = 0; k < model.n_agents; ++k) {
            const double node_floor = model.dim * model.perturbation_var[k];
            for (long n = 0; n < horizon; ++n) {
                out.per_node(n, k) = series[k + 1][n] + node_floor;
            }
        }
    }
    return out;
}

TransientSeries transient_msd_explicit(const MomentModel& model, const Eigen::VectorXd& v0,
                                       long horizon) {
    require_stable(model);
    const long nl = model.block_size();
    if (nl > 64) {
        throw TheoryNotApplicableError("explicit propagator path limited to NL <= 64");
    }
    const Eigen::MatrixXd& b = model.transition;
    const Eigen::VectorXd& r = model.drive;
    const Eigen::MatrixXd k = kronecker(b.transpose(), b.transpose());
    const Eigen::VectorXd sigma_init =
        vectorize(Eigen::MatrixXd::Identity(nl, nl) / static_cast<double>(model.n_agents));
    const Eigen::VectorXd vec_gt = vectorize(model.noise_moment.transpose());

    TransientSeries out;
    out.zeta_star.reserve(horizon);
    out.zeta_star.push_back(v0.dot(unvectorize(sigma_init, nl, nl) * v0));

    Eigen::VectorXd sigma = sigma_init;  // K^n sigma_init
    Eigen::RowVectorXd gamma = Eigen::RowVectorXd::Zero(nl * nl);
    Eigen::VectorXd ev = v0;
    for (long n = 0; n + 1 < horizon; ++n) {
        const Eigen::MatrixXd sig_mat = unvectorize(sigma, nl, nl);
        const Eigen::VectorXd sigma_next = k * sigma;
        const Eigen::VectorXd bev = b * ev;
        const Eigen::RowVectorXd t = vectorize(r * bev.transpose()).transpose();
        const double term_noise = vec_gt.dot(sigma);
        const double term_drive = r.dot(sig_mat * r);
        const double term_init =
            v0.dot(unvectorize(sigma - sigma_next, nl, nl) * v0);
        const double term_gamma = gamma * sigma_init;
        const double term_cross = t * sigma_init;
        out.zeta_star.push_back(out.zeta_star.back() + term_noise + term_drive - term_init -
                                2.0 * (term_gamma + term_cross));
        gamma = gamma * k + t * (k - Eigen::MatrixXd::Identity(nl * nl, nl * nl));
        sigma = sigma_next;
        ev = bev - r;
    }
    const double floor = model.perturbation_floor();
    for (double z : out.zeta_star) out.zeta.push_back(z + floor);
    return out;
}

Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q) {
    const double rho = spectral_radius(b);
    if (!(rho < 1.0)) {
        throw UnstableModelError("Lyapunov equation requires a stable matrix, got radius " +
                                 std::to_string(rho));
    }
    Eigen::MatrixXd s = q;
    constexpr long kMaxIterations = 500000;
    bool converged = false;
    for (long it = 0; it < kMaxIterations; ++it) {
        Eigen::MatrixXd next = b.transpose() * s * b + q;
        const double increment = (next - s).norm();
        s = std::move(next);
        if (increment < 1e-14) {
            converged = true;
            break;
        }
    }
    if (!converged && b.rows() <= 64) {
        // Dense fallback on the vectorized form.
        const long nl = b.rows();
        const Eigen::MatrixXd k = kronecker(b.transpose(), b.transpose());
        const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(nl * nl, nl * nl) - k;
        s = unvectorize(Eigen::PartialPivLU<Eigen::MatrixXd>(system).solve(vectorize(q)),
                        nl, nl);
    }
    if (lyapunov_residual(b, q, s) > 1e-10) {
        throw LyapunovSolveFailureError("Lyapunov residual check failed");
    }
    return s;
}

double lyapunov_residual(const Eigen::MatrixXd& b, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& s) {
    return (s - b.transpose() * s * b - q).norm() / q.norm();
}

SteadyStateMsd steady_state_msd(const MomentModel& model, bool per_node) {
    require_stable(model);
    const long nl = model.block_size();
    SteadyStateMsd out;
    out.perturbation_floor = model.perturbation_floor();

    const Eigen::VectorXd v_inf = bias(model, &out.warnings);
    const Eigen::VectorXd bv = model.transition * v_inf;
    const auto weighted_msd = [&](const Eigen::MatrixXd& sel) {
        const Eigen::MatrixXd s = solve_discrete_lyapunov(model.transition, sel);
        return model.noise_moment.cwiseProduct(s).sum() + model.drive.dot(s * model.drive) -
               2.0 * model.drive.dot(s * bv);
    };

    out.zeta_star_network = weighted_msd(Eigen::MatrixXd::Identity(nl, nl) /
                                         static_cast<double>(model.n_agents));
    out.msd_network = out.zeta_star_network + out.perturbation_floor;
    if (per_node) {
        out.msd_per_node.resize(model.n_agents);
        for (int k = 0; k < model.n_agents; ++k) {
            out.msd_per_node(k) = weighted_msd(node_selector(model.n_agents, model.dim, k)) +
                                  model.dim * model.perturbation_var[k];
        }
    }
    return out;
}

SeriesMsd steady_state_msd_series(const MomentModel& model, double rel_tol, long max_terms) {
    require_stable(model);
    const long nl = model.block_size();
    const Eigen::MatrixXd& b = model.transition;
    const Eigen::VectorXd& r = model.drive;

    // (I + 2 B (I-B)^{-1}) r r^T  ==  (r + 2 B y) r^T with (I-B) y = r.
    const Eigen::MatrixXd system = Eigen::MatrixXd::Identity(nl, nl) - b;
    const Eigen::VectorXd y = Eigen::PartialPivLU<Eigen::MatrixXd>(system).solve(r);
    Eigen::MatrixXd m = model.noise_moment + (r + 2.0 * (b * y)) * r.transpose();

    SeriesMsd out;
    double acc = 0.0;
    int small_streak = 0;
    for (long j = 0; j < max_terms; ++j) {
        const double term = m.trace();
        acc += term;
        ++out.terms;
        if (std::abs(term) < rel_tol * std::max(std::abs(acc), 1e-300)) {
            // Require a short streak of negligible terms so a sign change in
            // the drive contribution cannot truncate the series early.
            if (++small_streak >= 3) {
                out.converged = true;
                break;
            }
        } else {
            small_streak = 0;
        }
        m = b * m * b.transpose();
    }
    out.msd_network = model.perturbation_floor() + acc / static_cast<double>(model.n_agents);
    return out;
}

double noncoop_msd_closed_form(const std::vector<NodeEnvironment>& environments,
                               const std::vector<double>& step_sizes, int dim) {
    if (environments.size() != step_sizes.size()) {
        throw DimensionMismatchError("one step size per environment required");
    }
    double total = 0.0;
    for (std::size_t k = 0; k < environments.size(); ++k) {
        total += step_sizes[k] * environments[k].noise_variance * dim / 2.0;
    }
    return total / static_cast<double>(environments.size());
}

Theorem3Decomposition theorem3_decomposition(const MomentModel& model,
                                             const MomentModel& model_lms) {
    require_stable(model);
    require_stable(model_lms);
    constexpr double kTol = 1e-12;
    if (!matrices_equal(model.input_cov, kTol)) {
        throw AssumptionViolationError("uniform data profile requires equal input covariances");
    }
    for (double mu : model.step_sizes) {
        if (std::abs(mu - model.step_sizes.front()) > kTol) {
            throw AssumptionViolationError("uniform data profile requires equal step sizes");
        }
    }
    const auto check_combination = [&](const Eigen::MatrixXd& a, const std::string& name) {
        if (!doubly_stochastic(a, 1e-10)) {
            throw AssumptionViolationError(name + " must be doubly stochastic");
        }
        if (!a.isApprox(a.transpose(), 1e-10)) {
            throw AssumptionViolationError(name + " must be symmetric");
        }
    };
    check_combination(model.network.a1.entries, "a1");
    check_combination(model.network.a2.entries, "a2");
    if (!doubly_stochastic(model.network.c.entries, 1e-10)) {
        throw AssumptionViolationError("exchange matrix must be doubly stochastic");
    }

    const long nl = model.block_size();
    const Eigen::MatrixXd& b = model.transition;
    const Eigen::VectorXd& r = model.drive;

    Theorem3Decomposition out;
    // Cooperation gain: difference of the two noise trace series. Both are
    // sums of nonnegative, geometrically decaying traces, so truncate once
    // each has individually converged.
    {
        Eigen::MatrixXd m_lms = model_lms.noise_moment;
        Eigen::MatrixXd m_diff = model.noise_moment;
        double acc = 0.0;
        double acc_lms = 0.0;
        double acc_diff = 0.0;
        for (long j = 0; j < 1000000; ++j) {
            const double t_lms = m_lms.trace();
            const double t_diff = m_diff.trace();
            acc += t_lms - t_diff;
            acc_lms += t_lms;
            acc_diff += t_diff;
            if (t_lms < 1e-12 * std::max(acc_lms, 1e-300) &&
                t_diff < 1e-12 * std::max(acc_diff, 1e-300)) {
                break;
            }
            m_lms = model_lms.transition * m_lms * model_lms.transition.transpose();
            m_diff = b * m_diff * b.transpose();
        }
        out.delta_msd_network = acc / static_cast<double>(model.n_agents);
    }
    // Multitask degradation: (1/N) r^T (I - B^T B)^{-1} (2 (I-B)^{-1} - I) r.
    {
        const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(nl, nl);
        const Eigen::VectorXd y = Eigen::PartialPivLU<Eigen::MatrixXd>(eye - b).solve(r);
        const Eigen::VectorXd zr = 2.0 * y - r;
        const Eigen::VectorXd s =
            Eigen::PartialPivLU<Eigen::MatrixXd>(eye - b.transpose() * b).solve(zr);
        out.delta_msd_multi = r.dot(s) / static_cast<double>(model.n_agents);
    }
    out.condition_holds = out.delta_msd_network - out.delta_msd_multi >= 0.0;
    return out;
}

}  // namespace diffnet
