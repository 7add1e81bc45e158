#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gptcloak/layered_structure.hpp"

namespace gptcloak {

enum class CoreKind { Free, Fixed, Insulated };

/// How the core conductivity sigma_{N+1} enters a design problem.
class CoreConstraint {
public:
    static CoreConstraint free() { return CoreConstraint(CoreKind::Free, 0.0); }
    static CoreConstraint fixed(double value);
    static CoreConstraint insulated() { return CoreConstraint(CoreKind::Insulated, 0.0); }

    CoreKind kind() const noexcept { return kind_; }
    bool pins_core() const noexcept { return kind_ != CoreKind::Free; }
    /// Pinned core conductivity; 0 for an insulated core, meaningless when free.
    double value() const noexcept { return value_; }

    friend bool operator==(const CoreConstraint&, const CoreConstraint&) = default;

private:
    CoreConstraint(CoreKind kind, double value) : kind_(kind), value_(value) {}

    CoreKind kind_;
    double value_;
};

/// Radii r_j = 2 - (j-1)/N, j = 1..N+1.
std::vector<double> default_radii(int order);

/// Cancel M_1..M_N by choosing conductivities at fixed radii.
struct DesignProblem {
    int order = 1;
    std::vector<double> radii;
    CoreConstraint core = CoreConstraint::free();
    double background = 1.0;

    static DesignProblem with_default_radii(int order, CoreConstraint core, double background = 1.0);

    void validate() const;
    /// N+1 when the core is free, N otherwise.
    std::size_t unknown_count() const;
    /// Full conductivity vector (sigma_1..sigma_{N+1}) for the given unknowns.
    std::vector<double> full_conductivities(std::span<const double> unknowns) const;
    RadialLayeredStructure assemble(std::span<const double> unknowns) const;
};

struct SolverOptions {
    int max_iterations = 200;
    double residual_tolerance = 1e-10;  // on M_k / (2 pi k r_1^{2k})
    bool damping = true;
    int max_halvings = 30;
    double positivity_floor = 1e-6;
    /// Extra full steps after convergence, kept only while the residual shrinks.
    int polish_steps = 3;

    void validate() const;
};

struct DesignReport {
    RadialLayeredStructure structure;
    bool converged = false;
    int iterations = 0;
    /// Max scaled residual at the initial guess and after every accepted step.
    std::vector<double> residual_history;
    /// Raw M_1..M_N of the returned structure.
    std::vector<double> final_residuals;
    /// Smallest numerical rank of the Jacobian met during the iteration.
    int min_jacobian_rank = 0;
    bool rank_deficient = false;
    std::string status;
};

/// sigma_j^(0) = 2^((-1)^j) over the unknowns.
std::vector<double> initial_guess(const DesignProblem& problem);

/// (M_1, ..., M_N) of the assembled structure.
std::vector<double> residual(const DesignProblem& problem, std::span<const double> sigma);

/// (M_k / (2 pi k r_1^{2k}))_k; what the solver drives to zero.
std::vector<double> scaled_residual(const DesignProblem& problem, std::span<const double> sigma);

/// N x p matrix of dM_k/dsigma_j, differentiated analytically through the cascade.
Eigen::MatrixXd jacobian(const DesignProblem& problem, std::span<const double> sigma);

/// Row-scaled counterpart of jacobian() matching scaled_residual().
Eigen::MatrixXd scaled_jacobian(const DesignProblem& problem, std::span<const double> sigma);

struct GaussNewtonStep {
    std::vector<double> sigma;
    int rank = 0;
};

/// sigma - pinv(jac) * residuals, with singular values below 1e-12 * s_max dropped.
GaussNewtonStep gauss_newton_step(std::span<const double> sigma, std::span<const double> residuals,
                                  const Eigen::MatrixXd& jac);

DesignReport solve_design(const DesignProblem& problem, const SolverOptions& options = {});

}  // namespace gptcloak
