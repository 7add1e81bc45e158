#include "gptcloak/design.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>

#include "gptcloak/errors.hpp"
#include "gptcloak/gpt.hpp"
#include "mat2.hpp"

namespace gptcloak {

CoreConstraint CoreConstraint::fixed(double value) {
    if (!(std::isfinite(value) && value >= 0.0)) {
        throw DomainError("fixed core conductivity must be non-negative");
    }
    if (value == 0.0) return insulated();
    return CoreConstraint(CoreKind::Fixed, value);
}

std::vector<double> default_radii(int order) {
    if (order < 1) throw DomainError("design order must be at least 1");
    std::vector<double> radii(static_cast<std::size_t>(order) + 1);
    for (int j = 1; j <= order + 1; ++j) {
        radii[static_cast<std::size_t>(j - 1)] = 2.0 - static_cast<double>(j - 1) / order;
    }
    return radii;
}

DesignProblem DesignProblem::with_default_radii(int order, CoreConstraint core, double background) {
    return {order, default_radii(order), core, background};
}

void DesignProblem::validate() const {
    if (order < 1) throw DomainError("design order must be at least 1");
    if (radii.size() != static_cast<std::size_t>(order) + 1) {
        throw DomainError("design of order " + std::to_string(order) + " needs " +
                          std::to_string(order + 1) + " radii, got " + std::to_string(radii.size()));
    }
    if (!(background > 0.0)) throw DomainError("background conductivity must be positive");
    for (std::size_t i = 0; i < radii.size(); ++i) {
        if (!(radii[i] > 0.0)) throw DomainError("radii must be positive");
        if (i > 0 && !(radii[i] < radii[i - 1])) throw DomainError("radii must be strictly decreasing");
    }
}

std::size_t DesignProblem::unknown_count() const {
    return static_cast<std::size_t>(order) + (core.pins_core() ? 0 : 1);
}

std::vector<double> DesignProblem::full_conductivities(std::span<const double> unknowns) const {
    if (unknowns.size() != unknown_count()) {
        throw DomainError("expected " + std::to_string(unknown_count()) + " unknown conductivities, got " +
                          std::to_string(unknowns.size()));
    }
    std::vector<double> sigma(unknowns.begin(), unknowns.end());
    if (core.pins_core()) sigma.push_back(core.value());
    return sigma;
}

RadialLayeredStructure DesignProblem::assemble(std::span<const double> unknowns) const {
    return {radii, full_conductivities(unknowns), background};
}

void SolverOptions::validate() const {
    if (max_iterations < 1) throw DomainError("max_iterations must be at least 1");
    if (!(residual_tolerance > 0.0)) throw DomainError("residual_tolerance must be positive");
    if (max_halvings < 0) throw DomainError("max_halvings must be non-negative");
    if (!(positivity_floor > 0.0)) throw DomainError("positivity_floor must be positive");
    if (polish_steps < 0) throw DomainError("polish_steps must be non-negative");
}

std::vector<double> initial_guess(const DesignProblem& problem) {
    problem.validate();
    std::vector<double> sigma(problem.unknown_count());
    for (std::size_t j = 1; j <= sigma.size(); ++j) sigma[j - 1] = (j % 2 == 1) ? 0.5 : 2.0;
    return sigma;
}

std::vector<double> scaled_residual(const DesignProblem& problem, std::span<const double> sigma) {
    const RadialLayeredStructure structure = problem.assemble(sigma);
    std::vector<double> out(static_cast<std::size_t>(problem.order));
    for (int k = 1; k <= problem.order; ++k) out[static_cast<std::size_t>(k - 1)] = scaled_gpt(structure, k);
    return out;
}

std::vector<double> residual(const DesignProblem& problem, std::span<const double> sigma) {
    const RadialLayeredStructure structure = problem.assemble(sigma);
    std::vector<double> out(static_cast<std::size_t>(problem.order));
    for (int k = 1; k <= problem.order; ++k) out[static_cast<std::size_t>(k - 1)] = gpt(structure, k);
    return out;
}

namespace {

using detail::Mat2;
using detail::ScaledMat2;

/// Row of the scaled Jacobian for mode k, via prefix/suffix products of the balanced cascade.
Eigen::RowVectorXd scaled_row(const RadialLayeredStructure& structure, int k, std::size_t unknowns) {
    const std::size_t n = structure.interface_count();
    const double r1 = structure.outer_radius();

    std::vector<double> t(n + 1, 1.0);
    std::vector<ScaledMat2> factor(n + 1);
    for (std::size_t j = 1; j <= n; ++j) {
        t[j] = detail::relative_power(structure.interface_radius(j), r1, k);
        factor[j] = ScaledMat2{detail::balanced_factor(structure.region_conductivity(j),
                                                       structure.region_conductivity(j - 1), t[j]),
                               0};
    }
    // prefix[i] = F_i ... F_1, suffix[i] = F_{n} ... F_i
    std::vector<ScaledMat2> prefix(n + 1), suffix(n + 2);
    for (std::size_t i = 1; i <= n; ++i) prefix[i] = factor[i] * prefix[i - 1];
    for (std::size_t i = n; i >= 1; --i) suffix[i] = suffix[i + 1] * factor[i];

    const ScaledMat2& total = prefix[n];
    const double p21 = total.m.m21;
    const double p22 = total.m.m22;
    if (!(std::abs(p22) > 1e-14 * std::abs(p21)) || !std::isfinite(p21 / p22)) {
        throw SingularCascadeError(k, "cascade entry p22 vanishes; Jacobian undefined");
    }

    Eigen::RowVectorXd row(static_cast<Eigen::Index>(unknowns));
    for (std::size_t u = 0; u < unknowns; ++u) {
        const std::size_t j = u + 1;
        // sigma_j is the inner conductivity of interface j ...
        ScaledMat2 term = suffix[j + 1] * ScaledMat2{detail::balanced_factor_d_inner(t[j]), 0} * prefix[j - 1];
        double d21 = std::ldexp(term.m.m21, term.exponent - total.exponent);
        double d22 = std::ldexp(term.m.m22, term.exponent - total.exponent);
        // ... and the outer conductivity of interface j+1
        if (j < n) {
            ScaledMat2 term2 = suffix[j + 2] * ScaledMat2{detail::balanced_factor_d_outer(t[j + 1]), 0} * prefix[j];
            d21 += std::ldexp(term2.m.m21, term2.exponent - total.exponent);
            d22 += std::ldexp(term2.m.m22, term2.exponent - total.exponent);
        }
        row(static_cast<Eigen::Index>(u)) = (d21 * p22 - p21 * d22) / (p22 * p22);
    }
    return row;
}

}  // namespace

Eigen::MatrixXd scaled_jacobian(const DesignProblem& problem, std::span<const double> sigma) {
    const RadialLayeredStructure structure = problem.assemble(sigma);
    const std::size_t p = problem.unknown_count();
    Eigen::MatrixXd jac(problem.order, static_cast<Eigen::Index>(p));
    for (int k = 1; k <= problem.order; ++k) jac.row(k - 1) = scaled_row(structure, k, p);
    return jac;
}

Eigen::MatrixXd jacobian(const DesignProblem& problem, std::span<const double> sigma) {
    Eigen::MatrixXd jac = scaled_jacobian(problem, sigma);
    const double r1 = problem.radii.front();
    for (int k = 1; k <= problem.order; ++k) {
        jac.row(k - 1) *= 2.0 * std::numbers::pi * k * std::pow(r1, 2.0 * k);
    }
    return jac;
}

GaussNewtonStep gauss_newton_step(std::span<const double> sigma, std::span<const double> residuals,
                                  const Eigen::MatrixXd& jac) {
    if (jac.rows() != static_cast<Eigen::Index>(residuals.size()) ||
        jac.cols() != static_cast<Eigen::Index>(sigma.size())) {
        throw DomainError("Jacobian dimensions do not match residuals x unknowns");
    }
    const Eigen::Map<const Eigen::VectorXd> b(residuals.data(), static_cast<Eigen::Index>(residuals.size()));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(jac, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Eigen::VectorXd& sv = svd.singularValues();

    Eigen::VectorXd delta = Eigen::VectorXd::Zero(jac.cols());
    int rank = 0;
    if (sv.size() > 0 && sv(0) > 0.0) {
        const double cutoff = 1e-12 * sv(0);
        const Eigen::VectorXd utb = svd.matrixU().transpose() * b;
        for (Eigen::Index i = 0; i < sv.size(); ++i) {
            if (sv(i) <= cutoff) continue;
            delta += svd.matrixV().col(i) * (utb(i) / sv(i));
            ++rank;
        }
    }

    GaussNewtonStep step;
    step.rank = rank;
    step.sigma.assign(sigma.begin(), sigma.end());
    for (std::size_t i = 0; i < step.sigma.size(); ++i) step.sigma[i] -= delta(static_cast<Eigen::Index>(i));
    return step;
}

namespace {

double max_abs(std::span<const double> v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

bool above_floor(std::span<const double> v, double floor) {
    return std::all_of(v.begin(), v.end(), [floor](double x) { return x >= floor; });
}

std::optional<std::vector<double>> try_scaled_residual(const DesignProblem& problem,
                                                       std::span<const double> sigma) {
    try {
        std::vector<double> r = scaled_residual(problem, sigma);
        if (!std::all_of(r.begin(), r.end(), [](double x) { return std::isfinite(x); })) return std::nullopt;
        return r;
    } catch (const SingularCascadeError&) {
        return std::nullopt;
    }
}

}  // namespace

DesignReport solve_design(const DesignProblem& problem, const SolverOptions& options) {
    problem.validate();
    options.validate();

    std::vector<double> sigma = initial_guess(problem);
    std::vector<double> res = scaled_residual(problem, sigma);
    double current = max_abs(res);

    std::vector<double> history{current};
    int iterations = 0;
    int min_rank = static_cast<int>(std::min<std::size_t>(problem.order, problem.unknown_count()));
    const int full_rank = min_rank;
    bool converged = current <= options.residual_tolerance;
    std::string status = converged ? "converged" : "";

    while (!converged && iterations < options.max_iterations) {
        const GaussNewtonStep full = gauss_newton_step(sigma, res, scaled_jacobian(problem, sigma));
        min_rank = std::min(min_rank, full.rank);

        std::vector<double> delta(sigma.size());
        for (std::size_t i = 0; i < sigma.size(); ++i) delta[i] = sigma[i] - full.sigma[i];

        std::optional<std::vector<double>> accepted_sigma;
        std::optional<std::vector<double>> accepted_res;
        if (options.damping) {
            double alpha = 1.0;
            for (int h = 0; h <= options.max_halvings; ++h, alpha *= 0.5) {
                std::vector<double> trial(sigma.size());
                for (std::size_t i = 0; i < sigma.size(); ++i) trial[i] = sigma[i] - alpha * delta[i];
                if (!above_floor(trial, options.positivity_floor)) continue;
                auto trial_res = try_scaled_residual(problem, trial);
                if (!trial_res || max_abs(*trial_res) > current) continue;
                accepted_sigma = std::move(trial);
                accepted_res = std::move(trial_res);
                break;
            }
            if (!accepted_sigma) {
                status = "stagnated: no admissible non-increasing step after " +
                         std::to_string(options.max_halvings) + " halvings";
                break;
            }
        } else {
            if (!above_floor(full.sigma, options.positivity_floor)) {
                status = "undamped step left the admissible region (conductivity below floor)";
                break;
            }
            accepted_res = scaled_residual(problem, full.sigma);
            accepted_sigma = full.sigma;
        }

        sigma = std::move(*accepted_sigma);
        res = std::move(*accepted_res);
        current = max_abs(res);
        ++iterations;
        history.push_back(current);
        converged = current <= options.residual_tolerance;
    }
    if (converged) {
        for (int p = 0; p < options.polish_steps && current > 0.0; ++p) {
            const GaussNewtonStep step = gauss_newton_step(sigma, res, scaled_jacobian(problem, sigma));
            if (!above_floor(step.sigma, options.positivity_floor)) break;
            auto step_res = try_scaled_residual(problem, step.sigma);
            if (!step_res || !(max_abs(*step_res) < current)) break;
            min_rank = std::min(min_rank, step.rank);
            sigma = step.sigma;
            res = std::move(*step_res);
            current = max_abs(res);
            ++iterations;
            history.push_back(current);
        }
        status = "converged";
    } else if (status.empty()) {
        status = "reached max_iterations (" + std::to_string(options.max_iterations) + ")";
    }

    return DesignReport{
        .structure = problem.assemble(sigma),
        .converged = converged,
        .iterations = iterations,
        .residual_history = std::move(history),
        .final_residuals = residual(problem, sigma),
        .min_jacobian_rank = min_rank,
        .rank_deficient = min_rank < full_rank,
        .status = std::move(status),
    };
}

}  // namespace gptcloak
