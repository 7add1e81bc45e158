#pragma once

#include <optional>
#include <span>
#include <vector>

#include "gptcloak/layered_structure.hpp"

namespace gptcloak {

/// Difference of DtN eigenvalues on the circle |x| = s between the structure
/// shrunk by rho and the homogeneous unit conductivity, for data e^{ik theta}.
///
/// delta_k = 2k s^-1 rho^{2k} M_k / (2 pi k s^{2k} - M_k rho^{2k}), delta_0 = 0.
/// Requires background 1 and rho * r_1 < s.
double dtn_eigenvalue_perturbation(const RadialLayeredStructure& structure, double rho, double s, int k);

/// Same quantity for the insulated-core device in B_2 (core radius 1, outer
/// radius 2) against the empty disk B_2: k (rho/2)^{2k} M_k / (2 pi k - (rho/2)^{2k} M_k).
double insulated_dtn_perturbation(const RadialLayeredStructure& structure, double rho, int k);

struct DtnPerturbationReport {
    double rho = 0.0;
    double s = 0.0;
    std::vector<double> deltas;  // deltas[k] for k = 0..k_max
    double sup_norm = 0.0;       // max_{1<=k<=k_max} |delta_k|
    int sup_mode = 0;            // argmax of |delta_k| (0 when all vanish)
    /// Upper bound on sup_{k > k_max} |delta_k|; empty when no analytic bound applies.
    std::optional<double> tail_bound;
};

/// Bound on sup_{k > k_max} |delta_k| from |M_k| <= 2 pi k 2^{2k}.
/// Empty unless 2 rho < s.
std::optional<double> generic_tail_bound(double rho, double s, int k_max);

/// Plain sup over modes 1..k_max of |delta_k| plus the analytic tail beyond k_max.
/// The tail is reported only for r_1 <= 2 and 2 rho < s.
DtnPerturbationReport operator_norm_estimate(const RadialLayeredStructure& structure, double rho, double s,
                                             int k_max);

struct DecayFit {
    double slope = 0.0;
    double log_constant = 0.0;  // intercept of log(sup_norm) = log C + slope * log(rho)
    std::vector<double> rhos;
    std::vector<double> sup_norms;
};

/// Least-squares slope of log(sup_norm(rho)) against log(rho).
DecayFit decay_rate(const RadialLayeredStructure& structure, double s, std::span<const double> rho_list,
                    int k_max);

struct Point2 {
    double x = 0.0;
    double y = 0.0;

    double norm() const noexcept;
};

/// Radial map B_2 -> B_2 blowing the disk of radius rho up to the unit disk
/// and fixing 3/2 <= |x| <= 2.
Point2 blowup_map(double rho, Point2 point);
Point2 blowup_map_inverse(double rho, Point2 point);

/// Anisotropic conductivity (DF sigma DF^T / |det DF|) o F^-1 of the shrunk profile.
struct PushforwardTensor {
    Point2 point;
    double a11 = 1.0;
    double a12 = 0.0;
    double a22 = 1.0;
    double radial_eigenvalue = 1.0;
    double tangential_eigenvalue = 1.0;
    /// sigma(F^-1(point) / rho), the isotropic value being pushed forward.
    double conductivity = 1.0;

    double determinant() const noexcept { return a11 * a22 - a12 * a12; }
};

/// Empty where the pulled-back conductivity is zero (inside the insulated hole).
std::optional<PushforwardTensor> pushforward_tensor(const RadialLayeredStructure& structure, double rho,
                                                    Point2 point);

}  // namespace gptcloak
