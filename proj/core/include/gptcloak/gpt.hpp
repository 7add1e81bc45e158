#pragma once

#include <optional>
#include <vector>

#include "gptcloak/layered_structure.hpp"

namespace gptcloak {

/// 2x2 transfer matrix for angular mode k.
///
/// Maps the mode coefficients (a, b) of u = (a r^k + b r^-k) cos k theta on
/// the outer side of a set of interfaces to a positive multiple of those on
/// the inner side. Factors are kept unnormalized: the 1/(2 sigma_j) prefactor
/// of the textbook recursion is dropped since only p21/p22 matters.
struct CascadeMatrix {
    double p11 = 1.0;
    double p12 = 0.0;
    double p21 = 0.0;
    double p22 = 1.0;
    int mode = 1;

    double determinant() const noexcept { return p11 * p22 - p12 * p21; }
    bool is_upper_triangular() const noexcept { return p21 == 0.0; }
};

/// Single interface at `radius` between conductivity `sigma_inner` (inside)
/// and `sigma_outer` (outside):
/// [[si+so, (si-so) r^-2k], [(si-so) r^2k, si+so]].
CascadeMatrix interface_factor(double sigma_inner, double sigma_outer, double radius, int k);

/// Transfer matrix through all interfaces scaled so that the outer radius is 1.
///
/// The true cascade P equals 2^exponent * D * normalized * D^-1 with
/// D = diag(1, r_1^{2k}); entries of `normalized` have magnitude below 1 and
/// never overflow for moderate k.
struct BalancedCascade {
    CascadeMatrix normalized;
    int exponent = 0;
    double outer_radius = 1.0;
};

BalancedCascade balanced_cascade(const RadialLayeredStructure& structure, int k);

/// Ordered product Q_{N+1} ... Q_1 of unnormalized interface factors.
CascadeMatrix cascade(const RadialLayeredStructure& structure, int k);

/// M_k / (2 pi k r_1^{2k}); lies in [-1, 1] for every admissible structure.
double scaled_gpt(const RadialLayeredStructure& structure, int k);

/// Contracted GPT M_k = 2 pi k p21 / p22.
double gpt(const RadialLayeredStructure& structure, int k);

struct GptSpectrum {
    std::vector<double> values;  // values[k-1] = M_k

    int k_max() const noexcept { return static_cast<int>(values.size()); }
    double at_mode(int k) const { return values.at(static_cast<std::size_t>(k - 1)); }
};

GptSpectrum gpt_spectrum(const RadialLayeredStructure& structure, int k_max);

/// Mode-k solution coefficients per region, normalized so that a_0 = 1.
struct LayerCoefficients {
    int mode = 1;
    std::vector<double> a;  // a[j] for region j = 0..N+1
    std::vector<double> b;
    bool core_defined = true;  // false for an insulated core (a, b of the core are 0)

    /// a_j r^k + b_j r^-k
    double radial_profile(std::size_t region, double r) const;
    /// d/dr of radial_profile
    double radial_derivative(std::size_t region, double r) const;
};

LayerCoefficients layer_coefficients(const RadialLayeredStructure& structure, int k);

struct PolarPoint {
    double r = 0.0;
    double theta = 0.0;
};

/// u_k(r, theta) for the exterior data H = r^k cos k theta.
/// Empty inside an insulated core (r < r_{N+1}).
std::optional<double> field_value(const RadialLayeredStructure& structure, int k, PolarPoint point);

}  // namespace gptcloak
