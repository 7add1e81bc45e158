#include "gptcloak/gpt.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "gptcloak/errors.hpp"
#include "mat2.hpp"

namespace gptcloak {

namespace {

// Admissible structures have |p21| <= p22 in balanced form; |p22| below this
// fraction of |p21| is treated as singular.
constexpr double kSingularFloor = 1e-14;

void require_mode(int k) {
    if (k < 1) throw DomainError("mode k must be a positive integer, got " + std::to_string(k));
}

}  // namespace

CascadeMatrix interface_factor(double sigma_inner, double sigma_outer, double radius, int k) {
    require_mode(k);
    if (!(radius > 0.0)) throw DomainError("interface radius must be positive");
    if (!(sigma_outer > 0.0)) throw DomainError("outer conductivity must be positive");
    if (!(sigma_inner >= 0.0)) throw DomainError("inner conductivity must be non-negative");
    const double sum = sigma_inner + sigma_outer;
    const double diff = sigma_inner - sigma_outer;
    const double r2k = std::pow(radius, 2.0 * k);
    return {sum, diff / r2k, diff * r2k, sum, k};
}

BalancedCascade balanced_cascade(const RadialLayeredStructure& structure, int k) {
    require_mode(k);
    const double r1 = structure.outer_radius();
    detail::ScaledMat2 product;
    for (std::size_t j = 1; j <= structure.interface_count(); ++j) {
        const double t = detail::relative_power(structure.interface_radius(j), r1, k);
        product = detail::ScaledMat2{detail::balanced_factor(structure.region_conductivity(j),
                                                             structure.region_conductivity(j - 1), t),
                                     0} *
                  product;
    }
    const auto& m = product.m;
    return {{m.m11, m.m12, m.m21, m.m22, k}, product.exponent, r1};
}

CascadeMatrix cascade(const RadialLayeredStructure& structure, int k) {
    const BalancedCascade bc = balanced_cascade(structure, k);
    const double r2k = std::pow(bc.outer_radius, 2.0 * k);
    const auto& n = bc.normalized;
    return {std::ldexp(n.p11, bc.exponent), std::ldexp(n.p12, bc.exponent) / r2k,
            std::ldexp(n.p21, bc.exponent) * r2k, std::ldexp(n.p22, bc.exponent), k};
}

double scaled_gpt(const RadialLayeredStructure& structure, int k) {
    const BalancedCascade bc = balanced_cascade(structure, k);
    const auto& n = bc.normalized;
    if (!(std::abs(n.p22) > kSingularFloor * std::abs(n.p21)) || !std::isfinite(n.p21 / n.p22)) {
        throw SingularCascadeError(k, "cascade entry p22 vanishes; structure is degenerate");
    }
    return n.p21 / n.p22;
}

double gpt(const RadialLayeredStructure& structure, int k) {
    const double m = scaled_gpt(structure, k);
    return 2.0 * std::numbers::pi * k * std::pow(structure.outer_radius(), 2.0 * k) * m;
}

GptSpectrum gpt_spectrum(const RadialLayeredStructure& structure, int k_max) {
    if (k_max < 1) throw DomainError("k_max must be at least 1");
    GptSpectrum spectrum;
    spectrum.values.reserve(static_cast<std::size_t>(k_max));
    for (int k = 1; k <= k_max; ++k) spectrum.values.push_back(gpt(structure, k));
    return spectrum;
}

double LayerCoefficients::radial_profile(std::size_t region, double r) const {
    const double rk = std::pow(r, mode);
    const double bj = b.at(region);
    return a.at(region) * rk + (bj == 0.0 ? 0.0 : bj / rk);
}

double LayerCoefficients::radial_derivative(std::size_t region, double r) const {
    const double bj = b.at(region);
    const double rkm1 = std::pow(r, mode - 1);
    return mode * (a.at(region) * rkm1 - (bj == 0.0 ? 0.0 : bj / (rkm1 * r * r)));
}

LayerCoefficients layer_coefficients(const RadialLayeredStructure& structure, int k) {
    // validates the mode and rejects degenerate cascades
    (void)scaled_gpt(structure, k);

    const std::size_t n_interfaces = structure.interface_count();
    LayerCoefficients out;
    out.mode = k;
    out.a.assign(n_interfaces + 1, 0.0);
    out.b.assign(n_interfaces + 1, 0.0);

    // Propagate outward from the innermost defined region, then normalize a_0 = 1.
    std::size_t start = n_interfaces;
    if (structure.has_insulated_core()) {
        out.core_defined = false;
        start = n_interfaces - 1;
        out.a[start] = 1.0;
        out.b[start] = std::pow(structure.core_radius(), 2.0 * k);
    } else {
        out.a[start] = 1.0;
        out.b[start] = 0.0;
    }
    for (std::size_t j = start; j >= 1; --j) {
        const double inner = structure.region_conductivity(j);
        const double outer = structure.region_conductivity(j - 1);
        const double r2k = std::pow(structure.interface_radius(j), 2.0 * k);
        const double half = 0.5 / outer;
        out.a[j - 1] = half * ((outer + inner) * out.a[j] + (outer - inner) / r2k * out.b[j]);
        out.b[j - 1] = half * ((outer - inner) * r2k * out.a[j] + (outer + inner) * out.b[j]);
    }
    const double a0 = out.a[0];
    if (a0 == 0.0 || !std::isfinite(a0)) {
        throw SingularCascadeError(k, "exterior coefficient a_0 vanishes");
    }
    for (std::size_t j = 0; j <= start; ++j) {
        out.a[j] /= a0;
        out.b[j] /= a0;
    }
    if (out.core_defined) out.b[n_interfaces] = 0.0;
    return out;
}

std::optional<double> field_value(const RadialLayeredStructure& structure, int k, PolarPoint point) {
    require_mode(k);
    if (!(point.r >= 0.0)) throw DomainError("polar radius must be non-negative");
    const std::size_t region = structure.region_of(point.r);
    const bool in_core = region == structure.interface_count();
    if (in_core && structure.has_insulated_core() && point.r < structure.core_radius()) {
        return std::nullopt;
    }
    const LayerCoefficients coeffs = layer_coefficients(structure, k);
    // r == r_{N+1} with an insulated core: evaluate from the coating side
    const std::size_t eval_region = (in_core && !coeffs.core_defined) ? region - 1 : region;
    const double angular = std::cos(k * point.theta);
    if (point.r == 0.0) {
        if (coeffs.b[eval_region] != 0.0) throw DomainError("field is singular at the origin");
        return 0.0;
    }
    return coeffs.radial_profile(eval_region, point.r) * angular;
}

}  // namespace gptcloak
