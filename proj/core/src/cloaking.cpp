#include "gptcloak/cloaking.hpp"

#include <cmath>
#include <string>

#include "gptcloak/errors.hpp"
#include "gptcloak/gpt.hpp"

namespace gptcloak {

namespace {

constexpr double kPoleFloor = 1e-12;
constexpr double kOuterRadius = 2.0;
constexpr double kSeam = 1.5;
// slack when checking |x| <= 2 on sampled grids
constexpr double kDomainSlack = 1e-12;

void require_positive_rho(double rho) {
    if (!(rho > 0.0)) throw DomainError("shrink factor rho must be positive");
}

/// delta_k written through x = q * m with q = (rho r_1 / s)^{2k}, m = M_k / (2 pi k r_1^{2k}):
/// delta_k = (2k / s) x / (1 - x).
double perturbation_from_scaled(double x, int k, double s) {
    const double denom = 1.0 - x;
    if (!(std::abs(denom) > kPoleFloor)) {
        throw PoleError("DtN perturbation has a pole at mode " + std::to_string(k));
    }
    return 2.0 * k / s * x / denom;
}

}  // namespace

double dtn_eigenvalue_perturbation(const RadialLayeredStructure& structure, double rho, double s, int k) {
    require_positive_rho(rho);
    if (!(s > 0.0)) throw DomainError("measurement radius s must be positive");
    if (k < 0) throw DomainError("mode must be non-negative");
    if (structure.background() != 1.0) throw ConstraintError("DtN comparison needs background conductivity 1");
    if (!(rho * structure.outer_radius() < s)) {
        throw GeometryError("shrunken structure (radius " + std::to_string(rho * structure.outer_radius()) +
                            ") must lie strictly inside B_s (s = " + std::to_string(s) + ")");
    }
    if (k == 0) return 0.0;
    const double m = scaled_gpt(structure, k);
    const double q = std::pow(rho * structure.outer_radius() / s, 2.0 * k);
    return perturbation_from_scaled(q * m, k, s);
}

double insulated_dtn_perturbation(const RadialLayeredStructure& structure, double rho, int k) {
    if (!structure.has_insulated_core()) throw ConstraintError("structure must have an insulated core");
    if (std::abs(structure.outer_radius() - 2.0) > 1e-12) throw ConstraintError("outer radius must be 2");
    if (std::abs(structure.core_radius() - 1.0) > 1e-12) throw ConstraintError("core radius must be 1");
    if (structure.background() != 1.0) throw ConstraintError("background conductivity must be 1");
    if (!(rho > 0.0 && rho < 1.0)) throw DomainError("rho must lie in (0, 1)");
    if (k < 0) throw DomainError("mode must be non-negative");
    if (k == 0) return 0.0;
    // (rho/2)^{2k} M_k / (2 pi k) = rho^{2k} * M_k / (2 pi k 2^{2k})
    const double x = std::pow(rho, 2.0 * k) * scaled_gpt(structure, k);
    const double denom = 1.0 - x;
    if (!(std::abs(denom) > kPoleFloor)) {
        throw PoleError("DtN perturbation has a pole at mode " + std::to_string(k));
    }
    return k * x / denom;
}

std::optional<double> generic_tail_bound(double rho, double s, int k_max) {
    require_positive_rho(rho);
    if (!(s > 0.0)) throw DomainError("measurement radius s must be positive");
    if (k_max < 0) throw DomainError("k_max must be non-negative");
    const double ratio = 2.0 * rho / s;
    if (!(ratio < 1.0)) return std::nullopt;
    // k X^k / (1 - X^k) is decreasing in k, so the sup sits at k_max + 1
    const int k = k_max + 1;
    const double x = std::pow(ratio, 2.0 * k);
    return 2.0 * k / s * x / (1.0 - x);
}

DtnPerturbationReport operator_norm_estimate(const RadialLayeredStructure& structure, double rho, double s,
                                             int k_max) {
    if (k_max < 1) throw DomainError("k_max must be at least 1");
    DtnPerturbationReport report;
    report.rho = rho;
    report.s = s;
    report.deltas.assign(static_cast<std::size_t>(k_max) + 1, 0.0);
    for (int k = 0; k <= k_max; ++k) {
        const double d = dtn_eigenvalue_perturbation(structure, rho, s, k);
        report.deltas[static_cast<std::size_t>(k)] = d;
        if (std::abs(d) > report.sup_norm) {
            report.sup_norm = std::abs(d);
            report.sup_mode = k;
        }
    }
    if (structure.outer_radius() <= kOuterRadius) report.tail_bound = generic_tail_bound(rho, s, k_max);
    return report;
}

DecayFit decay_rate(const RadialLayeredStructure& structure, double s, std::span<const double> rho_list,
                    int k_max) {
    if (rho_list.size() < 2) throw DegenerateFitError("decay fit needs at least two rho values");
    DecayFit fit;
    for (double rho : rho_list) {
        const DtnPerturbationReport report = operator_norm_estimate(structure, rho, s, k_max);
        if (!(report.sup_norm > 0.0)) {
            throw DegenerateFitError("sup-norm vanishes at rho = " + std::to_string(rho) +
                                     "; no decay to fit");
        }
        fit.rhos.push_back(rho);
        fit.sup_norms.push_back(report.sup_norm);
    }
    const double n = static_cast<double>(fit.rhos.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < fit.rhos.size(); ++i) {
        mx += std::log(fit.rhos[i]);
        my += std::log(fit.sup_norms[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < fit.rhos.size(); ++i) {
        const double dx = std::log(fit.rhos[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(fit.sup_norms[i]) - my);
    }
    if (!(sxx > 0.0)) throw DegenerateFitError("decay fit needs at least two distinct rho values");
    fit.slope = sxy / sxx;
    fit.log_constant = my - fit.slope * mx;
    return fit;
}

double Point2::norm() const noexcept { return std::hypot(x, y); }

namespace {

void require_blowup_rho(double rho) {
    if (!(rho > 0.0 && rho < kSeam)) throw DomainError("blow-up map needs 0 < rho < 3/2");
}

void require_in_b2(const Point2& p) {
    if (!(p.norm() <= kOuterRadius + kDomainSlack)) throw DomainError("point lies outside B_2");
}

double blowup_radius(double rho, double r) {
    if (r >= kSeam) return r;
    if (r >= rho) return (3.0 - 3.0 * rho) / (3.0 - 2.0 * rho) + r / (3.0 - 2.0 * rho);
    return r / rho;
}

double blowup_radius_inverse(double rho, double r) {
    if (r >= kSeam) return r;
    if (r >= 1.0) return (3.0 - 2.0 * rho) * r - (3.0 - 3.0 * rho);
    return rho * r;
}

Point2 rescale(Point2 p, double from, double to) {
    if (from == 0.0) return {0.0, 0.0};
    const double f = to / from;
    return {p.x * f, p.y * f};
}

}  // namespace

Point2 blowup_map(double rho, Point2 point) {
    require_blowup_rho(rho);
    require_in_b2(point);
    const double r = point.norm();
    return rescale(point, r, blowup_radius(rho, r));
}

Point2 blowup_map_inverse(double rho, Point2 point) {
    require_blowup_rho(rho);
    require_in_b2(point);
    const double r = point.norm();
    return rescale(point, r, blowup_radius_inverse(rho, r));
}

std::optional<PushforwardTensor> pushforward_tensor(const RadialLayeredStructure& structure, double rho,
                                                    Point2 point) {
    require_blowup_rho(rho);
    require_in_b2(point);

    const double image_r = point.norm();
    const double r = blowup_radius_inverse(rho, image_r);
    const double sigma = structure.conductivity_at(r / rho);
    if (sigma == 0.0) return std::nullopt;

    // DF at the preimage: radial stretch F'(r), tangential stretch F(r)/r
    double radial_stretch = 1.0;
    double tangential_stretch = 1.0;
    if (r < kSeam && r >= rho) {
        radial_stretch = 1.0 / (3.0 - 2.0 * rho);
        tangential_stretch = image_r / r;
    } else if (r < rho) {
        radial_stretch = 1.0 / rho;
        tangential_stretch = 1.0 / rho;
    }

    PushforwardTensor out;
    out.point = point;
    out.conductivity = sigma;
    out.radial_eigenvalue = sigma * radial_stretch / tangential_stretch;
    out.tangential_eigenvalue = sigma * tangential_stretch / radial_stretch;

    double ex = 1.0, ey = 0.0;
    if (image_r > 0.0) {
        ex = point.x / image_r;
        ey = point.y / image_r;
    }
    const double lr = out.radial_eigenvalue;
    const double lt = out.tangential_eigenvalue;
    out.a11 = lt + (lr - lt) * ex * ex;
    out.a12 = (lr - lt) * ex * ey + 0.0;  // no negative zero
    out.a22 = lt + (lr - lt) * ey * ey;
    return out;
}

}  // namespace gptcloak
