#include "gptcloak/layered_structure.hpp"

#include <cmath>
#include <string>

#include "gptcloak/errors.hpp"

namespace gptcloak {

RadialLayeredStructure::RadialLayeredStructure(std::vector<double> radii,
                                               std::vector<double> conductivities,
                                               double background)
    : radii_(std::move(radii)), conductivities_(std::move(conductivities)), background_(background) {
    if (radii_.empty()) throw InvalidStructureError("structure needs at least one interface");
    if (radii_.size() != conductivities_.size()) {
        throw InvalidStructureError("radii and conductivities differ in length (" +
                                    std::to_string(radii_.size()) + " vs " +
                                    std::to_string(conductivities_.size()) + ")");
    }
    if (!(std::isfinite(background_) && background_ > 0.0)) {
        throw InvalidStructureError("background conductivity must be positive");
    }
    for (std::size_t i = 0; i < radii_.size(); ++i) {
        if (!(std::isfinite(radii_[i]) && radii_[i] > 0.0)) {
            throw InvalidStructureError("radius " + std::to_string(i + 1) + " must be positive");
        }
        if (i > 0 && !(radii_[i] < radii_[i - 1])) {
            throw InvalidStructureError("radii must be strictly decreasing");
        }
        const double s = conductivities_[i];
        const bool is_core = i + 1 == radii_.size();
        if (!std::isfinite(s) || s < 0.0 || (s == 0.0 && !is_core)) {
            throw InvalidStructureError("conductivity " + std::to_string(i + 1) +
                                        (is_core ? " must be non-negative" : " must be positive"));
        }
    }
}

double RadialLayeredStructure::region_conductivity(std::size_t region) const {
    if (region == 0) return background_;
    return conductivities_.at(region - 1);
}

double RadialLayeredStructure::interface_radius(std::size_t j) const {
    if (j == 0) throw DomainError("interface index is 1-based");
    return radii_.at(j - 1);
}

double RadialLayeredStructure::contrast(std::size_t j) const {
    const double inner = region_conductivity(j);
    const double outer = region_conductivity(j - 1);
    return (inner - outer) / (inner + outer);
}

std::size_t RadialLayeredStructure::region_of(double r) const {
    if (r < 0.0 || std::isnan(r)) throw DomainError("radius must be non-negative");
    if (r > radii_.front()) return 0;
    // first interface (from the outside) whose radius is below r
    std::size_t j = 1;
    while (j < radii_.size() && radii_[j] >= r) ++j;
    return j;
}

RadialLayeredStructure RadialLayeredStructure::scaled(double rho) const {
    if (!(rho > 0.0)) throw DomainError("scale factor must be positive");
    std::vector<double> r = radii_;
    for (double& x : r) x *= rho;
    return {std::move(r), conductivities_, background_};
}

RadialLayeredStructure RadialLayeredStructure::with_conductivity_scale(double c) const {
    if (!(c > 0.0)) throw DomainError("conductivity scale must be positive");
    std::vector<double> s = conductivities_;
    for (double& x : s) x *= c;
    return {radii_, std::move(s), background_ * c};
}

}  // namespace gptcloak
