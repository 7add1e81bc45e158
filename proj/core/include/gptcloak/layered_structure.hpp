#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace gptcloak {

/// Concentric-disk conductivity profile.
///
/// Interfaces sit at radii r_1 > r_2 > ... > r_{N+1} > 0. Region 0 is the
/// exterior r > r_1 with the background conductivity, region j (1 <= j <= N)
/// is the annulus r_{j+1} < r <= r_j, and region N+1 is the core r <= r_{N+1}.
/// Only the core may have zero conductivity (an insulated core).
class RadialLayeredStructure {
public:
    RadialLayeredStructure(std::vector<double> radii, std::vector<double> conductivities,
                           double background = 1.0);

    std::span<const double> radii() const noexcept { return radii_; }
    std::span<const double> conductivities() const noexcept { return conductivities_; }
    double background() const noexcept { return background_; }

    /// Number of interfaces, N+1.
    std::size_t interface_count() const noexcept { return radii_.size(); }
    /// Number of coating annuli, N.
    std::size_t coating_count() const noexcept { return radii_.size() - 1; }

    double outer_radius() const noexcept { return radii_.front(); }
    double core_radius() const noexcept { return radii_.back(); }
    double core_conductivity() const noexcept { return conductivities_.back(); }
    bool has_insulated_core() const noexcept { return conductivities_.back() == 0.0; }

    /// Conductivity of region j, with region 0 the background.
    double region_conductivity(std::size_t region) const;

    /// Radius r_j of interface j (1-based, j = 1..N+1).
    double interface_radius(std::size_t j) const;

    /// lambda_j = (sigma_j - sigma_{j-1}) / (sigma_j + sigma_{j-1}) for j = 1..N+1.
    double contrast(std::size_t j) const;

    /// Region containing radius r >= 0.
    std::size_t region_of(double r) const;

    double conductivity_at(double r) const { return region_conductivity(region_of(r)); }

    /// Copy with every radius multiplied by rho (the profile sigma(x / rho)).
    RadialLayeredStructure scaled(double rho) const;

    /// Copy with every conductivity, background included, multiplied by c.
    RadialLayeredStructure with_conductivity_scale(double c) const;

    friend bool operator==(const RadialLayeredStructure&, const RadialLayeredStructure&) = default;

private:
    std::vector<double> radii_;
    std::vector<double> conductivities_;
    double background_;
};

}  // namespace gptcloak
