#include "echobeam/phantom.hpp"

#include <cmath>

namespace echobeam {

double wedge_area(DepthWindow window, double sector) {
    return 0.5 * (window.r_max * window.r_max - window.r_min * window.r_min) * sector;
}

double polar_distance(double r1, double a1, double r2, double a2) {
    double x1 = r1 * std::sin(a1), z1 = r1 * std::cos(a1);
    double x2 = r2 * std::sin(a2), z2 = r2 * std::cos(a2);
    return std::hypot(x1 - x2, z1 - z2);
}

ScattererField make_speckle_phantom(double density, DepthWindow window, double sector,
                                    std::uint64_t seed, double reflectivity_std) {
    if (density <= 0.0) throw ConfigError("phantom: density must be positive");
    if (!(window.r_max > window.r_min) || window.r_min < 0.0)
        throw ConfigError("phantom: degenerate depth window");
    if (sector <= 0.0) throw ConfigError("phantom: sector must be positive");

    ScattererField field;
    field.label = "speckle";
    field.seed = seed;

    double mean_count = density * wedge_area(window, sector);
    Rng rng(seed);
    std::uint64_t count = rng.poisson(mean_count);
    field.scatterers.reserve(count);
    double rmin2 = window.r_min * window.r_min;
    double rmax2 = window.r_max * window.r_max;
    for (std::uint64_t s = 0; s < count; ++s) {
        Scatterer sc;
        // Area-uniform radial draw.
        sc.range = std::sqrt(rmin2 + rng.uniform() * (rmax2 - rmin2));
        sc.angle = rng.uniform(-0.5 * sector, 0.5 * sector);
        sc.reflectivity = reflectivity_std * rng.normal();
        field.scatterers.push_back(sc);
    }
    return field;
}

void remove_circle(ScattererField& field, double center_range, double center_angle,
                   double radius) {
    if (radius <= 0.0) return;
    std::vector<Scatterer> kept;
    kept.reserve(field.scatterers.size());
    for (const auto& sc : field.scatterers) {
        if (polar_distance(sc.range, sc.angle, center_range, center_angle) >= radius)
            kept.push_back(sc);
    }
    field.scatterers.swap(kept);
}

ScattererField make_cyst_phantom(double density, DepthWindow window, double sector,
                                 double cyst_range, double cyst_angle, double cyst_radius,
                                 const std::vector<PointTarget>& point_targets,
                                 std::uint64_t seed, double reflectivity_std) {
    if (cyst_radius < 0.0) throw ConfigError("phantom: cyst radius must be non-negative");
    if (cyst_range - cyst_radius < window.r_min || cyst_range + cyst_radius > window.r_max)
        throw ConfigError("phantom: cyst not fully inside the depth window");
    if (std::abs(cyst_angle) > 0.5 * sector)
        throw ConfigError("phantom: cyst center outside the sector");

    ScattererField field = make_speckle_phantom(density, window, sector, seed, reflectivity_std);
    field.label = "cyst";
    remove_circle(field, cyst_range, cyst_angle, cyst_radius);
    for (const auto& p : point_targets) {
        Scatterer sc;
        sc.range = p.range;
        sc.angle = p.angle;
        sc.reflectivity = 20.0 * reflectivity_std;
        field.scatterers.push_back(sc);
    }
    return field;
}

}  // namespace echobeam
