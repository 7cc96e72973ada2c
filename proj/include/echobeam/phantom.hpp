#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "echobeam/common.hpp"

namespace echobeam {

struct Scatterer {
    double range = 0.0;         // m
    double angle = 0.0;         // rad
    double reflectivity = 0.0;
};

struct ScattererField {
    std::vector<Scatterer> scatterers;
    std::string label;
    std::uint64_t seed = 0;
};

struct DepthWindow {
    double r_min = 0.0;  // m
    double r_max = 0.0;  // m
};

/// Uniform speckle over the sector wedge. The scatterer count is Poisson
/// with mean density * wedge area; positions are area-uniform and
/// reflectivities i.i.d. normal with the given standard deviation.
ScattererField make_speckle_phantom(double density, DepthWindow window, double sector,
                                    std::uint64_t seed, double reflectivity_std = 1.0);

/// Removes all scatterers within `radius` of a polar center point.
void remove_circle(ScattererField& field, double center_range, double center_angle,
                   double radius);

struct PointTarget {
    double range = 0.0;
    double angle = 0.0;
};

/// Speckle field with an anechoic cyst carved out and bright point targets
/// added at 20x the speckle RMS reflectivity.
ScattererField make_cyst_phantom(double density, DepthWindow window, double sector,
                                 double cyst_range, double cyst_angle, double cyst_radius,
                                 const std::vector<PointTarget>& point_targets,
                                 std::uint64_t seed, double reflectivity_std = 1.0);

double wedge_area(DepthWindow window, double sector);

/// Cartesian distance between two polar points in the imaging plane.
double polar_distance(double r1, double a1, double r2, double a2);

}  // namespace echobeam
