#pragma once

// Parametric synthetic flow used as the ground-truth oracle: a design-dependent
// mean film profile plus a few travelling-wave terms, each separable into a
// fixed spatial pattern and a cosine in time.

#include <vector>

#include <Eigen/Dense>

#include "kspod/design_kit.hpp"
#include "kspod/snapshot_store.hpp"

namespace kspod {

/// c + sum_k linear_k z_k + sum_k sine_k sin(pi z_k) over unit design coordinates z.
struct ScalarMap {
    double constant = 0.0;
    std::vector<double> linear;
    std::vector<double> sine;

    double operator()(const Eigen::VectorXd& z) const;
};

/// sin(axial_waves * pi * (x - x_origin) / x_length) * exp(-((r - radial_center) / radial_width)^2).
/// A zero wave count or width drops that factor (it becomes 1).
struct SpatialPattern {
    double axial_waves = 0.0;
    double x_origin = 0.0;
    double x_length = 1.0;
    double radial_center = 0.0;
    double radial_width = 0.0;

    double operator()(double x, double r) const;
};

struct WaveTerm {
    ScalarMap amplitude;
    ScalarMap frequency_hz;
    ScalarMap phase_rad;
    SpatialPattern pattern;
};

/// Wall-attached film: gas_value in the core, liquid_value against the wall at
/// wall_radius, joined by a tanh interface of the given width. Local thickness
/// h(x) = thickness(z) * (1 - taper(z) * (x - x_origin) / x_length).
struct FilmProfile {
    double gas_value = 0.0;
    double liquid_value = 0.0;
    double wall_radius = 1.0;
    double interface_width = 1.0;
    double x_origin = 0.0;
    double x_length = 1.0;
    ScalarMap thickness;
    ScalarMap taper;

    double operator()(double x, double r, const Eigen::VectorXd& z) const;
};

struct SynthRecipe {
    DesignRanges ranges;
    FilmProfile mean;
    std::vector<WaveTerm> waves;
};

/// Grid and sampling used by the desk-scale oracle: 50 axial x 50 radial
/// points over x in [0, 25] mm, r in [1.5, 4.5] mm; m instants at 10 kHz.
struct DeskSampling {
    int axial_points = 50;
    int radial_points = 50;
    double x_min = 0.0;
    double x_max = 25.0;
    double r_min = 1.5;
    double r_max = 4.5;
    int snapshots = 100;
    double dt = 1e-4;

    Eigen::MatrixXd grid() const;
    Eigen::VectorXd times() const;
};

/// Three wave terms near 0.4, 0.7 and 1.2 kHz whose amplitude ordering holds
/// over the whole design box, on the swirl-injector design ranges.
SynthRecipe desk_recipe();

/// field(j, q) = mean(u_j; design) + sum_p a_p g_p(u_j) cos(2 pi f_p t_q + psi_p).
/// Throws std::invalid_argument if any f_p is negative or reaches 1/(2 dt).
SnapshotSet synth_flowfield(const Eigen::VectorXd& design, const Eigen::MatrixXd& grid,
                            const Eigen::VectorXd& times, const SynthRecipe& recipe);

}  // namespace kspod
