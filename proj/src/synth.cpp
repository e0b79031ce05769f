#include "kspod/synth.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace kspod {

double ScalarMap::operator()(const Eigen::VectorXd& z) const {
    double v = constant;
    for (std::size_t k = 0; k < linear.size() && k < static_cast<std::size_t>(z.size()); ++k) {
        v += linear[k] * z[static_cast<Eigen::Index>(k)];
    }
    for (std::size_t k = 0; k < sine.size() && k < static_cast<std::size_t>(z.size()); ++k) {
        v += sine[k] * std::sin(std::numbers::pi * z[static_cast<Eigen::Index>(k)]);
    }
    return v;
}

double SpatialPattern::operator()(double x, double r) const {
    double g = 1.0;
    if (axial_waves != 0.0) g *= std::sin(axial_waves * std::numbers::pi * (x - x_origin) / x_length);
    if (radial_width != 0.0) {
        const double s = (r - radial_center) / radial_width;
        g *= std::exp(-s * s);
    }
    return g;
}

double FilmProfile::operator()(double x, double r, const Eigen::VectorXd& z) const {
    const double h = thickness(z) * (1.0 - taper(z) * (x - x_origin) / x_length);
    const double s = (r - (wall_radius - h)) / interface_width;
    return gas_value + (liquid_value - gas_value) * 0.5 * (1.0 + std::tanh(s));
}

Eigen::MatrixXd DeskSampling::grid() const {
    return make_structured_grid(axial_points, radial_points, x_min, x_max, r_min, r_max);
}

Eigen::VectorXd DeskSampling::times() const { return uniform_times(snapshots, dt); }

SynthRecipe desk_recipe() {
    // Coordinate order follows swirl_injector_ranges(): theta, delta, dL.
    SynthRecipe recipe;
    recipe.ranges = swirl_injector_ranges();

    FilmProfile& film = recipe.mean;
    film.gas_value = 120.0;
    film.liquid_value = 1120.0;
    film.wall_radius = 4.5;
    film.interface_width = 0.25;
    film.x_origin = 0.0;
    film.x_length = 25.0;
    film.thickness = {0.95, {-0.25, 0.45, 0.0}, {0.0, 0.0, 0.05}};
    film.taper = {0.30, {0.15, 0.0, 0.0}, {}};

    WaveTerm w1;
    w1.amplitude = {150.0, {0.0, 45.0, 0.0}, {15.0, 0.0, 0.0}};
    w1.frequency_hz = {400.0, {20.0, -10.0, 0.0}, {}};
    w1.phase_rad = {0.0, {0.6, 0.0, 0.4}, {}};
    w1.pattern = {1.0, 0.0, 25.0, 3.7, 0.6};

    WaveTerm w2;
    w2.amplitude = {80.0, {16.0, 0.0, 0.0}, {}};
    w2.frequency_hz = {700.0, {0.0, 0.0, 15.0}, {}};
    w2.phase_rad = {1.0, {0.0, 0.5, 0.0}, {}};
    w2.pattern = {2.0, 0.0, 25.0, 3.7, 0.6};

    WaveTerm w3;
    w3.amplitude = {40.0, {0.0, 0.0, 8.0}, {}};
    w3.frequency_hz = {1200.0, {-20.0, 0.0, 0.0}, {}};
    w3.phase_rad = {2.0, {0.3, 0.0, 0.0}, {}};
    w3.pattern = {3.0, 0.0, 25.0, 3.3, 0.8};

    recipe.waves = {w1, w2, w3};
    return recipe;
}

SnapshotSet synth_flowfield(const Eigen::VectorXd& design, const Eigen::MatrixXd& grid,
                            const Eigen::VectorXd& times, const SynthRecipe& recipe) {
    if (grid.cols() != 2 || grid.rows() < 1) throw std::invalid_argument("grid must be J x 2 with J >= 1");
    if (times.size() < 1) throw std::invalid_argument("need at least one time instant");
    const Eigen::VectorXd z = recipe.ranges.dims() == 0 ? design : recipe.ranges.to_unit(design);

    const Eigen::Index J = grid.rows();
    const Eigen::Index m = times.size();
    const std::size_t P = recipe.waves.size();

    std::vector<double> amp(P), freq(P), phase(P);
    for (std::size_t p = 0; p < P; ++p) {
        amp[p] = recipe.waves[p].amplitude(z);
        freq[p] = recipe.waves[p].frequency_hz(z);
        phase[p] = recipe.waves[p].phase_rad(z);
        if (freq[p] < 0.0) throw std::invalid_argument("wave frequency must be nonnegative");
        if (m >= 2) {
            const double nyquist = 0.5 / (times[1] - times[0]);
            if (freq[p] >= nyquist) {
                throw std::invalid_argument("wave " + std::to_string(p + 1) + " frequency " +
                                            std::to_string(freq[p]) + " Hz violates the sampling bound " +
                                            std::to_string(nyquist) + " Hz");
            }
        }
    }

    SnapshotSet s;
    s.case_id = "synth";
    s.design = design;
    s.grid = grid;
    s.times = times;
    s.field.resize(J, m);
    s.variable = {"density", "kg/m^3"};

    Eigen::VectorXd mean(J);
    Eigen::MatrixXd patterns(J, static_cast<Eigen::Index>(P));
    for (Eigen::Index j = 0; j < J; ++j) {
        mean[j] = recipe.mean(grid(j, 0), grid(j, 1), z);
        for (std::size_t p = 0; p < P; ++p) {
            patterns(j, static_cast<Eigen::Index>(p)) = recipe.waves[p].pattern(grid(j, 0), grid(j, 1));
        }
    }
    for (Eigen::Index q = 0; q < m; ++q) {
        Eigen::VectorXd temporal(static_cast<Eigen::Index>(P));
        for (std::size_t p = 0; p < P; ++p) {
            temporal[static_cast<Eigen::Index>(p)] =
                amp[p] * std::cos(2.0 * std::numbers::pi * freq[p] * times[q] + phase[p]);
        }
        s.field.col(q) = mean + patterns * temporal;
    }
    return s;
}

}  // namespace kspod
