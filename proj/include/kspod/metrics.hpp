#pragma once

// Evaluation measures: percent error, Gaussian KDE, film thickness and
// spreading angle on a structured (x, r) grid, spectral peaks, and the axial
// thickness-error profile. Everything here is a pure function.

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "kspod/snapshot_store.hpp"

namespace kspod {

/// |sim - emu| / |sim| * 100. Throws UndefinedBaselineError for sim == 0.
double relative_error(double x_sim, double x_emu);

/// Silverman's rule 1.06 * sigma * n^(-1/5). A sample with zero spread falls
/// back to 1% of |mean| (1 when the mean is zero too).
double silverman_bandwidth(std::span<const double> samples);

class KernelDensity {
public:
    /// Throws std::invalid_argument for an empty sample or h <= 0.
    explicit KernelDensity(std::span<const double> samples, std::optional<double> bandwidth = std::nullopt);

    double bandwidth() const noexcept { return h_; }
    std::size_t samples() const noexcept { return samples_.size(); }
    double operator()(double x) const;

    /// [min - 6h, max + 6h].
    std::pair<double, double> support() const;
    /// `points` equally spaced abscissae spanning support().
    Eigen::VectorXd grid(std::size_t points) const;
    Eigen::VectorXd evaluate(const Eigen::VectorXd& xs) const;

private:
    std::vector<double> samples_;  // sorted, so evaluation ignores input order
    double h_;
};

/// Midpoint of the snapshot's min and max.
double default_threshold(const Eigen::VectorXd& snapshot);

/// Per axial station (ascending x): radial extent r_wall - r_first of the run
/// of points >= threshold that ends at the outermost point, 0 if that point is
/// below threshold. Throws UnsupportedGridError on unstructured grids.
Eigen::VectorXd film_thickness_profile(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot,
                                       double threshold);

/// Axial positions of the stations, ascending.
Eigen::VectorXd station_positions(const Eigen::MatrixXd& grid);

/// Mid-radius of the outermost run >= threshold at the station at x; throws
/// NoFilmError if the station holds no such point.
double film_mid_radius(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot, double threshold, double x);

/// Angle in degrees of the film mid-surface between stations x1 < x2.
double spreading_angle(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot, double threshold, double x1,
                       double x2);

/// Frequency of the largest non-DC DFT bin (k = 1..m/2, lowest k on ties),
/// or nothing when every such bin is below 1e-12 * (|DC| + 1).
std::optional<double> dominant_frequency(std::span<const double> series, double dt);
/// Same, with dt taken from sample times; throws std::invalid_argument when
/// they are not uniform to 1e-9 relative.
std::optional<double> dominant_frequency(std::span<const double> series, const Eigen::VectorXd& times);

struct AxialErrorProfile {
    Eigen::VectorXd x;
    Eigen::VectorXd sim_thickness;  // time-averaged
    Eigen::VectorXd emu_thickness;
    Eigen::VectorXd eps;            // percent; NaN where sim thickness is 0
    std::vector<double> excluded_x; // stations left out of the mean
    double mean_eps = 0.0;          // NaN if every station was excluded
};

/// Without a threshold, each snapshot uses default_threshold of the simulated
/// snapshot, for both fields. Throws GridMismatchError unless grids and times
/// agree.
AxialErrorProfile axial_error_profile(const SnapshotSet& sim, const SnapshotSet& emu,
                                      std::optional<double> threshold = std::nullopt);

/// Station-averaged film thickness for each snapshot.
std::vector<double> thickness_series(const SnapshotSet& set, std::optional<double> threshold = std::nullopt);
/// Spreading angle for each snapshot.
std::vector<double> angle_series(const SnapshotSet& set, double x1, double x2,
                                 std::optional<double> threshold = std::nullopt);

/// Mean over snapshots of ||sim_q - emu_q|| / ||sim_q|| (a fraction, not percent).
double relative_l2_error(const Eigen::MatrixXd& sim, const Eigen::MatrixXd& emu);

}  // namespace kspod
