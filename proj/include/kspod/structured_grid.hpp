#pragma once

#include <vector>

#include <Eigen/Dense>

namespace kspod {

/// Axial-station view of a J x 2 (x, r) point list. Points sharing a
/// bit-identical x form a station; each station lists its point indices by
/// ascending r. Every station must hold the same number of points.
class StructuredGrid {
public:
    struct Station {
        double x;
        std::vector<Eigen::Index> points;  // ascending r
    };

    /// Throws UnsupportedGridError when the points do not form such stations.
    explicit StructuredGrid(const Eigen::MatrixXd& grid);

    const std::vector<Station>& stations() const noexcept { return stations_; }
    std::size_t radial_points() const noexcept { return stations_.front().points.size(); }
    double r(Eigen::Index point) const { return grid_(point, 1); }

    /// Index of the station whose x equals `x` to 1e-9 relative, or -1.
    long find_station(double x) const;

private:
    Eigen::MatrixXd grid_;
    std::vector<Station> stations_;
};

/// Planar trapezoidal cell areas (dx * dr) for each grid point.
Eigen::VectorXd trapezoidal_weights(const Eigen::MatrixXd& grid);

}  // namespace kspod
