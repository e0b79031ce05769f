#include "kspod/structured_grid.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "kspod/errors.hpp"

namespace kspod {
namespace {

// Half-interval widths of a sorted coordinate list; a lone point gets 1.
std::vector<double> trapezoid_widths(const std::vector<double>& c) {
    const std::size_t n = c.size();
    std::vector<double> w(n, 1.0);
    if (n < 2) return w;
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? c[0] : 0.5 * (c[i - 1] + c[i]);
        const double hi = i + 1 == n ? c[n - 1] : 0.5 * (c[i] + c[i + 1]);
        w[i] = hi - lo;
    }
    return w;
}

}  // namespace

StructuredGrid::StructuredGrid(const Eigen::MatrixXd& grid) : grid_(grid) {
    if (grid.cols() != 2 || grid.rows() < 1) throw UnsupportedGridError("grid must be a nonempty J x 2 point list");
    std::map<double, std::vector<Eigen::Index>> by_x;
    for (Eigen::Index j = 0; j < grid.rows(); ++j) by_x[grid(j, 0)].push_back(j);

    const std::size_t per_station = by_x.begin()->second.size();
    for (auto& [x, pts] : by_x) {
        if (pts.size() != per_station) {
            throw UnsupportedGridError("grid is not structured: stations hold different point counts");
        }
        std::sort(pts.begin(), pts.end(), [&](Eigen::Index a, Eigen::Index b) { return grid(a, 1) < grid(b, 1); });
        for (std::size_t i = 1; i < pts.size(); ++i) {
            if (!(grid(pts[i], 1) > grid(pts[i - 1], 1))) {
                throw UnsupportedGridError("grid is not structured: repeated radial coordinate within a station");
            }
        }
        stations_.push_back({x, pts});
    }
}

long StructuredGrid::find_station(double x) const {
    for (std::size_t i = 0; i < stations_.size(); ++i) {
        if (std::abs(stations_[i].x - x) <= 1e-9 * std::max(1.0, std::abs(x))) return static_cast<long>(i);
    }
    return -1;
}

Eigen::VectorXd trapezoidal_weights(const Eigen::MatrixXd& grid) {
    const StructuredGrid sg(grid);
    std::vector<double> xs;
    for (const auto& st : sg.stations()) xs.push_back(st.x);
    const auto wx = trapezoid_widths(xs);

    Eigen::VectorXd w(grid.rows());
    for (std::size_t i = 0; i < sg.stations().size(); ++i) {
        const auto& st = sg.stations()[i];
        std::vector<double> rs;
        for (auto p : st.points) rs.push_back(grid(p, 1));
        const auto wr = trapezoid_widths(rs);
        for (std::size_t j = 0; j < st.points.size(); ++j) w[st.points[j]] = wx[i] * wr[j];
    }
    return w;
}

}  // namespace kspod
