#include "kspod/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

#include "kspod/errors.hpp"
#include "kspod/structured_grid.hpp"

namespace kspod {

double relative_error(double x_sim, double x_emu) {
    if (x_sim == 0.0) throw UndefinedBaselineError("relative_error: simulated value is zero");
    return std::abs(x_sim - x_emu) / std::abs(x_sim) * 100.0;
}

double silverman_bandwidth(std::span<const double> samples) {
    if (samples.empty()) throw std::invalid_argument("silverman_bandwidth: empty sample");
    const double n = static_cast<double>(samples.size());
    double mean = 0.0;
    for (double s : samples) mean += s;
    mean /= n;
    double var = 0.0;
    for (double s : samples) var += (s - mean) * (s - mean);
    const double sigma = samples.size() > 1 ? std::sqrt(var / (n - 1.0)) : 0.0;
    if (sigma > 0.0) return 1.06 * sigma * std::pow(n, -0.2);
    return mean != 0.0 ? 0.01 * std::abs(mean) : 1.0;
}

KernelDensity::KernelDensity(std::span<const double> samples, std::optional<double> bandwidth)
    : samples_(samples.begin(), samples.end()) {
    if (samples_.empty()) throw std::invalid_argument("kde: empty sample");
    for (double s : samples_) {
        if (!std::isfinite(s)) throw std::invalid_argument("kde: non-finite sample");
    }
    std::sort(samples_.begin(), samples_.end());
    h_ = bandwidth ? *bandwidth : silverman_bandwidth(samples_);
    if (!(h_ > 0.0) || !std::isfinite(h_)) throw std::invalid_argument("kde: bandwidth must be positive");
}

double KernelDensity::operator()(double x) const {
    const double norm = 1.0 / (static_cast<double>(samples_.size()) * h_ * std::sqrt(2.0 * std::numbers::pi));
    double sum = 0.0;
    for (double s : samples_) {
        const double u = (x - s) / h_;
        sum += std::exp(-0.5 * u * u);
    }
    return norm * sum;
}

std::pair<double, double> KernelDensity::support() const {
    return {samples_.front() - 6.0 * h_, samples_.back() + 6.0 * h_};
}

Eigen::VectorXd KernelDensity::grid(std::size_t points) const {
    if (points < 2) throw std::invalid_argument("kde grid: need at least 2 points");
    const auto [lo, hi] = support();
    return Eigen::VectorXd::LinSpaced(static_cast<Eigen::Index>(points), lo, hi);
}

Eigen::VectorXd KernelDensity::evaluate(const Eigen::VectorXd& xs) const {
    Eigen::VectorXd out(xs.size());
    for (Eigen::Index i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
    return out;
}

double default_threshold(const Eigen::VectorXd& snapshot) {
    if (snapshot.size() == 0) throw std::invalid_argument("default_threshold: empty snapshot");
    return 0.5 * (snapshot.minCoeff() + snapshot.maxCoeff());
}

namespace {

void check_snapshot(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot, double threshold) {
    if (grid.cols() != 2 || grid.rows() != snapshot.size()) {
        throw std::invalid_argument("snapshot length does not match the grid");
    }
    if (!std::isfinite(threshold)) throw std::invalid_argument("threshold must be finite");
}

double wall_run_thickness(const StructuredGrid& sg, const StructuredGrid::Station& st,
                          const Eigen::VectorXd& snapshot, double threshold) {
    const auto& pts = st.points;
    std::size_t first = pts.size();
    while (first > 0 && snapshot[pts[first - 1]] >= threshold) --first;
    if (first == pts.size()) return 0.0;
    return sg.r(pts.back()) - sg.r(pts[first]);
}

}  // namespace

Eigen::VectorXd film_thickness_profile(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot,
                                       double threshold) {
    check_snapshot(grid, snapshot, threshold);
    const StructuredGrid sg(grid);
    Eigen::VectorXd out(static_cast<Eigen::Index>(sg.stations().size()));
    for (std::size_t s = 0; s < sg.stations().size(); ++s) {
        out[static_cast<Eigen::Index>(s)] = wall_run_thickness(sg, sg.stations()[s], snapshot, threshold);
    }
    return out;
}

Eigen::VectorXd station_positions(const Eigen::MatrixXd& grid) {
    const StructuredGrid sg(grid);
    Eigen::VectorXd out(static_cast<Eigen::Index>(sg.stations().size()));
    for (std::size_t s = 0; s < sg.stations().size(); ++s) out[static_cast<Eigen::Index>(s)] = sg.stations()[s].x;
    return out;
}

namespace {

double mid_radius(const StructuredGrid& sg, const Eigen::VectorXd& snapshot, double threshold, double x) {
    const long s = sg.find_station(x);
    if (s < 0) throw std::invalid_argument("no axial station at x = " + std::to_string(x));
    const auto& pts = sg.stations()[static_cast<std::size_t>(s)].points;
    std::size_t hi = pts.size();
    while (hi > 0 && snapshot[pts[hi - 1]] < threshold) --hi;
    if (hi == 0) throw NoFilmError("no film at station x = " + std::to_string(x));
    std::size_t lo = hi - 1;
    while (lo > 0 && snapshot[pts[lo - 1]] >= threshold) --lo;
    return 0.5 * (sg.r(pts[lo]) + sg.r(pts[hi - 1]));
}

}  // namespace

double film_mid_radius(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot, double threshold, double x) {
    check_snapshot(grid, snapshot, threshold);
    return mid_radius(StructuredGrid(grid), snapshot, threshold, x);
}

double spreading_angle(const Eigen::MatrixXd& grid, const Eigen::VectorXd& snapshot, double threshold, double x1,
                       double x2) {
    if (!(x2 > x1)) throw std::invalid_argument("spreading_angle: need x2 > x1");
    check_snapshot(grid, snapshot, threshold);
    const StructuredGrid sg(grid);
    const double r1 = mid_radius(sg, snapshot, threshold, x1);
    const double r2 = mid_radius(sg, snapshot, threshold, x2);
    return std::atan2(r2 - r1, x2 - x1) * 180.0 / std::numbers::pi;
}

std::optional<double> dominant_frequency(std::span<const double> series, double dt) {
    const std::size_t m = series.size();
    if (m < 4) throw std::invalid_argument("dominant_frequency: need at least 4 samples");
    if (!(dt > 0.0) || !std::isfinite(dt)) throw std::invalid_argument("dominant_frequency: dt must be positive");
    double dc = 0.0;
    for (double v : series) dc += v;
    // Twiddles indexed by (k q mod m) keep the phase exact for large k q.
    std::vector<double> c(m), s(m);
    for (std::size_t j = 0; j < m; ++j) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(j) / static_cast<double>(m);
        c[j] = std::cos(a);
        s[j] = std::sin(a);
    }
    double best = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 1; k <= m / 2; ++k) {
        double re = 0.0, im = 0.0;
        for (std::size_t q = 0; q < m; ++q) {
            const std::size_t j = (k * q) % m;
            re += series[q] * c[j];
            im -= series[q] * s[j];
        }
        const double mag = std::hypot(re, im);
        if (mag > best) {
            best = mag;
            best_k = k;
        }
    }
    if (best < 1e-12 * (std::abs(dc) + 1.0)) return std::nullopt;
    return static_cast<double>(best_k) / (static_cast<double>(m) * dt);
}

std::optional<double> dominant_frequency(std::span<const double> series, const Eigen::VectorXd& times) {
    if (static_cast<std::size_t>(times.size()) != series.size() || times.size() < 2) {
        throw std::invalid_argument("dominant_frequency: times and series lengths differ");
    }
    const double dt = (times[times.size() - 1] - times[0]) / static_cast<double>(times.size() - 1);
    for (Eigen::Index q = 1; q < times.size(); ++q) {
        if (std::abs((times[q] - times[q - 1]) - dt) > 1e-9 * std::abs(dt)) {
            throw std::invalid_argument("dominant_frequency: non-uniform sampling");
        }
    }
    return dominant_frequency(series, dt);
}

AxialErrorProfile axial_error_profile(const SnapshotSet& sim, const SnapshotSet& emu, std::optional<double> threshold) {
    if (!same_grid(sim, emu) || !same_times(sim, emu)) {
        throw GridMismatchError("axial_error_profile: grids or time vectors differ");
    }
    const StructuredGrid sg(sim.grid);
    const std::size_t ns = sg.stations().size();
    AxialErrorProfile out;
    out.x.resize(static_cast<Eigen::Index>(ns));
    out.sim_thickness = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns));
    out.emu_thickness = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ns));
    const Eigen::Index m = sim.field.cols();
    for (Eigen::Index q = 0; q < m; ++q) {
        const Eigen::VectorXd s = sim.field.col(q);
        const Eigen::VectorXd e = emu.field.col(q);
        const double thr = threshold ? *threshold : default_threshold(s);
        if (!std::isfinite(thr)) throw std::invalid_argument("threshold must be finite");
        for (std::size_t k = 0; k < ns; ++k) {
            out.sim_thickness[static_cast<Eigen::Index>(k)] += wall_run_thickness(sg, sg.stations()[k], s, thr);
            out.emu_thickness[static_cast<Eigen::Index>(k)] += wall_run_thickness(sg, sg.stations()[k], e, thr);
        }
    }
    out.sim_thickness /= static_cast<double>(m);
    out.emu_thickness /= static_cast<double>(m);
    out.eps.resize(static_cast<Eigen::Index>(ns));
    double sum = 0.0;
    std::size_t used = 0;
    for (std::size_t k = 0; k < ns; ++k) {
        const auto i = static_cast<Eigen::Index>(k);
        out.x[i] = sg.stations()[k].x;
        if (out.sim_thickness[i] == 0.0) {
            out.eps[i] = std::numeric_limits<double>::quiet_NaN();
            out.excluded_x.push_back(out.x[i]);
            continue;
        }
        out.eps[i] = relative_error(out.sim_thickness[i], out.emu_thickness[i]);
        sum += out.eps[i];
        ++used;
    }
    out.mean_eps = used > 0 ? sum / static_cast<double>(used) : std::numeric_limits<double>::quiet_NaN();
    return out;
}

std::vector<double> thickness_series(const SnapshotSet& set, std::optional<double> threshold) {
    std::vector<double> out;
    for (Eigen::Index q = 0; q < set.field.cols(); ++q) {
        const Eigen::VectorXd s = set.field.col(q);
        out.push_back(film_thickness_profile(set.grid, s, threshold ? *threshold : default_threshold(s)).mean());
    }
    return out;
}

std::vector<double> angle_series(const SnapshotSet& set, double x1, double x2, std::optional<double> threshold) {
    std::vector<double> out;
    for (Eigen::Index q = 0; q < set.field.cols(); ++q) {
        const Eigen::VectorXd s = set.field.col(q);
        out.push_back(spreading_angle(set.grid, s, threshold ? *threshold : default_threshold(s), x1, x2));
    }
    return out;
}

double relative_l2_error(const Eigen::MatrixXd& sim, const Eigen::MatrixXd& emu) {
    if (sim.rows() != emu.rows() || sim.cols() != emu.cols() || sim.cols() == 0) {
        throw std::invalid_argument("relative_l2_error: shape mismatch");
    }
    double sum = 0.0;
    for (Eigen::Index q = 0; q < sim.cols(); ++q) {
        const double denom = sim.col(q).norm();
        if (denom == 0.0) throw UndefinedBaselineError("relative_l2_error: zero simulated snapshot");
        sum += (sim.col(q) - emu.col(q)).norm() / denom;
    }
    return sum / static_cast<double>(sim.cols());
}

}  // namespace kspod
