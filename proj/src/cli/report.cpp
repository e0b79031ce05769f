#include "kspod/cli/report.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "kspod/errors.hpp"
#include "kspod/metrics.hpp"

namespace kspod::cli {

namespace {

using nlohmann::json;

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json triple(double sim, double emu) {
    double eps = std::numeric_limits<double>::quiet_NaN();
    try {
        eps = relative_error(sim, emu);
    } catch (const UndefinedBaselineError&) {
    }
    return {{"sim", number(sim)}, {"emu", number(emu)}, {"eps", number(eps)}};
}

std::vector<double> as_vector(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

// Default pair: stations a quarter and three quarters of the way downstream.
std::pair<double, double> station_pair(const SnapshotSet& set, const RunConfig::Metrics& metrics) {
    if (metrics.station_pair) return *metrics.station_pair;
    const Eigen::VectorXd xs = station_positions(set.grid);
    const Eigen::Index n = xs.size();
    if (n < 2) throw std::invalid_argument("spreading angle needs at least two axial stations");
    const Eigen::Index a = std::max<Eigen::Index>(0, n / 4);
    const Eigen::Index b = std::max<Eigen::Index>(a + 1, (3 * n) / 4);
    return {xs[a], xs[std::min(b, n - 1)]};
}

}  // namespace

json case_report(const SnapshotSet& sim, const SnapshotSet& emu, const RunConfig::Metrics& metrics) {
    const AxialErrorProfile profile = axial_error_profile(sim, emu, metrics.threshold);
    const auto [x1, x2] = station_pair(sim, metrics);

    const Eigen::Index m = sim.field.cols();
    std::vector<double> sim_thick, emu_thick;
    double sim_angle = 0.0, emu_angle = 0.0;
    for (Eigen::Index q = 0; q < m; ++q) {
        const Eigen::VectorXd s = sim.field.col(q);
        const Eigen::VectorXd e = emu.field.col(q);
        const double thr = metrics.threshold ? *metrics.threshold : default_threshold(s);
        sim_thick.push_back(film_thickness_profile(sim.grid, s, thr).mean());
        emu_thick.push_back(film_thickness_profile(emu.grid, e, thr).mean());
        sim_angle += spreading_angle(sim.grid, s, thr, x1, x2);
        emu_angle += spreading_angle(emu.grid, e, thr, x1, x2);
    }
    double sim_mean = 0.0, emu_mean = 0.0;
    for (Eigen::Index q = 0; q < m; ++q) {
        sim_mean += sim_thick[static_cast<std::size_t>(q)];
        emu_mean += emu_thick[static_cast<std::size_t>(q)];
    }
    const double inv_m = 1.0 / static_cast<double>(m);

    // Both densities share the bandwidth and abscissae derived from the
    // simulated samples so the curves are directly comparable.
    const KernelDensity sim_kde(sim_thick, metrics.kde_bandwidth);
    const KernelDensity emu_kde(emu_thick, sim_kde.bandwidth());
    const auto [slo, shi] = sim_kde.support();
    const auto [elo, ehi] = emu_kde.support();
    const Eigen::VectorXd grid =
        Eigen::VectorXd::LinSpaced(metrics.kde_points, std::min(slo, elo), std::max(shi, ehi));

    json axial = json::array();
    for (Eigen::Index k = 0; k < profile.x.size(); ++k) {
        axial.push_back({{"x", profile.x[k]},
                         {"sim", profile.sim_thickness[k]},
                         {"emu", profile.emu_thickness[k]},
                         {"eps", number(profile.eps[k])}});
    }
    std::vector<double> design = as_vector(sim.design);
    return {
        {"case_id", sim.case_id},
        {"design", design},
        {"spreading_angle", triple(sim_angle * inv_m, emu_angle * inv_m)},
        {"station_pair", {x1, x2}},
        {"thickness", triple(sim_mean * inv_m, emu_mean * inv_m)},
        {"axial_profile", axial},
        {"excluded_stations", profile.excluded_x},
        {"eps_mean", number(profile.mean_eps)},
        {"field_rel_l2", relative_l2_error(sim.field, emu.field)},
        {"kde",
         {{"bandwidth", sim_kde.bandwidth()},
          {"grid", as_vector(grid)},
          {"sim_density", as_vector(sim_kde.evaluate(grid))},
          {"emu_density", as_vector(emu_kde.evaluate(grid))}}},
    };
}

json assemble_report(json cases) {
    std::size_t finite = 0, within = 0, field_within = 0;
    for (const json& c : cases) {
        if (c.at("eps_mean").is_number()) {
            ++finite;
            if (c.at("eps_mean").get<double>() < 5.0) ++within;
        }
        if (c.at("field_rel_l2").get<double>() <= 0.05) ++field_within;
    }
    json summary = {{"cases", cases.size()},
                    {"eps_mean_finite", finite},
                    {"eps_mean_below_5pct", within},
                    {"field_rel_l2_within_5pct", field_within}};
    return {{"cases", std::move(cases)}, {"summary", std::move(summary)}};
}

std::string report_text(const json& report) { return report.dump(2) + "\n"; }

}  // namespace kspod::cli
