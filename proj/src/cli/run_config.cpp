#include "kspod/cli/run_config.hpp"

#include <cmath>
#include <fstream>

namespace kspod::cli {

namespace {

using nlohmann::json;

template <class T>
void read_key(const json& obj, const char* section, const char* key, T& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw UsageError(std::string("config: ") + section + "." + key + " has the wrong type");
    }
}

template <class T>
void read_optional(const json& obj, const char* section, const char* key, std::optional<T>& out) {
    if (!obj.contains(key) || obj.at(key).is_null()) return;
    T value{};
    read_key(obj, section, key, value);
    out = value;
}

void read_path(const json& obj, const char* key, std::filesystem::path& out) {
    std::string s;
    read_key(obj, "paths", key, s);
    if (!s.empty()) out = s;
}

const json& section(const json& j, const char* name) {
    static const json empty = json::object();
    if (!j.contains(name)) return empty;
    if (!j.at(name).is_object()) throw UsageError(std::string("config: ") + name + " must be an object");
    return j.at(name);
}

void require(bool ok, const std::string& what) {
    if (!ok) throw UsageError("config: " + what);
}

}  // namespace

TrainOptions RunConfig::train_options() const {
    TrainOptions opt;
    opt.energy_threshold = pod.energy_threshold;
    opt.explicit_rank = pod.rank;
    opt.centering = pod.centering;
    opt.trapezoidal_weights = pod.trapezoidal_weights;
    opt.ranges = design.ranges;
    opt.coefficient_kriging.nugget = kriging.nugget;
    opt.coefficient_kriging.log_theta_min = kriging.log_theta_min;
    opt.coefficient_kriging.log_theta_max = kriging.log_theta_max;
    opt.coefficient_kriging.restarts = kriging.restarts;
    opt.coefficient_theta = kriging.coefficient_theta;
    opt.weight_kriging = opt.coefficient_kriging;
    opt.weight_kriging.isotropic = true;
    if (kriging.weight_theta_value) opt.weight_kriging.theta = std::vector<double>{*kriging.weight_theta_value};
    opt.weight_theta = kriging.weight_theta;
    return opt;
}

RunConfig config_from_json(const json& j) {
    if (!j.is_object()) throw UsageError("config: top level must be an object");
    RunConfig c;
    read_key(j, "config", "seed", c.seed);

    const json& paths = section(j, "paths");
    read_path(paths, "dataset_dir", c.paths.dataset_dir);
    read_path(paths, "heldout_dir", c.paths.heldout_dir);
    read_path(paths, "predictions_dir", c.paths.predictions_dir);
    read_path(paths, "design_csv", c.paths.design_csv);
    read_path(paths, "model", c.paths.model);
    read_path(paths, "report", c.paths.report);

    const json& design = section(j, "design");
    read_key(design, "design", "dims", c.design.dims);
    read_key(design, "design", "slices", c.design.slices);
    read_key(design, "design", "per_slice", c.design.per_slice);
    read_key(design, "design", "seed", c.seed);
    if (design.contains("ranges")) {
        const json& rs = design.at("ranges");
        require(rs.is_array(), "design.ranges must be an array");
        std::vector<Range> ranges;
        for (const json& r : rs) {
            Range range{};
            require(r.is_object() && r.contains("lower") && r.contains("upper"),
                    "design.ranges entries need lower and upper");
            read_key(r, "design.ranges", "lower", range.lower);
            read_key(r, "design.ranges", "upper", range.upper);
            read_key(r, "design.ranges", "name", range.name);
            read_key(r, "design.ranges", "unit", range.unit);
            ranges.push_back(range);
        }
        try {
            c.design.ranges = DesignRanges(std::move(ranges));
        } catch (const std::invalid_argument& e) {
            throw UsageError(std::string("config: design.ranges: ") + e.what());
        }
    }

    const json& sampling = section(j, "sampling");
    read_key(sampling, "sampling", "axial_points", c.sampling.axial_points);
    read_key(sampling, "sampling", "radial_points", c.sampling.radial_points);
    read_key(sampling, "sampling", "x_min", c.sampling.x_min);
    read_key(sampling, "sampling", "x_max", c.sampling.x_max);
    read_key(sampling, "sampling", "r_min", c.sampling.r_min);
    read_key(sampling, "sampling", "r_max", c.sampling.r_max);
    read_key(sampling, "sampling", "snapshots", c.sampling.snapshots);
    read_key(sampling, "sampling", "dt", c.sampling.dt);

    const json& pod = section(j, "pod");
    read_key(pod, "pod", "centering", c.pod.centering);
    read_key(pod, "pod", "energy_threshold", c.pod.energy_threshold);
    read_optional(pod, "pod", "rank", c.pod.rank);
    read_key(pod, "pod", "trapezoidal_weights", c.pod.trapezoidal_weights);

    const json& kriging = section(j, "kriging");
    read_key(kriging, "kriging", "nugget", c.kriging.nugget);
    read_key(kriging, "kriging", "log_theta_min", c.kriging.log_theta_min);
    read_key(kriging, "kriging", "log_theta_max", c.kriging.log_theta_max);
    read_key(kriging, "kriging", "restarts", c.kriging.restarts);
    std::string mode;
    read_key(kriging, "kriging", "coefficient_theta", mode);
    if (mode == "per_fit") {
        c.kriging.coefficient_theta = CoefficientTheta::PerFit;
    } else if (mode == "shared_per_mode") {
        c.kriging.coefficient_theta = CoefficientTheta::SharedPerMode;
    } else {
        require(mode.empty(), "kriging.coefficient_theta must be per_fit or shared_per_mode");
    }
    mode.clear();
    read_key(kriging, "kriging", "weight_theta_objective", mode);
    if (mode == "blended_fields") {
        c.kriging.weight_theta = WeightTheta::BlendedFields;
    } else if (mode == "indicators") {
        c.kriging.weight_theta = WeightTheta::Indicators;
    } else {
        require(mode.empty(), "kriging.weight_theta_objective must be blended_fields or indicators");
    }
    read_optional(kriging, "kriging", "weight_theta", c.kriging.weight_theta_value);

    const json& predict = section(j, "predict");
    read_key(predict, "predict", "design", c.predict.design);
    read_key(predict, "predict", "time_indices", c.predict.time_indices);

    const json& metrics = section(j, "metrics");
    read_optional(metrics, "metrics", "threshold", c.metrics.threshold);
    std::optional<std::vector<double>> pair;
    read_optional(metrics, "metrics", "station_pair", pair);
    if (pair) {
        require(pair->size() == 2, "metrics.station_pair needs two axial positions");
        c.metrics.station_pair = std::make_pair((*pair)[0], (*pair)[1]);
    }
    read_optional(metrics, "metrics", "kde_bandwidth", c.metrics.kde_bandwidth);
    read_key(metrics, "metrics", "kde_points", c.metrics.kde_points);

    const json& holdout = section(j, "holdout");
    read_key(holdout, "holdout", "count", c.holdout.count);
    read_key(holdout, "holdout", "margin", c.holdout.margin);

    validate(c);
    return c;
}

RunConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("config not found: " + path.string());
    json j;
    try {
        j = json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config " + path.string() + " is not valid JSON: " + e.what());
    }
    return config_from_json(j);
}

json config_to_json(const RunConfig& c) {
    json ranges = json::array();
    for (const auto& r : c.design.ranges.ranges()) {
        ranges.push_back({{"name", r.name}, {"unit", r.unit}, {"lower", r.lower}, {"upper", r.upper}});
    }
    json j = {
        {"seed", c.seed},
        {"paths",
         {{"dataset_dir", c.paths.dataset_dir.string()},
          {"heldout_dir", c.paths.heldout_dir.string()},
          {"predictions_dir", c.paths.predictions_dir.string()},
          {"design_csv", c.paths.design_csv.string()},
          {"model", c.paths.model.string()},
          {"report", c.paths.report.string()}}},
        {"design",
         {{"dims", c.design.dims}, {"slices", c.design.slices}, {"per_slice", c.design.per_slice}, {"ranges", ranges}}},
        {"sampling",
         {{"axial_points", c.sampling.axial_points},
          {"radial_points", c.sampling.radial_points},
          {"x_min", c.sampling.x_min},
          {"x_max", c.sampling.x_max},
          {"r_min", c.sampling.r_min},
          {"r_max", c.sampling.r_max},
          {"snapshots", c.sampling.snapshots},
          {"dt", c.sampling.dt}}},
        {"pod",
         {{"centering", c.pod.centering},
          {"energy_threshold", c.pod.energy_threshold},
          {"rank", c.pod.rank ? json(*c.pod.rank) : json(nullptr)},
          {"trapezoidal_weights", c.pod.trapezoidal_weights}}},
        {"kriging",
         {{"nugget", c.kriging.nugget},
          {"log_theta_min", c.kriging.log_theta_min},
          {"log_theta_max", c.kriging.log_theta_max},
          {"restarts", c.kriging.restarts},
          {"coefficient_theta",
           c.kriging.coefficient_theta == CoefficientTheta::PerFit ? "per_fit" : "shared_per_mode"},
          {"weight_theta_objective",
           c.kriging.weight_theta == WeightTheta::BlendedFields ? "blended_fields" : "indicators"},
          {"weight_theta", c.kriging.weight_theta_value ? json(*c.kriging.weight_theta_value) : json(nullptr)}}},
        {"predict", {{"design", c.predict.design}, {"time_indices", c.predict.time_indices}}},
        {"metrics",
         {{"threshold", c.metrics.threshold ? json(*c.metrics.threshold) : json(nullptr)},
          {"station_pair", c.metrics.station_pair
                               ? json::array({c.metrics.station_pair->first, c.metrics.station_pair->second})
                               : json(nullptr)},
          {"kde_bandwidth", c.metrics.kde_bandwidth ? json(*c.metrics.kde_bandwidth) : json(nullptr)},
          {"kde_points", c.metrics.kde_points}}},
        {"holdout", {{"count", c.holdout.count}, {"margin", c.holdout.margin}}},
    };
    return j;
}

void validate(const RunConfig& c) {
    require(c.design.dims > 0, "design.dims must be positive");
    require(c.design.slices > 0 && c.design.per_slice > 0, "design.slices and design.per_slice must be positive");
    require(c.design.ranges.dims() == static_cast<std::size_t>(c.design.dims),
            "design.ranges must have one entry per design dimension");
    require(c.sampling.axial_points >= 2 && c.sampling.radial_points >= 2, "sampling needs at least 2x2 points");
    require(c.sampling.x_max > c.sampling.x_min && c.sampling.r_max > c.sampling.r_min,
            "sampling bounds must be increasing");
    require(c.sampling.snapshots >= 4, "sampling.snapshots must be at least 4");
    require(c.sampling.dt > 0.0 && std::isfinite(c.sampling.dt), "sampling.dt must be positive");
    require(c.pod.energy_threshold > 0.0 && c.pod.energy_threshold <= 1.0, "pod.energy_threshold must lie in (0, 1]");
    require(!c.pod.rank || *c.pod.rank > 0, "pod.rank must be positive");
    require(c.kriging.nugget >= 0.0 && std::isfinite(c.kriging.nugget), "kriging.nugget must be nonnegative");
    require(c.kriging.log_theta_min < c.kriging.log_theta_max, "kriging log-theta bounds must be increasing");
    require(c.kriging.restarts > 0, "kriging.restarts must be positive");
    require(!c.kriging.weight_theta_value || *c.kriging.weight_theta_value > 0.0, "kriging.weight_theta must be positive");
    require(c.predict.design.empty() || c.predict.design.size() == static_cast<std::size_t>(c.design.dims),
            "predict.design must have one value per design dimension");
    require(!c.metrics.station_pair || c.metrics.station_pair->second > c.metrics.station_pair->first,
            "metrics.station_pair must be increasing");
    require(!c.metrics.kde_bandwidth || *c.metrics.kde_bandwidth > 0.0, "metrics.kde_bandwidth must be positive");
    require(c.metrics.kde_points >= 2, "metrics.kde_points must be at least 2");
    require(c.holdout.count > 0, "holdout.count must be positive");
    require(c.holdout.margin >= 0.0 && c.holdout.margin < 0.5, "holdout.margin must lie in [0, 0.5)");
}

}  // namespace kspod::cli
