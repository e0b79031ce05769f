#pragma once

// JSON run configuration shared by every subcommand. Missing keys keep their
// defaults; command-line flags are applied on top by the commands.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "kspod/design_kit.hpp"
#include "kspod/kspod_emulator.hpp"
#include "kspod/synth.hpp"

namespace kspod::cli {

/// Bad flags, unreadable or invalid configuration, missing inputs: exit 2.
class UsageError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    std::uint64_t seed = 0;

    struct Paths {
        std::filesystem::path dataset_dir = "data";
        std::filesystem::path heldout_dir = "heldout";
        std::filesystem::path predictions_dir = "predictions";
        std::filesystem::path design_csv = "design.csv";
        std::filesystem::path model = "model.ksem";
        std::filesystem::path report = "report.json";
    } paths;

    struct Design {
        int dims = 3;
        int slices = 5;
        int per_slice = 6;
        DesignRanges ranges = swirl_injector_ranges();
    } design;

    DeskSampling sampling;

    struct Pod {
        bool centering = true;
        double energy_threshold = 0.99;
        std::optional<std::size_t> rank;
        bool trapezoidal_weights = false;
    } pod;

    struct Kriging {
        double nugget = 1e-8;
        double log_theta_min = -6.0;
        double log_theta_max = 6.0;
        int restarts = 8;
        CoefficientTheta coefficient_theta = CoefficientTheta::PerFit;
        WeightTheta weight_theta = WeightTheta::BlendedFields;
        std::optional<double> weight_theta_value;
    } kriging;

    struct Predict {
        std::vector<double> design;
        std::vector<std::size_t> time_indices;
    } predict;

    struct Metrics {
        std::optional<double> threshold;
        std::optional<std::pair<double, double>> station_pair;
        std::optional<double> kde_bandwidth;
        int kde_points = 128;
    } metrics;

    struct Holdout {
        int count = 8;
        double margin = 0.1;  // held-out unit coordinates lie in [margin, 1 - margin]
    } holdout;

    TrainOptions train_options() const;
};

/// Throws UsageError naming the offending key.
RunConfig config_from_json(const nlohmann::json& j);
RunConfig load_config(const std::filesystem::path& path);
nlohmann::json config_to_json(const RunConfig& config);

/// Checks the numeric preconditions of the modules the config feeds.
void validate(const RunConfig& config);

}  // namespace kspod::cli
