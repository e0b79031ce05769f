#pragma once

// Kernel-smoothed POD emulator.
//
// Training: one POD per case, truncated to a common rank and sign-aligned to
// the first case; one kriging model per (mode, time step) for the temporal
// coefficients; one shared-theta indicator-kriging model for the blending
// weights. Prediction blends the aligned per-case modes with the normalized
// weights and multiplies by the kriged coefficients.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "kspod/design_kit.hpp"
#include "kspod/kriging_core.hpp"
#include "kspod/pod_core.hpp"
#include "kspod/snapshot_store.hpp"

namespace kspod {

enum class CoefficientTheta : std::uint64_t {
    PerFit = 0,         // MLE for every (mode, time step) model
    SharedPerMode = 1,  // one MLE per mode over all its time steps
};

/// How the shared indicator theta is chosen when not overridden.
enum class WeightTheta : std::uint64_t {
    // MLE over the per-case fields the weights blend (mean fields and aligned
    // modes), one isotropic theta shared by all of them.
    BlendedFields = 0,
    // MLE over the indicator vectors themselves. Tends to the upper bound,
    // which collapses off-design weights towards 1/n.
    Indicators = 1,
};

struct TrainOptions {
    double energy_threshold = 0.99;
    std::optional<std::size_t> explicit_rank;
    bool centering = true;
    bool trapezoidal_weights = false;
    /// Restrict training to these inlet-velocity clusters (needs metadata).
    std::vector<Cluster> cluster_filter;
    /// Physical design box mapped onto the unit cube before any kriging.
    /// Empty means the bounding box of the training designs.
    DesignRanges ranges;
    KrigingOptions coefficient_kriging;
    CoefficientTheta coefficient_theta = CoefficientTheta::PerFit;
    /// Indicator model; theta is always shared and isotropic.
    KrigingOptions weight_kriging;
    WeightTheta weight_theta = WeightTheta::BlendedFields;
};

/// Blend weights for one query. normalized = raw / sum(raw).
struct WeightVector {
    Eigen::VectorXd raw;
    Eigen::VectorXd normalized;
};

/// |sum of raw weights| below this refuses to normalize.
constexpr double kDegenerateWeightSum = 1e-6;

class EmulatorModel {
public:
    std::size_t cases() const noexcept { return bases_.size(); }
    std::size_t rank() const noexcept { return rank_; }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(design_.cols()); }
    std::size_t points() const noexcept { return static_cast<std::size_t>(grid_.rows()); }
    std::size_t snapshots() const noexcept { return static_cast<std::size_t>(times_.size()); }
    bool centered() const noexcept { return centering_; }

    const Eigen::MatrixXd& design() const noexcept { return design_; }
    const Eigen::MatrixXd& unit_design() const noexcept { return unit_design_; }
    const DesignRanges& ranges() const noexcept { return ranges_; }
    const Eigen::MatrixXd& grid() const noexcept { return grid_; }
    const Eigen::VectorXd& times() const noexcept { return times_; }
    /// Aligned, truncated per-case bases in training order.
    const std::vector<PODBasis>& bases() const noexcept { return bases_; }
    const std::vector<std::string>& case_ids() const noexcept { return case_ids_; }
    const KrigingModel& coefficient_model(std::size_t k, std::size_t q) const;
    const IndicatorKriging& weight_model() const { return *weight_model_; }
    const TrainOptions& options() const noexcept { return options_; }

    Eigen::VectorXd to_unit(const Eigen::VectorXd& physical) const { return ranges_.to_unit(physical); }

private:
    friend EmulatorModel train_from_bases(const Eigen::MatrixXd&, std::vector<PODBasis>, const Eigen::MatrixXd&,
                                          const Eigen::VectorXd&, const TrainOptions&, std::vector<std::string>);
    friend EmulatorModel decode_emulator(std::span<const std::uint8_t>, const std::string&);
    friend std::vector<std::uint8_t> encode_emulator(const EmulatorModel&);

    Eigen::MatrixXd design_;
    Eigen::MatrixXd unit_design_;
    DesignRanges ranges_;
    Eigen::MatrixXd grid_;
    Eigen::VectorXd times_;
    std::size_t rank_ = 0;
    bool centering_ = true;
    std::vector<PODBasis> bases_;
    std::vector<std::string> case_ids_;
    std::vector<KrigingModel> coeff_models_;  // index k * m + q
    std::optional<IndicatorKriging> weight_model_;
    TrainOptions options_;
};

/// Full training from snapshot sets. `metadata`, when given, has one entry per
/// case and is consulted by the cluster filter.
EmulatorModel train(std::span<const SnapshotSet> cases, const TrainOptions& options = {},
                    std::span<const CaseMetadata> metadata = {});

/// Training from already-decomposed cases (rank selection, alignment and the
/// two kriging stages). `bases` must share J, m and quadrature weights.
EmulatorModel train_from_bases(const Eigen::MatrixXd& physical_design, std::vector<PODBasis> bases,
                               const Eigen::MatrixXd& grid, const Eigen::VectorXd& times,
                               const TrainOptions& options, std::vector<std::string> case_ids = {});

/// Indicator-kriging weights at a physical design point.
WeightVector kriging_weights(const EmulatorModel& model, const Eigen::VectorXd& x_new);

/// Gaussian-kernel weights exp(-theta |x_i - x_new|^2) on unit coordinates.
WeightVector nw_weights(const EmulatorModel& model, const Eigen::VectorXd& x_new, double theta);

/// Normalized weighted average of the aligned modes (J x K). Throws
/// DegenerateWeightsError when |sum(raw)| < kDegenerateWeightSum.
Eigen::MatrixXd blend_modes(const EmulatorModel& model, const Eigen::VectorXd& raw_weights,
                            const Eigen::VectorXd& x_new);

Eigen::MatrixXd predict_modes(const EmulatorModel& model, const Eigen::VectorXd& x_new);

/// K x |time_indices| kriged coefficients.
Eigen::MatrixXd predict_coefficients(const EmulatorModel& model, const Eigen::VectorXd& x_new,
                                     std::span<const std::size_t> time_indices);
Eigen::MatrixXd predict_coefficients(const EmulatorModel& model, const Eigen::VectorXd& x_new);

/// J x |time_indices| predicted field, including the blended mean when the
/// model was trained with centering.
Eigen::MatrixXd predict_field(const EmulatorModel& model, const Eigen::VectorXd& x_new,
                              std::span<const std::size_t> time_indices);
Eigen::MatrixXd predict_field(const EmulatorModel& model, const Eigen::VectorXd& x_new);

/// Prediction at every stored instant, packaged as a dataset whose case id is
/// "predicted:<16 hex digits>" from an FNV-1a hash of x_new.
SnapshotSet predict_snapshots(const EmulatorModel& model, const Eigen::VectorXd& x_new);
std::string prediction_case_id(const Eigen::VectorXd& x_new);

// KSEM1 container.
std::vector<std::uint8_t> encode_emulator(const EmulatorModel& model);
EmulatorModel decode_emulator(std::span<const std::uint8_t> bytes, const std::string& context = "KSEM1");
void write_emulator(const EmulatorModel& model, const std::filesystem::path& path);
EmulatorModel read_emulator(const std::filesystem::path& path);

}  // namespace kspod
