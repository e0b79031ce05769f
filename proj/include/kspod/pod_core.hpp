#pragma once

// Proper orthogonal decomposition of one case by the method of snapshots.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "kspod/snapshot_store.hpp"

namespace kspod {

/// field ~= mean_field + modes * coeffs^T, with modes orthonormal under the
/// diagonal weighted inner product <a, b> = sum_j w_j a_j b_j.
struct PODBasis {
    Eigen::MatrixXd modes;               // J x K
    Eigen::MatrixXd coeffs;              // m x K, column k is beta^k(t)
    Eigen::VectorXd eigenvalues;         // K, nonincreasing
    Eigen::VectorXd mean_field;          // J when centered, empty otherwise
    Eigen::VectorXd quadrature_weights;  // J
    /// Sum of all retained eigenvalues at decomposition time; truncation keeps it.
    double total_energy = 0.0;

    std::size_t rank() const noexcept { return static_cast<std::size_t>(modes.cols()); }
    std::size_t points() const noexcept { return static_cast<std::size_t>(modes.rows()); }
    std::size_t snapshots() const noexcept { return static_cast<std::size_t>(coeffs.rows()); }
    bool centered() const noexcept { return mean_field.size() > 0; }

    /// lambda_k / sum(lambda) over the modes present; sums to one.
    Eigen::VectorXd energy_fractions() const;
    /// Running sum of energy_fractions().
    Eigen::VectorXd cumulative_energy() const;
    /// Fraction of the decomposition-time energy still held after truncation.
    double captured_energy() const;
};

struct PodOptions {
    bool centering = true;
    /// Quadrature weights (length J, positive). Uniform (all ones) when empty.
    std::optional<Eigen::VectorXd> weights;
};

/// Eigenpairs below this fraction of the largest eigenvalue are discarded.
constexpr double kRankEpsilon = 1e-12;

PODBasis decompose(const Eigen::MatrixXd& field, const PodOptions& options = {});
PODBasis decompose(const SnapshotSet& s, const PodOptions& options = {});

struct EnergyThreshold {
    double value;
};
struct ExplicitRank {
    std::size_t value;
};
using TruncationCriterion = std::variant<EnergyThreshold, ExplicitRank>;

/// Smallest K whose cumulative energy reaches the threshold (1e-12 slack for
/// roundoff in the running sum).
std::size_t rank_for_energy(const PODBasis& b, double threshold);

PODBasis truncate(const PODBasis& b, TruncationCriterion criterion);

/// sum_{k<K} beta^k(t_q) phi^k (+ mean) for the requested time indices.
Eigen::MatrixXd reconstruct(const PODBasis& b, std::size_t K, std::span<const std::size_t> time_indices);
Eigen::MatrixXd reconstruct(const PODBasis& b, std::size_t K);

/// Flips the sign of each target mode (and its coefficients) whose weighted
/// inner product with the reference mode of the same index is negative.
PODBasis align_modes(const PODBasis& reference, const PODBasis& target);

// KSPB1 container, same conventions as KSPD1.
std::vector<std::uint8_t> encode_basis(const PODBasis& b);
PODBasis decode_basis(std::span<const std::uint8_t> bytes, const std::string& context = "KSPB1");
void write_basis(const PODBasis& b, const std::filesystem::path& path);
PODBasis read_basis(const std::filesystem::path& path);

}  // namespace kspod
