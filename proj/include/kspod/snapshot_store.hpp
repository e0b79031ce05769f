#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kspod {

struct Variable {
    std::string name = "field";
    std::string units;
};

/// One case: a single flow variable sampled on a fixed grid at m instants.
struct SnapshotSet {
    std::string case_id;
    Eigen::VectorXd design;   // physical units, length d
    Eigen::MatrixXd grid;     // J x 2, columns (axial x mm, radial r mm)
    Eigen::VectorXd times;    // m, seconds, uniform spacing
    Eigen::MatrixXd field;    // J x m, column q is the snapshot at times[q]
    Variable variable;

    std::size_t points() const noexcept { return static_cast<std::size_t>(grid.rows()); }
    std::size_t snapshots() const noexcept { return static_cast<std::size_t>(times.size()); }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(design.size()); }
};

/// Throws std::invalid_argument when J or m is zero, shapes disagree, times
/// are not strictly increasing with constant spacing (1e-9 relative), or any
/// value is non-finite.
void validate(const SnapshotSet& s);

/// Bit-exact comparisons used for cross-case compatibility checks.
bool same_grid(const SnapshotSet& a, const SnapshotSet& b);
bool same_times(const SnapshotSet& a, const SnapshotSet& b);

/// Station-major structured grid: for each of nx axial stations (uniform in
/// [x0, x1]) the nr radial points uniform in [r0, r1], ascending.
Eigen::MatrixXd make_structured_grid(int nx, int nr, double x0, double x1, double r0, double r1);
Eigen::VectorXd uniform_times(int m, double dt, double t0 = 0.0);

// KSPD1: magic "KSPD1\n"; u64 J, m, d; d design values; J (x, r) pairs;
// m times; J*m field values column-major. All little-endian, no padding.
// The case id is not stored; read_dataset takes it from the file stem.
std::vector<std::uint8_t> encode_dataset(const SnapshotSet& s);
SnapshotSet decode_dataset(std::span<const std::uint8_t> bytes, const std::string& context = "KSPD1");

void write_dataset(const SnapshotSet& s, const std::filesystem::path& path);
SnapshotSet read_dataset(const std::filesystem::path& path);

/// All *.kspd files in a directory, sorted by filename.
std::vector<std::filesystem::path> list_datasets(const std::filesystem::path& dir);

}  // namespace kspod
