#pragma once

// Space-filling designs, design scaling, swirl-geometry descriptors and
// inlet-velocity clustering.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace kspod {

/// n points in the unit hypercube [0, 1)^d, partitioned into slices.
/// Every dimension is a Latin hypercube over n bins, and every slice is a
/// Latin hypercube over its own q bins.
struct DesignMatrix {
    Eigen::MatrixXd points;          // n x d
    std::vector<int> slice_id;       // 1-based, one per row

    std::size_t n() const noexcept { return static_cast<std::size_t>(points.rows()); }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(points.cols()); }
    int slices() const;
};

struct Range {
    double lower = 0.0;
    double upper = 1.0;
    std::string name;
    std::string unit;

    double span() const noexcept { return upper - lower; }
};

/// Physical bounds per design dimension.
class DesignRanges {
public:
    DesignRanges() = default;
    explicit DesignRanges(std::vector<Range> ranges);

    std::size_t dims() const noexcept { return ranges_.size(); }
    const Range& operator[](std::size_t k) const { return ranges_.at(k); }
    const std::vector<Range>& ranges() const noexcept { return ranges_; }

    /// Unit coordinates -> physical.
    Eigen::VectorXd to_physical(const Eigen::VectorXd& unit) const;
    /// Physical -> unit coordinates (not clamped).
    Eigen::VectorXd to_unit(const Eigen::VectorXd& physical) const;

private:
    std::vector<Range> ranges_;
};

/// Injection angle theta (deg), inlet width delta (mm), inlet-to-headend
/// distance dL (mm), in that order.
DesignRanges swirl_injector_ranges();

struct GeometrySpec {
    double exit_area_mm2;      // A_n
    double inlet_area_mm2;     // A_in, total
    double inlet_offset_mm;    // R_in
    double nozzle_radius_mm;   // R_n
};

enum class Cluster { A, B, C, D };

char to_char(Cluster c);
std::optional<Cluster> cluster_from_char(char c);

struct CaseMetadata {
    double u_in = 0.0;
    double u_r = 0.0;
    double u_theta = 0.0;
    Cluster cluster = Cluster::A;
    std::optional<double> inlet_temperature_K;
    std::optional<double> ambient_temperature_K;
    std::optional<double> ambient_pressure_MPa;
    std::optional<double> mass_flow_kg_s;
};

/// Ten runs per design parameter.
int recommended_sample_size(int dims);

/// Sliced Latin hypercube with s slices of q points in d dimensions.
/// Coordinates sit at bin centres; a fixed budget of 1000 within-slice swaps
/// improves the maximin spacing. Deterministic for a given seed.
DesignMatrix generate_slhd(int slices, int per_slice, int dims, std::uint64_t seed);

/// Affine map of every row onto the physical ranges.
Eigen::MatrixXd scale_design(const DesignMatrix& unit, const DesignRanges& ranges);
Eigen::MatrixXd scale_design(const Eigen::MatrixXd& unit, const DesignRanges& ranges);
Eigen::MatrixXd unscale_design(const Eigen::MatrixXd& physical, const DesignRanges& ranges);

/// A_n R_in / (A_in R_n).
double swirl_geometric_constant(const GeometrySpec& g);

/// A below 10 m/s, B below 18, C below 25, D from 25 up.
Cluster assign_cluster(double u_in);

// CSV with header `slice,x1,...,xd` and 17 significant digits.
std::string design_to_csv(const DesignMatrix& design);
DesignMatrix design_from_csv(const std::string& text);
void write_design_csv(const DesignMatrix& design, const std::filesystem::path& path);
DesignMatrix read_design_csv(const std::filesystem::path& path);

}  // namespace kspod
