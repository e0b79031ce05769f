#include "kspod/design_kit.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>
#include <stdexcept>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"

namespace kspod {
namespace {

// Unbiased bounded integer in [0, bound) from the raw engine output, so the
// stream of designs does not depend on the standard library's distributions.
std::size_t bounded(std::mt19937_64& rng, std::size_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t r = rng();
    while (r >= limit) r = rng();
    return static_cast<std::size_t>(r % bound);
}

void shuffle(std::vector<int>& v, std::mt19937_64& rng) {
    for (std::size_t i = v.size(); i > 1; --i) {
        std::swap(v[i - 1], v[bounded(rng, i)]);
    }
}

// Morris-Mitchell phi_p; smaller is better, approaches 1/min-distance as p grows.
double phi_p(const Eigen::MatrixXd& pts, const std::vector<int>& slice_id, bool within_slice_only) {
    constexpr double p = 15.0;
    double acc = 0.0;
    const Eigen::Index n = pts.rows();
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i + 1; j < n; ++j) {
            if (within_slice_only && slice_id[i] != slice_id[j]) continue;
            const double dist = (pts.row(i) - pts.row(j)).norm();
            acc += std::pow(dist, -p);
        }
    }
    return std::pow(acc, 1.0 / p);
}

double design_score(const Eigen::MatrixXd& pts, const std::vector<int>& slice_id) {
    return phi_p(pts, slice_id, false) + phi_p(pts, slice_id, true);
}

std::string format_double(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace

int DesignMatrix::slices() const {
    return slice_id.empty() ? 0 : *std::max_element(slice_id.begin(), slice_id.end());
}

DesignRanges::DesignRanges(std::vector<Range> ranges) : ranges_(std::move(ranges)) {
    for (const auto& r : ranges_) {
        if (!(r.lower < r.upper)) {
            throw std::invalid_argument("design range '" + r.name + "' must satisfy lower < upper");
        }
    }
}

Eigen::VectorXd DesignRanges::to_physical(const Eigen::VectorXd& unit) const {
    if (static_cast<std::size_t>(unit.size()) != dims()) {
        throw std::invalid_argument("design vector has " + std::to_string(unit.size()) +
                                    " dimensions, ranges have " + std::to_string(dims()));
    }
    Eigen::VectorXd out(unit.size());
    for (Eigen::Index k = 0; k < unit.size(); ++k) {
        out[k] = ranges_[k].lower + unit[k] * ranges_[k].span();
    }
    return out;
}

Eigen::VectorXd DesignRanges::to_unit(const Eigen::VectorXd& physical) const {
    if (static_cast<std::size_t>(physical.size()) != dims()) {
        throw std::invalid_argument("design vector has " + std::to_string(physical.size()) +
                                    " dimensions, ranges have " + std::to_string(dims()));
    }
    Eigen::VectorXd out(physical.size());
    for (Eigen::Index k = 0; k < physical.size(); ++k) {
        out[k] = (physical[k] - ranges_[k].lower) / ranges_[k].span();
    }
    return out;
}

DesignRanges swirl_injector_ranges() {
    return DesignRanges({
        {35.0, 62.2, "theta", "deg"},
        {0.27, 1.53, "delta", "mm"},
        {0.85, 3.40, "dL", "mm"},
    });
}

char to_char(Cluster c) {
    switch (c) {
        case Cluster::A: return 'A';
        case Cluster::B: return 'B';
        case Cluster::C: return 'C';
        case Cluster::D: return 'D';
    }
    return '?';
}

std::optional<Cluster> cluster_from_char(char c) {
    switch (c) {
        case 'A': case 'a': return Cluster::A;
        case 'B': case 'b': return Cluster::B;
        case 'C': case 'c': return Cluster::C;
        case 'D': case 'd': return Cluster::D;
        default: return std::nullopt;
    }
}

int recommended_sample_size(int dims) {
    if (dims <= 0) throw std::invalid_argument("dimension count must be positive");
    return 10 * dims;
}

DesignMatrix generate_slhd(int slices, int per_slice, int dims, std::uint64_t seed) {
    if (slices < 1 || per_slice < 1 || dims < 1) {
        throw std::invalid_argument("slices, points per slice and dimensions must all be >= 1");
    }
    const int s = slices;
    const int q = per_slice;
    const int n = s * q;
    std::mt19937_64 rng(seed);

    // Point p of slice t is row t*q + p. In each dimension the slice's points
    // take a permutation of the q coarse bins; inside coarse bin c the s slices
    // share the fine bins c*s .. c*s+s-1 through another permutation.
    std::vector<std::vector<int>> fine_bin(static_cast<std::size_t>(n), std::vector<int>(dims));
    for (int k = 0; k < dims; ++k) {
        std::vector<std::vector<int>> owner(q, std::vector<int>(s));
        for (int c = 0; c < q; ++c) {
            std::iota(owner[c].begin(), owner[c].end(), 0);
            shuffle(owner[c], rng);
        }
        for (int t = 0; t < s; ++t) {
            std::vector<int> coarse(q);
            std::iota(coarse.begin(), coarse.end(), 0);
            shuffle(coarse, rng);
            for (int p = 0; p < q; ++p) {
                const int c = coarse[p];
                fine_bin[t * q + p][k] = c * s + owner[c][t];
            }
        }
    }

    DesignMatrix design;
    design.points.resize(n, dims);
    design.slice_id.resize(n);
    for (int i = 0; i < n; ++i) {
        design.slice_id[i] = i / q + 1;
        for (int k = 0; k < dims; ++k) {
            design.points(i, k) = (fine_bin[i][k] + 0.5) / n;
        }
    }

    // Swapping one coordinate between two points of the same slice keeps both
    // the global and the per-slice stratification intact.
    if (q >= 2 && n >= 3) {
        double best = design_score(design.points, design.slice_id);
        constexpr int kSwapAttempts = 1000;
        for (int attempt = 0; attempt < kSwapAttempts; ++attempt) {
            const int t = static_cast<int>(bounded(rng, s));
            const int k = static_cast<int>(bounded(rng, dims));
            const int a = t * q + static_cast<int>(bounded(rng, q));
            const int b = t * q + static_cast<int>(bounded(rng, q));
            if (a == b) continue;
            std::swap(design.points(a, k), design.points(b, k));
            const double score = design_score(design.points, design.slice_id);
            if (score < best) {
                best = score;
            } else {
                std::swap(design.points(a, k), design.points(b, k));
            }
        }
    }
    return design;
}

Eigen::MatrixXd scale_design(const Eigen::MatrixXd& unit, const DesignRanges& ranges) {
    if (static_cast<std::size_t>(unit.cols()) != ranges.dims()) {
        throw std::invalid_argument("design has " + std::to_string(unit.cols()) + " dimensions, ranges have " +
                                    std::to_string(ranges.dims()));
    }
    Eigen::MatrixXd out(unit.rows(), unit.cols());
    for (Eigen::Index i = 0; i < unit.rows(); ++i) {
        out.row(i) = ranges.to_physical(unit.row(i).transpose()).transpose();
    }
    return out;
}

Eigen::MatrixXd scale_design(const DesignMatrix& unit, const DesignRanges& ranges) {
    return scale_design(unit.points, ranges);
}

Eigen::MatrixXd unscale_design(const Eigen::MatrixXd& physical, const DesignRanges& ranges) {
    if (static_cast<std::size_t>(physical.cols()) != ranges.dims()) {
        throw std::invalid_argument("design has " + std::to_string(physical.cols()) + " dimensions, ranges have " +
                                    std::to_string(ranges.dims()));
    }
    Eigen::MatrixXd out(physical.rows(), physical.cols());
    for (Eigen::Index i = 0; i < physical.rows(); ++i) {
        out.row(i) = ranges.to_unit(physical.row(i).transpose()).transpose();
    }
    return out;
}

double swirl_geometric_constant(const GeometrySpec& g) {
    if (!(g.exit_area_mm2 > 0.0) || !(g.inlet_area_mm2 > 0.0) || !(g.inlet_offset_mm > 0.0) ||
        !(g.nozzle_radius_mm > 0.0)) {
        throw std::invalid_argument("geometry areas and radii must be strictly positive");
    }
    return g.exit_area_mm2 * g.inlet_offset_mm / (g.inlet_area_mm2 * g.nozzle_radius_mm);
}

Cluster assign_cluster(double u_in) {
    if (!(u_in > 0.0)) throw std::invalid_argument("inlet velocity must be positive");
    if (u_in < 10.0) return Cluster::A;
    if (u_in < 18.0) return Cluster::B;
    if (u_in < 25.0) return Cluster::C;
    return Cluster::D;
}

std::string design_to_csv(const DesignMatrix& design) {
    std::ostringstream os;
    os << "slice";
    for (std::size_t k = 0; k < design.dims(); ++k) os << ",x" << k + 1;
    os << '\n';
    for (std::size_t i = 0; i < design.n(); ++i) {
        os << (i < design.slice_id.size() ? design.slice_id[i] : 1);
        for (std::size_t k = 0; k < design.dims(); ++k) {
            os << ',' << format_double(design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)));
        }
        os << '\n';
    }
    return os.str();
}

DesignMatrix design_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line)) throw FormatError(FormatErrc::Truncated, "design CSV: missing header");
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::vector<std::string> header;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) header.push_back(cell);
    }
    if (header.size() < 2 || header[0] != "slice") {
        throw FormatError(FormatErrc::BadMagic, "design CSV: header must be slice,x1,...,xd");
    }
    for (std::size_t k = 1; k < header.size(); ++k) {
        if (header[k] != "x" + std::to_string(k)) {
            throw FormatError(FormatErrc::BadMagic, "design CSV: unexpected column '" + header[k] + "'");
        }
    }
    const std::size_t d = header.size() - 1;

    std::vector<std::vector<double>> rows;
    std::vector<int> slices;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        std::vector<std::string> cells;
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (cells.size() != d + 1) {
            throw FormatError(FormatErrc::InvalidContent,
                              "design CSV: row " + std::to_string(rows.size() + 1) + " has wrong column count");
        }
        char* end = nullptr;
        const long slice = std::strtol(cells[0].c_str(), &end, 10);
        if (end == cells[0].c_str() || *end != '\0' || slice < 1) {
            throw FormatError(FormatErrc::InvalidContent, "design CSV: bad slice id '" + cells[0] + "'");
        }
        std::vector<double> row(d);
        for (std::size_t k = 0; k < d; ++k) {
            row[k] = std::strtod(cells[k + 1].c_str(), &end);
            if (end == cells[k + 1].c_str() || *end != '\0') {
                throw FormatError(FormatErrc::InvalidContent, "design CSV: bad number '" + cells[k + 1] + "'");
            }
            if (!std::isfinite(row[k])) throw FormatError(FormatErrc::NonFinite, "design CSV: non-finite coordinate");
        }
        slices.push_back(static_cast<int>(slice));
        rows.push_back(std::move(row));
    }

    DesignMatrix design;
    design.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(d));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t k = 0; k < d; ++k) {
            design.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = rows[i][k];
        }
    }
    design.slice_id = std::move(slices);
    return design;
}

void write_design_csv(const DesignMatrix& design, const std::filesystem::path& path) {
    const std::string text = design_to_csv(design);
    io::write_file(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

DesignMatrix read_design_csv(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return design_from_csv(std::string(bytes.begin(), bytes.end()));
}

}  // namespace kspod
