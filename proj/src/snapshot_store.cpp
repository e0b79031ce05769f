#include "kspod/snapshot_store.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"

namespace kspod {
namespace {

constexpr std::string_view kTag = "KSPD1";

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

std::string check_times(const Eigen::VectorXd& times) {
    const Eigen::Index m = times.size();
    if (m < 2) return {};
    const double dt = times[1] - times[0];
    if (!(dt > 0.0)) return "times must be strictly increasing";
    for (Eigen::Index q = 1; q < m; ++q) {
        const double step = times[q] - times[q - 1];
        if (!(step > 0.0)) return "times must be strictly increasing";
        if (std::abs(step - dt) > 1e-9 * std::abs(dt)) return "time spacing must be uniform";
    }
    return {};
}

}  // namespace

void validate(const SnapshotSet& s) {
    const auto J = s.grid.rows();
    const auto m = s.times.size();
    if (J < 1) throw std::invalid_argument("snapshot set needs at least one grid point");
    if (m < 1) throw std::invalid_argument("snapshot set needs at least one time instant");
    if (s.grid.cols() != 2) throw std::invalid_argument("grid must have two columns (x, r)");
    if (s.field.rows() != J || s.field.cols() != m) {
        throw std::invalid_argument("field must be J x m");
    }
    if (!s.field.allFinite() || !s.grid.allFinite() || !s.times.allFinite() || !s.design.allFinite()) {
        throw std::invalid_argument("snapshot set contains non-finite values");
    }
    if (auto problem = check_times(s.times); !problem.empty()) throw std::invalid_argument(problem);
}

bool same_grid(const SnapshotSet& a, const SnapshotSet& b) { return bit_equal(a.grid, b.grid); }

bool same_times(const SnapshotSet& a, const SnapshotSet& b) { return bit_equal(a.times, b.times); }

Eigen::MatrixXd make_structured_grid(int nx, int nr, double x0, double x1, double r0, double r1) {
    if (nx < 1 || nr < 1) throw std::invalid_argument("grid needs at least one station and one radial point");
    Eigen::MatrixXd grid(static_cast<Eigen::Index>(nx) * nr, 2);
    for (int i = 0; i < nx; ++i) {
        const double x = nx == 1 ? x0 : x0 + (x1 - x0) * i / (nx - 1);
        for (int j = 0; j < nr; ++j) {
            const double r = nr == 1 ? r0 : r0 + (r1 - r0) * j / (nr - 1);
            grid(static_cast<Eigen::Index>(i) * nr + j, 0) = x;
            grid(static_cast<Eigen::Index>(i) * nr + j, 1) = r;
        }
    }
    return grid;
}

Eigen::VectorXd uniform_times(int m, double dt, double t0) {
    if (m < 1) throw std::invalid_argument("need at least one time instant");
    if (!(dt > 0.0)) throw std::invalid_argument("time step must be positive");
    Eigen::VectorXd t(m);
    for (int q = 0; q < m; ++q) t[q] = t0 + q * dt;
    return t;
}

std::vector<std::uint8_t> encode_dataset(const SnapshotSet& s) {
    validate(s);
    io::ByteWriter w;
    w.magic(kTag);
    w.u64(s.points());
    w.u64(s.snapshots());
    w.u64(s.dims());
    w.vector(s.design);
    for (Eigen::Index j = 0; j < s.grid.rows(); ++j) {
        w.f64(s.grid(j, 0));
        w.f64(s.grid(j, 1));
    }
    w.vector(s.times);
    w.matrix(s.field);
    return std::move(w).take();
}

SnapshotSet decode_dataset(std::span<const std::uint8_t> bytes, const std::string& context) {
    io::ByteReader r(bytes, context);
    r.expect_magic(kTag);
    const std::uint64_t J = r.u64();
    const std::uint64_t m = r.u64();
    const std::uint64_t d = r.u64();
    if (J == 0 || m == 0) throw FormatError(FormatErrc::InvalidContent, context + ": J and m must be positive");

    // Size the whole payload up front so absurd headers fail before allocating.
    const std::uint64_t grid_values = r.checked_product(J, 2);
    const std::uint64_t field_values = r.checked_product(J, m);
    std::uint64_t total = d;
    for (std::uint64_t part : {grid_values, m, field_values}) {
        if (total > UINT64_MAX - part) throw FormatError(FormatErrc::DimensionOverflow, context + ": payload size overflows");
        total += part;
    }
    r.require_f64s(total);

    SnapshotSet s;
    s.design = r.vector(d);
    s.grid.resize(static_cast<Eigen::Index>(J), 2);
    for (Eigen::Index j = 0; j < s.grid.rows(); ++j) {
        s.grid(j, 0) = r.f64();
        s.grid(j, 1) = r.f64();
    }
    s.times = r.vector(m);
    s.field = r.matrix(J, m);
    r.expect_end();

    if (auto problem = check_times(s.times); !problem.empty()) {
        throw FormatError(FormatErrc::InvalidContent, context + ": " + problem);
    }
    return s;
}

void write_dataset(const SnapshotSet& s, const std::filesystem::path& path) {
    io::write_file(path, encode_dataset(s));
}

SnapshotSet read_dataset(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    SnapshotSet s = decode_dataset(bytes, path.string());
    s.case_id = path.stem().string();
    return s;
}

std::vector<std::filesystem::path> list_datasets(const std::filesystem::path& dir) {
    std::vector<std::filesystem::path> out;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".kspd") out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace kspod
