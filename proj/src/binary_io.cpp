#include "kspod/binary_io.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <mutex>

#include "kspod/errors.hpp"

namespace kspod {

const char* to_string(FormatErrc code) {
    switch (code) {
        case FormatErrc::Io: return "io-error";
        case FormatErrc::BadMagic: return "bad-magic";
        case FormatErrc::Truncated: return "truncated-payload";
        case FormatErrc::TrailingData: return "trailing-data";
        case FormatErrc::NonFinite: return "non-finite-value";
        case FormatErrc::DimensionOverflow: return "dimension-overflow";
        case FormatErrc::InvalidContent: return "invalid-content";
    }
    return "format-error";
}

namespace io {
namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big,
              "mixed-endian platforms are not supported");

std::uint64_t to_little(std::uint64_t v) {
    if constexpr (std::endian::native == std::endian::little) {
        return v;
    } else {
        std::uint64_t r = 0;
        for (int i = 0; i < 8; ++i) {
            r = (r << 8) | (v & 0xffu);
            v >>= 8;
        }
        return r;
    }
}

std::mutex observer_mutex;
std::function<void(const std::filesystem::path&)> read_observer;

}  // namespace

void ByteWriter::magic(std::string_view tag) {
    if (tag.size() != kMagicSize - 1) throw std::invalid_argument("container tag must have 5 characters");
    buf_.insert(buf_.end(), tag.begin(), tag.end());
    buf_.push_back('\n');
}

void ByteWriter::u64(std::uint64_t value) {
    const std::uint64_t le = to_little(value);
    const auto* p = reinterpret_cast<const std::uint8_t*>(&le);
    buf_.insert(buf_.end(), p, p + 8);
}

void ByteWriter::f64(double value) { u64(std::bit_cast<std::uint64_t>(value)); }

void ByteWriter::f64s(std::span<const double> values) {
    buf_.reserve(buf_.size() + 8 * values.size());
    for (double v : values) f64(v);
}

void ByteWriter::matrix(const Eigen::MatrixXd& m) {
    f64s(std::span<const double>(m.data(), static_cast<std::size_t>(m.size())));
}

void ByteWriter::vector(const Eigen::VectorXd& v) {
    f64s(std::span<const double>(v.data(), static_cast<std::size_t>(v.size())));
}

void ByteReader::need(std::size_t n) const {
    if (remaining() < n) {
        throw FormatError(FormatErrc::Truncated, context_ + ": expected " + std::to_string(n) +
                                                     " more bytes, found " + std::to_string(remaining()));
    }
}

void ByteReader::expect_magic(std::string_view tag) {
    if (remaining() < kMagicSize ||
        std::memcmp(bytes_.data() + pos_, tag.data(), tag.size()) != 0 ||
        bytes_[pos_ + kMagicSize - 1] != '\n') {
        throw FormatError(FormatErrc::BadMagic, context_ + ": missing '" + std::string(tag) + "' tag");
    }
    pos_ += kMagicSize;
}

std::uint64_t ByteReader::u64() {
    need(8);
    std::uint64_t raw = 0;
    std::memcpy(&raw, bytes_.data() + pos_, 8);
    pos_ += 8;
    return to_little(raw);
}

double ByteReader::f64() {
    const double v = std::bit_cast<double>(u64());
    if (!std::isfinite(v)) throw FormatError(FormatErrc::NonFinite, context_ + ": non-finite float64 in payload");
    return v;
}

std::vector<double> ByteReader::f64s(std::size_t count) {
    require_f64s(count);
    std::vector<double> out(count);
    for (auto& v : out) v = f64();
    return out;
}

Eigen::MatrixXd ByteReader::matrix(std::size_t rows, std::size_t cols) {
    const std::uint64_t count = checked_product(rows, cols);
    require_f64s(count);
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = f64();
    return m;
}

Eigen::VectorXd ByteReader::vector(std::size_t size) {
    require_f64s(size);
    Eigen::VectorXd v(static_cast<Eigen::Index>(size));
    for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = f64();
    return v;
}

std::uint64_t ByteReader::checked_product(std::uint64_t a, std::uint64_t b) const {
    if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
        throw FormatError(FormatErrc::DimensionOverflow, context_ + ": dimension product overflows");
    }
    return a * b;
}

void ByteReader::require_f64s(std::uint64_t count) const {
    if (count > std::numeric_limits<std::uint64_t>::max() / 8 ||
        count > static_cast<std::uint64_t>(std::numeric_limits<Eigen::Index>::max())) {
        throw FormatError(FormatErrc::DimensionOverflow, context_ + ": payload size overflows");
    }
    need(static_cast<std::size_t>(count * 8));
}

void ByteReader::expect_end() const {
    if (remaining() != 0) {
        throw FormatError(FormatErrc::TrailingData,
                          context_ + ": " + std::to_string(remaining()) + " unexpected trailing bytes");
    }
}

std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
    {
        std::lock_guard lock(observer_mutex);
        if (read_observer) read_observer(path);
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FormatError(FormatErrc::Io, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (in.bad()) throw FormatError(FormatErrc::Io, "read failed for " + path.string());
    return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FormatError(FormatErrc::Io, "cannot create " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw FormatError(FormatErrc::Io, "write failed for " + path.string());
}

void set_read_observer(std::function<void(const std::filesystem::path&)> observer) {
    std::lock_guard lock(observer_mutex);
    read_observer = std::move(observer);
}

}  // namespace io
}  // namespace kspod
