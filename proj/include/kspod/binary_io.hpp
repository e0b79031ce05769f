#pragma once

// Little-endian byte-level encoding shared by every container format
// (KSPD1 datasets, KSPB1 bases, KSGP1 kriging models, KSEM1 emulators).
// Layout discipline: 6-byte tag, then unsigned 64-bit counts, then float64
// payloads. No padding, no checksum.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

namespace kspod::io {

constexpr std::size_t kMagicSize = 6;

class ByteWriter {
public:
    void magic(std::string_view tag);  // tag of exactly 5 chars, stored with '\n'
    void u64(std::uint64_t value);
    void f64(double value);
    void f64s(std::span<const double> values);
    void matrix(const Eigen::MatrixXd& m);  // column-major payload, no shape
    void vector(const Eigen::VectorXd& v);

    const std::vector<std::uint8_t>& bytes() const noexcept { return buf_; }
    std::vector<std::uint8_t> take() && { return std::move(buf_); }

private:
    std::vector<std::uint8_t> buf_;
};

class ByteReader {
public:
    ByteReader(std::span<const std::uint8_t> bytes, std::string context)
        : bytes_(bytes), context_(std::move(context)) {}

    void expect_magic(std::string_view tag);
    std::uint64_t u64();
    double f64();  // rejects non-finite values
    std::vector<double> f64s(std::size_t count);
    Eigen::MatrixXd matrix(std::size_t rows, std::size_t cols);
    Eigen::VectorXd vector(std::size_t size);

    /// Verifies that `count` float64 values fit in the remaining payload and
    /// that the byte count does not overflow.
    void require_f64s(std::uint64_t count) const;
    /// count = a * b with overflow detection.
    std::uint64_t checked_product(std::uint64_t a, std::uint64_t b) const;

    std::size_t remaining() const noexcept { return bytes_.size() - pos_; }
    void expect_end() const;

private:
    void need(std::size_t n) const;

    std::span<const std::uint8_t> bytes_;
    std::size_t pos_ = 0;
    std::string context_;
};

std::vector<std::uint8_t> read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

/// Optional process-wide hook called with every path passed to read_file.
/// Used for file-access auditing; pass an empty function to clear.
void set_read_observer(std::function<void(const std::filesystem::path&)> observer);

}  // namespace kspod::io
