#include <cmath>
#include <cstring>
#include <fstream>
#include <numbers>

#include <gtest/gtest.h>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"
#include "kspod/metrics.hpp"
#include "kspod/snapshot_store.hpp"
#include "kspod/synth.hpp"
#include "oracles.hpp"

using namespace kspod;

namespace {

SnapshotSet tiny() {
    SnapshotSet s;
    s.case_id = "tiny";
    s.design = Eigen::Vector3d(1.0, 2.0, 3.0);
    s.grid.resize(2, 2);
    s.grid << 0.0, 1.0, 0.5, 2.0;
    s.times = Eigen::VectorXd::Constant(1, 0.25);
    s.field.resize(2, 1);
    s.field << -1.5, 7.0;
    return s;
}

SnapshotSet random_set(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    SnapshotSet s;
    s.design = oracle::uniform_matrix(rng, 4, 1);
    s.grid = make_structured_grid(5, 3, 0.0, 1.0, 0.5, 2.0);
    s.times = uniform_times(7, 1e-3, 0.1);
    s.field = oracle::uniform_matrix(rng, 15, 7) * 1e3 - Eigen::MatrixXd::Constant(15, 7, 300.0);
    return s;
}

bool bit_equal(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return a.rows() == b.rows() && a.cols() == b.cols() &&
           std::memcmp(a.data(), b.data(), static_cast<std::size_t>(a.size()) * sizeof(double)) == 0;
}

FormatErrc decode_error(const std::vector<std::uint8_t>& bytes) {
    try {
        decode_dataset(bytes);
    } catch (const FormatError& e) {
        return e.code();
    }
    ADD_FAILURE() << "decode succeeded";
    return FormatErrc::Io;
}

}  // namespace

TEST(Kspd1, TinyFileIs110Bytes) {
    const auto bytes = encode_dataset(tiny());
    EXPECT_EQ(bytes.size(), 110u);
    EXPECT_EQ(std::string(bytes.begin(), bytes.begin() + 6), "KSPD1\n");
}

TEST(Kspd1, RoundTripIsBitIdentical) {
    const auto dir = oracle::scratch_dir("kspd1_roundtrip");
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        SnapshotSet s = random_set(seed);
        s.case_id = "case_" + std::to_string(seed);
        write_dataset(s, dir / (s.case_id + ".kspd"));
        const SnapshotSet back = read_dataset(dir / (s.case_id + ".kspd"));
        EXPECT_EQ(back.case_id, s.case_id);
        EXPECT_TRUE(bit_equal(back.design, s.design));
        EXPECT_TRUE(bit_equal(back.grid, s.grid));
        EXPECT_TRUE(bit_equal(back.times, s.times));
        EXPECT_TRUE(bit_equal(back.field, s.field));
        EXPECT_EQ(encode_dataset(back), encode_dataset(s));
    }
}

TEST(Kspd1, DistinctParseErrors) {
    auto good = encode_dataset(tiny());

    auto bad_magic = good;
    std::memcpy(bad_magic.data(), "XXXX", 4);
    EXPECT_EQ(decode_error(bad_magic), FormatErrc::BadMagic);

    auto truncated = good;
    truncated.resize(100);
    EXPECT_EQ(decode_error(truncated), FormatErrc::Truncated);

    auto trailing = good;
    trailing.push_back(0);
    EXPECT_EQ(decode_error(trailing), FormatErrc::TrailingData);

    auto nonfinite = good;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::memcpy(nonfinite.data() + 102, &nan, 8);
    EXPECT_EQ(decode_error(nonfinite), FormatErrc::NonFinite);

    auto overflow = good;
    const std::uint64_t huge = std::uint64_t{1} << 62;
    std::memcpy(overflow.data() + 6, &huge, 8);
    std::memcpy(overflow.data() + 14, &huge, 8);
    EXPECT_EQ(decode_error(overflow), FormatErrc::DimensionOverflow);
}

TEST(Kspd1, WriteRejectsInvalidSet) {
    const auto dir = oracle::scratch_dir("kspd1_invalid");
    SnapshotSet s = tiny();
    s.field(0, 0) = std::numeric_limits<double>::infinity();
    EXPECT_THROW(write_dataset(s, dir / "x.kspd"), std::invalid_argument);
    s = random_set(1);
    s.times[3] += 1e-5;
    EXPECT_THROW(validate(s), std::invalid_argument);
}

TEST(Kspd1, ListsDatasetsSorted) {
    const auto dir = oracle::scratch_dir("kspd1_list");
    for (const char* name : {"b", "a", "c"}) write_dataset(tiny(), dir / (std::string(name) + ".kspd"));
    std::ofstream(dir / "ignore.txt") << "x";
    const auto files = list_datasets(dir);
    ASSERT_EQ(files.size(), 3u);
    EXPECT_EQ(files[0].filename(), "a.kspd");
    EXPECT_EQ(files[2].filename(), "c.kspd");
}

TEST(Synth, ZeroAmplitudesGiveTheMeanProfile) {
    SynthRecipe r = desk_recipe();
    for (auto& w : r.waves) {
        w.amplitude = ScalarMap{0.0, {}, {}};
    }
    DeskSampling ds;
    ds.axial_points = 6;
    ds.radial_points = 7;
    ds.snapshots = 5;
    const Eigen::MatrixXd grid = ds.grid();
    const Eigen::Vector3d x(45.0, 0.9, 2.0);
    const SnapshotSet s = synth_flowfield(x, grid, ds.times(), r);
    const Eigen::VectorXd z = r.ranges.to_unit(x);
    for (Eigen::Index j = 0; j < grid.rows(); ++j) {
        const double mean = r.mean(grid(j, 0), grid(j, 1), z);
        for (Eigen::Index q = 0; q < s.field.cols(); ++q) EXPECT_EQ(s.field(j, q), mean);
    }
}

TEST(Synth, SingleTermHandValue) {
    SynthRecipe r;
    r.mean = FilmProfile{0.0, 0.0, 1.0, 1.0, 0.0, 1.0, ScalarMap{0.0, {}, {}}, ScalarMap{0.0, {}, {}}};
    r.waves.push_back(WaveTerm{ScalarMap{2.0, {}, {}}, ScalarMap{50.0, {}, {}}, ScalarMap{0.0, {}, {}}, SpatialPattern{}});
    Eigen::MatrixXd grid(1, 2);
    grid << 0.3, 0.7;
    const Eigen::VectorXd times = Eigen::VectorXd::Constant(1, 0.005);
    const SnapshotSet s = synth_flowfield(Eigen::VectorXd::Zero(1), grid, times, r);
    EXPECT_LT(std::abs(s.field(0, 0)), 1e-12);
    EXPECT_NEAR(2.0 * std::cos(std::numbers::pi / 2.0), s.field(0, 0), 1e-15);
}

TEST(Synth, FrequencyBoundEnforced) {
    SynthRecipe r;
    r.waves.push_back(WaveTerm{ScalarMap{1.0, {}, {}}, ScalarMap{5000.0, {}, {}}, ScalarMap{}, SpatialPattern{}});
    Eigen::MatrixXd grid(1, 2);
    grid << 0.0, 1.0;
    EXPECT_THROW(synth_flowfield(Eigen::VectorXd::Zero(1), grid, uniform_times(8, 1e-4), r), std::invalid_argument);
    r.waves[0].frequency_hz = ScalarMap{-1.0, {}, {}};
    EXPECT_THROW(synth_flowfield(Eigen::VectorXd::Zero(1), grid, uniform_times(8, 1e-4), r), std::invalid_argument);
}

TEST(Synth, DominantFrequencyRecoversBinAlignedTerm) {
    // 100 samples at 10 kHz: bins are 100 Hz apart.
    SynthRecipe r;
    r.mean = FilmProfile{5.0, 5.0, 1.0, 1.0, 0.0, 1.0, ScalarMap{}, ScalarMap{}};
    r.waves.push_back(WaveTerm{ScalarMap{3.0, {}, {}}, ScalarMap{700.0, {}, {}}, ScalarMap{0.4, {}, {}}, SpatialPattern{}});
    const Eigen::MatrixXd grid = make_structured_grid(3, 3, 0.0, 1.0, 0.0, 1.0);
    const SnapshotSet s = synth_flowfield(Eigen::VectorXd::Zero(1), grid, uniform_times(100, 1e-4), r);
    for (Eigen::Index j = 0; j < grid.rows(); ++j) {
        const Eigen::VectorXd row = s.field.row(j).transpose();
        const auto f = dominant_frequency(std::span<const double>(row.data(), row.size()), 1e-4);
        ASSERT_TRUE(f.has_value());
        EXPECT_NEAR(*f, 700.0, 1e-9);
    }
}

TEST(Synth, DeskRecipeKeepsAmplitudeRankingAndSmoothness) {
    const SynthRecipe r = desk_recipe();
    std::mt19937_64 rng(11);
    for (int i = 0; i < 200; ++i) {
        const Eigen::VectorXd z = oracle::uniform_matrix(rng, 3, 1);
        EXPECT_GT(r.waves[0].amplitude(z), r.waves[1].amplitude(z));
        EXPECT_GT(r.waves[1].amplitude(z), r.waves[2].amplitude(z));
    }
    DeskSampling ds;
    ds.snapshots = 10;
    const Eigen::MatrixXd grid = ds.grid();
    const Eigen::Vector3d x(47.0, 0.8, 2.1);
    const SnapshotSet a = synth_flowfield(x, grid, ds.times(), r);
    const SnapshotSet b = synth_flowfield(x + Eigen::Vector3d::Constant(1e-6), grid, ds.times(), r);
    EXPECT_LT((a.field - b.field).norm() / a.field.norm(), 1e-4);
}
