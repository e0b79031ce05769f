#include <cmath>
#include <stdexcept>
#include <string>

#include <gtest/gtest.h>

#include "kspod/design_kit.hpp"
#include "oracles.hpp"

using namespace kspod;

TEST(RecommendedSampleSize, TenPerParameter) {
    EXPECT_EQ(recommended_sample_size(3), 30);
    EXPECT_EQ(recommended_sample_size(1), 10);
    EXPECT_THROW(recommended_sample_size(0), std::invalid_argument);
    EXPECT_THROW(recommended_sample_size(-2), std::invalid_argument);
}

TEST(Slhd, FiveSlicesOfSixInThreeDims) {
    const DesignMatrix d = generate_slhd(5, 6, 3, 0);
    ASSERT_EQ(d.n(), 30u);
    ASSERT_EQ(d.dims(), 3u);
    EXPECT_EQ(d.slices(), 5);
    EXPECT_TRUE(oracle::occupies_distinct_bins(d.points, 30));
}

TEST(Slhd, SinglePoint) {
    const DesignMatrix d = generate_slhd(1, 1, 1, 7);
    ASSERT_EQ(d.n(), 1u);
    EXPECT_GE(d.points(0, 0), 0.0);
    EXPECT_LT(d.points(0, 0), 1.0);
}

TEST(Slhd, EachSliceIsALatinHypercube) {
    const DesignMatrix d = generate_slhd(2, 3, 2, 1);
    for (int s = 1; s <= 2; ++s) {
        Eigen::MatrixXd slice(3, 2);
        int row = 0;
        for (std::size_t i = 0; i < d.n(); ++i) {
            if (d.slice_id[i] == s) slice.row(row++) = d.points.row(static_cast<Eigen::Index>(i));
        }
        ASSERT_EQ(row, 3);
        EXPECT_TRUE(oracle::occupies_distinct_bins(slice, 3)) << "slice " << s;
    }
}

TEST(Slhd, StratificationHoldsAcrossShapes) {
    for (int s = 1; s <= 10; ++s) {
        for (int q = 1; q * s <= 100; q += 3) {
            for (int dims : {1, 2, 4, 6}) {
                const DesignMatrix d = generate_slhd(s, q, dims, static_cast<std::uint64_t>(s * 131 + q * 7 + dims));
                ASSERT_TRUE(oracle::occupies_distinct_bins(d.points, s * q)) << s << "x" << q << " d=" << dims;
                for (int sl = 1; sl <= s; ++sl) {
                    Eigen::MatrixXd slice(q, dims);
                    int row = 0;
                    for (std::size_t i = 0; i < d.n(); ++i) {
                        if (d.slice_id[i] == sl) slice.row(row++) = d.points.row(static_cast<Eigen::Index>(i));
                    }
                    ASSERT_EQ(row, q);
                    ASSERT_TRUE(oracle::occupies_distinct_bins(slice, q)) << s << "x" << q << " slice " << sl;
                }
            }
        }
    }
}

TEST(Slhd, DeterministicForSeed) {
    const DesignMatrix a = generate_slhd(5, 6, 3, 42);
    const DesignMatrix b = generate_slhd(5, 6, 3, 42);
    const DesignMatrix c = generate_slhd(5, 6, 3, 43);
    EXPECT_EQ(a.points, b.points);
    EXPECT_EQ(a.slice_id, b.slice_id);
    EXPECT_NE(a.points, c.points);
}

TEST(Slhd, RejectsNonPositiveShape) {
    EXPECT_THROW(generate_slhd(0, 3, 2, 0), std::invalid_argument);
    EXPECT_THROW(generate_slhd(2, 0, 2, 0), std::invalid_argument);
    EXPECT_THROW(generate_slhd(2, 3, 0, 0), std::invalid_argument);
}

TEST(ScaleDesign, TableTwoThetaRange) {
    const DesignRanges r = swirl_injector_ranges();
    Eigen::MatrixXd unit(3, 3);
    unit << 0.0, 0.0, 0.0, 1.0, 1.0, 1.0, 0.5, 0.5, 0.5;
    const Eigen::MatrixXd phys = scale_design(unit, r);
    EXPECT_DOUBLE_EQ(phys(0, 0), 35.0);
    EXPECT_DOUBLE_EQ(phys(1, 0), 62.2);
    EXPECT_NEAR(phys(2, 0), 48.6, 1e-12);
    EXPECT_DOUBLE_EQ(phys(1, 1), 1.53);
    EXPECT_DOUBLE_EQ(phys(0, 2), 0.85);
}

TEST(ScaleDesign, InverseIsIdentity) {
    std::mt19937_64 rng(3);
    const DesignRanges r = swirl_injector_ranges();
    const Eigen::MatrixXd unit = oracle::uniform_matrix(rng, 50, 3);
    const Eigen::MatrixXd back = unscale_design(scale_design(unit, r), r);
    EXPECT_LE((back - unit).norm(), 1e-12 * unit.norm());
}

TEST(ScaleDesign, DimensionMismatchThrows) {
    EXPECT_THROW(scale_design(Eigen::MatrixXd::Zero(2, 2), swirl_injector_ranges()), std::invalid_argument);
}

TEST(DesignRanges, RequiresIncreasingBounds) {
    EXPECT_THROW(DesignRanges({{1.0, 1.0, "a", ""}}), std::invalid_argument);
    EXPECT_THROW(DesignRanges({{2.0, 1.0, "a", ""}}), std::invalid_argument);
}

TEST(GeometricConstant, Examples) {
    EXPECT_DOUBLE_EQ(swirl_geometric_constant({2.0, 2.0, 1.5, 1.5}), 1.0);
    EXPECT_DOUBLE_EQ(swirl_geometric_constant({2.0, 3.0, 3.0, 2.0}), 1.0);
    EXPECT_NEAR(swirl_geometric_constant({6.0, 1.2, 0.85, 4.5}), 6.0 * 0.85 / (1.2 * 4.5), 1e-15);
    EXPECT_NEAR(swirl_geometric_constant({6.0, 1.2, 0.85, 4.5}), 0.944444444444, 1e-11);
    EXPECT_THROW(swirl_geometric_constant({0.0, 1.0, 1.0, 1.0}), std::invalid_argument);
    EXPECT_THROW(swirl_geometric_constant({1.0, 1.0, -1.0, 1.0}), std::invalid_argument);
}

TEST(GeometricConstant, ScaleInvariant) {
    const GeometrySpec g{6.0, 1.2, 0.85, 4.5};
    for (double c : {0.1, 3.0, 1e4}) {
        EXPECT_NEAR(swirl_geometric_constant({c * 6.0, c * 1.2, 0.85, 4.5}), swirl_geometric_constant(g), 1e-14);
        EXPECT_NEAR(swirl_geometric_constant({6.0, 1.2, c * 0.85, c * 4.5}), swirl_geometric_constant(g), 1e-14);
    }
}

TEST(AssignCluster, Breakpoints) {
    EXPECT_EQ(assign_cluster(40.43), Cluster::D);
    EXPECT_EQ(assign_cluster(6.42), Cluster::A);
    EXPECT_EQ(assign_cluster(19.53), Cluster::C);
    EXPECT_EQ(assign_cluster(9.999), Cluster::A);
    EXPECT_EQ(assign_cluster(10.0), Cluster::B);
    EXPECT_EQ(assign_cluster(18.0), Cluster::C);
    EXPECT_EQ(assign_cluster(25.0), Cluster::D);
    EXPECT_THROW(assign_cluster(0.0), std::invalid_argument);
    EXPECT_THROW(assign_cluster(-1.0), std::invalid_argument);
}

TEST(AssignCluster, ReferenceDesignLabels) {
    const double u_in[30] = {40.43, 12.35, 11.79, 6.42,  8.58,  5.71, 19.53, 19.35, 10.43, 6.89,
                             7.19,  8.63,  21.87, 11.25, 12.06, 7.63, 6.60,  8.15,  35.58, 12.19,
                             10.89, 8.35,  6.24,  7.17,  18.27, 19.51, 13.84, 8.18,  9.36,  5.99};
    const std::string labels = "DBBAAACCBAAACBBAAADBBAAACCBAAA";
    int counts[4] = {0, 0, 0, 0};
    for (int i = 0; i < 30; ++i) {
        EXPECT_EQ(to_char(assign_cluster(u_in[i])), labels[static_cast<std::size_t>(i)]) << "case " << i + 1;
        ++counts[static_cast<int>(assign_cluster(u_in[i]))];
    }
    EXPECT_EQ(counts[0], 15);
    EXPECT_EQ(counts[1], 8);
    EXPECT_EQ(counts[2], 5);
    EXPECT_EQ(counts[3], 2);
}

TEST(DesignCsv, RoundTripAndHeader) {
    const DesignMatrix d = generate_slhd(2, 3, 2, 5);
    const std::string text = design_to_csv(d);
    EXPECT_EQ(text.substr(0, text.find('\n')), "slice,x1,x2");
    const DesignMatrix back = design_from_csv(text);
    EXPECT_EQ(back.points, d.points);
    EXPECT_EQ(back.slice_id, d.slice_id);

    const auto dir = oracle::scratch_dir("design_csv");
    write_design_csv(d, dir / "d.csv");
    EXPECT_EQ(read_design_csv(dir / "d.csv").points, d.points);
}
