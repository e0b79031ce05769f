#include <string>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"
#include "kspod/kspod_emulator.hpp"

namespace kspod {
namespace {

constexpr std::string_view kTag = "KSEM1";

}  // namespace

// KSEM1 layout, all little-endian:
//   magic "KSEM1\n"
//   u64 n, d, J, m, K, centering, trapezoidal, coefficient_theta, explicit_rank (0 = none)
//   f64 energy_threshold, coefficient nugget, weight nugget
//   d x (lower, upper) ranges; n x d physical design (column-major)
//   J (x, r) grid pairs; m times; J quadrature weights
//   d weight-model theta values
//   per case: f64 total_energy, K eigenvalues, [J mean], J x K modes, m x K coefficients
//   K * m * d coefficient-model theta values, index (k * m + q) * d + dim
std::vector<std::uint8_t> encode_emulator(const EmulatorModel& model) {
    const std::size_t n = model.cases();
    const std::size_t d = model.dims();
    const std::size_t m = model.snapshots();
    const std::size_t K = model.rank();
    const TrainOptions& opt = model.options();

    io::ByteWriter w;
    w.magic(kTag);
    w.u64(n);
    w.u64(d);
    w.u64(model.points());
    w.u64(m);
    w.u64(K);
    w.u64(model.centered() ? 1 : 0);
    w.u64(opt.trapezoidal_weights ? 1 : 0);
    w.u64(static_cast<std::uint64_t>(opt.coefficient_theta));
    w.u64(opt.explicit_rank.value_or(0));
    w.f64(opt.energy_threshold);
    w.f64(opt.coefficient_kriging.nugget);
    w.f64(model.weight_model().params().nugget);
    for (const auto& r : model.ranges().ranges()) {
        w.f64(r.lower);
        w.f64(r.upper);
    }
    w.matrix(model.design());
    for (Eigen::Index j = 0; j < model.grid().rows(); ++j) {
        w.f64(model.grid()(j, 0));
        w.f64(model.grid()(j, 1));
    }
    w.vector(model.times());
    w.vector(model.bases().front().quadrature_weights);
    w.f64s(model.weight_model().params().theta);
    for (const auto& b : model.bases()) {
        w.f64(b.total_energy);
        w.vector(b.eigenvalues);
        if (model.centered()) w.vector(b.mean_field);
        w.matrix(b.modes);
        w.matrix(b.coeffs);
    }
    for (std::size_t k = 0; k < K; ++k) {
        for (std::size_t q = 0; q < m; ++q) w.f64s(model.coefficient_model(k, q).params().theta);
    }
    return std::move(w).take();
}

EmulatorModel decode_emulator(std::span<const std::uint8_t> bytes, const std::string& context) {
    io::ByteReader r(bytes, context);
    r.expect_magic(kTag);
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    const std::uint64_t J = r.u64();
    const std::uint64_t m = r.u64();
    const std::uint64_t K = r.u64();
    const std::uint64_t centering = r.u64();
    const std::uint64_t trapezoidal = r.u64();
    const std::uint64_t coeff_mode = r.u64();
    const std::uint64_t explicit_rank = r.u64();
    if (n == 0 || d == 0 || J == 0 || m < 2 || K == 0 || K > m || centering > 1 || trapezoidal > 1 ||
        coeff_mode > 1) {
        throw FormatError(FormatErrc::InvalidContent, context + ": inconsistent header");
    }
    // Lower bound on the payload, so corrupt counts fail before allocating.
    r.require_f64s(r.checked_product(n, r.checked_product(J, K)));
    r.require_f64s(r.checked_product(K, r.checked_product(m, d)));

    EmulatorModel model;
    TrainOptions& opt = model.options_;
    opt.centering = centering == 1;
    opt.trapezoidal_weights = trapezoidal == 1;
    opt.coefficient_theta = static_cast<CoefficientTheta>(coeff_mode);
    if (explicit_rank != 0) opt.explicit_rank = explicit_rank;
    opt.energy_threshold = r.f64();
    opt.coefficient_kriging.nugget = r.f64();
    const double weight_nugget = r.f64();
    opt.weight_kriging.nugget = weight_nugget;

    std::vector<Range> ranges;
    for (std::uint64_t k = 0; k < d; ++k) {
        const double lo = r.f64();
        const double hi = r.f64();
        ranges.push_back({lo, hi, "x" + std::to_string(k + 1), ""});
    }
    try {
        model.ranges_ = DesignRanges(std::move(ranges));
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatErrc::InvalidContent, context + ": " + e.what());
    }
    opt.ranges = model.ranges_;
    model.design_ = r.matrix(n, d);
    model.unit_design_ = unscale_design(model.design_, model.ranges_);
    model.grid_.resize(static_cast<Eigen::Index>(J), 2);
    for (Eigen::Index j = 0; j < model.grid_.rows(); ++j) {
        model.grid_(j, 0) = r.f64();
        model.grid_(j, 1) = r.f64();
    }
    model.times_ = r.vector(m);
    const Eigen::VectorXd weights = r.vector(J);
    std::vector<double> weight_theta = r.f64s(d);
    model.rank_ = K;
    model.centering_ = opt.centering;

    for (std::uint64_t i = 0; i < n; ++i) {
        PODBasis b;
        b.total_energy = r.f64();
        b.eigenvalues = r.vector(K);
        if (opt.centering) b.mean_field = r.vector(J);
        b.modes = r.matrix(J, K);
        b.coeffs = r.matrix(m, K);
        b.quadrature_weights = weights;
        model.bases_.push_back(std::move(b));
        model.case_ids_.push_back("case_" + std::to_string(i + 1));
    }

    try {
        model.coeff_models_.reserve(K * m);
        for (std::uint64_t k = 0; k < K; ++k) {
            for (std::uint64_t q = 0; q < m; ++q) {
                Eigen::VectorXd y(static_cast<Eigen::Index>(n));
                for (std::uint64_t i = 0; i < n; ++i) {
                    y[static_cast<Eigen::Index>(i)] =
                        model.bases_[i].coeffs(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k));
                }
                CorrelationParams params{r.f64s(d), opt.coefficient_kriging.nugget};
                model.coeff_models_.push_back(KrigingModel::with_params(model.unit_design_, y, std::move(params)));
            }
        }
        r.expect_end();
        model.weight_model_ =
            IndicatorKriging::with_params(model.unit_design_, {std::move(weight_theta), weight_nugget});
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatErrc::InvalidContent, context + ": " + e.what());
    }
    return model;
}

void write_emulator(const EmulatorModel& model, const std::filesystem::path& path) {
    io::write_file(path, encode_emulator(model));
}

EmulatorModel read_emulator(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return decode_emulator(bytes, path.string());
}

}  // namespace kspod
