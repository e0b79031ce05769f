#include "kspod/kspod_emulator.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <limits>
#include <stdexcept>
#include <string>

#include "kspod/errors.hpp"
#include "kspod/parallel.hpp"
#include "kspod/structured_grid.hpp"

namespace kspod {
namespace {

DesignRanges bounding_box(const Eigen::MatrixXd& design) {
    std::vector<Range> ranges;
    for (Eigen::Index k = 0; k < design.cols(); ++k) {
        double lo = design.col(k).minCoeff();
        double hi = design.col(k).maxCoeff();
        if (!(hi > lo)) hi = lo + 1.0;
        ranges.push_back({lo, hi, "x" + std::to_string(k + 1), ""});
    }
    return DesignRanges(std::move(ranges));
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

}  // namespace

const KrigingModel& EmulatorModel::coefficient_model(std::size_t k, std::size_t q) const {
    if (k >= rank_ || q >= snapshots()) throw std::out_of_range("coefficient model index out of range");
    return coeff_models_[k * snapshots() + q];
}

namespace {

// n x P matrix whose columns are the per-case values the weights blend: mean
// field entries (when centered) and aligned mode entries. Columns that do not
// vary across cases say nothing about theta and are dropped.
Eigen::MatrixXd blended_fields(const std::vector<PODBasis>& bases) {
    const auto n = static_cast<Eigen::Index>(bases.size());
    const Eigen::Index J = bases.front().modes.rows();
    const Eigen::Index K = bases.front().modes.cols();
    const bool centered = bases.front().centered();
    const Eigen::Index P = J * (K + (centered ? 1 : 0));
    Eigen::MatrixXd all(n, P);
    for (Eigen::Index i = 0; i < n; ++i) {
        const PODBasis& b = bases[static_cast<std::size_t>(i)];
        Eigen::Index c = 0;
        if (centered) {
            all.row(i).segment(c, J) = b.mean_field.transpose();
            c += J;
        }
        for (Eigen::Index k = 0; k < K; ++k, c += J) all.row(i).segment(c, J) = b.modes.col(k).transpose();
    }
    std::vector<Eigen::Index> keep;
    for (Eigen::Index p = 0; p < P; ++p) {
        const double lo = all.col(p).minCoeff();
        const double hi = all.col(p).maxCoeff();
        if (hi - lo > 1e-10 * (std::abs(hi) + std::abs(lo))) keep.push_back(p);
    }
    Eigen::MatrixXd out(n, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t c = 0; c < keep.size(); ++c) out.col(static_cast<Eigen::Index>(c)) = all.col(keep[c]);
    return out;
}

}  // namespace

EmulatorModel train_from_bases(const Eigen::MatrixXd& physical_design, std::vector<PODBasis> bases,
                               const Eigen::MatrixXd& grid, const Eigen::VectorXd& times,
                               const TrainOptions& options, std::vector<std::string> case_ids) {
    const std::size_t n = bases.size();
    if (n == 0) throw std::invalid_argument("training needs at least one case");
    if (static_cast<std::size_t>(physical_design.rows()) != n) {
        throw std::invalid_argument("design rows do not match the number of cases");
    }
    if (n == 1) {
        std::cerr << "warning: training on a single case; every prediction reproduces that case\n";
    }
    const auto J = static_cast<std::size_t>(grid.rows());
    const auto m = static_cast<std::size_t>(times.size());
    for (const auto& b : bases) {
        if (b.points() != J || b.snapshots() != m) {
            throw IncompatibleCasesError("per-case bases disagree with the shared grid or time vector");
        }
        if (b.quadrature_weights != bases.front().quadrature_weights) {
            throw IncompatibleCasesError("per-case bases use different quadrature weights");
        }
        if (b.centered() != options.centering) {
            throw std::invalid_argument("basis centering does not match the training options");
        }
    }

    EmulatorModel model;
    model.options_ = options;
    model.design_ = physical_design;
    model.ranges_ = options.ranges.dims() == 0 ? bounding_box(physical_design) : options.ranges;
    if (model.ranges_.dims() != static_cast<std::size_t>(physical_design.cols())) {
        throw std::invalid_argument("design ranges have " + std::to_string(model.ranges_.dims()) +
                                    " dimensions, cases have " + std::to_string(physical_design.cols()));
    }
    model.options_.ranges = model.ranges_;
    model.unit_design_ = unscale_design(physical_design, model.ranges_);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            if (model.unit_design_.row(static_cast<Eigen::Index>(i)) ==
                model.unit_design_.row(static_cast<Eigen::Index>(j))) {
                throw IncompatibleCasesError("cases " + std::to_string(i + 1) + " and " + std::to_string(j + 1) +
                                             " share the same design point");
            }
        }
    }
    model.grid_ = grid;
    model.times_ = times;
    model.centering_ = options.centering;
    if (case_ids.size() != n) {
        case_ids.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            if (case_ids[i].empty()) case_ids[i] = "case_" + std::to_string(i + 1);
        }
    }
    model.case_ids_ = std::move(case_ids);

    // Common rank.
    std::size_t K = 0;
    if (options.explicit_rank) {
        K = *options.explicit_rank;
        if (K == 0) throw std::invalid_argument("explicit rank must be at least 1");
        for (std::size_t i = 0; i < n; ++i) {
            if (K > bases[i].rank()) {
                throw std::invalid_argument("explicit rank " + std::to_string(K) + " exceeds the " +
                                            std::to_string(bases[i].rank()) + " modes of case " +
                                            model.case_ids_[i]);
            }
        }
    } else {
        K = std::numeric_limits<std::size_t>::max();
        for (const auto& b : bases) {
            if (b.rank() == 0) throw std::invalid_argument("a training case has no fluctuation energy");
            K = std::min(K, rank_for_energy(b, options.energy_threshold));
        }
    }
    model.rank_ = K;

    for (auto& b : bases) b = truncate(b, ExplicitRank{K});
    for (std::size_t i = 1; i < n; ++i) bases[i] = align_modes(bases[0], bases[i]);
    model.bases_ = std::move(bases);

    // Coefficient models on unit coordinates.
    const Eigen::MatrixXd& X = model.unit_design_;
    model.coeff_models_.resize(K * m);
    auto coeff_obs = [&](std::size_t k, std::size_t q) {
        Eigen::VectorXd y(static_cast<Eigen::Index>(n));
        for (std::size_t i = 0; i < n; ++i) {
            y[static_cast<Eigen::Index>(i)] =
                model.bases_[i].coeffs(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(k));
        }
        return y;
    };
    if (options.coefficient_theta == CoefficientTheta::PerFit) {
        parallel_for(K * m, [&](std::size_t idx) {
            const std::size_t k = idx / m;
            const std::size_t q = idx % m;
            model.coeff_models_[idx] = KrigingModel::fit(X, coeff_obs(k, q), options.coefficient_kriging);
        });
    } else {
        parallel_for(K, [&](std::size_t k) {
            Eigen::MatrixXd Y(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
            for (std::size_t q = 0; q < m; ++q) Y.col(static_cast<Eigen::Index>(q)) = coeff_obs(k, q);
            auto models = fit_shared(X, Y, options.coefficient_kriging);
            for (std::size_t q = 0; q < m; ++q) model.coeff_models_[k * m + q] = std::move(models[q]);
        });
    }

    KrigingOptions weight_options = options.weight_kriging;
    weight_options.isotropic = true;
    if (options.weight_theta == WeightTheta::Indicators || weight_options.theta) {
        model.weight_model_ = IndicatorKriging::fit(X, weight_options);
    } else {
        auto theta = fit_shared_theta(X, blended_fields(model.bases_), weight_options);
        model.weight_model_ = IndicatorKriging::with_params(X, {std::move(theta), weight_options.nugget});
    }
    return model;
}

EmulatorModel train(std::span<const SnapshotSet> cases, const TrainOptions& options,
                    std::span<const CaseMetadata> metadata) {
    if (cases.empty()) throw std::invalid_argument("training needs at least one case");
    if (!metadata.empty() && metadata.size() != cases.size()) {
        throw std::invalid_argument("metadata must have one entry per case");
    }

    std::vector<const SnapshotSet*> selected;
    if (options.cluster_filter.empty()) {
        for (const auto& c : cases) selected.push_back(&c);
    } else {
        if (metadata.empty()) throw std::invalid_argument("cluster filter requires per-case inlet velocities");
        for (std::size_t i = 0; i < cases.size(); ++i) {
            const Cluster c = assign_cluster(metadata[i].u_in);
            if (std::find(options.cluster_filter.begin(), options.cluster_filter.end(), c) !=
                options.cluster_filter.end()) {
                selected.push_back(&cases[i]);
            }
        }
        if (selected.empty()) throw std::invalid_argument("cluster filter removed every training case");
    }

    const SnapshotSet& first = *selected.front();
    for (const SnapshotSet* s : selected) {
        validate(*s);
        if (!same_grid(first, *s)) {
            throw IncompatibleCasesError("case '" + s->case_id + "' uses a different grid than '" + first.case_id + "'");
        }
        if (!same_times(first, *s)) {
            throw IncompatibleCasesError("case '" + s->case_id + "' uses a different time vector than '" +
                                         first.case_id + "'");
        }
        if (s->dims() != first.dims()) {
            throw IncompatibleCasesError("case '" + s->case_id + "' has a different design dimension");
        }
    }
    if (first.snapshots() < 2) throw std::invalid_argument("training needs at least two snapshots per case");

    const std::size_t n = selected.size();
    Eigen::MatrixXd design(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(first.dims()));
    std::vector<std::string> ids(n);
    for (std::size_t i = 0; i < n; ++i) {
        design.row(static_cast<Eigen::Index>(i)) = selected[i]->design.transpose();
        ids[i] = selected[i]->case_id;
    }

    PodOptions pod;
    pod.centering = options.centering;
    if (options.trapezoidal_weights) pod.weights = trapezoidal_weights(first.grid);

    std::vector<PODBasis> bases(n);
    parallel_for(n, [&](std::size_t i) { bases[i] = decompose(*selected[i], pod); });
    return train_from_bases(design, std::move(bases), first.grid, first.times, options, std::move(ids));
}

WeightVector kriging_weights(const EmulatorModel& model, const Eigen::VectorXd& x_new) {
    WeightVector w;
    w.raw = model.weight_model().weights(model.to_unit(x_new));
    const double sum = w.raw.sum();
    if (std::abs(sum) < kDegenerateWeightSum) {
        throw DegenerateWeightsError("indicator weights sum to " + std::to_string(sum) + " at the query point",
                                     to_std(x_new));
    }
    w.normalized = w.raw / sum;
    return w;
}

WeightVector nw_weights(const EmulatorModel& model, const Eigen::VectorXd& x_new, double theta) {
    if (!(theta > 0.0)) throw std::invalid_argument("kernel theta must be positive");
    const Eigen::VectorXd z = model.to_unit(x_new);
    const std::vector<double> iso(model.dims(), theta);
    WeightVector w;
    w.raw = correlation_vector(model.unit_design(), z, iso);
    const double sum = w.raw.sum();
    if (!(sum > 0.0)) {
        // Every kernel value underflowed; fall back to the log-domain softmax.
        Eigen::VectorXd logk(w.raw.size());
        for (Eigen::Index i = 0; i < logk.size(); ++i) {
            logk[i] = -theta * (model.unit_design().row(i).transpose() - z).squaredNorm();
        }
        const Eigen::ArrayXd shifted = (logk.array() - logk.maxCoeff()).exp();
        w.normalized = shifted / shifted.sum();
        return w;
    }
    w.normalized = w.raw / sum;
    return w;
}

Eigen::MatrixXd blend_modes(const EmulatorModel& model, const Eigen::VectorXd& raw_weights,
                            const Eigen::VectorXd& x_new) {
    if (static_cast<std::size_t>(raw_weights.size()) != model.cases()) {
        throw std::invalid_argument("weight vector length does not match the number of cases");
    }
    const double sum = raw_weights.sum();
    if (std::abs(sum) < kDegenerateWeightSum) {
        throw DegenerateWeightsError("blending weights sum to " + std::to_string(sum) + " at the query point",
                                     to_std(x_new));
    }
    const auto K = static_cast<Eigen::Index>(model.rank());
    Eigen::MatrixXd modes = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(model.points()), K);
    for (std::size_t i = 0; i < model.cases(); ++i) {
        modes += (raw_weights[static_cast<Eigen::Index>(i)] / sum) * model.bases()[i].modes;
    }
    return modes;
}

Eigen::MatrixXd predict_modes(const EmulatorModel& model, const Eigen::VectorXd& x_new) {
    const WeightVector w = kriging_weights(model, x_new);
    return blend_modes(model, w.raw, x_new);
}

Eigen::MatrixXd predict_coefficients(const EmulatorModel& model, const Eigen::VectorXd& x_new,
                                     std::span<const std::size_t> time_indices) {
    const Eigen::VectorXd z = model.to_unit(x_new);
    Eigen::MatrixXd beta(static_cast<Eigen::Index>(model.rank()), static_cast<Eigen::Index>(time_indices.size()));
    for (std::size_t c = 0; c < time_indices.size(); ++c) {
        if (time_indices[c] >= model.snapshots()) {
            throw std::invalid_argument("time index " + std::to_string(time_indices[c]) + " out of range");
        }
        for (std::size_t k = 0; k < model.rank(); ++k) {
            beta(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(c)) =
                model.coefficient_model(k, time_indices[c]).predict(z);
        }
    }
    return beta;
}

Eigen::MatrixXd predict_coefficients(const EmulatorModel& model, const Eigen::VectorXd& x_new) {
    std::vector<std::size_t> all(model.snapshots());
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
    return predict_coefficients(model, x_new, all);
}

Eigen::MatrixXd predict_field(const EmulatorModel& model, const Eigen::VectorXd& x_new,
                              std::span<const std::size_t> time_indices) {
    const WeightVector w = kriging_weights(model, x_new);
    const Eigen::MatrixXd modes = blend_modes(model, w.raw, x_new);
    const Eigen::MatrixXd beta = predict_coefficients(model, x_new, time_indices);
    Eigen::MatrixXd field = modes * beta;
    if (model.centered()) {
        Eigen::VectorXd mean = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.points()));
        for (std::size_t i = 0; i < model.cases(); ++i) {
            mean += w.normalized[static_cast<Eigen::Index>(i)] * model.bases()[i].mean_field;
        }
        field.colwise() += mean;
    }
    return field;
}

Eigen::MatrixXd predict_field(const EmulatorModel& model, const Eigen::VectorXd& x_new) {
    std::vector<std::size_t> all(model.snapshots());
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
    return predict_field(model, x_new, all);
}

std::string prediction_case_id(const Eigen::VectorXd& x_new) {
    std::uint64_t hash = 14695981039346656037ull;
    for (Eigen::Index k = 0; k < x_new.size(); ++k) {
        const auto bits = std::bit_cast<std::uint64_t>(x_new[k]);
        for (int b = 0; b < 8; ++b) {
            hash ^= (bits >> (8 * b)) & 0xffu;
            hash *= 1099511628211ull;
        }
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(hash));
    return std::string("predicted:") + buf;
}

SnapshotSet predict_snapshots(const EmulatorModel& model, const Eigen::VectorXd& x_new) {
    SnapshotSet s;
    s.case_id = prediction_case_id(x_new);
    s.design = x_new;
    s.grid = model.grid();
    s.times = model.times();
    s.field = predict_field(model, x_new);
    return s;
}

}  // namespace kspod
