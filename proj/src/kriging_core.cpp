#include "kspod/kriging_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"

namespace kspod {
namespace {

constexpr std::string_view kTag = "KSGP1";
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kVarianceFloor = 1e-300;
// Largest training-point miss, relative to the output range, that the theta
// search accepts (a tenth of the interpolation tolerance).
constexpr double kInterpolationSlack = 1e-7;
constexpr double kInfeasible = -1e200;
constexpr double kWidestLogTheta = 20.0;

// Squared coordinate differences per dimension, reused across likelihood
// evaluations of one fit.
class PairwiseDistances {
public:
    explicit PairwiseDistances(const Eigen::MatrixXd& X) : n_(X.rows()) {
        for (Eigen::Index k = 0; k < X.cols(); ++k) {
            Eigen::MatrixXd sq(n_, n_);
            for (Eigen::Index i = 0; i < n_; ++i) {
                for (Eigen::Index j = 0; j < n_; ++j) {
                    const double diff = X(i, k) - X(j, k);
                    sq(i, j) = diff * diff;
                }
            }
            sq_.push_back(std::move(sq));
        }
    }

    Eigen::MatrixXd correlation(std::span<const double> theta, double nugget) const {
        Eigen::MatrixXd expo = Eigen::MatrixXd::Zero(n_, n_);
        for (std::size_t k = 0; k < sq_.size(); ++k) expo += theta[k] * sq_[k];
        Eigen::MatrixXd R = (-expo).array().exp().matrix();
        R.diagonal().array() += nugget;
        return R;
    }

    bool has_duplicates() const {
        for (Eigen::Index i = 0; i < n_; ++i) {
            for (Eigen::Index j = i + 1; j < n_; ++j) {
                double dist = 0.0;
                for (const auto& sq : sq_) dist += sq(i, j);
                if (dist == 0.0) return true;
            }
        }
        return false;
    }

private:
    Eigen::Index n_;
    std::vector<Eigen::MatrixXd> sq_;
};

// At a training point the nugget-regularized predictor misses y_i by exactly
// nugget * alpha_i. With `violation` set, reports the worst such miss relative
// to the column range, so the theta search can stay where the model still
// interpolates.
double shared_likelihood(const PairwiseDistances& pairs, const Eigen::MatrixXd& Y, std::span<const double> theta,
                         double nugget, double* violation = nullptr) {
    const Eigen::Index n = Y.rows();
    Eigen::LLT<Eigen::MatrixXd> llt(pairs.correlation(theta, nugget));
    if (llt.info() != Eigen::Success) return kNegInf;
    const Eigen::VectorXd diag = llt.matrixL().toDenseMatrix().diagonal();
    if ((diag.array() <= 0.0).any() || !diag.allFinite()) return kNegInf;
    const double log_det = 2.0 * diag.array().log().sum();

    const Eigen::VectorXd u = llt.solve(Eigen::VectorXd::Ones(n));
    const double s = u.sum();
    if (!(s > 0.0) || !std::isfinite(s)) return kNegInf;
    const Eigen::MatrixXd A = llt.solve(Y);

    double ll = 0.0;
    for (Eigen::Index p = 0; p < Y.cols(); ++p) {
        const double mu = u.dot(Y.col(p)) / s;
        const Eigen::VectorXd res = Y.col(p).array() - mu;
        const double sigma2 = res.dot(A.col(p) - mu * u) / static_cast<double>(n);
        ll += -0.5 * static_cast<double>(n) * std::log(std::max(sigma2, kVarianceFloor));
        if (violation) {
            const double range = Y.col(p).maxCoeff() - Y.col(p).minCoeff();
            if (range > 0.0) {
                const double miss = nugget * (A.col(p) - mu * u).cwiseAbs().maxCoeff();
                *violation = std::max(*violation, miss / (kInterpolationSlack * range));
            }
        }
    }
    ll -= 0.5 * static_cast<double>(Y.cols()) * log_det;
    return std::isfinite(ll) ? ll : kNegInf;
}

// Greedy coordinate pattern search maximizing f over the box, halving the step
// whenever no coordinate move improves.
template <class F>
double pattern_search(const F& f, std::vector<double>& x, double fx, double step, double min_step, double lo,
                      double hi, int& budget) {
    while (step >= min_step && budget > 0) {
        bool improved = false;
        for (std::size_t k = 0; k < x.size() && !improved; ++k) {
            for (double sign : {1.0, -1.0}) {
                std::vector<double> y = x;
                y[k] = std::clamp(x[k] + sign * step, lo, hi);
                if (y[k] == x[k]) continue;
                const double fy = f(y);
                --budget;
                if (fy > fx) {
                    x = std::move(y);
                    fx = fy;
                    improved = true;
                    break;
                }
            }
        }
        if (!improved) step *= 0.5;
    }
    return fx;
}

// Multi-start coarse search in log-theta space, then local refinement of the
// best start. Start points are a fixed rotated lattice, so fits are
// deterministic.
template <class F>
std::vector<double> maximize_log_theta(const F& f, std::size_t dim, const KrigingOptions& opt, double& best_value) {
    const double lo = opt.log_theta_min;
    const double hi = opt.log_theta_max;
    if (!(lo < hi)) throw std::invalid_argument("log-theta bounds must satisfy min < max");
    const int starts = std::max(1, opt.restarts);
    constexpr double kGolden = 0.6180339887498949;

    std::vector<double> best_x(dim, 0.5 * (lo + hi));
    best_value = kNegInf;
    for (int s = 0; s < starts; ++s) {
        std::vector<double> x(dim);
        for (std::size_t k = 0; k < dim; ++k) {
            const double frac = std::fmod((s + 0.5) / starts + static_cast<double>(k) * kGolden, 1.0);
            x[k] = lo + (hi - lo) * frac;
        }
        int budget = 400;
        const double fx = pattern_search(f, x, f(x), (hi - lo) / 8.0, 0.1, lo, hi, budget);
        if (s == 0 || fx > best_value) {
            best_value = fx;
            best_x = x;
        }
    }
    if (best_value > kNegInf) {
        int budget = 400;
        best_value = pattern_search(f, best_x, best_value, 0.1, 1e-3, lo, hi, budget);
    }
    return best_x;
}

std::vector<double> exp_all(const std::vector<double>& log_theta, std::size_t dims) {
    std::vector<double> theta(dims);
    for (std::size_t k = 0; k < dims; ++k) theta[k] = std::exp(log_theta.size() == 1 ? log_theta[0] : log_theta[k]);
    return theta;
}

void check_inputs(const Eigen::MatrixXd& X) {
    if (X.rows() < 1) throw std::invalid_argument("kriging needs at least one input point");
    if (X.cols() < 1) throw std::invalid_argument("kriging inputs need at least one dimension");
    if (!X.allFinite()) throw std::invalid_argument("kriging inputs must be finite");
}

void check_params(const CorrelationParams& params, std::size_t d) {
    if (params.theta.size() != d) {
        throw std::invalid_argument("theta has " + std::to_string(params.theta.size()) + " entries, inputs have " +
                                    std::to_string(d) + " dimensions");
    }
    for (double t : params.theta) {
        if (!(t > 0.0) || !std::isfinite(t)) throw std::invalid_argument("theta entries must be positive and finite");
    }
    if (!(params.nugget >= 0.0) || !std::isfinite(params.nugget)) {
        throw std::invalid_argument("nugget must be nonnegative");
    }
}

std::vector<double> fit_theta(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y, const KrigingOptions& options,
                              bool isotropic) {
    const auto d = static_cast<std::size_t>(X.cols());
    if (options.theta) {
        std::vector<double> theta = *options.theta;
        if (theta.size() == 1 && d > 1) theta.assign(d, theta[0]);
        return theta;
    }
    const PairwiseDistances pairs(X);
    if (options.nugget == 0.0 && pairs.has_duplicates()) {
        throw IllConditionedError("duplicate design points make the correlation matrix singular without a nugget");
    }
    const bool constant = ((Y.rowwise() - Y.row(0)).array() == 0.0).all();
    if (X.rows() == 1 || constant) {
        // The likelihood carries no information about theta here.
        return std::vector<double>(d, std::exp(0.5 * (options.log_theta_min + options.log_theta_max)));
    }

    const std::size_t dim = isotropic ? 1 : d;
    auto objective = [&](const std::vector<double>& log_theta) {
        const auto theta = exp_all(log_theta, d);
        double violation = 0.0;
        const double ll = shared_likelihood(pairs, Y, theta, options.nugget, &violation);
        if (ll == kNegInf || violation <= 1.0) return ll;
        // Below every feasible value, graded so the search still moves
        // towards interpolation when nothing qualifies.
        return kInfeasible * (1.0 + std::log10(violation));
    };
    double best = kNegInf;
    auto log_theta = maximize_log_theta(objective, dim, options, best);
    // Nearly coincident inputs with unrelated outputs can need shorter length
    // scales than the box allows before the nugget stops smoothing. Widen the
    // upper bound only in that case.
    KrigingOptions wider = options;
    while (best != kNegInf && best <= kInfeasible && wider.log_theta_max < kWidestLogTheta) {
        wider.log_theta_min = wider.log_theta_max;
        wider.log_theta_max += 2.0;
        double wider_best = kNegInf;
        auto candidate = maximize_log_theta(objective, dim, wider, wider_best);
        if (wider_best > best) {
            best = wider_best;
            log_theta = std::move(candidate);
        }
    }
    if (best == kNegInf) {
        throw FitError("likelihood maximization found no factorizable correlation matrix", exp_all(log_theta, d));
    }
    return exp_all(log_theta, d);
}

}  // namespace

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   std::span<const double> theta) {
    if (a.size() != b.size() || static_cast<std::size_t>(a.size()) != theta.size()) {
        throw std::invalid_argument("correlation: dimension mismatch");
    }
    double expo = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) {
        const double diff = a[k] - b[k];
        expo += theta[static_cast<std::size_t>(k)] * diff * diff;
    }
    return std::exp(-expo);
}

double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const CorrelationParams& params) {
    return correlation(a, b, params.theta);
}

Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& X, std::span<const double> theta) {
    return PairwiseDistances(X).correlation(theta, 0.0);
}

Eigen::VectorXd correlation_vector(const Eigen::MatrixXd& X, const Eigen::Ref<const Eigen::VectorXd>& x,
                                   std::span<const double> theta) {
    if (x.size() != X.cols() || theta.size() != static_cast<std::size_t>(X.cols())) {
        throw std::invalid_argument("query has " + std::to_string(x.size()) + " dimensions, model has " +
                                    std::to_string(X.cols()));
    }
    Eigen::VectorXd r(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        double expo = 0.0;
        for (Eigen::Index k = 0; k < X.cols(); ++k) {
            const double diff = X(i, k) - x[k];
            expo += theta[static_cast<std::size_t>(k)] * diff * diff;
        }
        r[i] = std::exp(-expo);
    }
    return r;
}

double profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CorrelationParams& params) {
    check_inputs(X);
    check_params(params, static_cast<std::size_t>(X.cols()));
    return shared_likelihood(PairwiseDistances(X), y, params.theta, params.nugget);
}

double shared_profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const CorrelationParams& params) {
    check_inputs(X);
    check_params(params, static_cast<std::size_t>(X.cols()));
    return shared_likelihood(PairwiseDistances(X), Y, params.theta, params.nugget);
}

KrigingModel KrigingModel::fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KrigingOptions& options) {
    check_inputs(X);
    if (y.size() != X.rows()) throw std::invalid_argument("observation count does not match input rows");
    if (!y.allFinite()) throw std::invalid_argument("observations must be finite");
    auto theta = fit_theta(X, y, options, options.isotropic);
    return with_params(X, y, {std::move(theta), options.nugget});
}

KrigingModel KrigingModel::with_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, CorrelationParams params) {
    check_inputs(X);
    check_params(params, static_cast<std::size_t>(X.cols()));
    if (y.size() != X.rows()) throw std::invalid_argument("observation count does not match input rows");
    if (!y.allFinite()) throw std::invalid_argument("observations must be finite");

    KrigingModel m;
    m.inputs_ = X;
    m.obs_ = y;
    m.params_ = std::move(params);
    const PairwiseDistances pairs(X);
    if (m.params_.nugget == 0.0 && pairs.has_duplicates()) {
        throw IllConditionedError("duplicate design points make the correlation matrix singular without a nugget");
    }
    m.factor_.compute(pairs.correlation(m.params_.theta, m.params_.nugget));
    if (m.factor_.info() != Eigen::Success) {
        throw IllConditionedError("correlation matrix is not positive definite; increase the nugget");
    }
    const Eigen::Index n = X.rows();
    const Eigen::VectorXd u = m.factor_.solve(Eigen::VectorXd::Ones(n));
    m.mu_hat_ = u.dot(y) / u.sum();
    const Eigen::VectorXd res = y.array() - m.mu_hat_;
    m.alpha_ = m.factor_.solve(res);
    m.sigma2_hat_ = std::max(0.0, res.dot(m.alpha_) / static_cast<double>(n));
    if (!m.alpha_.allFinite() || !std::isfinite(m.mu_hat_)) {
        throw IllConditionedError("correlation solve produced non-finite values");
    }
    m.log_likelihood_ = shared_likelihood(pairs, y, m.params_.theta, m.params_.nugget);
    return m;
}

double KrigingModel::predict(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    return mu_hat_ + correlation_vector(inputs_, x, params_.theta).dot(alpha_);
}

std::vector<KrigingModel> fit_shared(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const KrigingOptions& options) {
    check_inputs(X);
    if (Y.rows() != X.rows()) throw std::invalid_argument("observation rows do not match input rows");
    if (!Y.allFinite()) throw std::invalid_argument("observations must be finite");
    const auto theta = fit_theta(X, Y, options, options.isotropic);
    std::vector<KrigingModel> out;
    out.reserve(static_cast<std::size_t>(Y.cols()));
    for (Eigen::Index p = 0; p < Y.cols(); ++p) {
        out.push_back(KrigingModel::with_params(X, Y.col(p), {theta, options.nugget}));
    }
    return out;
}

std::vector<double> fit_shared_theta(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const KrigingOptions& options) {
    check_inputs(X);
    if (Y.rows() != X.rows()) throw std::invalid_argument("observation rows do not match input rows");
    if (!Y.allFinite()) throw std::invalid_argument("observations must be finite");
    return fit_theta(X, Y, options, options.isotropic);
}

IndicatorKriging IndicatorKriging::fit(const Eigen::MatrixXd& X, const KrigingOptions& options) {
    check_inputs(X);
    const Eigen::MatrixXd indicators = Eigen::MatrixXd::Identity(X.rows(), X.rows());
    auto theta = fit_theta(X, indicators, options, /*isotropic=*/true);
    return with_params(X, {std::move(theta), options.nugget});
}

IndicatorKriging IndicatorKriging::with_params(const Eigen::MatrixXd& X, CorrelationParams params) {
    check_inputs(X);
    check_params(params, static_cast<std::size_t>(X.cols()));
    IndicatorKriging k;
    k.inputs_ = X;
    k.params_ = std::move(params);
    const PairwiseDistances pairs(X);
    if (k.params_.nugget == 0.0 && pairs.has_duplicates()) {
        throw IllConditionedError("duplicate design points make the correlation matrix singular without a nugget");
    }
    k.factor_.compute(pairs.correlation(k.params_.theta, k.params_.nugget));
    if (k.factor_.info() != Eigen::Success) {
        throw IllConditionedError("indicator correlation matrix is not positive definite; increase the nugget");
    }
    k.ones_solve_ = k.factor_.solve(Eigen::VectorXd::Ones(X.rows()));
    k.ones_quad_ = k.ones_solve_.sum();
    if (!(k.ones_quad_ > 0.0) || !k.ones_solve_.allFinite()) {
        throw IllConditionedError("indicator correlation solve produced unusable values");
    }
    return k;
}

Eigen::VectorXd IndicatorKriging::weights(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    // Summing the n predictors gives w = R^-1 r + (1 - r^T R^-1 1) R^-1 1 / (1^T R^-1 1).
    const Eigen::VectorXd r = correlation_vector(inputs_, x, params_.theta);
    const Eigen::VectorXd a = factor_.solve(r);
    return a + ((1.0 - r.dot(ones_solve_)) / ones_quad_) * ones_solve_;
}

Eigen::VectorXd indicator_weights(const Eigen::MatrixXd& X, const CorrelationParams& params,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_new) {
    return IndicatorKriging::with_params(X, params).weights(x_new);
}

std::vector<std::uint8_t> encode_kriging(const KrigingModel& model) {
    io::ByteWriter w;
    w.magic(kTag);
    w.u64(static_cast<std::uint64_t>(model.inputs().rows()));
    w.u64(static_cast<std::uint64_t>(model.inputs().cols()));
    w.matrix(model.inputs());
    w.vector(model.observations());
    w.f64s(model.params().theta);
    w.f64(model.params().nugget);
    w.f64(model.mu_hat());
    w.f64(model.sigma2_hat());
    return std::move(w).take();
}

KrigingModel decode_kriging(std::span<const std::uint8_t> bytes, const std::string& context) {
    io::ByteReader r(bytes, context);
    r.expect_magic(kTag);
    const std::uint64_t n = r.u64();
    const std::uint64_t d = r.u64();
    if (n == 0 || d == 0) throw FormatError(FormatErrc::InvalidContent, context + ": empty model");
    Eigen::MatrixXd X = r.matrix(n, d);
    Eigen::VectorXd y = r.vector(n);
    CorrelationParams params;
    params.theta = r.f64s(d);
    params.nugget = r.f64();
    r.f64();  // mu_hat, recomputed
    r.f64();  // sigma2_hat, recomputed
    r.expect_end();
    try {
        return KrigingModel::with_params(X, y, std::move(params));
    } catch (const std::invalid_argument& e) {
        throw FormatError(FormatErrc::InvalidContent, context + ": " + e.what());
    }
}

void write_kriging(const KrigingModel& model, const std::filesystem::path& path) {
    io::write_file(path, encode_kriging(model));
}

KrigingModel read_kriging(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return decode_kriging(bytes, path.string());
}

}  // namespace kspod
