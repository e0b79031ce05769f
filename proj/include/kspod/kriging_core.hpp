#pragma once

// Ordinary kriging with a squared-exponential correlation: likelihood-based
// fitting of the length-scale parameters, the closed-form conditional-mean
// predictor, and kriging of indicator vectors for blending weights.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

namespace kspod {

struct CorrelationParams {
    std::vector<double> theta;  // one positive inverse squared length scale per input dimension
    double nugget = 1e-8;       // added to the correlation diagonal
};

/// exp(-sum_k theta_k (a_k - b_k)^2).
double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   std::span<const double> theta);
double correlation(const Eigen::Ref<const Eigen::VectorXd>& a, const Eigen::Ref<const Eigen::VectorXd>& b,
                   const CorrelationParams& params);

/// n x n correlation matrix of the rows of X, without nugget.
Eigen::MatrixXd correlation_matrix(const Eigen::MatrixXd& X, std::span<const double> theta);
/// Correlations between x and every row of X.
Eigen::VectorXd correlation_vector(const Eigen::MatrixXd& X, const Eigen::Ref<const Eigen::VectorXd>& x,
                                   std::span<const double> theta);

struct KrigingOptions {
    double nugget = 1e-8;
    double log_theta_min = -6.0;
    double log_theta_max = 6.0;
    int restarts = 8;
    /// Fit a single theta shared by every dimension.
    bool isotropic = false;
    /// Skip likelihood maximization and use these values.
    std::optional<std::vector<double>> theta;
};

/// Profile log-likelihood with mu and sigma^2 concentrated out:
///   -(n/2) log sigma2_hat - (1/2) log det(R + nugget I).
/// Returns -infinity when the correlation matrix cannot be factorized.
double profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const CorrelationParams& params);

/// Sum of profile log-likelihoods of the columns of Y under one shared theta.
double shared_profile_log_likelihood(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const CorrelationParams& params);

class KrigingModel {
public:
    /// Maximum-likelihood fit of theta in log space followed by the closed forms.
    static KrigingModel fit(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const KrigingOptions& options = {});
    /// Closed forms only, for known parameters.
    static KrigingModel with_params(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, CorrelationParams params);

    /// mu_hat + r^T R^-1 (y - 1 mu_hat).
    double predict(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }
    const Eigen::VectorXd& observations() const noexcept { return obs_; }
    const CorrelationParams& params() const noexcept { return params_; }
    double mu_hat() const noexcept { return mu_hat_; }
    double sigma2_hat() const noexcept { return sigma2_hat_; }
    double log_likelihood() const noexcept { return log_likelihood_; }
    std::size_t dims() const noexcept { return static_cast<std::size_t>(inputs_.cols()); }

private:
    Eigen::MatrixXd inputs_;
    Eigen::VectorXd obs_;
    CorrelationParams params_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
    Eigen::VectorXd alpha_;  // R^-1 (y - 1 mu_hat)
    double mu_hat_ = 0.0;
    double sigma2_hat_ = 0.0;
    double log_likelihood_ = 0.0;
};

/// Fits one theta maximizing the summed likelihood of all columns of Y, then
/// one model per column. Faster than per-column fits and used where outputs
/// share their input structure.
std::vector<KrigingModel> fit_shared(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const KrigingOptions& options = {});

/// Theta maximizing the summed profile likelihood of the columns of Y (one
/// value repeated over every dimension when options.isotropic).
std::vector<double> fit_shared_theta(const Eigen::MatrixXd& X, const Eigen::MatrixXd& Y,
                                     const KrigingOptions& options = {});

/// Kriging of the n indicator vectors e_i on a common theta. Weights satisfy
/// w(x_i) = e_i and sum to one; they are not clamped and may be negative.
class IndicatorKriging {
public:
    /// Isotropic theta maximizing the summed indicator likelihood, unless
    /// options.theta overrides it.
    static IndicatorKriging fit(const Eigen::MatrixXd& X, const KrigingOptions& options = {});
    static IndicatorKriging with_params(const Eigen::MatrixXd& X, CorrelationParams params);

    /// w_i = mu_i + r^T R^-1 (e_i - mu_i 1), mu_i = 1^T R^-1 e_i / 1^T R^-1 1.
    Eigen::VectorXd weights(const Eigen::Ref<const Eigen::VectorXd>& x) const;

    const CorrelationParams& params() const noexcept { return params_; }
    const Eigen::MatrixXd& inputs() const noexcept { return inputs_; }

private:
    Eigen::MatrixXd inputs_;
    CorrelationParams params_;
    Eigen::LLT<Eigen::MatrixXd> factor_;
    Eigen::VectorXd ones_solve_;  // R^-1 1
    double ones_quad_ = 0.0;      // 1^T R^-1 1
};

/// One-shot indicator weights for a given shared parameter set.
Eigen::VectorXd indicator_weights(const Eigen::MatrixXd& X, const CorrelationParams& params,
                                  const Eigen::Ref<const Eigen::VectorXd>& x_new);

// KSGP1: magic; u64 n, d; inputs (n x d, column-major); observations; theta;
// nugget; mu_hat; sigma2_hat. The factorization is rebuilt on load.
std::vector<std::uint8_t> encode_kriging(const KrigingModel& model);
KrigingModel decode_kriging(std::span<const std::uint8_t> bytes, const std::string& context = "KSGP1");
void write_kriging(const KrigingModel& model, const std::filesystem::path& path);
KrigingModel read_kriging(const std::filesystem::path& path);

}  // namespace kspod
