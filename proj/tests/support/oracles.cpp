#include "oracles.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <numbers>
#include <set>

namespace oracle {

Eigen::VectorXd singular_values(const Eigen::MatrixXd& A) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A);
    return svd.singularValues();
}

namespace {

double gauss(const Eigen::VectorXd& a, const Eigen::VectorXd& b, const std::vector<double>& theta) {
    double s = 0.0;
    for (Eigen::Index k = 0; k < a.size(); ++k) s += theta[static_cast<std::size_t>(k)] * (a[k] - b[k]) * (a[k] - b[k]);
    return std::exp(-s);
}

}  // namespace

Eigen::VectorXd kriging_weights(const Eigen::MatrixXd& X, const std::vector<double>& theta, double nugget,
                                const Eigen::VectorXd& x) {
    const Eigen::Index n = X.rows();
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(n + 1, n + 1);
    Eigen::VectorXd b(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) A(i, j) = gauss(X.row(i), X.row(j), theta);
        A(i, i) += nugget;
        A(i, n) = 1.0;
        A(n, i) = 1.0;
        b[i] = gauss(X.row(i), x, theta);
    }
    b[n] = 1.0;
    const Eigen::VectorXd sol = A.fullPivLu().solve(b);
    return sol.head(n);
}

double kriging_predict(const Eigen::MatrixXd& X, const Eigen::VectorXd& y, const std::vector<double>& theta,
                       double nugget, const Eigen::VectorXd& x) {
    return kriging_weights(X, theta, nugget, x).dot(y);
}

std::vector<double> dft_magnitudes(const std::vector<double>& series) {
    const std::size_t m = series.size();
    std::vector<double> out(m);
    for (std::size_t k = 0; k < m; ++k) {
        std::complex<double> acc = 0.0;
        for (std::size_t q = 0; q < m; ++q) {
            const double angle = -2.0 * std::numbers::pi * static_cast<double>((k * q) % m) / static_cast<double>(m);
            acc += series[q] * std::polar(1.0, angle);
        }
        out[k] = std::abs(acc);
    }
    return out;
}

bool occupies_distinct_bins(const Eigen::MatrixXd& points, int bins) {
    for (Eigen::Index c = 0; c < points.cols(); ++c) {
        std::set<long> seen;
        for (Eigen::Index r = 0; r < points.rows(); ++r) {
            const double v = points(r, c);
            if (!(v >= 0.0 && v < 1.0)) return false;
            seen.insert(static_cast<long>(std::floor(v * bins)));
        }
        if (static_cast<int>(seen.size()) != points.rows()) return false;
    }
    return true;
}

double trapezoid(const Eigen::VectorXd& f, double h) {
    if (f.size() < 2) return 0.0;
    return h * (f.sum() - 0.5 * (f[0] + f[f.size() - 1]));
}

std::filesystem::path scratch_dir(const std::string& name) {
    const char* base = std::getenv("KSPOD_TEST_TMP");
    std::filesystem::path dir = base ? std::filesystem::path(base) : std::filesystem::temp_directory_path() / "kspod_tests";
    dir /= name;
    std::filesystem::remove_all(dir);
    std::filesystem::create_directories(dir);
    return dir;
}

Eigen::MatrixXd uniform_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) m(r, c) = u(rng);
    }
    return m;
}

}  // namespace oracle
