#include "kspod/pod_core.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>
#include <string>

#include <Eigen/Eigenvalues>

#include "kspod/binary_io.hpp"
#include "kspod/errors.hpp"

namespace kspod {
namespace {

constexpr std::string_view kTag = "KSPB1";

Eigen::VectorXd resolve_weights(const PodOptions& options, Eigen::Index J) {
    if (!options.weights) return Eigen::VectorXd::Ones(J);
    const Eigen::VectorXd& w = *options.weights;
    if (w.size() != J) {
        throw std::invalid_argument("quadrature weights have length " + std::to_string(w.size()) + ", grid has " +
                                    std::to_string(J) + " points");
    }
    if (!w.allFinite() || (w.array() <= 0.0).any()) {
        throw std::invalid_argument("quadrature weights must be positive and finite");
    }
    return w;
}

}  // namespace

Eigen::VectorXd PODBasis::energy_fractions() const {
    const double sum = eigenvalues.sum();
    if (!(sum > 0.0)) return Eigen::VectorXd::Zero(eigenvalues.size());
    return eigenvalues / sum;
}

Eigen::VectorXd PODBasis::cumulative_energy() const {
    Eigen::VectorXd f = energy_fractions();
    for (Eigen::Index k = 1; k < f.size(); ++k) f[k] += f[k - 1];
    return f;
}

double PODBasis::captured_energy() const {
    return total_energy > 0.0 ? eigenvalues.sum() / total_energy : 0.0;
}

PODBasis decompose(const Eigen::MatrixXd& field, const PodOptions& options) {
    const Eigen::Index J = field.rows();
    const Eigen::Index m = field.cols();
    if (J < 1) throw std::invalid_argument("decompose needs at least one grid point");
    if (m < 2) throw std::invalid_argument("decompose needs at least two snapshots");
    if (!field.allFinite()) throw std::invalid_argument("field contains non-finite values");

    PODBasis b;
    b.quadrature_weights = resolve_weights(options, J);

    Eigen::MatrixXd centered;
    const Eigen::MatrixXd* data = &field;
    if (options.centering) {
        b.mean_field = field.rowwise().mean();
        centered = field.colwise() - b.mean_field;
        data = &centered;
    }

    // Temporal Gram matrix under the weighted inner product.
    Eigen::MatrixXd gram = data->transpose() * (b.quadrature_weights.asDiagonal() * (*data));
    gram = 0.5 * (gram + gram.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gram);
    if (eig.info() != Eigen::Success) throw std::runtime_error("Gram eigen-decomposition failed");

    // Eigen returns ascending order; walk from the top.
    const Eigen::VectorXd& values = eig.eigenvalues();
    const double lambda_max = values[m - 1];
    Eigen::Index keep = 0;
    if (lambda_max > 0.0) {
        while (keep < m && values[m - 1 - keep] > kRankEpsilon * lambda_max) ++keep;
    }

    b.eigenvalues.resize(keep);
    Eigen::MatrixXd vectors(m, keep);
    for (Eigen::Index k = 0; k < keep; ++k) {
        b.eigenvalues[k] = values[m - 1 - k];
        vectors.col(k) = eig.eigenvectors().col(m - 1 - k);
    }
    const Eigen::ArrayXd root = b.eigenvalues.array().sqrt();

    b.modes = (*data) * vectors;
    for (Eigen::Index k = 0; k < keep; ++k) b.modes.col(k) /= root[k];
    b.coeffs = vectors;
    for (Eigen::Index k = 0; k < keep; ++k) b.coeffs.col(k) *= root[k];
    b.total_energy = b.eigenvalues.sum();
    return b;
}

PODBasis decompose(const SnapshotSet& s, const PodOptions& options) {
    if (options.weights && options.weights->size() != s.grid.rows()) {
        throw std::invalid_argument("quadrature weights do not match the grid");
    }
    return decompose(s.field, options);
}

std::size_t rank_for_energy(const PODBasis& b, double threshold) {
    if (!(threshold > 0.0 && threshold <= 1.0)) {
        throw std::invalid_argument("energy threshold must lie in (0, 1]");
    }
    if (b.rank() == 0) throw std::invalid_argument("basis has no modes");
    const Eigen::VectorXd cum = b.cumulative_energy();
    for (Eigen::Index k = 0; k < cum.size(); ++k) {
        if (cum[k] >= threshold - 1e-12) return static_cast<std::size_t>(k + 1);
    }
    return b.rank();
}

PODBasis truncate(const PODBasis& b, TruncationCriterion criterion) {
    std::size_t K = 0;
    if (const auto* t = std::get_if<EnergyThreshold>(&criterion)) {
        K = rank_for_energy(b, t->value);
    } else {
        K = std::get<ExplicitRank>(criterion).value;
        if (K == 0) throw std::invalid_argument("truncation rank must be at least 1");
        if (K > b.rank()) {
            throw std::invalid_argument("truncation rank " + std::to_string(K) + " exceeds the " +
                                        std::to_string(b.rank()) + " available modes");
        }
    }
    const auto k = static_cast<Eigen::Index>(K);
    PODBasis out;
    out.modes = b.modes.leftCols(k);
    out.coeffs = b.coeffs.leftCols(k);
    out.eigenvalues = b.eigenvalues.head(k);
    out.mean_field = b.mean_field;
    out.quadrature_weights = b.quadrature_weights;
    out.total_energy = b.total_energy;
    return out;
}

Eigen::MatrixXd reconstruct(const PODBasis& b, std::size_t K, std::span<const std::size_t> time_indices) {
    if (K > b.rank()) {
        throw std::invalid_argument("reconstruction rank " + std::to_string(K) + " exceeds the " +
                                    std::to_string(b.rank()) + " available modes");
    }
    const auto J = static_cast<Eigen::Index>(b.points());
    const auto k = static_cast<Eigen::Index>(K);
    Eigen::MatrixXd out(J, static_cast<Eigen::Index>(time_indices.size()));
    for (std::size_t c = 0; c < time_indices.size(); ++c) {
        const std::size_t q = time_indices[c];
        if (q >= b.snapshots()) {
            throw std::invalid_argument("time index " + std::to_string(q) + " out of range");
        }
        const auto col = static_cast<Eigen::Index>(c);
        out.col(col) = b.modes.leftCols(k) * b.coeffs.row(static_cast<Eigen::Index>(q)).head(k).transpose();
        if (b.centered()) out.col(col) += b.mean_field;
    }
    return out;
}

Eigen::MatrixXd reconstruct(const PODBasis& b, std::size_t K) {
    std::vector<std::size_t> all(b.snapshots());
    for (std::size_t q = 0; q < all.size(); ++q) all[q] = q;
    return reconstruct(b, K, all);
}

PODBasis align_modes(const PODBasis& reference, const PODBasis& target) {
    if (reference.points() != target.points()) {
        throw GridMismatchError("cannot align bases on different grids (" + std::to_string(reference.points()) +
                                " vs " + std::to_string(target.points()) + " points)");
    }
    if (reference.quadrature_weights.size() != target.quadrature_weights.size() ||
        reference.quadrature_weights != target.quadrature_weights) {
        throw GridMismatchError("cannot align bases with different quadrature weights");
    }
    if (target.rank() < 1) throw std::invalid_argument("target basis has no modes");

    PODBasis out = target;
    const auto K = static_cast<Eigen::Index>(std::min(reference.rank(), target.rank()));
    for (Eigen::Index k = 0; k < K; ++k) {
        const double inner =
            (reference.modes.col(k).array() * target.quadrature_weights.array() * target.modes.col(k).array()).sum();
        if (inner < 0.0) {
            out.modes.col(k) = -out.modes.col(k);
            out.coeffs.col(k) = -out.coeffs.col(k);
        }
    }
    return out;
}

std::vector<std::uint8_t> encode_basis(const PODBasis& b) {
    io::ByteWriter w;
    w.magic(kTag);
    w.u64(b.points());
    w.u64(b.snapshots());
    w.u64(b.rank());
    w.u64(b.centered() ? 1 : 0);
    w.f64(b.total_energy);
    w.vector(b.quadrature_weights);
    w.vector(b.eigenvalues);
    if (b.centered()) w.vector(b.mean_field);
    w.matrix(b.modes);
    w.matrix(b.coeffs);
    return std::move(w).take();
}

PODBasis decode_basis(std::span<const std::uint8_t> bytes, const std::string& context) {
    io::ByteReader r(bytes, context);
    r.expect_magic(kTag);
    const std::uint64_t J = r.u64();
    const std::uint64_t m = r.u64();
    const std::uint64_t K = r.u64();
    const std::uint64_t centered = r.u64();
    if (centered > 1) throw FormatError(FormatErrc::InvalidContent, context + ": bad centering flag");
    if (K > m) throw FormatError(FormatErrc::InvalidContent, context + ": rank exceeds snapshot count");

    PODBasis b;
    b.total_energy = r.f64();
    b.quadrature_weights = r.vector(J);
    b.eigenvalues = r.vector(K);
    if (centered) b.mean_field = r.vector(J);
    b.modes = r.matrix(J, K);
    b.coeffs = r.matrix(m, K);
    r.expect_end();
    return b;
}

void write_basis(const PODBasis& b, const std::filesystem::path& path) { io::write_file(path, encode_basis(b)); }

PODBasis read_basis(const std::filesystem::path& path) {
    const auto bytes = io::read_file(path);
    return decode_basis(bytes, path.string());
}

}  // namespace kspod
