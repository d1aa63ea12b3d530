#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "deimos/activity.hpp"
#include "deimos/container.hpp"
#include "deimos/errors.hpp"

namespace deimos {

/// Dominant orthonormal component basis of an activity matrix. Columns
/// are left singular vectors of the raw (uncentered) matrix in
/// descending singular-value order, with a deterministic sign: in each
/// column the entry of largest magnitude is positive (ties broken by
/// lowest row index).
struct OrthonormalBasis {
    Eigen::MatrixXd components;        // x by r, orthonormal columns
    Eigen::VectorXd singular_values;   // length r, non-increasing
    Eigen::VectorXd variance_fraction; // sigma_i^2 / ||A||_F^2
    std::int64_t source_rows = 0;      // x
    std::int64_t source_cols = 0;      // k
    double total_squared_norm = 0.0;   // ||A||_F^2

    std::int64_t rank() const { return components.cols(); }

    void validate() const {
        if (components.cols() != singular_values.size() ||
            components.cols() != variance_fraction.size())
            throw argument_error("basis: inconsistent component/value sizes");
        if (components.rows() != source_rows)
            throw argument_error("basis: component rows disagree with source dimensions");
        for (Eigen::Index i = 0; i + 1 < singular_values.size(); ++i)
            if (singular_values(i) < singular_values(i + 1))
                throw argument_error("basis: singular values not sorted");
        if (singular_values.size() > 0 && singular_values(singular_values.size() - 1) < 0.0)
            throw argument_error("basis: negative singular value");
    }
};

namespace detail {

// Largest-magnitude entry of a vector; ties resolve to the lowest index.
inline Eigen::Index argmax_abs(const Eigen::Ref<const Eigen::VectorXd>& v) {
    Eigen::Index best = 0;
    double best_abs = std::abs(v(0));
    for (Eigen::Index i = 1; i < v.size(); ++i) {
        const double a = std::abs(v(i));
        if (a > best_abs) {
            best_abs = a;
            best = i;
        }
    }
    return best;
}

inline void apply_sign_convention(Eigen::MatrixXd& u) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        const Eigen::Index i = argmax_abs(u.col(j));
        if (u(i, j) < 0.0) u.col(j) = -u.col(j);
    }
}

} // namespace detail

// Components with sigma_i / sigma_1 below this are numerical noise and
// are discarded.
inline constexpr double basis_rank_tolerance = 1e-12;

/// Compute the dominant component basis of a raw data matrix. The
/// decomposition runs through a thin QR of the tall matrix followed by
/// an SVD of the small triangular factor, which keeps the columns
/// orthonormal to machine precision for any conditioning.
inline OrthonormalBasis compute_basis(const Eigen::MatrixXd& a, std::int64_t max_rank) {
    const Eigen::Index x = a.rows();
    const Eigen::Index k = a.cols();
    if (x == 0 || k == 0) throw argument_error("compute_basis: empty matrix");
    const Eigen::Index p = std::min(x, k);
    if (max_rank < 1 || max_rank > p)
        throw argument_error("compute_basis: max_rank must be in [1, min(x, k)] = [1, " +
                             std::to_string(p) + "], got " + std::to_string(max_rank));

    const double total = a.squaredNorm();
    if (total == 0.0) throw degenerate_error("compute_basis: matrix is all zero, no components exist");

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(a);
    const Eigen::MatrixXd thin_q = qr.householderQ() * Eigen::MatrixXd::Identity(x, p);
    const Eigen::MatrixXd r =
        qr.matrixQR().topRows(p).template triangularView<Eigen::Upper>();

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeThinU);
    const Eigen::VectorXd& sigma = svd.singularValues();

    Eigen::Index rank = 0;
    while (rank < std::min<Eigen::Index>(max_rank, sigma.size()) &&
           sigma(rank) >= sigma(0) * basis_rank_tolerance)
        ++rank;
    if (rank == 0) throw degenerate_error("compute_basis: no components above noise threshold");

    OrthonormalBasis basis;
    basis.components = thin_q * svd.matrixU().leftCols(rank);
    detail::apply_sign_convention(basis.components);
    basis.singular_values = sigma.head(rank);
    basis.variance_fraction = sigma.head(rank).array().square() / total;
    basis.source_rows = x;
    basis.source_cols = k;
    basis.total_squared_norm = total;
    return basis;
}

inline OrthonormalBasis compute_basis(const ActivityMatrix& a, std::int64_t max_rank) {
    return compute_basis(a.as_real(), max_rank);
}

/// Cumulative variance captured by the first q components. The
/// denominator is the full squared Frobenius norm of the source matrix,
/// so truncated bases report less than 1 even at q = rank().
inline double explained_variance(const OrthonormalBasis& basis, std::int64_t q) {
    if (q < 1 || q > basis.rank())
        throw argument_error("explained_variance: q must be in [1, " +
                             std::to_string(basis.rank()) + "], got " + std::to_string(q));
    const double captured = basis.singular_values.head(q).squaredNorm();
    return std::min(1.0, captured / basis.total_squared_norm);
}

/// Rank-q orthogonal projection U_q U_q^T M: the best rank-q
/// reconstruction of M in the Frobenius norm when M is the source
/// matrix. Reference point for sensor-based reconstructions.
inline Eigen::MatrixXd project(const OrthonormalBasis& basis, std::int64_t q,
                               const Eigen::MatrixXd& m) {
    if (q < 1 || q > basis.rank())
        throw argument_error("project: q must be in [1, " + std::to_string(basis.rank()) +
                             "], got " + std::to_string(q));
    if (m.rows() != basis.components.rows())
        throw argument_error("project: matrix has " + std::to_string(m.rows()) +
                             " rows, basis has " + std::to_string(basis.components.rows()));
    const auto u = basis.components.leftCols(q);
    return u * (u.transpose() * m);
}

inline Eigen::MatrixXd project(const OrthonormalBasis& basis, std::int64_t q,
                               const ActivityMatrix& m) {
    return project(basis, q, m.as_real());
}

inline void save_basis(const OrthonormalBasis& basis, const std::string& path) {
    basis.validate();
    std::vector<double> sv(basis.singular_values.data(),
                           basis.singular_values.data() + basis.singular_values.size());
    std::vector<double> vf(basis.variance_fraction.data(),
                           basis.variance_fraction.data() + basis.variance_fraction.size());
    const std::uint32_t crc = detail::write_payload(path, basis.components);
    nlohmann::json extra{{"singular_values", sv},
                         {"variance_fraction", vf},
                         {"source_rows", basis.source_rows},
                         {"source_cols", basis.source_cols},
                         {"total_squared_norm", basis.total_squared_norm}};
    detail::write_sidecar(path, detail::base_meta("basis", "f64", basis.components.rows(),
                                                  basis.components.cols(), crc, std::move(extra)));
}

inline OrthonormalBasis load_basis(const std::string& path) {
    const nlohmann::json meta = detail::load_sidecar(path, "basis");
    OrthonormalBasis basis;
    try {
        const auto rows = meta.at("rows").get<std::int64_t>();
        const auto cols = meta.at("cols").get<std::int64_t>();
        basis.components = detail::read_payload<double>(
            path, rows, cols, meta.at("payload_crc32").get<std::uint32_t>());
        const auto sv = meta.at("singular_values").get<std::vector<double>>();
        const auto vf = meta.at("variance_fraction").get<std::vector<double>>();
        if (static_cast<std::int64_t>(sv.size()) != cols ||
            static_cast<std::int64_t>(vf.size()) != cols)
            throw format_error("container: basis metadata arrays disagree with payload width");
        basis.singular_values = Eigen::Map<const Eigen::VectorXd>(sv.data(), sv.size());
        basis.variance_fraction = Eigen::Map<const Eigen::VectorXd>(vf.data(), vf.size());
        basis.source_rows = meta.at("source_rows").get<std::int64_t>();
        basis.source_cols = meta.at("source_cols").get<std::int64_t>();
        basis.total_squared_norm = meta.at("total_squared_norm").get<double>();
    } catch (const nlohmann::json::exception& e) {
        throw format_error(std::string("container: sidecar is incomplete: ") + e.what());
    }
    basis.validate();
    return basis;
}

} // namespace deimos
