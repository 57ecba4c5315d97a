#pragma once

// Dense matrix aliases and the column-wise vectorization helpers used by the
// Kronecker-form constraint assembly.

#include <Eigen/Dense>

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace qddc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Column-wise vectorization: vec(X)[i + j*rows] = X(i, j).
inline Vector vec(const Matrix& X) {
    return Eigen::Map<const Vector>(X.data(), X.size());
}

inline Matrix unvec(const Vector& x, Eigen::Index rows, Eigen::Index cols) {
    if (x.size() != rows * cols)
        throw std::invalid_argument("unvec: size mismatch");
    return Eigen::Map<const Matrix>(x.data(), rows, cols);
}

/// z = [vec(A); vec(B)], the coordinates the consistency polytope lives in.
inline Vector stack_plant(const Matrix& A, const Matrix& B) {
    Vector z(A.size() + B.size());
    z << vec(A), vec(B);
    return z;
}

inline Matrix kron(const Matrix& P, const Matrix& Q) {
    Matrix out(P.rows() * Q.rows(), P.cols() * Q.cols());
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j)
            out.block(i * Q.rows(), j * Q.cols(), Q.rows(), Q.cols()) = P(i, j) * Q;
    return out;
}

/// All sign vectors in {-1, 1}^n, in binary order: bit j of the index set
/// means alpha_j = +1, so index 0 is all -1.
inline std::vector<Vector> sign_vectors(int n) {
    if (n < 0 || n > 24)
        throw std::invalid_argument("sign_vectors: dimension out of range");
    std::vector<Vector> out;
    const std::size_t count = std::size_t{1} << n;
    out.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        Vector a(n);
        for (int j = 0; j < n; ++j)
            a(j) = (mask >> j) & 1U ? 1.0 : -1.0;
        out.push_back(std::move(a));
    }
    return out;
}

/// Vertices of prod_j {1 - delta_j, 1 + delta_j}, same binary order as
/// sign_vectors. Channels with delta_j = 0 still contribute two (equal)
/// entries so the count is always 2^m.
inline std::vector<Vector> beta_vertices(const Vector& delta) {
    std::vector<Vector> out;
    for (const Vector& s : sign_vectors(static_cast<int>(delta.size())))
        out.push_back(Vector::Ones(delta.size()) + s.cwiseProduct(delta));
    return out;
}

}  // namespace qddc
