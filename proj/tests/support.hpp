#pragma once

// Shared fixtures for the test suite.

#include "qddc/lp/ipm.hpp"
#include "qddc/lp/polytope.hpp"
#include "qddc/quantizer.hpp"
#include "qddc/sysmodel.hpp"

#include <random>

namespace qddc::testing {

inline Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            M(i, j) = d(rng);
    return M;
}

/// Box of half-width radius around the plant, optionally cut by a random
/// hyperplane through a point near the plant.
inline Polytope box_around(const LinearSystem& sys, double radius, std::mt19937_64* cut = nullptr) {
    const Vector z = stack_plant(sys.A, sys.B);
    Polytope box = Polytope::box(z.array() - radius, z.array() + radius);
    if (!cut)
        return box;
    const Eigen::Index d = z.size();
    Matrix G(box.faces() + 1, d);
    Vector h(box.faces() + 1);
    G.topRows(box.faces()) = box.G;
    h.head(box.faces()) = box.h;
    const Vector a = random_matrix(*cut, d, 1).col(0);
    G.row(box.faces()) = a.transpose();
    h(box.faces()) = a.dot(z) + 0.3 * radius * a.lpNorm<1>();
    return Polytope(G, h);
}

/// Ground truth by vertex enumeration: min lambda such that one (v = 1, S)
/// satisfies every sign row at every vertex plant of P and sector vertex.
/// Returns +inf when the LP fails.
inline double vertex_oracle_lambda(const Polytope& P, Eigen::Index m, const QuantizerSpec& spec) {
    const std::vector<Vector> verts = enumerate_vertices(P);
    Eigen::Index n = 1;
    while (n * (n + m) < P.dim())
        ++n;
    lp::Model model;
    const int lam = model.add_variable();
    const int s0 = model.add_variables(static_cast<int>(m * n));
    auto S = [&](Eigen::Index k, Eigen::Index j) { return lp::LinExpr::var(s0 + static_cast<int>(k * n + j)); };
    for (const Vector& z : verts) {
        const Matrix A = unvec(z.head(n * n), n, n);
        const Matrix B = unvec(z.tail(n * m), n, m);
        for (const Vector& alpha : sign_vectors(static_cast<int>(n)))
            for (const Vector& beta : beta_vertices(spec.delta()))
                for (Eigen::Index i = 0; i < n; ++i) {
                    lp::LinExpr row;
                    for (Eigen::Index j = 0; j < n; ++j) {
                        row += lp::LinExpr(alpha(j) * A(i, j));
                        for (Eigen::Index k = 0; k < m; ++k)
                            row += (alpha(j) * beta(k) * B(i, k)) * S(k, j);
                    }
                    model.add_le(row - lp::LinExpr::var(lam), 0.0);
                }
    }
    model.minimize(lp::LinExpr::var(lam));
    const lp::Solution sol = lp::solve(model);
    return sol.optimal() ? sol.x(lam) : std::numeric_limits<double>::infinity();
}

}  // namespace qddc::testing
