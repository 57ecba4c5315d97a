#pragma once

// Extended Farkas containment blocks:
//     {x | G1 x <= h1} subset of {x | G2 x <= h2}
//     iff  exists Z >= 0 with Z G1 = G2 and Z h1 <= h2,
// where G2 and h2 may be affine in other decision variables of the model.

#include "qddc/lp/ipm.hpp"
#include "qddc/lp/model.hpp"
#include "qddc/lp/polytope.hpp"

#include <stdexcept>
#include <vector>

namespace qddc::lp {

/// Adds Z in R_{>=0}^{L2 x L1} with Z G1 = G2 (L2*d equalities) and
/// Z h1 <= h2 (L2 inequalities). Zero entries of G1 are skipped when the
/// equalities are assembled.
inline FarkasBlock add_farkas_block(Model& model, const Matrix& G1, const Vector& h1,
                                    const ExprMatrix& G2, const std::vector<LinExpr>& h2) {
    const int L1 = static_cast<int>(G1.rows());
    const int d = static_cast<int>(G1.cols());
    const int L2 = G2.rows();
    if (h1.size() != L1 || G2.cols() != d || static_cast<int>(h2.size()) != L2)
        throw std::invalid_argument("add_farkas_block: dimension mismatch");

    FarkasBlock block;
    block.first_var = model.add_variables(L2 * L1, 0.0, kInf);
    block.rows = L2;
    block.cols = L1;

    // Column-wise sparsity of G1.
    std::vector<std::vector<std::pair<int, double>>> col(static_cast<std::size_t>(d));
    for (int l = 0; l < L1; ++l)
        for (int c = 0; c < d; ++c)
            if (G1(l, c) != 0.0)
                col[static_cast<std::size_t>(c)].emplace_back(l, G1(l, c));

    for (int r = 0; r < L2; ++r) {
        for (int c = 0; c < d; ++c) {
            LinExpr lhs;
            for (const auto& [l, g] : col[static_cast<std::size_t>(c)])
                lhs.add_term(block.var(r, l), g);
            model.add_eq(lhs, G2(r, c));
        }
        LinExpr zh;
        for (int l = 0; l < L1; ++l)
            zh.add_term(block.var(r, l), h1(l));
        model.add_le(zh, h2[static_cast<std::size_t>(r)]);
    }
    model.register_farkas_block(block);
    return block;
}

/// Constant right-hand polytope overload.
inline FarkasBlock add_farkas_block(Model& model, const Matrix& G1, const Vector& h1,
                                    const Matrix& G2, const Vector& h2) {
    std::vector<LinExpr> h2e;
    h2e.reserve(static_cast<std::size_t>(h2.size()));
    for (Eigen::Index i = 0; i < h2.size(); ++i)
        h2e.emplace_back(h2(i));
    return add_farkas_block(model, G1, h1, ExprMatrix::constant(G2), h2e);
}

/// Solves the containment certificate P1 subset of P2 as one model.
inline bool farkas_feasible(const Polytope& P1, const Polytope& P2, const Backend& backend = default_backend()) {
    Model model;
    add_farkas_block(model, P1.G, P1.h, P2.G, P2.h);
    return solve(model, backend).status == Status::Optimal;
}

/// Row-separable form of the same certificate: the block decouples by rows
/// of P2, so each face gets its own small model. h2 is relaxed by tol to
/// absorb solver tolerance on faces that touch P1 exactly.
inline bool farkas_contains(const Polytope& P1, const Polytope& P2, double tol = 1e-7,
                            const Backend& backend = default_backend()) {
    if (P1.dim() != P2.dim())
        throw std::invalid_argument("farkas_contains: dimension mismatch");
    for (Eigen::Index r = 0; r < P2.faces(); ++r) {
        Model model;
        Matrix g = P2.G.row(r);
        Vector h(1);
        h(0) = P2.h(r) + tol * (1.0 + std::abs(P2.h(r)));
        add_farkas_block(model, P1.G, P1.h, g, h);
        if (solve(model, backend).status != Status::Optimal)
            return false;
    }
    return true;
}

}  // namespace qddc::lp
