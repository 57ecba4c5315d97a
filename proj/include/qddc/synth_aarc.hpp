#pragma once

// Affinely adjustable robust counterpart: the bound matrix M is restricted to
// vec(M(A, B)) = m0 + ma vec(A) + mb vec(B), which removes the enumeration
// over sign patterns and keeps only the 2^m sector vertices.

#include "qddc/lp/farkas.hpp"
#include "qddc/lp/polytope.hpp"
#include "qddc/synthesis.hpp"

#include <stdexcept>
#include <vector>

namespace qddc {

struct AffineMParam {
    Vector m0;  // n^2
    Matrix ma;  // n^2 x n^2, column i + j*n multiplies A_ij
    Matrix mb;  // n^2 x n*m, column i + k*n multiplies B_ik
};

/// M0 + sum_ij M^A_ij A_ij + sum_ik M^B_ik B_ik.
inline Matrix eval_affine_M(const AffineMParam& p, const Matrix& A, const Matrix& B) {
    const Eigen::Index n = A.rows();
    const Eigen::Index nn = n * n;
    if (A.cols() != n || B.rows() != n || p.m0.size() != nn || p.ma.rows() != nn || p.ma.cols() != nn ||
        p.mb.rows() != nn || p.mb.cols() != B.size())
        throw std::invalid_argument("eval_affine_M: dimension mismatch");
    Matrix M = unvec(p.m0, n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < n; ++i)
            M += unvec(p.ma.col(i + j * n), n, n) * A(i, j);
    for (Eigen::Index k = 0; k < B.cols(); ++k)
        for (Eigen::Index i = 0; i < n; ++i)
            M += unvec(p.mb.col(i + k * n), n, n) * B(i, k);
    return M;
}

struct AarcResult {
    SynthStatus status = SynthStatus::NumericalFailure;
    StabCertificate cert;
    AffineMParam M;
    ModelCounts counts;
    Matrix ZM;               // n x L, row-sum block
    std::vector<Matrix> Zb;  // 2n^2 x L per sector vertex

    bool feasible() const { return status == SynthStatus::Feasible; }
};

inline ModelCounts count_constraints_aarc(long n, long m, long L, Mode mode = Mode::SS,
                                          Objective objective = Objective::Feasibility) {
    const long rows = n + 2 * n * n * (1L << m);
    ModelCounts c;
    c.robust_inequalities = rows;
    c.farkas_variables = rows * L;
    c.equality_constraints = rows * n * (n + m);
    c.inequality_constraints = rows;
    c.scalar_variables = c.farkas_variables + m * n + n * n + n * n * n * n + n * n * n * m +
                         (mode == Mode::ESS ? n : 0) +
                         (objective == Objective::MinimizeLambda && mode == Mode::SS ? 1 : 0);
    return c;
}

inline AarcResult synthesize_aarc(const Polytope& P, const QuantizerSpec& spec, const SynthOptions& opt = {}) {
    if (P.faces() == 0)
        throw std::invalid_argument("synthesize_aarc: polytope has no faces");
    const int m = static_cast<int>(spec.channels());
    if (m > 20)
        throw std::length_error("synthesize_aarc: m exceeds the enumeration guard (20)");
    const int n = plant_states(P.dim(), m);
    const int nn = n * n;
    const int d = n * (n + m);
    const auto betas = beta_vertices(spec.delta());

    std::vector<lp::LinExpr> v;
    lp::ExprMatrix S, m0, ma, mb;
    auto build = [&](const RowBound& bound, lp::Model& model) {
        v = weight_exprs(model, n, opt.mode, bound.weight_floor());
        S = free_matrix(model, m, n);
        m0 = free_matrix(model, nn, 1);
        ma = free_matrix(model, nn, nn);
        mb = free_matrix(model, nn, n * m);

        // Row sums: (1' (x) I_n)[ma, mb] z <= rhs(v_i) - sum_j m0_{i + j n}.
        lp::ExprMatrix GM(n, d);
        std::vector<lp::LinExpr> hM;
        for (int i = 0; i < n; ++i) {
            lp::LinExpr h = bound.rhs(v[static_cast<std::size_t>(i)]);
            for (int j = 0; j < n; ++j) {
                const int r = i + j * n;
                h -= m0(r, 0);
                for (int c = 0; c < nn; ++c)
                    GM(i, c) += ma(r, c);
                for (int c = 0; c < n * m; ++c)
                    GM(i, nn + c) += mb(r, c);
            }
            hM.push_back(std::move(h));
        }
        lp::add_farkas_block(model, P.G, P.h, GM, hM);

        // Envelope -M(A,B) <= A Y + B diag(beta) S <= M(A,B), lower rows first.
        for (const Vector& beta : betas) {
            lp::ExprMatrix G(2 * nn, d);
            std::vector<lp::LinExpr> h;
            for (int side = 0; side < 2; ++side) {
                const double sgn = side == 0 ? -1.0 : 1.0;
                for (int r = 0; r < nn; ++r) {
                    const int ir = r % n, jr = r / n;
                    const int row = side * nn + r;
                    for (int c = 0; c < nn; ++c)
                        G(row, c) = -ma(r, c);
                    G(row, r) += sgn * v[static_cast<std::size_t>(jr)];
                    for (int c = 0; c < n * m; ++c)
                        G(row, nn + c) = -mb(r, c);
                    for (int k = 0; k < m; ++k)
                        G(row, nn + ir + k * n) += (sgn * beta(k)) * S(k, jr);
                    h.push_back(m0(r, 0));
                }
            }
            lp::add_farkas_block(model, P.G, P.h, G, h);
        }
    };
    auto extract = [&](const lp::Solution& sol, const lp::Model& model, AarcResult& r) {
        StabCertificate& c = r.cert;
        c.mode = opt.mode;
        c.eta = opt.eta;
        c.v = evaluate(v, sol.x);
        c.S = S.evaluate(sol.x);
        c.K = recover_controller(c.S, c.v);
        r.M.m0 = m0.evaluate(sol.x).col(0);
        r.M.ma = ma.evaluate(sol.x);
        r.M.mb = mb.evaluate(sol.x);
        const auto& blocks = model.farkas_blocks();
        r.ZM = blocks.front().value(sol.x).cwiseMax(0.0);
        for (std::size_t b = 1; b < blocks.size(); ++b)
            r.Zb.push_back(blocks[b].value(sol.x).cwiseMax(0.0));
        const Vector m0rows = unvec(r.M.m0, n, n).rowwise().sum();
        c.lambda = ((r.ZM * P.h + m0rows).cwiseQuotient(c.v)).maxCoeff();
        c.status = "feasible";
    };
    return run_synthesis<AarcResult>(opt, build, extract);
}

}  // namespace qddc
