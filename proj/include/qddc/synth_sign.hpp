#pragma once

// Data-driven sign-enumerated robust LP: one Farkas block per pair
// (alpha, beta), certifying that every plant in the consistency polytope
// satisfies sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj) <= v_i - eta.

#include "qddc/lp/farkas.hpp"
#include "qddc/lp/polytope.hpp"
#include "qddc/synthesis.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace qddc {

struct SignRows {
    lp::ExprMatrix G;             // n x n(n+m), acts on [vec(A); vec(B)]
    std::vector<lp::LinExpr> h;   // v - eta
};

/// Row i of G, applied to z = [vec(A); vec(B)], equals
/// sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj).
inline SignRows build_sign_polytope_rows(const std::vector<lp::LinExpr>& v, const lp::ExprMatrix& S,
                                         const Vector& alpha, const Vector& beta, double eta = 0.0) {
    const int n = static_cast<int>(v.size());
    const int m = S.rows();
    if (alpha.size() != n || beta.size() != m || (m > 0 && S.cols() != n))
        throw std::invalid_argument("build_sign_polytope_rows: dimension mismatch");
    for (int j = 0; j < n; ++j)
        if (std::abs(alpha(j)) != 1.0)
            throw std::invalid_argument("build_sign_polytope_rows: alpha entries must be +1 or -1");
    for (int k = 0; k < m; ++k)
        if (!(beta(k) >= 0.0 && beta(k) <= 2.0))
            throw std::invalid_argument("build_sign_polytope_rows: beta entries must lie in [0, 2]");

    // (diag(beta) S alpha)_k, shared by every row.
    std::vector<lp::LinExpr> bsa(static_cast<std::size_t>(m));
    for (int k = 0; k < m; ++k)
        for (int j = 0; j < n; ++j)
            bsa[static_cast<std::size_t>(k)] += (beta(k) * alpha(j)) * S(k, j);

    SignRows out;
    out.G = lp::ExprMatrix(n, n * (n + m));
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            out.G(i, i + j * n) = alpha(j) * v[static_cast<std::size_t>(j)];
        for (int k = 0; k < m; ++k)
            out.G(i, n * n + i + k * n) = bsa[static_cast<std::size_t>(k)];
        out.h.push_back(v[static_cast<std::size_t>(i)] - lp::LinExpr(eta));
    }
    return out;
}

struct SignResult {
    SynthStatus status = SynthStatus::NumericalFailure;
    StabCertificate cert;
    ModelCounts counts;
    std::vector<Matrix> Z;  // one n x L block per (alpha, beta), alpha outer

    bool feasible() const { return status == SynthStatus::Feasible; }
};

/// Expected model sizes; scalar variables include v (ESS), S, an optional
/// lambda variable, and every Farkas multiplier.
inline ModelCounts count_constraints_sign(long n, long m, long L, Mode mode = Mode::SS,
                                          Objective objective = Objective::Feasibility) {
    const long blocks = 1L << (n + m);
    ModelCounts c;
    c.robust_inequalities = n * blocks;
    c.farkas_variables = n * L * blocks;
    c.equality_constraints = n * n * (n + m) * blocks;
    c.inequality_constraints = n * blocks;
    c.scalar_variables = c.farkas_variables + m * n + (mode == Mode::ESS ? n : 0) +
                         (objective == Objective::MinimizeLambda && mode == Mode::SS ? 1 : 0);
    return c;
}

/// Certified gain max over blocks and rows of (Z h_D)_i / v_i.
inline double sign_certified_lambda(const std::vector<Matrix>& Z, const Vector& hD, const Vector& v) {
    double lambda = 0.0;
    for (const Matrix& Zb : Z)
        lambda = std::max(lambda, (Zb * hD).cwiseQuotient(v).maxCoeff());
    return lambda;
}

inline SignResult synthesize_sign(const Polytope& P, const QuantizerSpec& spec, const SynthOptions& opt = {}) {
    if (P.faces() == 0)
        throw std::invalid_argument("synthesize_sign: polytope has no faces");
    const int m = static_cast<int>(spec.channels());
    const int n = plant_states(P.dim(), m);
    if (n + m > 20)
        throw std::length_error("synthesize_sign: n + m exceeds the enumeration guard (20)");
    const auto alphas = sign_vectors(n);
    const auto betas = beta_vertices(spec.delta());

    std::vector<lp::LinExpr> v;
    lp::ExprMatrix S;
    auto build = [&](const RowBound& bound, lp::Model& model) {
        v = weight_exprs(model, n, opt.mode, bound.weight_floor());
        S = free_matrix(model, m, n);
        std::vector<lp::LinExpr> rhs;
        for (int i = 0; i < n; ++i)
            rhs.push_back(bound.rhs(v[static_cast<std::size_t>(i)]));
        for (const Vector& alpha : alphas)
            for (const Vector& beta : betas) {
                const SignRows rows = build_sign_polytope_rows(v, S, alpha, beta);
                lp::add_farkas_block(model, P.G, P.h, rows.G, rhs);
            }
    };
    auto extract = [&](const lp::Solution& sol, const lp::Model& model, SignResult& r) {
        StabCertificate& c = r.cert;
        c.mode = opt.mode;
        c.eta = opt.eta;
        c.v = evaluate(v, sol.x);
        c.S = S.evaluate(sol.x);
        c.K = recover_controller(c.S, c.v);
        for (const lp::FarkasBlock& b : model.farkas_blocks())
            r.Z.push_back(b.value(sol.x).cwiseMax(0.0));
        c.lambda = sign_certified_lambda(r.Z, P.h, c.v);
        c.status = "feasible";
    };
    return run_synthesis<SignResult>(opt, build, extract);
}

}  // namespace qddc
