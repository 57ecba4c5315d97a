#pragma once

// Known-plant quantized superstabilization: the M-form LP and the
// equivalent sign-enumerated LP.

#include "qddc/synthesis.hpp"

#include <stdexcept>

namespace qddc {

struct NominalProblem {
    LinearSystem sys;
    QuantizerSpec spec;
    Mode mode = Mode::SS;
    double eta = 1e-6;
    Objective objective = Objective::Feasibility;
};

struct NominalResult {
    SynthStatus status = SynthStatus::NumericalFailure;
    StabCertificate cert;
    ModelCounts counts;

    bool feasible() const { return status == SynthStatus::Feasible; }
};

namespace detail {

inline void check_problem(const NominalProblem& p) {
    if (p.spec.channels() != p.sys.m())
        throw std::invalid_argument("nominal synthesis: quantizer channels must equal m");
    if (!(p.eta >= 0.0))
        throw std::invalid_argument("nominal synthesis: eta must be nonnegative");
}

/// (A Y + B diag(beta) S)_ij as an expression in (v, S).
inline lp::LinExpr closed_loop_entry(const LinearSystem& sys, const std::vector<lp::LinExpr>& v,
                                     const lp::ExprMatrix& S, const Vector& beta, int i, int j) {
    lp::LinExpr e = sys.A(i, j) * v[static_cast<std::size_t>(j)];
    for (int k = 0; k < sys.m(); ++k)
        if (sys.B(i, k) != 0.0)
            e += (sys.B(i, k) * beta(k)) * S(k, j);
    return e;
}

/// Fills v, S, K, the tight M and the exact vertex gain from an LP solution.
inline void finish_nominal(const NominalProblem& p, const std::vector<lp::LinExpr>& v, const lp::ExprMatrix& S,
                           const Vector& x, NominalResult& r) {
    StabCertificate& c = r.cert;
    c.mode = p.mode;
    c.eta = p.eta;
    c.v = evaluate(v, x);
    c.S = S.evaluate(x);
    c.K = recover_controller(c.S, c.v);
    const Matrix AY = p.sys.A * c.v.asDiagonal();
    c.M = Matrix::Zero(p.sys.n(), p.sys.n());
    for (const Vector& beta : beta_vertices(p.spec.delta()))
        c.M = c.M.cwiseMax((AY + p.sys.B * beta.asDiagonal() * c.S).cwiseAbs());
    c.lambda = closed_loop_vertex_gain(p.sys, c.K, c.v, p.spec);
    c.status = "feasible";
}

inline SynthOptions options_of(const NominalProblem& p, const lp::Backend* backend) {
    SynthOptions o;
    o.mode = p.mode;
    o.eta = p.eta;
    o.objective = p.objective;
    o.backend = backend;
    return o;
}

}  // namespace detail

/// sum_j M_ij <= v_i - eta and -M <= A Y + B diag(beta) S <= M at every
/// sector vertex beta.
inline NominalResult synthesize_nominal_mform(const NominalProblem& p, const lp::Backend* backend = nullptr) {
    detail::check_problem(p);
    const int n = static_cast<int>(p.sys.n());
    const int m = static_cast<int>(p.sys.m());
    const auto betas = beta_vertices(p.spec.delta());

    std::vector<lp::LinExpr> v;
    lp::ExprMatrix S;
    auto build = [&](const RowBound& bound, lp::Model& model) {
        v = weight_exprs(model, n, p.mode, bound.weight_floor());
        S = free_matrix(model, m, n);
        const lp::ExprMatrix M = free_matrix(model, n, n);
        for (const Vector& beta : betas)
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j) {
                    const lp::LinExpr e = detail::closed_loop_entry(p.sys, v, S, beta, i, j);
                    model.add_le(e, M(i, j));
                    model.add_ge(e, -M(i, j));
                }
        for (int i = 0; i < n; ++i) {
            lp::LinExpr row;
            for (int j = 0; j < n; ++j)
                row += M(i, j);
            model.add_le(row, bound.rhs(v[static_cast<std::size_t>(i)]));
        }
    };
    auto extract = [&](const lp::Solution& sol, const lp::Model&, NominalResult& r) {
        detail::finish_nominal(p, v, S, sol.x, r);
    };
    return run_synthesis<NominalResult>(detail::options_of(p, backend), build, extract);
}

/// sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj) <= v_i - eta for every
/// row i, sign pattern alpha and sector vertex beta.
inline NominalResult synthesize_nominal_sign(const NominalProblem& p, const lp::Backend* backend = nullptr) {
    detail::check_problem(p);
    const int n = static_cast<int>(p.sys.n());
    const int m = static_cast<int>(p.sys.m());
    if (n + m > 20)
        throw std::length_error("synthesize_nominal_sign: n + m exceeds the enumeration guard (20)");
    const auto alphas = sign_vectors(n);
    const auto betas = beta_vertices(p.spec.delta());

    std::vector<lp::LinExpr> v;
    lp::ExprMatrix S;
    auto build = [&](const RowBound& bound, lp::Model& model) {
        v = weight_exprs(model, n, p.mode, bound.weight_floor());
        S = free_matrix(model, m, n);
        // Closed-loop entries per vertex, shared across sign patterns.
        std::vector<lp::ExprMatrix> entries;
        for (const Vector& beta : betas) {
            lp::ExprMatrix E(n, n);
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < n; ++j)
                    E(i, j) = detail::closed_loop_entry(p.sys, v, S, beta, i, j);
            entries.push_back(std::move(E));
        }
        for (const Vector& alpha : alphas)
            for (const lp::ExprMatrix& E : entries)
                for (int i = 0; i < n; ++i) {
                    lp::LinExpr row;
                    for (int j = 0; j < n; ++j)
                        row += alpha(j) * E(i, j);
                    model.add_le(row, bound.rhs(v[static_cast<std::size_t>(i)]));
                }
    };
    auto extract = [&](const lp::Solution& sol, const lp::Model&, NominalResult& r) {
        detail::finish_nominal(p, v, S, sol.x, r);
    };
    return run_synthesis<NominalResult>(detail::options_of(p, backend), build, extract);
}

}  // namespace qddc
