#pragma once

// Pieces shared by the nominal, sign-based and AARC synthesizers.

#include "qddc/lp/ipm.hpp"
#include "qddc/lp/model.hpp"
#include "qddc/sysmodel.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

namespace qddc {

enum class Objective { Feasibility, MinimizeLambda };

enum class SynthStatus { Feasible, Infeasible, NumericalFailure };

inline std::string to_string(SynthStatus s) {
    switch (s) {
    case SynthStatus::Feasible: return "feasible";
    case SynthStatus::Infeasible: return "infeasible";
    case SynthStatus::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

inline SynthStatus from_lp(lp::Status s) {
    switch (s) {
    case lp::Status::Optimal: return SynthStatus::Feasible;
    case lp::Status::Infeasible: return SynthStatus::Infeasible;
    default: return SynthStatus::NumericalFailure;
    }
}

struct SynthOptions {
    Mode mode = Mode::SS;
    double eta = 1e-6;
    Objective objective = Objective::Feasibility;
    double lambda_tol = 1e-4;  // bisection tolerance for ESS lambda minimization
    const lp::Backend* backend = nullptr;

    const lp::Backend& solver() const { return backend ? *backend : lp::default_backend(); }
};

/// Sizes of an assembled synthesis model.
struct ModelCounts {
    long robust_inequalities = 0;  // rows of all Farkas blocks (or plain rows for nominal)
    long farkas_variables = 0;
    long scalar_variables = 0;
    long equality_constraints = 0;
    long inequality_constraints = 0;

    bool operator==(const ModelCounts&) const = default;
};

inline ModelCounts introspect(const lp::Model& model) {
    ModelCounts c;
    for (const lp::FarkasBlock& b : model.farkas_blocks()) {
        c.robust_inequalities += b.rows;
        c.farkas_variables += static_cast<long>(b.rows) * b.cols;
    }
    c.scalar_variables = model.num_variables();
    c.equality_constraints = model.num_equalities();
    c.inequality_constraints = model.num_inequalities();
    return c;
}

/// How the row-sum (or robust) right-hand side is formed.
struct RowBound {
    enum class Kind { Tolerance, Lambda, ScaledLambda } kind = Kind::Tolerance;
    double eta = 0.0;
    int lambda_var = -1;   // Kind::Lambda
    double lambda = 1.0;   // Kind::ScaledLambda

    /// Lower bound on ESS weights. Probes at a fixed lambda normalize v >= 1
    /// (the constraints are homogeneous in (v, S)), so lambda <= 1 - eta
    /// implies the eta margin as well.
    double weight_floor() const { return kind == Kind::ScaledLambda ? 1.0 : eta; }

    /// Right-hand side for row i given the weight expression v_i.
    lp::LinExpr rhs(const lp::LinExpr& vi) const {
        switch (kind) {
        case Kind::Tolerance: return vi - lp::LinExpr(eta);
        case Kind::Lambda: return lp::LinExpr::var(lambda_var);
        case Kind::ScaledLambda: return lambda * vi;
        }
        return {};
    }
};

/// Decision weights: constants 1 in SS mode, variables v >= floor in ESS mode.
inline std::vector<lp::LinExpr> weight_exprs(lp::Model& model, Eigen::Index n, Mode mode, double floor) {
    std::vector<lp::LinExpr> v;
    v.reserve(static_cast<std::size_t>(n));
    if (mode == Mode::SS) {
        for (Eigen::Index i = 0; i < n; ++i)
            v.emplace_back(1.0);
    } else {
        const int first = model.add_variables(static_cast<int>(n), floor, lp::kInf);
        for (Eigen::Index i = 0; i < n; ++i)
            v.push_back(lp::LinExpr::var(first + static_cast<int>(i)));
    }
    return v;
}

inline lp::ExprMatrix free_matrix(lp::Model& model, Eigen::Index rows, Eigen::Index cols) {
    lp::ExprMatrix S(static_cast<int>(rows), static_cast<int>(cols));
    const int first = model.add_variables(static_cast<int>(rows * cols));
    for (int r = 0; r < S.rows(); ++r)
        for (int c = 0; c < S.cols(); ++c)
            S(r, c) = lp::LinExpr::var(first + r * S.cols() + c);
    return S;
}

inline Vector evaluate(const std::vector<lp::LinExpr>& e, const Vector& x) {
    Vector out(static_cast<Eigen::Index>(e.size()));
    for (std::size_t i = 0; i < e.size(); ++i)
        out(static_cast<Eigen::Index>(i)) = e[i].evaluate(x);
    return out;
}

/// Recovers n from a polytope in R^{n(n+m)} and the number of quantized
/// channels m.
inline int plant_states(Eigen::Index dim, Eigen::Index m) {
    for (Eigen::Index n = 1; n * (n + m) <= dim; ++n)
        if (n * (n + m) == dim)
            return static_cast<int>(n);
    throw std::invalid_argument("polytope dimension is not n(n+m) for m = " + std::to_string(m));
}

/// Generic driver shared by every synthesizer. build(bound, model) assembles
/// the model for one right-hand-side choice; extract(solution) turns an
/// optimal solution into a result. SS + MinimizeLambda minimizes lambda in a
/// single LP; ESS + MinimizeLambda bisects lambda over feasibility probes.
template <typename Result, typename Build, typename Extract>
Result run_synthesis(const SynthOptions& opt, Build&& build, Extract&& extract) {
    auto attempt = [&](const RowBound& bound, bool minimize_lambda) -> Result {
        lp::Model model;
        RowBound b = bound;
        if (minimize_lambda) {
            b.lambda_var = model.add_variable();
            model.minimize(lp::LinExpr::var(b.lambda_var));
        }
        build(b, model);
        const lp::Solution sol = lp::solve(model, opt.solver());
        Result r;
        r.counts = introspect(model);
        r.status = from_lp(sol.status);
        if (sol.optimal())
            extract(sol, model, r);
        return r;
    };

    if (opt.objective == Objective::Feasibility) {
        RowBound b;
        b.kind = RowBound::Kind::Tolerance;
        b.eta = opt.eta;
        return attempt(b, false);
    }
    if (opt.mode == Mode::SS) {
        RowBound b;
        b.kind = RowBound::Kind::Lambda;
        Result r = attempt(b, true);
        // Strict superstability, with eta as the margin.
        if (r.status == SynthStatus::Feasible && !(r.cert.lambda <= 1.0 - opt.eta))
            r.status = SynthStatus::Infeasible;
        return r;
    }

    // ESS: feasibility first, then bisection on lambda in [0, lambda_cert].
    RowBound feas;
    feas.kind = RowBound::Kind::Tolerance;
    feas.eta = opt.eta;
    Result best = attempt(feas, false);
    if (best.status != SynthStatus::Feasible)
        return best;
    double lo = 0.0, hi = std::min(1.0, best.cert.lambda);
    while (hi - lo > opt.lambda_tol) {
        const double mid = std::min(0.5 * (lo + hi), 1.0 - opt.eta);
        RowBound probe;
        probe.kind = RowBound::Kind::ScaledLambda;
        probe.lambda = mid;
        Result r = attempt(probe, false);
        if (r.status == SynthStatus::Feasible) {
            hi = std::min(0.5 * (lo + hi), r.cert.lambda);
            best = std::move(r);
        } else {
            lo = mid;
        }
    }
    return best;
}

}  // namespace qddc
