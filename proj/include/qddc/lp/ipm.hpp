#pragma once

// Homogeneous self-dual interior-point method for
//
//     minimize c'x  s.t.  A x = b,  G x + s = h,  s >= 0
//
// with Mehrotra predictor-corrector steps. Newton systems are solved through
// a sparse quasi-definite LDL^T factorization of the KKT matrix with static
// regularization and iterative refinement. Single-variable bound rows are
// eliminated before factorization, so a model with many nonnegative
// multipliers (Farkas blocks) only pays for its equality rows.
//
// The homogeneous embedding provides infeasibility and unboundedness
// certificates without a phase-one problem.

#include "qddc/lp/model.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <vector>

namespace qddc::lp {

struct IpmSettings {
    double feastol = 1e-9;
    double abstol = 1e-9;
    double reltol = 1e-9;
    double inftol = 1e-8;  // infeasibility / unboundedness certificates
    // Accuracy accepted when the method stalls before reaching the targets.
    double inaccurate_feastol = 1e-6;
    double inaccurate_reltol = 1e-5;
    // Certificate accuracy accepted once tau has collapsed against kappa.
    double collapsed_inftol = 1e-4;
    int max_iterations = 200;
    int stall_iterations = 25;  // give up when the residuals stop halving
    double static_regularization = 1e-9;
    int refinement_steps = 10;
    double step_fraction = 0.99;
    bool verbose = false;  // per-iteration trace on stderr
};

namespace detail {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::ColMajor>;
using Triplet = Eigen::Triplet<double>;

/// Model lowered to (A, b), (G, h) with separate single-variable bound rows.
struct StandardForm {
    int n = 0;
    SparseMatrix A;  // me x n
    Vector b;
    SparseMatrix G;  // mg x n (general rows)
    Vector h;
    std::vector<int> bound_var;      // bound row r: sign_r * x_{var_r} <= hb_r
    std::vector<double> bound_sign;
    Vector hb;
    Vector c;
    double c0 = 0.0;
    bool constant_row_violated = false;

    int me() const { return static_cast<int>(A.rows()); }
    int mg() const { return static_cast<int>(G.rows()); }
    int mb() const { return static_cast<int>(bound_var.size()); }
    int cone() const { return mg() + mb(); }
};

inline StandardForm lower_model(const Model& model) {
    StandardForm sf;
    sf.n = model.num_variables();
    std::vector<Triplet> ta, tg;
    std::vector<double> b, h;

    auto constant_ok = [](double value, Relation rel) {
        constexpr double tol = 1e-12;
        switch (rel) {
        case Relation::LessEqual: return value <= tol;
        case Relation::GreaterEqual: return value >= -tol;
        case Relation::Equal: return std::abs(value) <= tol;
        }
        return false;
    };

    for (const Constraint& con : model.constraints()) {
        const LinExpr& e = con.expr;
        if (e.terms().empty()) {
            if (!constant_ok(e.constant(), con.relation))
                sf.constant_row_violated = true;
            continue;
        }
        switch (con.relation) {
        case Relation::Equal: {
            const int row = static_cast<int>(b.size());
            for (const Term& t : e.terms())
                ta.emplace_back(row, t.var, t.coef);
            b.push_back(-e.constant());
            break;
        }
        case Relation::LessEqual:
        case Relation::GreaterEqual: {
            const double sign = con.relation == Relation::LessEqual ? 1.0 : -1.0;
            const int row = static_cast<int>(h.size());
            for (const Term& t : e.terms())
                tg.emplace_back(row, t.var, sign * t.coef);
            h.push_back(-sign * e.constant());
            break;
        }
        }
    }

    std::vector<double> hb;
    for (int j = 0; j < sf.n; ++j) {
        const double lo = model.lower(j), up = model.upper(j);
        if (std::isfinite(lo) && lo == up) {
            ta.emplace_back(static_cast<int>(b.size()), j, 1.0);
            b.push_back(lo);
            continue;
        }
        if (std::isfinite(lo)) {
            sf.bound_var.push_back(j);
            sf.bound_sign.push_back(-1.0);
            hb.push_back(-lo);
        }
        if (std::isfinite(up)) {
            sf.bound_var.push_back(j);
            sf.bound_sign.push_back(1.0);
            hb.push_back(up);
        }
    }

    sf.A.resize(static_cast<Eigen::Index>(b.size()), sf.n);
    sf.A.setFromTriplets(ta.begin(), ta.end());
    sf.G.resize(static_cast<Eigen::Index>(h.size()), sf.n);
    sf.G.setFromTriplets(tg.begin(), tg.end());
    sf.b = Eigen::Map<Vector>(b.data(), static_cast<Eigen::Index>(b.size()));
    sf.h = Eigen::Map<Vector>(h.data(), static_cast<Eigen::Index>(h.size()));
    sf.hb = Eigen::Map<Vector>(hb.data(), static_cast<Eigen::Index>(hb.size()));

    sf.c = Vector::Zero(sf.n);
    for (const Term& t : model.objective().terms())
        sf.c(t.var) += t.coef;
    sf.c0 = model.objective().constant();
    return sf;
}

/// Scales every equality and general inequality row to unit infinity norm.
/// Primal solutions are unaffected.
inline void equilibrate_rows(StandardForm& sf) {
    auto scale_rows = [](SparseMatrix& M, Vector& rhs) {
        Vector norm = Vector::Zero(M.rows());
        for (int k = 0; k < M.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(M, k); it; ++it)
                norm(it.row()) = std::max(norm(it.row()), std::abs(it.value()));
        for (Eigen::Index i = 0; i < norm.size(); ++i)
            norm(i) = norm(i) > 0.0 ? 1.0 / norm(i) : 1.0;
        M = norm.asDiagonal() * M;
        rhs = norm.cwiseProduct(rhs);
    };
    scale_rows(sf.A, sf.b);
    scale_rows(sf.G, sf.h);
}

/// Reduced KKT system
///     [ Db + reg   A'       Gg'          ]
///     [ A          -reg     0            ]
///     [ Gg         0        -Wg^2 - reg  ]
/// where bound rows were folded into the diagonal Db.
class KktSolver {
public:
    KktSolver(const StandardForm& sf, double reg) : sf_(sf), reg_(reg) {
        const int n = sf.n, me = sf.me(), mg = sf.mg();
        dim_ = n + me + mg;
        std::vector<Triplet> t;
        t.reserve(static_cast<std::size_t>(dim_ + sf.A.nonZeros() + sf.G.nonZeros()));
        for (int i = 0; i < dim_; ++i)
            t.emplace_back(i, i, 1.0);
        for (int k = 0; k < sf.A.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(sf.A, k); it; ++it)
                t.emplace_back(n + it.row(), it.col(), it.value());
        for (int k = 0; k < sf.G.outerSize(); ++k)
            for (SparseMatrix::InnerIterator it(sf.G, k); it; ++it)
                t.emplace_back(n + me + it.row(), it.col(), it.value());
        K_.resize(dim_, dim_);
        K_.setFromTriplets(t.begin(), t.end());
        K_.makeCompressed();
        diag_.resize(dim_);
        for (int j = 0; j < dim_; ++j) {
            const int p = K_.outerIndexPtr()[j];
            diag_[j] = p;  // lower storage, sorted rows: diagonal first
        }
        ldlt_.analyzePattern(K_);
        At_ = sf.A.transpose();
        Gt_ = sf.G.transpose();
    }

    /// w2 holds s./z for all cone rows (general rows first, bound rows after).
    bool factorize(const Vector& w2) {
        const int n = sf_.n, mg = sf_.mg();
        w2_ = w2;
        db_ = Vector::Zero(n);
        for (int r = 0; r < sf_.mb(); ++r)
            db_(sf_.bound_var[r]) += 1.0 / w2(mg + r);
        // A pivot can cancel to exactly zero when the static shift is
        // absorbed by rounding; retry with a larger shift, iterative
        // refinement against the unshifted operator absorbs the difference.
        for (double reg = reg_; reg <= kMaxReg; reg *= 100.0)
            if (factorize_with(reg))
                return true;
        return false;
    }

    Eigen::ComputationInfo info() const { return ldlt_.info(); }
    double used_regularization() const { return used_reg_; }
    double last_residual() const { return last_residual_; }

    /// Solves the full (unreduced) system for right-hand sides r1 (n), r2 (me),
    /// r3 (cone). When refinement does not converge the factorization is
    /// redone with a larger shift.
    void solve(const Vector& r1, const Vector& r2, const Vector& r3,
               Vector& dx, Vector& dy, Vector& dz, int refinement_steps) {
        const int n = sf_.n, me = sf_.me(), mg = sf_.mg();
        Vector rhs(dim_);
        rhs.head(n) = r1;
        for (int r = 0; r < sf_.mb(); ++r)
            rhs(sf_.bound_var[r]) += sf_.bound_sign[r] * r3(mg + r) / w2_(mg + r);
        rhs.segment(n, me) = r2;
        rhs.tail(mg) = r3.head(mg);

        const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        Vector u;
        while (true) {
            u = ldlt_.solve(rhs);
            for (int step = 0; step <= refinement_steps; ++step) {
                const Vector e = rhs - apply(u);
                last_residual_ = e.lpNorm<Eigen::Infinity>() / scale;
                if (!(last_residual_ > 1e-15) || step == refinement_steps)
                    break;
                u += ldlt_.solve(e);
            }
            if (last_residual_ <= 1e-9 || used_reg_ * 100.0 > kMaxReg || !factorize_with(used_reg_ * 100.0))
                break;
        }
        dx = u.head(n);
        dy = u.segment(n, me);
        dz.resize(sf_.cone());
        dz.head(mg) = u.tail(mg);
        for (int r = 0; r < sf_.mb(); ++r)
            dz(mg + r) = (sf_.bound_sign[r] * dx(sf_.bound_var[r]) - r3(mg + r)) / w2_(mg + r);
    }

private:
    static constexpr double kMaxReg = 1e-3;

    bool factorize_with(double reg) {
        const int n = sf_.n, me = sf_.me(), mg = sf_.mg();
        double* val = K_.valuePtr();
        for (int j = 0; j < n; ++j)
            val[diag_[j]] = db_(j) + reg;
        for (int i = 0; i < me; ++i)
            val[diag_[n + i]] = -reg;
        for (int k = 0; k < mg; ++k)
            val[diag_[n + me + k]] = -w2_(k) - reg;
        ldlt_.factorize(K_);
        if (ldlt_.info() != Eigen::Success)
            return false;
        used_reg_ = reg;
        return true;
    }

    // Unregularized reduced operator.
    Vector apply(const Vector& u) const {
        const int n = sf_.n, me = sf_.me(), mg = sf_.mg();
        Vector out(dim_);
        const auto ux = u.head(n);
        const auto uy = u.segment(n, me);
        const auto uz = u.tail(mg);
        out.head(n) = db_.cwiseProduct(ux) + At_ * uy + Gt_ * uz;
        out.segment(n, me) = sf_.A * ux;
        out.tail(mg) = sf_.G * ux - w2_.head(mg).cwiseProduct(uz);
        return out;
    }

    const StandardForm& sf_;
    double reg_;
    double used_reg_ = 0.0;
    double last_residual_ = 0.0;
    int dim_ = 0;
    SparseMatrix K_;
    SparseMatrix At_, Gt_;
    std::vector<int> diag_;
    Vector w2_, db_;
    Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower, Eigen::AMDOrdering<int>> ldlt_;
};

class HsdSolver {
public:
    HsdSolver(const StandardForm& sf, const IpmSettings& settings) : sf_(sf), set_(settings) {}

    Solution run() {
        Solution sol;
        const int n = sf_.n, me = sf_.me(), m = sf_.cone();
        KktSolver kkt(sf_, set_.static_regularization);

        // Cone right-hand side h_full = [h; hb].
        hfull_.resize(m);
        hfull_ << sf_.h, sf_.hb;
        const double nb = 1.0 + sf_.b.lpNorm<Eigen::Infinity>();
        const double nh = 1.0 + hfull_.lpNorm<Eigen::Infinity>();
        const double nc = 1.0 + sf_.c.lpNorm<Eigen::Infinity>();

        // Initial point: least-norm primal and dual solutions shifted into the cone.
        Vector x, y, z, s;
        if (!kkt.factorize(Vector::Ones(m)))
            return sol;
        {
            Vector dx, dy, dz;
            kkt.solve(Vector::Zero(n), sf_.b, hfull_, dx, dy, dz, set_.refinement_steps);
            x = dx;
            s = -dz;
            shift_into_cone(s);
            kkt.solve(-sf_.c, Vector::Zero(me), Vector::Zero(m), dx, dy, dz, set_.refinement_steps);
            y = dy;
            z = dz;
            shift_into_cone(z);
        }
        double tau = 1.0, kappa = 1.0;

        const double denom = static_cast<double>(m + 1);
        Status best_status = Status::NumericalFailure;
        Vector best_x;
        double best_merit = kInf;
        int best_merit_it = 0;

        for (int it = 0; it <= set_.max_iterations; ++it) {
            sol.iterations = it;
            const Vector Gx = applyG(x);
            const Vector Gtz = applyGt(z);
            const Vector Aty = sf_.A.transpose() * y;
            const Vector Rx = Aty + Gtz + sf_.c * tau;
            const Vector Ry = sf_.A * x - sf_.b * tau;
            const Vector Rz = Gx + s - hfull_ * tau;
            const double cx = sf_.c.dot(x);
            const double by = sf_.b.dot(y);
            const double hz = hfull_.dot(z);
            const double Rtau = kappa + cx + by + hz;
            const double mu = (s.dot(z) + tau * kappa) / denom;

            const double pres = std::max(inf_norm(Ry) / nb, inf_norm(Rz) / nh) / tau;
            const double dres = inf_norm(Rx) / nc / tau;
            const double gap = s.dot(z) / (tau * tau);
            const double pcost = cx / tau;
            const double dcost = -(by + hz) / tau;
            const double relgap = gap / std::max(1e-12, std::min(std::abs(pcost), std::abs(dcost)));

            const double pinf = (by + hz < 0.0) ? inf_norm(Aty + Gtz) / (-(by + hz)) : kInf;
            const double dinf =
                (cx < 0.0) ? std::max(inf_norm(sf_.A * x), inf_norm(Gx + s)) / (-cx) : kInf;

            if (set_.verbose)
                std::fprintf(stderr, "%3d pres %.2e dres %.2e gap %.2e relgap %.2e pinf %.2e tau %.2e kappa %.2e |x| %.2e\n",
                             it, pres, dres, gap, relgap, pinf, tau, kappa, inf_norm(x) / tau);
            if (pres < set_.feastol && dres < set_.feastol &&
                (gap < set_.abstol || relgap < set_.reltol)) {
                return finish(sol, Status::Optimal, x / tau);
            }
            if (pinf < set_.inftol && hz + by < 0.0 && tau < kappa)
                return finish(sol, Status::Infeasible, {});
            if (dinf < set_.inftol && cx < 0.0 && tau < kappa)
                return finish(sol, Status::Unbounded, {});

            // Remember the latest point acceptable at reduced accuracy.
            if (pres < set_.inaccurate_feastol && dres < set_.inaccurate_feastol &&
                (gap < set_.inaccurate_reltol || relgap < set_.inaccurate_reltol)) {
                best_status = Status::Optimal;
                best_x = x / tau;
            } else if (pinf < set_.inaccurate_feastol && hz + by < 0.0 && tau < kappa) {
                best_status = Status::Infeasible;
            } else if (dinf < set_.inaccurate_feastol && cx < 0.0 && tau < kappa) {
                best_status = Status::Unbounded;
            }
            if (it == set_.max_iterations)
                break;
            const double merit = std::max({pres, dres, std::min(gap, relgap)});
            if (merit < 0.5 * best_merit) {
                best_merit = merit;
                best_merit_it = it;
            } else if (it - best_merit_it > set_.stall_iterations && tau > kappa) {
                if (set_.verbose)
                    std::fprintf(stderr, "    stalled at %.2e\n", best_merit);
                break;
            }
            // tau has collapsed against kappa: the ray certificate is all that is
            // left to improve, and the iterates only grow from here.
            if (tau < 1e-10 * std::max(1.0, kappa)) {
                if (best_status != Status::Infeasible && best_status != Status::Unbounded) {
                    if (pinf < set_.collapsed_inftol && hz + by < 0.0)
                        best_status = Status::Infeasible;
                    else if (dinf < set_.collapsed_inftol && cx < 0.0)
                        best_status = Status::Unbounded;
                }
                break;
            }

            const Vector w2 = s.cwiseQuotient(z);
            if (!kkt.factorize(w2)) {
                if (set_.verbose)
                    std::fprintf(stderr, "    factorization failed (w2 in [%.2e, %.2e], info %d)\n", w2.minCoeff(),
                                 w2.maxCoeff(), int(kkt.info()));
                break;
            }

            // Direction for the tau column.
            Vector x2, y2, z2;
            kkt.solve(sf_.c, -sf_.b, -hfull_, x2, y2, z2, set_.refinement_steps);

            auto direction = [&](double sigma, const Vector& rhs_s, double rhs_k,
                                 Vector& dx, Vector& dy, Vector& dz, Vector& ds,
                                 double& dtau, double& dkappa) {
                const double f = 1.0 - sigma;
                Vector x1, y1, z1;
                const Vector r3 = -f * Rz - rhs_s.cwiseQuotient(z);
                kkt.solve(-f * Rx, -f * Ry, r3, x1, y1, z1, set_.refinement_steps);
                const double num = f * Rtau + rhs_k / tau + sf_.c.dot(x1) + sf_.b.dot(y1) + hfull_.dot(z1);
                const double den = kappa / tau + sf_.c.dot(x2) + sf_.b.dot(y2) + hfull_.dot(z2);
                dtau = num / den;
                dx = x1 - dtau * x2;
                dy = y1 - dtau * y2;
                dz = z1 - dtau * z2;
                ds = (rhs_s - s.cwiseProduct(dz)).cwiseQuotient(z);
                dkappa = (rhs_k - kappa * dtau) / tau;
            };

            // Predictor.
            Vector dx, dy, dz, ds;
            double dtau = 0.0, dkappa = 0.0;
            direction(0.0, -s.cwiseProduct(z), -tau * kappa, dx, dy, dz, ds, dtau, dkappa);
            const double alpha_aff = std::min(1.0, max_step(s, ds, z, dz, tau, dtau, kappa, dkappa));
            double sigma = std::pow(1.0 - alpha_aff, 3);
            sigma = std::clamp(sigma, 1e-4, 1.0);

            // Corrector.
            const Vector rhs_s = -s.cwiseProduct(z) - ds.cwiseProduct(dz) + Vector::Constant(m, sigma * mu);
            const double rhs_k = -tau * kappa - dtau * dkappa + sigma * mu;
            direction(sigma, rhs_s, rhs_k, dx, dy, dz, ds, dtau, dkappa);
            const double alpha =
                std::min(1.0, set_.step_fraction * max_step(s, ds, z, dz, tau, dtau, kappa, dkappa));
            if (set_.verbose)
                std::fprintf(stderr, "    reg %.1e refine residual %.2e alpha %.2e\n", kkt.used_regularization(),
                             kkt.last_residual(), alpha);
            if (!(alpha > 1e-10) || !std::isfinite(dtau)) {
                if (set_.verbose)
                    std::fprintf(stderr, "    step too short (alpha %.2e, dtau %.2e)\n", alpha, dtau);
                break;
            }

            x += alpha * dx;
            y += alpha * dy;
            z += alpha * dz;
            s += alpha * ds;
            tau += alpha * dtau;
            kappa += alpha * dkappa;
            if (!(tau > 0.0) || !(kappa > 0.0) || !x.allFinite())
                break;
        }
        return finish(sol, best_status, best_x);
    }

private:
    static double inf_norm(const Vector& v) { return v.size() ? v.lpNorm<Eigen::Infinity>() : 0.0; }

    static void shift_into_cone(Vector& v) {
        if (v.size() == 0)
            return;
        const double lowest = v.minCoeff();
        if (lowest <= 0.0)
            v.array() += 1.0 - lowest;
    }

    static double max_step(const Vector& s, const Vector& ds, const Vector& z, const Vector& dz,
                           double tau, double dtau, double kappa, double dkappa) {
        double alpha = kInf;
        for (Eigen::Index i = 0; i < s.size(); ++i) {
            if (ds(i) < 0.0)
                alpha = std::min(alpha, -s(i) / ds(i));
            if (dz(i) < 0.0)
                alpha = std::min(alpha, -z(i) / dz(i));
        }
        if (dtau < 0.0)
            alpha = std::min(alpha, -tau / dtau);
        if (dkappa < 0.0)
            alpha = std::min(alpha, -kappa / dkappa);
        return alpha;
    }

    Vector applyG(const Vector& x) const {
        Vector out(sf_.cone());
        out.head(sf_.mg()) = sf_.G * x;
        for (int r = 0; r < sf_.mb(); ++r)
            out(sf_.mg() + r) = sf_.bound_sign[r] * x(sf_.bound_var[r]);
        return out;
    }

    Vector applyGt(const Vector& z) const {
        Vector out = sf_.G.transpose() * z.head(sf_.mg());
        for (int r = 0; r < sf_.mb(); ++r)
            out(sf_.bound_var[r]) += sf_.bound_sign[r] * z(sf_.mg() + r);
        return out;
    }

    Solution& finish(Solution& sol, Status status, Vector x) {
        sol.status = status;
        if (status == Status::Optimal) {
            sol.x = std::move(x);
            sol.objective = sf_.c.dot(sol.x) + sf_.c0;
        }
        return sol;
    }

    const StandardForm& sf_;
    IpmSettings set_;
    Vector hfull_;
};

}  // namespace detail

class InteriorPointBackend final : public Backend {
public:
    InteriorPointBackend() = default;
    explicit InteriorPointBackend(IpmSettings settings) : settings_(settings) {}

    Solution solve(const Model& model) const override {
        Solution sol;
        try {
            detail::StandardForm sf = detail::lower_model(model);
            if (sf.constant_row_violated) {
                sol.status = Status::Infeasible;
                return sol;
            }
            detail::equilibrate_rows(sf);
            detail::HsdSolver solver(sf, settings_);
            return solver.run();
        } catch (const std::exception&) {
            sol.status = Status::NumericalFailure;
            return sol;
        }
    }

    std::string name() const override { return "hsd-ipm"; }

    const IpmSettings& settings() const { return settings_; }

private:
    IpmSettings settings_;
};

inline const Backend& default_backend() {
    static const InteriorPointBackend backend([] {
        IpmSettings s;
        s.verbose = std::getenv("QDDC_IPM_TRACE") != nullptr;
        return s;
    }());
    return backend;
}

inline Solution solve(const Model& model, const Backend& backend = default_backend()) {
    return backend.solve(model);
}

}  // namespace qddc::lp
