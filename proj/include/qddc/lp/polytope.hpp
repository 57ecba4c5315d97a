#pragma once

// H-polytopes {x | G x <= h}, exact support values via a dense revised
// simplex, and brute-force vertex enumeration used as a test oracle.

#include "qddc/linalg.hpp"

#include <Eigen/LU>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qddc {

struct Polytope {
    Matrix G;  // L x d
    Vector h;  // L

    Polytope() = default;
    Polytope(Matrix G_, Vector h_) : G(std::move(G_)), h(std::move(h_)) {
        if (G.rows() != h.size())
            throw std::invalid_argument("Polytope: row count of G differs from length of h");
        if (!G.allFinite() || !h.allFinite())
            throw std::invalid_argument("Polytope: entries must be finite");
    }

    Eigen::Index faces() const { return G.rows(); }
    Eigen::Index dim() const { return G.cols(); }

    bool contains(const Vector& x, double tol = 1e-9) const {
        if (faces() == 0)
            return true;
        return ((G * x - h).array() <= tol).all();
    }

    /// Axis-aligned box lo <= x <= hi.
    static Polytope box(const Vector& lo, const Vector& hi) {
        const Eigen::Index d = lo.size();
        Matrix G(2 * d, d);
        G << Matrix::Identity(d, d), -Matrix::Identity(d, d);
        Vector h(2 * d);
        h << hi, -lo;
        return Polytope(std::move(G), std::move(h));
    }

    Polytope select_rows(const std::vector<Eigen::Index>& rows) const {
        Matrix Gs(static_cast<Eigen::Index>(rows.size()), dim());
        Vector hs(static_cast<Eigen::Index>(rows.size()));
        for (std::size_t k = 0; k < rows.size(); ++k) {
            Gs.row(static_cast<Eigen::Index>(k)) = G.row(rows[k]);
            hs(static_cast<Eigen::Index>(k)) = h(rows[k]);
        }
        return Polytope(std::move(Gs), std::move(hs));
    }
};

enum class SupportStatus { Optimal, Unbounded, Infeasible, Failed };

struct SupportResult {
    SupportStatus status = SupportStatus::Failed;
    double value = 0.0;
    Vector argmax;  // maximizing vertex when Optimal
};

namespace detail {

/// Revised simplex on the dual standard form
///     minimize h'y  s.t.  G'y = c,  y >= 0
/// whose multipliers are the primal maximizer of c'x over G x <= h.
/// Artificial columns start the basis; Harris ratio test; Bland's rule
/// after a run of degenerate pivots.
class DualFormSimplex {
public:
    DualFormSimplex(const Matrix& G, const Vector& h, const Vector& c)
        : G_(G), h_(h), L_(G.rows()), d_(G.cols()), flip_(c.size()), rhs_(c.size()) {
        for (Eigen::Index i = 0; i < d_; ++i) {
            flip_(i) = c(i) < 0.0 ? -1.0 : 1.0;
            rhs_(i) = std::abs(c(i));
        }
        row_norm_.resize(L_);
        for (Eigen::Index j = 0; j < L_; ++j)
            row_norm_(j) = std::max(1.0, G_.row(j).lpNorm<Eigen::Infinity>());
    }

    SupportResult run() {
        SupportResult out;
        basis_.resize(static_cast<std::size_t>(d_));
        for (Eigen::Index i = 0; i < d_; ++i)
            basis_[static_cast<std::size_t>(i)] = L_ + i;  // artificials
        Binv_ = Matrix::Identity(d_, d_);
        wB_ = rhs_;

        // Phase one: drive artificials to zero.
        const Outcome p1 = iterate(true);
        if (p1 == Outcome::Failed)
            return out;
        double infeas = 0.0;
        for (Eigen::Index i = 0; i < d_; ++i)
            if (is_artificial(basis_[static_cast<std::size_t>(i)]))
                infeas += wB_(i);
        if (infeas > kFeasTol * (1.0 + rhs_.lpNorm<Eigen::Infinity>())) {
            out.status = SupportStatus::Unbounded;  // caller disambiguates
            return out;
        }
        const Outcome p2 = iterate(false);
        if (p2 == Outcome::Failed)
            return out;
        if (p2 == Outcome::Unbounded) {
            out.status = SupportStatus::Infeasible;
            return out;
        }
        out.status = SupportStatus::Optimal;
        out.argmax = primal();
        out.value = 0.0;
        for (Eigen::Index i = 0; i < d_; ++i) {
            const Eigen::Index j = basis_[static_cast<std::size_t>(i)];
            if (!is_artificial(j))
                out.value += h_(j) * wB_(i);
        }
        return out;
    }

private:
    enum class Outcome { Optimal, Unbounded, Failed };

    static constexpr double kFeasTol = 1e-9;
    static constexpr double kCostTol = 1e-10;
    static constexpr double kPivotTol = 1e-9;

    bool is_artificial(Eigen::Index j) const { return j >= L_; }

    double cost(Eigen::Index j, bool phase_one) const {
        if (phase_one)
            return is_artificial(j) ? 1.0 : 0.0;
        return is_artificial(j) ? 0.0 : h_(j);
    }

    // Column j of [F G' | I].
    Vector column(Eigen::Index j) const {
        if (is_artificial(j))
            return Vector::Unit(d_, j - L_);
        return flip_.cwiseProduct(G_.row(j).transpose());
    }

    // Simplex multipliers for the current basis.
    Vector multipliers(bool phase_one) const {
        Vector cB(d_);
        for (Eigen::Index i = 0; i < d_; ++i)
            cB(i) = cost(basis_[static_cast<std::size_t>(i)], phase_one);
        return Binv_.transpose() * cB;
    }

    Vector primal() const { return flip_.cwiseProduct(multipliers(false)); }

    void refactor() {
        Matrix B(d_, d_);
        for (Eigen::Index i = 0; i < d_; ++i)
            B.col(i) = column(basis_[static_cast<std::size_t>(i)]);
        Eigen::PartialPivLU<Matrix> lu(B);
        Binv_ = lu.inverse();
        wB_ = Binv_ * rhs_;
        for (Eigen::Index i = 0; i < d_; ++i)
            if (wB_(i) < 0.0 && wB_(i) > -kFeasTol)
                wB_(i) = 0.0;
    }

    Outcome iterate(bool phase_one) {
        std::vector<char> in_basis(static_cast<std::size_t>(L_ + d_), 0);
        for (Eigen::Index j : basis_)
            in_basis[static_cast<std::size_t>(j)] = 1;

        const long limit = 50 * (L_ + d_) + 1000;
        int degenerate_run = 0;
        for (long it = 0; it < limit; ++it) {
            if (it > 0 && it % 64 == 0)
                refactor();
            const Vector pi = multipliers(phase_one);
            // Reduced costs of structural columns: cost_j - (F pi)' g_j.
            const Vector x = flip_.cwiseProduct(pi);
            const Vector gx = G_ * x;
            const bool bland = degenerate_run > 30;
            Eigen::Index enter = -1;
            double best = -kCostTol;
            for (Eigen::Index j = 0; j < L_; ++j) {
                if (in_basis[static_cast<std::size_t>(j)])
                    continue;
                const double rc = (cost(j, phase_one) - gx(j)) / row_norm_(j);
                if (rc < best) {
                    enter = j;
                    if (bland)
                        break;
                    best = rc;
                }
            }
            if (enter < 0)
                return Outcome::Optimal;

            const Vector dir = Binv_ * column(enter);
            // Artificials left in the basis after phase one sit at zero and
            // must stay there: pivot them out first.
            if (!phase_one) {
                Eigen::Index art = -1;
                for (Eigen::Index i = 0; i < d_; ++i)
                    if (is_artificial(basis_[static_cast<std::size_t>(i)]) && std::abs(dir(i)) > kPivotTol &&
                        (art < 0 || std::abs(dir(i)) > std::abs(dir(art))))
                        art = i;
                if (art >= 0) {
                    pivot_on(art, enter, dir, 0.0, in_basis);
                    ++degenerate_run;
                    if (!Binv_.allFinite())
                        return Outcome::Failed;
                    continue;
                }
            }
            // Harris pass one.
            double theta_max = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < d_; ++i)
                if (dir(i) > kPivotTol)
                    theta_max = std::min(theta_max, (std::max(wB_(i), 0.0) + kFeasTol) / dir(i));
            if (!std::isfinite(theta_max))
                return Outcome::Unbounded;
            // Pass two: largest pivot among admissible rows (lowest basis
            // index under Bland's rule).
            Eigen::Index leave = -1;
            double pivot = 0.0;
            for (Eigen::Index i = 0; i < d_; ++i) {
                if (dir(i) <= kPivotTol)
                    continue;
                if (std::max(wB_(i), 0.0) / dir(i) > theta_max)
                    continue;
                if (bland) {
                    if (leave < 0 || basis_[static_cast<std::size_t>(i)] < basis_[static_cast<std::size_t>(leave)])
                        leave = i;
                } else if (dir(i) > pivot) {
                    pivot = dir(i);
                    leave = i;
                }
            }
            if (leave < 0)
                return Outcome::Failed;
            const double theta = std::max(wB_(leave), 0.0) / dir(leave);
            degenerate_run = theta <= kFeasTol ? degenerate_run + 1 : 0;
            pivot_on(leave, enter, dir, theta, in_basis);
            if (!Binv_.allFinite())
                return Outcome::Failed;
        }
        return Outcome::Failed;
    }

    void pivot_on(Eigen::Index leave, Eigen::Index enter, const Vector& dir, double theta,
                  std::vector<char>& in_basis) {
        wB_ -= theta * dir;
        wB_(leave) = theta;
        for (Eigen::Index i = 0; i < d_; ++i)
            if (wB_(i) < 0.0)
                wB_(i) = 0.0;
        // Product-form update of the explicit inverse.
        const Eigen::RowVectorXd prow = Binv_.row(leave) / dir(leave);
        for (Eigen::Index i = 0; i < d_; ++i)
            if (i != leave)
                Binv_.row(i) -= dir(i) * prow;
        Binv_.row(leave) = prow;

        in_basis[static_cast<std::size_t>(basis_[static_cast<std::size_t>(leave)])] = 0;
        in_basis[static_cast<std::size_t>(enter)] = 1;
        basis_[static_cast<std::size_t>(leave)] = enter;
    }

    const Matrix& G_;
    const Vector& h_;
    Eigen::Index L_;
    Eigen::Index d_;
    Vector flip_;
    Vector rhs_;
    Vector row_norm_;
    std::vector<Eigen::Index> basis_;
    Matrix Binv_;
    Vector wB_;
};

}  // namespace detail

/// max c'x over the polytope. Reports Unbounded or Infeasible when
/// applicable; an empty polytope is reported, not thrown, here.
inline SupportResult support(const Vector& c, const Polytope& P) {
    if (c.size() != P.dim())
        throw std::invalid_argument("support: direction dimension mismatch");
    if (P.faces() == 0) {
        SupportResult r;
        r.status = c.isZero(0.0) ? SupportStatus::Optimal : SupportStatus::Unbounded;
        if (r.status == SupportStatus::Optimal)
            r.argmax = Vector::Zero(P.dim());
        return r;
    }
    SupportResult r = detail::DualFormSimplex(P.G, P.h, c).run();
    if (r.status == SupportStatus::Unbounded && !c.isZero(0.0)) {
        // Dual infeasible: unbounded if the polytope is nonempty.
        const SupportResult feas = detail::DualFormSimplex(P.G, P.h, Vector::Zero(P.dim())).run();
        if (feas.status == SupportStatus::Infeasible)
            r.status = SupportStatus::Infeasible;
        else if (feas.status != SupportStatus::Optimal)
            r.status = SupportStatus::Failed;
    }
    return r;
}

/// Nonemptiness test.
inline bool is_feasible(const Polytope& P) {
    return support(Vector::Zero(P.dim()), P).status == SupportStatus::Optimal;
}

/// Optimal value of max c'x over P. Throws on an empty polytope; returns
/// +infinity when the value is unbounded.
inline double max_linear_over_polytope(const Vector& c, const Polytope& P) {
    const SupportResult r = support(c, P);
    switch (r.status) {
    case SupportStatus::Optimal: return r.value;
    case SupportStatus::Unbounded: return std::numeric_limits<double>::infinity();
    case SupportStatus::Infeasible: throw std::domain_error("max_linear_over_polytope: empty polytope");
    case SupportStatus::Failed: break;
    }
    throw std::runtime_error("max_linear_over_polytope: simplex failure");
}

/// Brute-force vertex enumeration over all d-subsets of faces. Test oracle
/// for small instances only.
inline std::vector<Vector> enumerate_vertices(const Polytope& P, double tol = 1e-7) {
    const Eigen::Index d = P.dim();
    const Eigen::Index L = P.faces();
    if (d < 1 || d > 6)
        throw std::invalid_argument("enumerate_vertices: dimension must be in 1..6");
    if (L < d)
        throw std::domain_error("enumerate_vertices: polytope is unbounded");
    if (!is_feasible(P))
        return {};
    for (Eigen::Index k = 0; k < d; ++k)
        for (double s : {1.0, -1.0})
            if (support(s * Vector::Unit(d, k), P).status != SupportStatus::Optimal)
                throw std::domain_error("enumerate_vertices: polytope is unbounded");

    std::vector<Vector> out;
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(d));
    for (Eigen::Index k = 0; k < d; ++k)
        idx[static_cast<std::size_t>(k)] = k;
    Matrix M(d, d);
    Vector r(d);
    while (true) {
        for (Eigen::Index k = 0; k < d; ++k) {
            M.row(k) = P.G.row(idx[static_cast<std::size_t>(k)]);
            r(k) = P.h(idx[static_cast<std::size_t>(k)]);
        }
        Eigen::FullPivLU<Matrix> lu(M);
        if (lu.rank() == d) {
            const Vector x = lu.solve(r);
            if (P.contains(x, tol)) {
                const bool dup = std::any_of(out.begin(), out.end(), [&](const Vector& v) {
                    return (v - x).lpNorm<Eigen::Infinity>() <= tol;
                });
                if (!dup)
                    out.push_back(x);
            }
        }
        // next combination
        Eigen::Index k = d - 1;
        while (k >= 0 && idx[static_cast<std::size_t>(k)] == L - d + k)
            --k;
        if (k < 0)
            break;
        ++idx[static_cast<std::size_t>(k)];
        for (Eigen::Index j = k + 1; j < d; ++j)
            idx[static_cast<std::size_t>(j)] = idx[static_cast<std::size_t>(j - 1)] + 1;
    }
    return out;
}

/// P1 subset of P2, decided by checking every vertex of P1 against P2.
inline bool check_containment_bruteforce(const Polytope& P1, const Polytope& P2, double tol = 1e-9) {
    if (P1.dim() != P2.dim())
        throw std::invalid_argument("check_containment_bruteforce: dimension mismatch");
    for (const Vector& v : enumerate_vertices(P1))
        if (!P2.contains(v, tol))
            return false;
    return true;
}

}  // namespace qddc
