#pragma once

// Independent audit of a candidate controller: every robust inequality is
// evaluated by an exact support-function LP over the consistency polytope.
// Nothing here goes through the Farkas assembly or the interior-point solver.

#include "qddc/lp/polytope.hpp"
#include "qddc/quantizer.hpp"
#include "qddc/sysmodel.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qddc {

inline constexpr double kVerifyTolerance = 1e-7;

struct VerificationReport {
    bool verified = false;
    double worst_margin = std::numeric_limits<double>::infinity();  // min of v_i - eta - support
    double gain = 0.0;  // max of support / v_i, the certified scaled norm bound
    int worst_i = -1;
    Vector worst_alpha;
    Vector worst_beta;
    Matrix worst_A;
    Matrix worst_B;
    double worst_support = 0.0;
    std::string diagnostic;
};

/// Objective vector of robust row (i, alpha, beta) over z = [vec(A); vec(B)].
inline Vector robust_row_direction(const Vector& v, const Matrix& S, const Vector& alpha, const Vector& beta,
                                   Eigen::Index i) {
    const Eigen::Index n = v.size(), m = S.rows();
    Vector c = Vector::Zero(n * (n + m));
    for (Eigen::Index j = 0; j < n; ++j)
        c(i + j * n) = alpha(j) * v(j);
    const Vector sa = S * alpha;
    for (Eigen::Index k = 0; k < m; ++k)
        c(n * n + i + k * n) = beta(k) * sa(k);
    return c;
}

/// Checks max over (A, B) in P of sum_j alpha_j (A_ij v_j + sum_k beta_k B_ik S_kj)
/// against v_i - eta for every (i, alpha, beta). threads <= 1 runs
/// sequentially.
inline VerificationReport robust_verify(const Polytope& P, const Vector& v, const Matrix& S,
                                        const QuantizerSpec& spec, double eta, int threads = 1) {
    const Eigen::Index n = v.size(), m = S.rows();
    if (n == 0 || spec.channels() != m || (m > 0 && S.cols() != n) || P.dim() != n * (n + m))
        throw std::invalid_argument("robust_verify: dimension mismatch");
    if (n + m > 20)
        throw std::length_error("robust_verify: n + m exceeds the enumeration guard (20)");
    require_positive(v, "robust_verify");
    if (!is_feasible(P))
        throw std::domain_error("robust_verify: polytope is empty");

    const auto alphas = sign_vectors(static_cast<int>(n));
    const auto betas = beta_vertices(spec.delta());
    const std::size_t per_alpha = betas.size() * static_cast<std::size_t>(n);
    const std::size_t total = alphas.size() * per_alpha;

    VerificationReport rep;
    std::size_t worst_task = total;
    std::mutex mu;
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t t = next++; t < total; t = next++) {
            const Vector& alpha = alphas[t / per_alpha];
            const Vector& beta = betas[(t % per_alpha) / static_cast<std::size_t>(n)];
            const Eigen::Index i = static_cast<Eigen::Index>(t % static_cast<std::size_t>(n));
            const SupportResult s = support(robust_row_direction(v, S, alpha, beta, i), P);

            std::lock_guard<std::mutex> lock(mu);
            double value = s.value;
            if (s.status == SupportStatus::Unbounded) {
                value = std::numeric_limits<double>::infinity();
                if (rep.diagnostic.empty())
                    rep.diagnostic = "support value unbounded: polytope is unbounded along a robust row";
            } else if (s.status != SupportStatus::Optimal) {
                value = std::numeric_limits<double>::infinity();
                if (rep.diagnostic.empty())
                    rep.diagnostic = "support LP failed";
            }
            const double margin = v(i) - eta - value;
            rep.gain = std::max(rep.gain, value / v(i));
            // Ties keep the lowest task index so reports are deterministic.
            if (worst_task == total || margin < rep.worst_margin ||
                (margin == rep.worst_margin && t < worst_task)) {
                worst_task = t;
                rep.worst_margin = margin;
                rep.worst_i = static_cast<int>(i);
                rep.worst_alpha = alpha;
                rep.worst_beta = beta;
                rep.worst_support = value;
                if (s.status == SupportStatus::Optimal) {
                    rep.worst_A = unvec(s.argmax.head(n * n), n, n);
                    rep.worst_B = unvec(s.argmax.tail(n * m), n, m);
                } else {
                    rep.worst_A.resize(0, 0);
                    rep.worst_B.resize(0, 0);
                }
            }
        }
    };
    const int workers = std::max(1, std::min<int>(threads, static_cast<int>(total)));
    if (workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w)
            pool.emplace_back(worker);
        for (std::thread& th : pool)
            th.join();
    }
    rep.verified = rep.diagnostic.empty() && rep.worst_margin >= -kVerifyTolerance;
    return rep;
}

/// Same check for a gain K and weights v (S = K diag(v)).
inline VerificationReport robust_verify_gain(const Polytope& P, const Matrix& K, const Vector& v,
                                             const QuantizerSpec& spec, double eta, int threads = 1) {
    if (K.cols() != v.size())
        throw std::invalid_argument("robust_verify_gain: dimension mismatch");
    return robust_verify(P, v, K * v.asDiagonal(), spec, eta, threads);
}

inline VerificationReport robust_verify(const Polytope& P, const StabCertificate& cert, const QuantizerSpec& spec,
                                        int threads = 1) {
    return robust_verify(P, cert.v, cert.S, spec, cert.eta, threads);
}

}  // namespace qddc
