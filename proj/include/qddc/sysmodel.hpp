#pragma once

// Discrete-time plants x+ = A x + B u, superstability measures, certificate
// checks, and closed-loop simulation under logarithmic input quantization.

#include "qddc/linalg.hpp"
#include "qddc/quantizer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace qddc {

struct LinearSystem {
    Matrix A;  // n x n
    Matrix B;  // n x m

    LinearSystem() = default;
    LinearSystem(Matrix A_, Matrix B_) : A(std::move(A_)), B(std::move(B_)) {
        if (A.rows() != A.cols())
            throw std::invalid_argument("LinearSystem: A must be square");
        if (B.rows() != A.rows())
            throw std::invalid_argument("LinearSystem: B must have n rows");
        if (!A.allFinite() || !B.allFinite())
            throw std::invalid_argument("LinearSystem: entries must be finite");
    }

    Eigen::Index n() const { return A.rows(); }
    Eigen::Index m() const { return B.cols(); }
};

enum class Mode { SS, ESS };

inline std::string to_string(Mode mode) { return mode == Mode::SS ? "ss" : "ess"; }

inline Mode parse_mode(const std::string& s) {
    if (s == "ss")
        return Mode::SS;
    if (s == "ess")
        return Mode::ESS;
    throw std::invalid_argument("unknown mode '" + s + "' (expected ss or ess)");
}

/// Weights v, multiplier S = K diag(v), optional bound matrix M, certified
/// gain lambda and the recovered controller K.
struct StabCertificate {
    Vector v;
    Matrix S;
    Matrix M;  // empty for data-driven certificates
    double lambda = 0.0;
    double eta = 0.0;
    Matrix K;
    Mode mode = Mode::SS;
    std::string status = "feasible";
};

inline void require_positive(const Vector& v, const char* what) {
    for (Eigen::Index j = 0; j < v.size(); ++j)
        if (!(v(j) > 0.0))
            throw std::domain_error(std::string(what) + ": weights must be positive");
}

/// K = S diag(1./v).
inline Matrix recover_controller(const Matrix& S, const Vector& v) {
    require_positive(v, "recover_controller");
    if (S.cols() != v.size())
        throw std::invalid_argument("recover_controller: dimension mismatch");
    return S * v.cwiseInverse().asDiagonal();
}

/// max_i sum_j |Acl_ij| v_j / v_i, the induced infinity norm of
/// diag(v)^-1 Acl diag(v). Acl is extended superstable for v iff < 1.
inline double scaled_infty_norm(const Matrix& Acl, const Vector& v) {
    require_positive(v, "scaled_infty_norm");
    if (Acl.rows() != v.size() || Acl.cols() != v.size())
        throw std::invalid_argument("scaled_infty_norm: dimension mismatch");
    if (Acl.size() == 0)
        return 0.0;
    const Vector rows = Acl.cwiseAbs() * v;
    return rows.cwiseQuotient(v).maxCoeff();
}

/// Worst scaled norm of A + B diag(beta) K over the sector vertices beta.
inline double closed_loop_vertex_gain(const LinearSystem& sys, const Matrix& K, const Vector& v,
                                      const QuantizerSpec& spec) {
    if (K.rows() != sys.m() || K.cols() != sys.n() || spec.channels() != sys.m() || v.size() != sys.n())
        throw std::invalid_argument("closed_loop_vertex_gain: dimension mismatch");
    double worst = 0.0;
    for (const Vector& beta : beta_vertices(spec.delta()))
        worst = std::max(worst, scaled_infty_norm(sys.A + sys.B * beta.asDiagonal() * K, v));
    return worst;
}

struct Trajectory {
    std::vector<Vector> states;
    bool diverged = false;
};

/// x_{t+1} = A x_t + B g_rho(K x_t), stopping early when ||x_t||_inf > 1e12.
inline Trajectory simulate_quantized(const LinearSystem& sys, const Matrix& K, const QuantizerSpec& spec,
                                     const Vector& x0, int horizon) {
    if (horizon < 0)
        throw std::invalid_argument("simulate_quantized: negative horizon");
    if (x0.size() != sys.n() || K.rows() != sys.m() || K.cols() != sys.n() || spec.channels() != sys.m())
        throw std::invalid_argument("simulate_quantized: dimension mismatch");
    constexpr double kDivergence = 1e12;
    Trajectory traj;
    traj.states.reserve(static_cast<std::size_t>(horizon) + 1);
    traj.states.push_back(x0);
    Vector x = x0;
    for (int t = 0; t < horizon; ++t) {
        const Vector u = log_quantize_vector(K * x, spec);
        x = sys.A * x + sys.B * u;
        if (!x.allFinite() || x.lpNorm<Eigen::Infinity>() > kDivergence) {
            traj.diverged = true;
            break;
        }
        traj.states.push_back(x);
    }
    return traj;
}

struct CertCheck {
    bool ok = false;
    // Row-sum slack min_i (v_i - eta - sum_j M_ij) when the envelope holds;
    // otherwise the (negative) worst envelope violation.
    double margin = 0.0;
};

/// Checks the M-form certificate: |A Y + B diag(beta) S| <= M at every sector
/// vertex and row sums of M at most v - eta.
inline CertCheck check_cert(const LinearSystem& sys, const StabCertificate& cert, const QuantizerSpec& spec,
                            double tol = 1e-9) {
    const Eigen::Index n = sys.n();
    if (cert.v.size() != n || cert.S.rows() != sys.m() || cert.S.cols() != n || cert.M.rows() != n ||
        cert.M.cols() != n || spec.channels() != sys.m())
        throw std::invalid_argument("check_cert: dimension mismatch");
    const Matrix AY = sys.A * cert.v.asDiagonal();
    double envelope = std::numeric_limits<double>::infinity();
    for (const Vector& beta : beta_vertices(spec.delta())) {
        const Matrix E = (AY + sys.B * beta.asDiagonal() * cert.S).cwiseAbs();
        if (n > 0)
            envelope = std::min(envelope, (cert.M - E).minCoeff());
    }
    if (envelope < -tol)
        return {false, envelope};
    const Vector slack = cert.v - Vector::Constant(n, cert.eta) - cert.M.rowwise().sum();
    const double margin = n > 0 ? slack.minCoeff() : std::numeric_limits<double>::infinity();
    return {margin >= -tol, margin};
}

/// ||x_t ./ v||_inf <= lambda^t ||x_0 ./ v||_inf + 1e-9 at every step.
inline bool decay_check(const Trajectory& traj, const Vector& v, double lambda) {
    if (lambda < 0.0)
        throw std::domain_error("decay_check: lambda must be nonnegative");
    if (traj.states.empty())
        return true;
    require_positive(v, "decay_check");
    const double x0 = traj.states.front().cwiseQuotient(v).lpNorm<Eigen::Infinity>();
    double bound = x0;
    for (const Vector& x : traj.states) {
        if (x.cwiseQuotient(v).lpNorm<Eigen::Infinity>() > bound + 1e-9)
            return false;
        bound *= lambda;
    }
    return true;
}

}  // namespace qddc
