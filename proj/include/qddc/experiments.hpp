#pragma once

// Built-in example plants and partitions, a method dispatcher, and the
// minimal-density bisection and gain-versus-density sweep.

#include "qddc/consistency.hpp"
#include "qddc/nominal.hpp"
#include "qddc/synth_aarc.hpp"
#include "qddc/synth_sign.hpp"
#include "qddc/verify.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace qddc {

/// 3-state, 2-input example.
inline LinearSystem example_sys1() {
    Matrix A(3, 3), B(3, 2);
    A << -0.1300, -0.3974, 0.2030,
         -0.3974, -0.5000, 0.2990,
          0.2030, 0.2990, -0.5262;
    B << 0.2179, 1.2300,
         0.3592, 0.0,
        -1.1553, 0.0;
    return {A, B};
}

/// 5-state, 3-input example: A = (1/5)[min(i/j, j/i)] + (1/2) I with 1-based
/// indices, B = [I_3; 0].
inline LinearSystem example_sys2() {
    Matrix A(5, 5);
    for (int i = 1; i <= 5; ++i)
        for (int j = 1; j <= 5; ++j)
            A(i - 1, j - 1) = 0.2 * std::min(double(i) / j, double(j) / i) + (i == j ? 0.5 : 0.0);
    Matrix B = Matrix::Zero(5, 3);
    B.topRows(3).setIdentity();
    return {A, B};
}

/// Edges -4, -3, ..., 4 (10 bins).
inline Partition example_partition1() { return Partition::uniform(-4.0, 4.0, 1.0); }

/// Edges -6, -5.5, ..., 6 (26 bins).
inline Partition example_partition2() { return Partition::uniform(-6.0, 6.0, 0.5); }

/// {z} for z = [vec(A); vec(B)], as the pair of inequalities z <= z0, -z <= -z0.
inline Polytope singleton_polytope(const LinearSystem& sys) {
    const Vector z = stack_plant(sys.A, sys.B);
    return Polytope::box(z, z);
}

enum class Method { Nominal, Sign, Aarc };

inline std::string to_string(Method m) {
    switch (m) {
    case Method::Nominal: return "nominal";
    case Method::Sign: return "sign";
    case Method::Aarc: return "aarc";
    }
    return "unknown";
}

inline Method parse_method(const std::string& s) {
    if (s == "nominal")
        return Method::Nominal;
    if (s == "sign")
        return Method::Sign;
    if (s == "aarc")
        return Method::Aarc;
    throw std::invalid_argument("unknown method '" + s + "' (expected nominal, sign or aarc)");
}

/// What a synthesis problem is posed over: a known plant (nominal) or a
/// consistency polytope (sign, aarc).
struct ProblemSource {
    std::optional<LinearSystem> sys;
    std::optional<Polytope> polytope;
    Eigen::Index m = 0;
};

struct MethodResult {
    SynthStatus status = SynthStatus::NumericalFailure;
    StabCertificate cert;
    std::optional<AffineMParam> affine;
    ModelCounts counts;

    bool feasible() const { return status == SynthStatus::Feasible; }
};

inline MethodResult synthesize(Method method, const ProblemSource& src, double rho, const SynthOptions& opt) {
    const QuantizerSpec spec = QuantizerSpec::uniform(src.m, rho);
    MethodResult out;
    switch (method) {
    case Method::Nominal: {
        if (!src.sys)
            throw std::invalid_argument("nominal synthesis needs a system");
        NominalProblem p{*src.sys, spec, opt.mode, opt.eta, opt.objective};
        // sign form is exact; the shared-M form only past the enumeration guard
        NominalResult r = src.sys->n() + src.sys->m() <= 20 ? synthesize_nominal_sign(p, opt.backend)
                                                            : synthesize_nominal_mform(p, opt.backend);
        out.status = r.status;
        out.cert = std::move(r.cert);
        out.counts = r.counts;
        break;
    }
    case Method::Sign: {
        if (!src.polytope)
            throw std::invalid_argument("sign synthesis needs a polytope");
        SignResult r = synthesize_sign(*src.polytope, spec, opt);
        out.status = r.status;
        out.cert = std::move(r.cert);
        out.counts = r.counts;
        break;
    }
    case Method::Aarc: {
        if (!src.polytope)
            throw std::invalid_argument("aarc synthesis needs a polytope");
        AarcResult r = synthesize_aarc(*src.polytope, spec, opt);
        out.status = r.status;
        out.cert = std::move(r.cert);
        out.counts = r.counts;
        if (r.feasible())
            out.affine = std::move(r.M);
        break;
    }
    }
    if (!out.feasible())
        out.cert.status = to_string(out.status);
    return out;
}

/// Feasibility probe with one retry on numerical failure. A second failure
/// counts as infeasible. Near the boundary the solver can return a point that
/// is only feasible to its own tolerance, so a certificate counts only once
/// the independent oracle accepts it.
inline bool probe_feasible(Method method, const ProblemSource& src, double rho, const SynthOptions& opt,
                           int* failures = nullptr) {
    SynthOptions o = opt;
    o.objective = Objective::Feasibility;
    for (int attempt = 0; attempt < 2; ++attempt) {
        const MethodResult r = synthesize(method, src, rho, o);
        if (r.status == SynthStatus::NumericalFailure)
            continue;
        if (!r.feasible())
            return false;
        const Polytope P = method == Method::Nominal ? singleton_polytope(*src.sys) : *src.polytope;
        return robust_verify(P, r.cert, QuantizerSpec::uniform(src.m, rho)).verified;
    }
    if (failures)
        ++*failures;
    return false;
}

struct MinRhoResult {
    std::optional<double> rho;  // empty when infeasible at rho = 1
    int probes = 0;
    int numerical_failures = 0;
};

/// Bisection on (0, 1]: feasibility is monotone in rho, so the returned value
/// is within tol above the smallest feasible density.
inline MinRhoResult minimal_rho(Method method, const ProblemSource& src, const SynthOptions& opt,
                                double tol = 1e-4) {
    if (!(tol > 0.0))
        throw std::invalid_argument("minimal_rho: tolerance must be positive");
    MinRhoResult r;
    ++r.probes;
    if (!probe_feasible(method, src, 1.0, opt, &r.numerical_failures))
        return r;
    double lo = 0.0, hi = 1.0;
    while (hi - lo > tol) {
        const double mid = 0.5 * (lo + hi);
        ++r.probes;
        if (probe_feasible(method, src, mid, opt, &r.numerical_failures))
            hi = mid;
        else
            lo = mid;
    }
    r.rho = hi;
    return r;
}

inline std::vector<double> log_grid(double lo, double hi, int points) {
    if (!(lo > 0.0) || !(hi <= 1.0) || !(lo <= hi) || points < 1)
        throw std::invalid_argument("log_grid: need 0 < lo <= hi <= 1 and at least one point");
    std::vector<double> g;
    for (int k = 0; k < points; ++k) {
        const double t = points == 1 ? 1.0 : double(k) / (points - 1);
        g.push_back(std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo))));
    }
    g.back() = hi;
    return g;
}

struct SweepPoint {
    double rho = 1.0;
    std::optional<double> lambda;  // minimized gain when the LP produced one
    SynthStatus status = SynthStatus::NumericalFailure;
};

/// Minimized lambda at each grid density. threads > 1 evaluates points
/// concurrently; the output order always follows the grid.
inline std::vector<SweepPoint> sweep(Method method, const ProblemSource& src, const std::vector<double>& grid,
                                     const SynthOptions& opt, int threads = 1) {
    for (double rho : grid)
        if (!(rho > 0.0 && rho <= 1.0))
            throw std::invalid_argument("sweep: grid points must lie in (0, 1]");
    SynthOptions o = opt;
    o.objective = Objective::MinimizeLambda;
    std::vector<SweepPoint> out(grid.size());
    auto point = [&](std::size_t k) {
        MethodResult r = synthesize(method, src, grid[k], o);
        if (r.status == SynthStatus::NumericalFailure)
            r = synthesize(method, src, grid[k], o);
        out[k].rho = grid[k];
        out[k].status = r.status;
        if (r.feasible())
            out[k].lambda = r.cert.lambda;
    };
    if (threads <= 1) {
        for (std::size_t k = 0; k < grid.size(); ++k)
            point(k);
    } else {
        std::vector<std::thread> pool;
        const std::size_t w = std::min<std::size_t>(static_cast<std::size_t>(threads), grid.size());
        for (std::size_t t = 0; t < w; ++t)
            pool.emplace_back([&, t] {
                for (std::size_t k = t; k < grid.size(); k += w)
                    point(k);
            });
        for (std::thread& th : pool)
            th.join();
    }
    return out;
}

inline std::string sweep_csv(const std::vector<SweepPoint>& pts) {
    std::ostringstream os;
    os.precision(10);
    os << "rho,lambda,status\n";
    for (const SweepPoint& p : pts) {
        os << p.rho << ",";
        if (p.lambda)
            os << *p.lambda;
        os << "," << to_string(p.status) << "\n";
    }
    return os.str();
}

}  // namespace qddc
