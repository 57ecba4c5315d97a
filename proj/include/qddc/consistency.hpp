#pragma once

// Interval-quantized transition data and the polytope of plants (A, B)
// consistent with it, over z = [vec(A); vec(B)] (column-wise vec).

#include "qddc/linalg.hpp"
#include "qddc/lp/polytope.hpp"
#include "qddc/quantizer.hpp"
#include "qddc/sysmodel.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <vector>

namespace qddc {

/// One observation: state x, applied input u, and bounds p <= x+ <= q
/// (entries may be infinite).
struct DataSample {
    Vector x;
    Vector u;
    Vector p;
    Vector q;
};

struct Dataset {
    std::vector<DataSample> samples;
    double epsilon = 0.0;  // widening already applied to p, q
    std::uint64_t seed = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    Eigen::Index n() const { return samples.empty() ? 0 : samples.front().x.size(); }
    Eigen::Index m() const { return samples.empty() ? 0 : samples.front().u.size(); }

    /// The first count samples (nested sub-dataset).
    Dataset prefix(std::size_t count) const {
        Dataset out = *this;
        out.samples.resize(std::min(count, samples.size()));
        return out;
    }

    void validate() const {
        for (const DataSample& s : samples) {
            if (s.x.size() != n() || s.u.size() != m() || s.p.size() != n() || s.q.size() != n())
                throw std::invalid_argument("Dataset: inconsistent sample dimensions");
            for (Eigen::Index i = 0; i < s.p.size(); ++i)
                if (s.p(i) > s.q(i))
                    throw std::invalid_argument("Dataset: lower bound exceeds upper bound");
        }
    }
};

struct ExcitationConfig {
    double state_lo = -2.0;
    double state_hi = 2.0;
    double input_lo = -2.0;
    double input_hi = 2.0;
    double noise = 0.0;  // process noise radius, uniform per coordinate
};

/// Replaces every finite bound [p, q] by [p - eps, q + eps].
inline Dataset widen_noise(const Dataset& data, double epsilon) {
    if (!(epsilon >= 0.0))
        throw std::domain_error("widen_noise: epsilon must be nonnegative");
    Dataset out = data;
    for (DataSample& s : out.samples) {
        s.p.array() -= epsilon;  // -inf stays -inf
        s.q.array() += epsilon;
    }
    out.epsilon += epsilon;
    return out;
}

/// Draws (x, u) i.i.d. uniform, records x+ = A x + B u (+ noise) as the
/// partition bin of each coordinate. With noise the bins are widened by the
/// noise radius so the generating plant stays consistent.
inline Dataset generate_dataset(const LinearSystem& sys, const Partition& partition, int count,
                                std::uint64_t seed, const ExcitationConfig& excitation = {}) {
    if (count < 0)
        throw std::invalid_argument("generate_dataset: negative sample count");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> xdist(excitation.state_lo, excitation.state_hi);
    std::uniform_real_distribution<double> udist(excitation.input_lo, excitation.input_hi);
    std::uniform_real_distribution<double> wdist(-1.0, 1.0);

    Dataset data;
    data.seed = seed;
    data.samples.reserve(static_cast<std::size_t>(count));
    for (int s = 0; s < count; ++s) {
        DataSample sample;
        sample.x.resize(sys.n());
        sample.u.resize(sys.m());
        for (Eigen::Index i = 0; i < sys.n(); ++i)
            sample.x(i) = xdist(rng);
        for (Eigen::Index k = 0; k < sys.m(); ++k)
            sample.u(k) = udist(rng);
        Vector next = sys.A * sample.x + sys.B * sample.u;
        if (excitation.noise > 0.0)
            for (Eigen::Index i = 0; i < next.size(); ++i)
                next(i) += excitation.noise * wdist(rng);
        sample.p.resize(sys.n());
        sample.q.resize(sys.n());
        for (Eigen::Index i = 0; i < next.size(); ++i) {
            const Interval bin = interval_quantize(next(i), partition);
            sample.p(i) = bin.lower;
            sample.q(i) = bin.upper;
        }
        data.samples.push_back(std::move(sample));
    }
    if (excitation.noise > 0.0)
        data = widen_noise(data, excitation.noise);
    data.seed = seed;
    return data;
}

/// G_D z <= h_D with rows [-(x'(x)I | u'(x)I) z <= -p ; (x'(x)I | u'(x)I) z <= q],
/// all lower-bound rows first, sample-major. Rows with infinite bounds are
/// dropped.
inline Polytope build_polytope(const Dataset& data) {
    if (data.empty())
        throw std::invalid_argument("build_polytope: empty dataset");
    data.validate();
    const Eigen::Index n = data.n(), m = data.m();
    const Eigen::Index d = n * (n + m);

    std::vector<Eigen::RowVectorXd> rows;
    std::vector<double> rhs;
    auto regressor = [&](const DataSample& s, Eigen::Index i) {
        Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(d);
        for (Eigen::Index j = 0; j < n; ++j)
            g(i + j * n) = s.x(j);
        for (Eigen::Index k = 0; k < m; ++k)
            g(n * n + i + k * n) = s.u(k);
        return g;
    };
    for (const DataSample& s : data.samples)
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isfinite(s.p(i))) {
                rows.push_back(-regressor(s, i));
                rhs.push_back(-s.p(i));
            }
    for (const DataSample& s : data.samples)
        for (Eigen::Index i = 0; i < n; ++i)
            if (std::isfinite(s.q(i))) {
                rows.push_back(regressor(s, i));
                rhs.push_back(s.q(i));
            }

    Matrix G(static_cast<Eigen::Index>(rows.size()), d);
    Vector h(static_cast<Eigen::Index>(rhs.size()));
    for (std::size_t r = 0; r < rows.size(); ++r) {
        G.row(static_cast<Eigen::Index>(r)) = rows[r];
        h(static_cast<Eigen::Index>(r)) = rhs[r];
    }
    return Polytope(std::move(G), std::move(h));
}

inline bool contains_plant(const Polytope& P, const Matrix& A, const Matrix& B, double tol = 1e-9) {
    const Vector z = stack_plant(A, B);
    if (z.size() != P.dim())
        throw std::invalid_argument("contains_plant: dimension mismatch");
    return P.contains(z, tol);
}

/// Indices of the rows kept by sequential redundancy elimination. Row i is
/// dropped when max g_i'x over the other retained rows is at most
/// h_i + tol; the retained set shrinks as rows are dropped.
inline std::vector<Eigen::Index> nonredundant_rows(const Polytope& P, double tol = 1e-8) {
    if (!is_feasible(P))
        throw std::domain_error("prune_redundant: polytope is empty");
    const Eigen::Index L = P.faces();
    std::vector<char> keep(static_cast<std::size_t>(L), 1);
    for (Eigen::Index i = 0; i < L; ++i) {
        std::vector<Eigen::Index> others;
        others.reserve(static_cast<std::size_t>(L));
        for (Eigen::Index r = 0; r < L; ++r)
            if (r != i && keep[static_cast<std::size_t>(r)])
                others.push_back(r);
        // Capping row i at h_i + 1 keeps the subproblem bounded along g_i.
        Polytope rest = P.select_rows(others);
        rest.G.conservativeResize(rest.G.rows() + 1, Eigen::NoChange);
        rest.h.conservativeResize(rest.h.size() + 1);
        rest.G.row(rest.G.rows() - 1) = P.G.row(i);
        rest.h(rest.h.size() - 1) = P.h(i) + 1.0;
        const SupportResult r = support(P.G.row(i).transpose(), rest);
        if (r.status == SupportStatus::Optimal && r.value <= P.h(i) + tol)
            keep[static_cast<std::size_t>(i)] = 0;
    }
    std::vector<Eigen::Index> out;
    for (Eigen::Index r = 0; r < L; ++r)
        if (keep[static_cast<std::size_t>(r)])
            out.push_back(r);
    return out;
}

inline Polytope prune_redundant(const Polytope& P, double tol = 1e-8) {
    return P.select_rows(nonredundant_rows(P, tol));
}

}  // namespace qddc
