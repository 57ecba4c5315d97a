#pragma once

// Logarithmic input quantization and interval (bin) quantization of
// measured next states.

#include "qddc/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace qddc {

/// Sector bound of a logarithmic quantizer with density rho in (0, 1].
inline double delta_from_rho(double rho) {
    if (!(rho > 0.0) || rho > 1.0)
        throw std::domain_error("delta_from_rho: density must lie in (0, 1]");
    return (1.0 - rho) / (1.0 + rho);
}

/// Per-channel densities and the derived sector bounds.
class QuantizerSpec {
public:
    QuantizerSpec() = default;

    explicit QuantizerSpec(Vector rho) : rho_(std::move(rho)), delta_(rho_.size()) {
        for (Eigen::Index j = 0; j < rho_.size(); ++j)
            delta_(j) = delta_from_rho(rho_(j));
    }

    /// Same density on every one of the m channels.
    static QuantizerSpec uniform(Eigen::Index m, double rho) {
        return QuantizerSpec(Vector::Constant(m, rho));
    }

    /// Identity quantizer (rho = 1, delta = 0) on m channels.
    static QuantizerSpec identity(Eigen::Index m) { return uniform(m, 1.0); }

    const Vector& rho() const { return rho_; }
    const Vector& delta() const { return delta_; }
    Eigen::Index channels() const { return rho_.size(); }

private:
    Vector rho_;
    Vector delta_;
};

namespace detail {

// Lower edge of level i: rho^i / (1 + delta) = rho^i (1 + rho) / 2. The upper
// edge of level i is the lower edge of level i - 1, so adjacent levels share
// the exact same floating-point boundary.
inline double level_floor(double rho, long i) {
    return std::pow(rho, static_cast<double>(i)) * (1.0 + rho) * 0.5;
}

}  // namespace detail

/// Scalar logarithmic quantizer g_rho. Levels are +-rho^i for every integer
/// i; a magnitude on the boundary between two levels goes to the larger one.
inline double log_quantize(double z, double rho) {
    if (!std::isfinite(z))
        throw std::domain_error("log_quantize: non-finite input");
    if (!(rho > 0.0) || rho > 1.0)
        throw std::domain_error("log_quantize: density must lie in (0, 1]");
    if (rho == 1.0 || z == 0.0)
        return z;

    const double a = std::abs(z);
    long i = std::lround(std::log(a) / std::log(rho));
    // level i covers [floor(i), floor(i - 1))
    while (a >= detail::level_floor(rho, i - 1))
        --i;
    while (a < detail::level_floor(rho, i))
        ++i;
    const double level = std::pow(rho, static_cast<double>(i));
    return z < 0.0 ? -level : level;
}

inline Vector log_quantize_vector(const Vector& u, const QuantizerSpec& spec) {
    if (u.size() != spec.channels())
        throw std::invalid_argument("log_quantize_vector: dimension mismatch");
    Vector out(u.size());
    for (Eigen::Index j = 0; j < u.size(); ++j)
        out(j) = log_quantize(u(j), spec.rho()(j));
    return out;
}

/// Closed interval with possibly infinite endpoints.
struct Interval {
    double lower = -std::numeric_limits<double>::infinity();
    double upper = std::numeric_limits<double>::infinity();

    bool contains(double x) const { return lower <= x && x <= upper; }
    bool operator==(const Interval&) const = default;
};

/// Bins (-inf, e_1], [e_1, e_2], ..., [e_k, inf) over strictly increasing
/// finite edges.
class Partition {
public:
    Partition() = default;

    explicit Partition(std::vector<double> edges) : edges_(std::move(edges)) {
        for (double e : edges_)
            if (!std::isfinite(e))
                throw std::invalid_argument("Partition: edges must be finite");
        for (std::size_t k = 1; k < edges_.size(); ++k)
            if (!(edges_[k - 1] < edges_[k]))
                throw std::invalid_argument("Partition: edges must be strictly increasing");
    }

    /// Edges lo, lo + step, ..., hi.
    static Partition uniform(double lo, double hi, double step) {
        if (!(step > 0.0) || hi < lo)
            throw std::invalid_argument("Partition::uniform: bad range");
        std::vector<double> edges;
        const long count = std::lround((hi - lo) / step);
        for (long k = 0; k <= count; ++k)
            edges.push_back(lo + static_cast<double>(k) * step);
        return Partition(std::move(edges));
    }

    const std::vector<double>& edges() const { return edges_; }
    std::size_t bin_count() const { return edges_.size() + 1; }

private:
    std::vector<double> edges_;
};

/// Bin containing value. A value equal to an edge lands in the bin where
/// it is the lower endpoint, except below the first edge.
inline Interval interval_quantize(double value, const Partition& partition) {
    if (!std::isfinite(value))
        throw std::domain_error("interval_quantize: non-finite value");
    const auto& e = partition.edges();
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (e.empty())
        return {-inf, inf};
    const auto it = std::upper_bound(e.begin(), e.end(), value);
    if (it == e.begin())
        return {-inf, e.front()};
    if (it == e.end())
        return {e.back(), inf};
    return {*(it - 1), *it};
}

}  // namespace qddc
