#pragma once

// JSON and CSV serialization. Matrices are arrays of rows; infinite data
// bounds are written as null.

#include "qddc/consistency.hpp"
#include "qddc/synth_aarc.hpp"
#include "qddc/sysmodel.hpp"
#include "qddc/verify.hpp"

#include "json.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace qddc::io {

using json = nlohmann::json;

inline json to_json(const Vector& x, bool infinite_as_null = false) {
    json a = json::array();
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        if (infinite_as_null && std::isinf(x(i)))
            a.push_back(nullptr);
        else
            a.push_back(x(i));
    }
    return a;
}

inline json to_json(const Matrix& X) {
    json a = json::array();
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < X.cols(); ++j)
            row.push_back(X(i, j));
        a.push_back(std::move(row));
    }
    return a;
}

/// null decodes to null_value (used for -inf / +inf bounds).
inline Vector vector_from(const json& a, double null_value = std::numeric_limits<double>::quiet_NaN()) {
    if (!a.is_array())
        throw std::invalid_argument("expected a JSON array for a vector");
    Vector x(static_cast<Eigen::Index>(a.size()));
    for (std::size_t i = 0; i < a.size(); ++i)
        x(static_cast<Eigen::Index>(i)) = a[i].is_null() ? null_value : a[i].get<double>();
    return x;
}

inline Matrix matrix_from(const json& a, Eigen::Index cols_if_empty = 0) {
    if (!a.is_array())
        throw std::invalid_argument("expected a JSON array of rows for a matrix");
    const Eigen::Index rows = static_cast<Eigen::Index>(a.size());
    const Eigen::Index cols = rows > 0 ? static_cast<Eigen::Index>(a[0].size()) : cols_if_empty;
    Matrix X(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        const json& row = a[static_cast<std::size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != cols)
            throw std::invalid_argument("ragged matrix rows");
        for (Eigen::Index j = 0; j < cols; ++j)
            X(i, j) = row[static_cast<std::size_t>(j)].get<double>();
    }
    return X;
}

// --- systems, partitions, polytopes ---------------------------------------

inline json to_json(const LinearSystem& sys) { return {{"A", to_json(sys.A)}, {"B", to_json(sys.B)}}; }

inline LinearSystem system_from(const json& j) {
    Matrix A = matrix_from(j.at("A"));
    Matrix B = matrix_from(j.at("B"));
    if (B.rows() == 0 && A.rows() > 0)
        B.resize(A.rows(), 0);
    return LinearSystem(std::move(A), std::move(B));
}

inline json to_json(const Partition& p) {
    return {{"edges", std::vector<double>(p.edges().begin(), p.edges().end())}};
}

inline Partition partition_from(const json& j) { return Partition(j.at("edges").get<std::vector<double>>()); }

inline json to_json(const Polytope& P) { return {{"G", to_json(P.G)}, {"h", to_json(P.h)}}; }

inline Polytope polytope_from(const json& j) {
    Vector h = vector_from(j.at("h"));
    return Polytope(matrix_from(j.at("G")), std::move(h));
}

// --- datasets ----------------------------------------------------------------

inline json to_json(const Dataset& d, const json& config = json::object()) {
    json samples = json::array();
    for (const DataSample& s : d.samples)
        samples.push_back({{"x", to_json(s.x)}, {"u", to_json(s.u)}, {"p", to_json(s.p, true)}, {"q", to_json(s.q, true)}});
    return {{"seed", d.seed}, {"epsilon", d.epsilon}, {"config", config}, {"samples", std::move(samples)}};
}

inline Dataset dataset_from(const json& j) {
    constexpr double inf = std::numeric_limits<double>::infinity();
    Dataset d;
    d.seed = j.value("seed", std::uint64_t{0});
    d.epsilon = j.value("epsilon", 0.0);
    for (const json& s : j.at("samples")) {
        DataSample ds;
        ds.x = vector_from(s.at("x"));
        ds.u = vector_from(s.at("u"));
        ds.p = vector_from(s.at("p"), -inf);
        ds.q = vector_from(s.at("q"), inf);
        d.samples.push_back(std::move(ds));
    }
    d.validate();
    return d;
}

// --- certificates and reports ---------------------------------------------------

inline json to_json(const StabCertificate& c) {
    json j = {{"v", to_json(c.v)},           {"S", to_json(c.S)},     {"K", to_json(c.K)},
              {"lambda", c.lambda},          {"eta", c.eta},          {"mode", to_string(c.mode)},
              {"status", c.status}};
    if (c.M.size() > 0)
        j["M"] = to_json(c.M);
    return j;
}

inline void add_affine(json& j, const AffineMParam& p) {
    j["m0"] = to_json(p.m0);
    j["ma"] = to_json(p.ma);
    j["mb"] = to_json(p.mb);
}

inline StabCertificate certificate_from(const json& j) {
    StabCertificate c;
    c.v = vector_from(j.at("v"));
    c.S = matrix_from(j.at("S"), c.v.size());
    c.K = j.contains("K") ? matrix_from(j.at("K"), c.v.size()) : recover_controller(c.S, c.v);
    if (c.S.rows() == 0 && c.K.rows() > 0)
        c.S = c.K * c.v.asDiagonal();
    c.lambda = j.value("lambda", 0.0);
    c.eta = j.value("eta", 0.0);
    c.mode = parse_mode(j.value("mode", std::string("ss")));
    c.status = j.value("status", std::string("feasible"));
    if (j.contains("M"))
        c.M = matrix_from(j.at("M"));
    return c;
}

inline json to_json(const VerificationReport& r) {
    json wc = {{"i", r.worst_i}, {"alpha", to_json(r.worst_alpha)}, {"beta", to_json(r.worst_beta)},
               {"A", to_json(r.worst_A)}, {"B", to_json(r.worst_B)}};
    json j = {{"verified", r.verified}, {"worst_margin", std::isfinite(r.worst_margin) ? json(r.worst_margin) : json()},
              {"gain", std::isfinite(r.gain) ? json(r.gain) : json()}, {"worst_case", std::move(wc)}};
    if (!r.diagnostic.empty())
        j["diagnostic"] = r.diagnostic;
    return j;
}

// --- files ---------------------------------------------------------------------

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out)
        throw std::runtime_error("write failed: " + path);
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

// --- CSV -----------------------------------------------------------------------------

inline std::string trajectory_csv(const Trajectory& traj) {
    std::ostringstream os;
    os.precision(17);
    const Eigen::Index n = traj.states.empty() ? 0 : traj.states.front().size();
    os << "t";
    for (Eigen::Index i = 0; i < n; ++i)
        os << ",x" << i + 1;
    os << "\n";
    for (std::size_t t = 0; t < traj.states.size(); ++t) {
        os << t;
        for (Eigen::Index i = 0; i < n; ++i)
            os << "," << traj.states[t](i);
        os << "\n";
    }
    return os.str();
}

}  // namespace qddc::io
