#pragma once

// Solver-independent LP model: scalar variables with bounds, affine
// expressions, equality/inequality rows and a minimization objective.

#include "qddc/linalg.hpp"

#include <cmath>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace qddc::lp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct Term {
    int var;
    double coef;
};

/// Affine expression sum_k coef_k * x_{var_k} + constant. Duplicate
/// variables are allowed and summed when the model is lowered.
class LinExpr {
public:
    LinExpr() = default;
    LinExpr(double constant) : constant_(constant) {}  // NOLINT: implicit by design of the DSL

    static LinExpr var(int index, double coef = 1.0) {
        LinExpr e;
        e.add_term(index, coef);
        return e;
    }

    void add_term(int index, double coef) {
        if (coef != 0.0)
            terms_.push_back({index, coef});
    }
    void add_constant(double c) { constant_ += c; }

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }

    double evaluate(const Vector& x) const {
        double acc = constant_;
        for (const Term& t : terms_)
            acc += t.coef * x(t.var);
        return acc;
    }

    LinExpr& operator+=(const LinExpr& o) {
        terms_.insert(terms_.end(), o.terms_.begin(), o.terms_.end());
        constant_ += o.constant_;
        return *this;
    }
    LinExpr& operator-=(const LinExpr& o) {
        terms_.reserve(terms_.size() + o.terms_.size());
        for (const Term& t : o.terms_)
            terms_.push_back({t.var, -t.coef});
        constant_ -= o.constant_;
        return *this;
    }
    LinExpr& operator*=(double s) {
        if (s == 0.0) {
            terms_.clear();
            constant_ = 0.0;
            return *this;
        }
        for (Term& t : terms_)
            t.coef *= s;
        constant_ *= s;
        return *this;
    }

    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, double s) { return a *= s; }
    friend LinExpr operator*(double s, LinExpr a) { return a *= s; }
    friend LinExpr operator-(LinExpr a) { return a *= -1.0; }

private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

/// Row-major matrix of affine expressions.
class ExprMatrix {
public:
    ExprMatrix() = default;
    ExprMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(static_cast<std::size_t>(rows) * cols) {}

    static ExprMatrix constant(const Matrix& M) {
        ExprMatrix out(static_cast<int>(M.rows()), static_cast<int>(M.cols()));
        for (int i = 0; i < out.rows_; ++i)
            for (int j = 0; j < out.cols_; ++j)
                out(i, j) = LinExpr(M(i, j));
        return out;
    }

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    LinExpr& operator()(int i, int j) { return data_[static_cast<std::size_t>(i) * cols_ + j]; }
    const LinExpr& operator()(int i, int j) const { return data_[static_cast<std::size_t>(i) * cols_ + j]; }

    Matrix evaluate(const Vector& x) const {
        Matrix out(rows_, cols_);
        for (int i = 0; i < rows_; ++i)
            for (int j = 0; j < cols_; ++j)
                out(i, j) = (*this)(i, j).evaluate(x);
        return out;
    }

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<LinExpr> data_;
};

enum class Relation { LessEqual, Equal, GreaterEqual };

/// expr (relation) 0
struct Constraint {
    LinExpr expr;
    Relation relation;
};

/// Bookkeeping for one Extended-Farkas containment block.
struct FarkasBlock {
    int first_var = 0;
    int rows = 0;  // L2: faces of the containing polytope
    int cols = 0;  // L1: faces of the contained polytope

    int var(int r, int l) const { return first_var + r * cols + l; }

    Matrix value(const Vector& x) const {
        Matrix Z(rows, cols);
        for (int r = 0; r < rows; ++r)
            for (int l = 0; l < cols; ++l)
                Z(r, l) = x(var(r, l));
        return Z;
    }
};

class Model {
public:
    int add_variable(double lower = -kInf, double upper = kInf) {
        if (lower > upper)
            throw std::invalid_argument("Model::add_variable: empty bounds");
        lower_.push_back(lower);
        upper_.push_back(upper);
        return static_cast<int>(lower_.size()) - 1;
    }

    /// Adds count variables and returns the index of the first one.
    int add_variables(int count, double lower = -kInf, double upper = kInf) {
        const int first = num_variables();
        for (int k = 0; k < count; ++k)
            add_variable(lower, upper);
        return first;
    }

    void add_constraint(const LinExpr& lhs, Relation rel, const LinExpr& rhs) {
        LinExpr e = lhs - rhs;
        for (const Term& t : e.terms())
            if (t.var < 0 || t.var >= num_variables())
                throw std::out_of_range("Model::add_constraint: undeclared variable");
        if (rel == Relation::Equal)
            ++equalities_;
        else
            ++inequalities_;
        constraints_.push_back({std::move(e), rel});
    }
    void add_le(const LinExpr& lhs, const LinExpr& rhs) { add_constraint(lhs, Relation::LessEqual, rhs); }
    void add_ge(const LinExpr& lhs, const LinExpr& rhs) { add_constraint(lhs, Relation::GreaterEqual, rhs); }
    void add_eq(const LinExpr& lhs, const LinExpr& rhs) { add_constraint(lhs, Relation::Equal, rhs); }

    void minimize(LinExpr objective) { objective_ = std::move(objective); }

    void register_farkas_block(const FarkasBlock& block) { farkas_.push_back(block); }

    int num_variables() const { return static_cast<int>(lower_.size()); }
    int num_equalities() const { return equalities_; }
    int num_inequalities() const { return inequalities_; }
    int num_constraints() const { return static_cast<int>(constraints_.size()); }

    double lower(int j) const { return lower_[j]; }
    double upper(int j) const { return upper_[j]; }
    const std::vector<Constraint>& constraints() const { return constraints_; }
    const LinExpr& objective() const { return objective_; }
    const std::vector<FarkasBlock>& farkas_blocks() const { return farkas_; }

    /// Largest violation of any row or bound at x (0 when x is feasible).
    double max_violation(const Vector& x) const {
        double worst = 0.0;
        for (int j = 0; j < num_variables(); ++j) {
            worst = std::max(worst, lower_[j] - x(j));
            worst = std::max(worst, x(j) - upper_[j]);
        }
        for (const Constraint& c : constraints_) {
            const double v = c.expr.evaluate(x);
            switch (c.relation) {
            case Relation::LessEqual: worst = std::max(worst, v); break;
            case Relation::GreaterEqual: worst = std::max(worst, -v); break;
            case Relation::Equal: worst = std::max(worst, std::abs(v)); break;
            }
        }
        return worst;
    }

private:
    std::vector<double> lower_;
    std::vector<double> upper_;
    std::vector<Constraint> constraints_;
    LinExpr objective_;
    std::vector<FarkasBlock> farkas_;
    int equalities_ = 0;
    int inequalities_ = 0;
};

enum class Status { Optimal, Infeasible, Unbounded, NumericalFailure };

inline std::string to_string(Status s) {
    switch (s) {
    case Status::Optimal: return "optimal";
    case Status::Infeasible: return "infeasible";
    case Status::Unbounded: return "unbounded";
    case Status::NumericalFailure: return "numerical-failure";
    }
    return "unknown";
}

struct Solution {
    Status status = Status::NumericalFailure;
    Vector x;  // empty unless status == Optimal
    double objective = 0.0;
    int iterations = 0;

    bool optimal() const { return status == Status::Optimal; }
};

/// Solver backend contract. Implementations must never throw on numerical
/// trouble; they report Status::NumericalFailure instead.
class Backend {
public:
    virtual ~Backend() = default;
    virtual Solution solve(const Model& model) const = 0;
    virtual std::string name() const = 0;
};

}  // namespace qddc::lp
