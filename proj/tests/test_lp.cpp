#include "catch_amalgamated.hpp"

#include "qddc/lp/farkas.hpp"
#include "qddc/lp/ipm.hpp"
#include "qddc/lp/model.hpp"
#include "qddc/lp/polytope.hpp"

#include <random>

using namespace qddc;
using namespace qddc::lp;
using Catch::Approx;

namespace {

/// Random bounded polytope: a box [-1, 1]^d plus extra random cuts
/// a'x <= b with b > 0 so the origin stays inside.
Polytope random_polytope(std::mt19937_64& rng, int d, int cuts, double scale = 1.0) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> off(0.2, 1.2);
    Matrix G(2 * d + cuts, d);
    Vector h(2 * d + cuts);
    G.topRows(2 * d) << Matrix::Identity(d, d), -Matrix::Identity(d, d);
    h.head(2 * d).setConstant(scale);
    for (int k = 0; k < cuts; ++k) {
        for (int j = 0; j < d; ++j)
            G(2 * d + k, j) = u(rng);
        h(2 * d + k) = off(rng) * scale;
    }
    return Polytope(G, h);
}

}  // namespace

TEST_CASE("LinExpr arithmetic") {
    LinExpr e = LinExpr::var(0, 2.0) + 3.0;
    e -= LinExpr::var(1);
    e *= 2.0;
    Vector x(2);
    x << 1.0, 5.0;
    CHECK(e.evaluate(x) == Approx(2.0 * (2.0 + 3.0 - 5.0)));
    CHECK((0.0 * e).terms().empty());
    CHECK((-e).evaluate(x) == Approx(-e.evaluate(x)));
}

TEST_CASE("Model bookkeeping") {
    Model m;
    const int x = m.add_variable(0.0, 1.0);
    const int first = m.add_variables(3);
    CHECK(first == 1);
    CHECK(m.num_variables() == 4);
    m.add_le(LinExpr::var(x), 1.0);
    m.add_eq(LinExpr::var(first) + LinExpr::var(first + 1), 2.0);
    CHECK(m.num_equalities() == 1);
    CHECK(m.num_inequalities() == 1);
    CHECK_THROWS_AS(m.add_le(LinExpr::var(9), 0.0), std::out_of_range);
    CHECK_THROWS_AS(m.add_variable(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("interior-point solver basics") {
    {
        Model m;
        const int x = m.add_variable();
        m.add_ge(LinExpr::var(x), 1.0);
        m.minimize(LinExpr::var(x));
        const Solution s = solve(m);
        REQUIRE(s.status == Status::Optimal);
        CHECK(s.x(x) == Approx(1.0).margin(1e-7));
    }
    {
        Model m;
        const int x = m.add_variable();
        m.add_le(LinExpr::var(x), 0.0);
        m.add_ge(LinExpr::var(x), 1.0);
        CHECK(solve(m).status == Status::Infeasible);
    }
    {
        Model m;
        const int x = m.add_variable(0.0, kInf);
        m.minimize(-LinExpr::var(x));
        CHECK(solve(m).status == Status::Unbounded);
    }
    {
        // max 2x + y  s.t. x + y <= 4, x - y <= 2, x, y >= 0  ->  (3, 1), value 7
        Model m;
        const int x = m.add_variable(0.0, kInf), y = m.add_variable(0.0, kInf);
        m.add_le(LinExpr::var(x) + LinExpr::var(y), 4.0);
        m.add_le(LinExpr::var(x) - LinExpr::var(y), 2.0);
        m.minimize(-2.0 * LinExpr::var(x) - LinExpr::var(y));
        const Solution s = solve(m);
        REQUIRE(s.optimal());
        CHECK(s.objective == Approx(-7.0).margin(1e-7));
        CHECK(s.x(x) == Approx(3.0).margin(1e-6));
        CHECK(m.max_violation(s.x) < 1e-8);
    }
    {
        // fixed variable and a constant row
        Model m;
        const int x = m.add_variable(2.0, 2.0);
        m.add_le(LinExpr(1.0), 0.0);
        m.minimize(LinExpr::var(x));
        CHECK(solve(m).status == Status::Infeasible);
    }
}

TEST_CASE("interior-point agrees with the simplex on random LPs") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 40; ++t) {
        const int d = 2 + t % 4;
        const Polytope P = random_polytope(rng, d, 3 + t % 5);
        Vector c(d);
        for (int j = 0; j < d; ++j)
            c(j) = u(rng);
        Model m;
        const int first = m.add_variables(d);
        for (Eigen::Index r = 0; r < P.faces(); ++r) {
            LinExpr row;
            for (int j = 0; j < d; ++j)
                row.add_term(first + j, P.G(r, j));
            m.add_le(row, P.h(r));
        }
        LinExpr obj;
        for (int j = 0; j < d; ++j)
            obj.add_term(first + j, -c(j));
        m.minimize(obj);
        const Solution s = solve(m);
        REQUIRE(s.optimal());
        CHECK(-s.objective == Approx(max_linear_over_polytope(c, P)).margin(1e-7));
    }
}

TEST_CASE("support values") {
    const Polytope seg = Polytope::box(Vector::Constant(1, -1.0), Vector::Constant(1, 1.0));
    CHECK(max_linear_over_polytope(Vector::Constant(1, 1.0), seg) == Approx(1.0));
    CHECK(max_linear_over_polytope(Vector::Constant(1, -2.0), seg) == Approx(2.0));

    Matrix G(1, 1);
    G << -1.0;
    const Polytope ray(G, Vector::Zero(1));
    CHECK(std::isinf(max_linear_over_polytope(Vector::Constant(1, 1.0), ray)));
    CHECK(max_linear_over_polytope(Vector::Constant(1, -1.0), ray) == Approx(0.0).margin(1e-12));

    Matrix Ge(2, 1);
    Ge << 1.0, -1.0;
    const Polytope empty(Ge, Eigen::Vector2d(-1.0, -1.0));
    CHECK_FALSE(is_feasible(empty));
    CHECK_THROWS_AS(max_linear_over_polytope(Vector::Constant(1, 1.0), empty), std::domain_error);

    // argmax lies in P and attains the value
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    for (int t = 0; t < 50; ++t) {
        const Polytope P = random_polytope(rng, 4, 6);
        const Vector c = Vector::NullaryExpr(4, [&] { return u(rng); });
        const SupportResult r = support(c, P);
        REQUIRE(r.status == SupportStatus::Optimal);
        CHECK(P.contains(r.argmax, 1e-9));
        CHECK(c.dot(r.argmax) == Approx(r.value).margin(1e-9));
        double best = -kInf;
        for (const Vector& v : enumerate_vertices(P))
            best = std::max(best, c.dot(v));
        CHECK(r.value == Approx(best).margin(1e-8));
    }
}

TEST_CASE("enumerate_vertices") {
    CHECK(enumerate_vertices(Polytope::box(Vector::Zero(2), Vector::Ones(2))).size() == 4);
    Matrix G(3, 2);
    G << -1, 0, 0, -1, 1, 1;
    CHECK(enumerate_vertices(Polytope(G, Eigen::Vector3d(0, 0, 1))).size() == 3);
    CHECK(enumerate_vertices(Polytope::box(Vector::Zero(3), Vector::Ones(3))).size() == 8);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const Polytope P = random_polytope(rng, 3, 4);
        for (const Vector& v : enumerate_vertices(P))
            CHECK(P.contains(v, 1e-7));
    }
    Matrix Gu(1, 2);
    Gu << 1, 0;
    CHECK_THROWS_AS(enumerate_vertices(Polytope(Gu, Vector::Ones(1))), std::domain_error);
}

TEST_CASE("Farkas blocks") {
    Matrix one = Matrix::Ones(1, 1);
    {
        Model m;
        const FarkasBlock b = add_farkas_block(m, one, Vector::Ones(1), one, Vector::Constant(1, 2.0));
        CHECK(m.num_variables() == 1);
        CHECK(m.num_equalities() == 1);
        CHECK(m.num_inequalities() == 1);
        const Solution s = solve(m);
        REQUIRE(s.optimal());
        CHECK(b.value(s.x)(0, 0) == Approx(1.0).margin(1e-7));
    }
    {
        Model m;
        add_farkas_block(m, one, Vector::Constant(1, 2.0), one, Vector::Ones(1));
        CHECK(solve(m).status == Status::Infeasible);
    }
    const Polytope unit = Polytope::box(-Vector::Ones(2), Vector::Ones(2));
    const Polytope twice = Polytope::box(-2 * Vector::Ones(2), 2 * Vector::Ones(2));
    CHECK(check_containment_bruteforce(unit, twice));
    CHECK_FALSE(check_containment_bruteforce(twice, unit));
    CHECK(farkas_feasible(unit, twice));
    CHECK_FALSE(farkas_feasible(twice, unit));
    CHECK(farkas_contains(unit, twice));
    CHECK_FALSE(farkas_contains(twice, unit));

    // block sizes: L2 * L1 variables, L2 * d equalities, L2 inequalities
    Model m;
    const FarkasBlock b = add_farkas_block(m, twice.G, twice.h, unit.G, unit.h);
    CHECK(b.rows == 4);
    CHECK(b.cols == 4);
    CHECK(m.num_variables() == 16);
    CHECK(m.num_equalities() == 8);
    CHECK(m.num_inequalities() == 4);
}

TEST_CASE("Farkas feasibility matches vertex containment on random pairs") {
    std::mt19937_64 rng(99);
    std::uniform_real_distribution<double> sc(0.6, 1.4);
    int contained = 0;
    for (int t = 0; t < 60; ++t) {
        const int d = 1 + t % 3;
        const Polytope P1 = random_polytope(rng, d, 2, sc(rng));
        const Polytope P2 = random_polytope(rng, d, 2, sc(rng));
        const bool brute = check_containment_bruteforce(P1, P2, 1e-9);
        contained += brute;
        CHECK(farkas_feasible(P1, P2) == brute);
    }
    CHECK(contained > 5);
}
