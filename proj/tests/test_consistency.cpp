#include "catch_amalgamated.hpp"

#include "qddc/consistency.hpp"
#include "qddc/experiments.hpp"
#include "qddc/lp/farkas.hpp"

#include <limits>
#include <random>

using namespace qddc;
using Catch::Approx;

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

DataSample sample(double x, double u, double p, double q) {
    DataSample s;
    s.x = Vector::Constant(1, x);
    s.u = Vector::Constant(1, u);
    s.p = Vector::Constant(1, p);
    s.q = Vector::Constant(1, q);
    return s;
}

}  // namespace

TEST_CASE("generate_dataset") {
    const LinearSystem sys = example_sys1();
    const Partition part = example_partition1();
    CHECK(generate_dataset(sys, part, 0, 1).empty());

    const Dataset a = generate_dataset(sys, part, 50, 42);
    const Dataset b = generate_dataset(sys, part, 50, 42);
    REQUIRE(a.size() == 50);
    for (std::size_t s = 0; s < a.size(); ++s) {
        CHECK(a.samples[s].x == b.samples[s].x);
        CHECK(a.samples[s].u == b.samples[s].u);
        CHECK(a.samples[s].p == b.samples[s].p);
        CHECK(a.samples[s].q == b.samples[s].q);
        CHECK(a.samples[s].x.cwiseAbs().maxCoeff() <= 2.0);
    }
    CHECK(a.seed == 42);
    CHECK(generate_dataset(sys, part, 50, 43).samples[0].x != a.samples[0].x);
    CHECK(contains_plant(build_polytope(a), sys.A, sys.B));

    ExcitationConfig noisy;
    noisy.noise = 0.3;
    const Dataset n = generate_dataset(sys, part, 80, 9, noisy);
    CHECK(n.epsilon == 0.3);
    CHECK(contains_plant(build_polytope(n), sys.A, sys.B));
}

TEST_CASE("widen_noise") {
    Dataset d;
    d.samples.push_back(sample(1.0, 0.0, 0.3, 0.4));
    d.samples.push_back(sample(1.0, 0.0, 4.0, inf));
    const Dataset same = widen_noise(d, 0.0);
    CHECK(same.samples[0].p(0) == 0.3);
    const Dataset w = widen_noise(d, 0.05);
    CHECK(w.samples[0].p(0) == Approx(0.25));
    CHECK(w.samples[0].q(0) == Approx(0.45));
    const Dataset w2 = widen_noise(d, 0.1);
    CHECK(w2.samples[1].p(0) == Approx(3.9));
    CHECK(std::isinf(w2.samples[1].q(0)));
    CHECK_THROWS_AS(widen_noise(d, -1.0), std::domain_error);
}

TEST_CASE("build_polytope worked cases") {
    Dataset d;
    d.samples.push_back(sample(1.0, 0.0, -1.0, 1.0));
    Polytope P = build_polytope(d);
    REQUIRE(P.faces() == 2);
    REQUIRE(P.dim() == 2);
    CHECK(P.G.row(0) == Eigen::RowVector2d(-1.0, 0.0));
    CHECK(P.h(0) == 1.0);
    CHECK(P.G.row(1) == Eigen::RowVector2d(1.0, 0.0));
    CHECK(P.h(1) == 1.0);

    d.samples[0] = sample(2.0, 0.0, -1.0, 1.0);
    P = build_polytope(d);
    CHECK(max_linear_over_polytope(Eigen::Vector2d(1.0, 0.0), build_polytope(d).select_rows({0, 1})) ==
          Approx(0.5));
    CHECK(support(Eigen::Vector2d(0.0, 1.0), P).status == SupportStatus::Unbounded);

    d.samples[0] = sample(1.0, 1.0, -inf, inf);
    CHECK(build_polytope(d).faces() == 0);
    CHECK(contains_plant(build_polytope(d), Matrix::Constant(1, 1, 1e6), Matrix::Constant(1, 1, -3.0)));
    CHECK_THROWS_AS(build_polytope(Dataset{}), std::invalid_argument);
}

TEST_CASE("row count and Kronecker layout") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    const int n = 3, m = 2, N = 12;
    Dataset d;
    for (int s = 0; s < N; ++s) {
        DataSample ds;
        ds.x = Vector::NullaryExpr(n, [&] { return dist(rng); });
        ds.u = Vector::NullaryExpr(m, [&] { return dist(rng); });
        ds.p = Vector::Constant(n, -1.0);
        ds.q = Vector::Constant(n, 1.0);
        d.samples.push_back(ds);
    }
    const Polytope P = build_polytope(d);
    CHECK(P.faces() == 2 * n * N);

    const Matrix A = Matrix::NullaryExpr(n, n, [&] { return dist(rng); });
    const Matrix B = Matrix::NullaryExpr(n, m, [&] { return dist(rng); });
    const Vector Gz = P.G * stack_plant(A, B);
    for (int s = 0; s < N; ++s) {
        const Vector next = A * d.samples[s].x + B * d.samples[s].u;
        for (int i = 0; i < n; ++i) {
            CHECK(std::abs(Gz(s * n + i) + next(i)) < 1e-12);
            CHECK(std::abs(Gz(n * N + s * n + i) - next(i)) < 1e-12);
        }
    }
}

TEST_CASE("contains_plant") {
    Dataset d;
    d.samples.push_back(sample(1.0, 0.0, 0.4, 0.6));
    const Polytope P = build_polytope(d);
    CHECK(contains_plant(P, Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 9.0)));
    CHECK_FALSE(contains_plant(P, Matrix::Constant(1, 1, 0.7), Matrix::Constant(1, 1, 0.0)));
    CHECK_THROWS(contains_plant(P, Matrix::Zero(2, 2), Matrix::Zero(2, 1)));
}

TEST_CASE("nested datasets give nested polytopes; widening enlarges") {
    const LinearSystem sys(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0));
    const Partition part = Partition::uniform(-4.0, 4.0, 0.5);
    const Dataset d = generate_dataset(sys, part, 40, 3);
    const Polytope small = build_polytope(d.prefix(10));
    const Polytope large = build_polytope(d);
    CHECK(check_containment_bruteforce(large, small));
    CHECK(check_containment_bruteforce(large, build_polytope(widen_noise(d, 0.1))));
    CHECK_FALSE(check_containment_bruteforce(build_polytope(widen_noise(d, 0.1)), large));
}

TEST_CASE("prune_redundant") {
    // unit box with a duplicated face and a loose face x <= 2
    Matrix G(6, 2);
    G << 1, 0, -1, 0, 0, 1, 0, -1, 1, 0, 1, 0;
    Vector h(6);
    h << 1, 1, 1, 1, 1, 2;
    const Polytope P(G, h);
    const Polytope Q = prune_redundant(P);
    CHECK(Q.faces() == 4);
    CHECK(check_containment_bruteforce(P, Q));
    CHECK(check_containment_bruteforce(Q, P));
    CHECK(nonredundant_rows(P) == std::vector<Eigen::Index>{1, 2, 3, 4});

    Matrix Ge(2, 1);
    Ge << 1, -1;
    CHECK_THROWS_AS(prune_redundant(Polytope(Ge, Eigen::Vector2d(-1, -1))), std::domain_error);
}

TEST_CASE("prune_redundant on sampled data keeps the set") {
    const LinearSystem sys = example_sys1();
    const Dataset d = generate_dataset(sys, example_partition1(), 60, 5);
    const Polytope P = build_polytope(d);
    const Polytope Q = prune_redundant(P);
    CHECK(Q.faces() < P.faces());
    CHECK(lp::farkas_contains(P, Q));
    CHECK(lp::farkas_contains(Q, P));
}
