#include "catch_amalgamated.hpp"

#include "qddc/experiments.hpp"
#include "qddc/sysmodel.hpp"

#include <random>

using namespace qddc;
using Catch::Approx;

namespace {

Matrix random_matrix(std::mt19937_64& rng, Eigen::Index r, Eigen::Index c, double scale = 1.0) {
    std::uniform_real_distribution<double> d(-scale, scale);
    Matrix M(r, c);
    for (Eigen::Index i = 0; i < r; ++i)
        for (Eigen::Index j = 0; j < c; ++j)
            M(i, j) = d(rng);
    return M;
}

}  // namespace

TEST_CASE("LinearSystem validation") {
    CHECK_THROWS_AS(LinearSystem(Matrix::Zero(2, 3), Matrix::Zero(2, 1)), std::invalid_argument);
    CHECK_THROWS_AS(LinearSystem(Matrix::Zero(2, 2), Matrix::Zero(3, 1)), std::invalid_argument);
    Matrix A = Matrix::Zero(2, 2);
    A(0, 0) = std::nan("");
    CHECK_THROWS_AS(LinearSystem(A, Matrix::Zero(2, 1)), std::invalid_argument);
    const LinearSystem s(Matrix::Zero(3, 3), Matrix::Zero(3, 0));
    CHECK(s.n() == 3);
    CHECK(s.m() == 0);
    CHECK(parse_mode("ss") == Mode::SS);
    CHECK(parse_mode("ess") == Mode::ESS);
    CHECK_THROWS_AS(parse_mode("x"), std::invalid_argument);
}

TEST_CASE("recover_controller") {
    Matrix S(1, 2);
    S << 1.0, 2.0;
    Vector v(2);
    v << 2.0, 4.0;
    const Matrix K = recover_controller(S, v);
    CHECK(K(0, 0) == 0.5);
    CHECK(K(0, 1) == 0.5);
    CHECK(recover_controller(S, Vector::Ones(2)) == S);
    CHECK(recover_controller(Matrix::Zero(2, 2), v).isZero(0.0));
    CHECK_THROWS_AS(recover_controller(S, Vector::Zero(2)), std::domain_error);
}

TEST_CASE("scaled_infty_norm") {
    CHECK(scaled_infty_norm(Matrix::Zero(2, 2), Vector::Ones(2)) == 0.0);
    CHECK(scaled_infty_norm(0.5 * Matrix::Identity(3, 3), Vector::Ones(3)) == Approx(0.5));
    CHECK(scaled_infty_norm(example_sys1().A, Vector::Ones(3)) == Approx(0.3974 + 0.5 + 0.299));

    // Oracle: induced infinity norm of diag(v)^-1 Acl diag(v) as max absolute row sum.
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> pos(0.1, 3.0);
    for (int t = 0; t < 50; ++t) {
        const Matrix Acl = random_matrix(rng, 3, 3);
        Vector v(3);
        for (int i = 0; i < 3; ++i)
            v(i) = pos(rng);
        const Matrix scaled = v.cwiseInverse().asDiagonal() * Acl * v.asDiagonal();
        CHECK(scaled_infty_norm(Acl, v) == Approx(scaled.cwiseAbs().rowwise().sum().maxCoeff()).epsilon(1e-12));
    }
}

TEST_CASE("scaled norm below one iff every sign-pattern row inequality holds") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> pos(0.2, 2.0);
    for (int n = 1; n <= 4; ++n)
        for (int t = 0; t < 25; ++t) {
            const Matrix Acl = random_matrix(rng, n, n, 0.8);
            Vector v(n);
            for (int i = 0; i < n; ++i)
                v(i) = pos(rng);
            bool all = true;
            for (const Vector& alpha : sign_vectors(n))
                for (int i = 0; i < n; ++i) {
                    double s = 0.0;
                    for (int j = 0; j < n; ++j)
                        s += alpha(j) * Acl(i, j) * v(j);
                    all = all && s < v(i);
                }
            CHECK(all == (scaled_infty_norm(Acl, v) < 1.0));
        }
}

TEST_CASE("closed_loop_vertex_gain") {
    const LinearSystem scalar(Matrix::Constant(1, 1, 0.5), Matrix::Constant(1, 1, 1.0));
    const Matrix K = Matrix::Constant(1, 1, -0.5);
    const double delta = 1.0 / 3.0;
    const double brute = std::max(std::abs(0.5 - (1 - delta) * 0.5), std::abs(0.5 - (1 + delta) * 0.5));
    CHECK(closed_loop_vertex_gain(scalar, K, Vector::Ones(1), QuantizerSpec::uniform(1, 0.5)) == Approx(brute));

    std::mt19937_64 rng(4);
    const LinearSystem s(random_matrix(rng, 3, 3), random_matrix(rng, 3, 2));
    const Matrix K2 = random_matrix(rng, 2, 3);
    const Vector v = Vector::Ones(3);
    const LinearSystem noinput(s.A, Matrix::Zero(3, 2));
    CHECK(closed_loop_vertex_gain(noinput, K2, v, QuantizerSpec::uniform(2, 0.3)) == Approx(scaled_infty_norm(s.A, v)));
    CHECK(closed_loop_vertex_gain(s, K2, v, QuantizerSpec::identity(2)) ==
          Approx(scaled_infty_norm(s.A + s.B * K2, v)));

    // monotone in delta
    double prev = 0.0;
    for (double rho = 1.0; rho > 0.05; rho -= 0.05) {
        const double g = closed_loop_vertex_gain(s, K2, v, QuantizerSpec::uniform(2, rho));
        CHECK(g >= prev - 1e-12);
        prev = g;
    }
}

TEST_CASE("simulate_quantized") {
    std::mt19937_64 rng(6);
    const LinearSystem s(random_matrix(rng, 3, 3, 0.4), random_matrix(rng, 3, 2));
    const Matrix K = random_matrix(rng, 2, 3, 0.3);
    const Vector x0 = random_matrix(rng, 3, 1).col(0);

    const Trajectory zero = simulate_quantized(s, K, QuantizerSpec::uniform(2, 0.5), Vector::Zero(3), 10);
    REQUIRE(zero.states.size() == 11);
    for (const Vector& x : zero.states)
        CHECK(x.isZero(0.0));

    const LinearSystem noinput(s.A, Matrix::Zero(3, 2));
    const Trajectory lin = simulate_quantized(noinput, K, QuantizerSpec::uniform(2, 0.5), x0, 8);
    Vector x = x0;
    for (const Vector& xt : lin.states) {
        CHECK((xt - x).norm() < 1e-12);
        x = s.A * x;
    }

    const Trajectory ident = simulate_quantized(s, K, QuantizerSpec::identity(2), x0, 20);
    x = x0;
    const Matrix Acl = s.A + s.B * K;
    for (const Vector& xt : ident.states) {
        CHECK((xt - x).lpNorm<Eigen::Infinity>() < 1e-12);
        x = Acl * x;
    }

    const LinearSystem unstable(Matrix::Constant(1, 1, 10.0), Matrix::Zero(1, 1));
    const Trajectory div = simulate_quantized(unstable, Matrix::Zero(1, 1), QuantizerSpec::identity(1),
                                              Vector::Ones(1), 100);
    CHECK(div.diverged);
    CHECK(div.states.size() == 13);
}

TEST_CASE("check_cert") {
    StabCertificate c;
    c.v = Vector::Ones(2);
    c.S = Matrix::Zero(1, 2);
    c.M = Matrix::Zero(2, 2);
    c.eta = 0.5;
    const LinearSystem zero(Matrix::Zero(2, 2), Matrix::Zero(2, 1));
    const CertCheck ok = check_cert(zero, c, QuantizerSpec::uniform(1, 0.5));
    CHECK(ok.ok);
    CHECK(ok.margin == Approx(0.5));

    const LinearSystem big(2.0 * Matrix::Identity(2, 2), Matrix::Zero(2, 1));
    c.M = 2.0 * Matrix::Identity(2, 2);
    c.eta = 0.0;
    CHECK_FALSE(check_cert(big, c, QuantizerSpec::uniform(1, 0.5)).ok);
}

TEST_CASE("decay_check") {
    Trajectory zero;
    zero.states.assign(5, Vector::Zero(2));
    CHECK(decay_check(zero, Vector::Ones(2), 0.0));

    Trajectory geo;
    for (int t = 0; t < 30; ++t)
        geo.states.push_back(Vector::Constant(2, std::pow(0.5, t)));
    CHECK(decay_check(geo, Vector::Ones(2), 0.5));
    CHECK_FALSE(decay_check(geo, Vector::Ones(2), 0.4));
    CHECK_THROWS(decay_check(geo, Vector::Ones(2), -0.1));
}
