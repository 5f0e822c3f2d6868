#include <doctest.h>

#include "lgc/sparse_var.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <random>

using namespace lgc;

namespace {

double soft(double z, double t) { return z > t ? z - t : (z < -t ? z + t : 0.0); }

LassoProblem random_problem(std::mt19937_64& rng, int d, int p) {
    int pd = p * d;
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(pd, pd);
    for (int i = 0; i < pd * pd; ++i) m(i / pd, i % pd) = g(rng);
    Eigen::MatrixXd gb = m * m.transpose() / pd + Eigen::MatrixXd::Identity(pd, pd) * 0.5;
    LassoProblem prob;
    prob.d = d;
    prob.p = p;
    prob.gamma_big = gb;
    prob.gamma_hat.resize(pd * d);
    for (int i = 0; i < pd * d; ++i) prob.gamma_hat(i) = g(rng);
    return prob;
}

} // namespace

TEST_CASE("lambda = 0 matches the direct solve") {
    std::mt19937_64 rng(1);
    auto prob = random_problem(rng, 3, 2);
    prob.lambda = 0.0;
    auto sol = lasso_solve(prob);
    CHECK(sol.converged);
    int pd = prob.p * prob.d;
    for (int c = 0; c < prob.d; ++c) {
        Eigen::VectorXd direct =
            prob.gamma_big.ldlt().solve(prob.gamma_hat.segment(c * pd, pd));
        CHECK((sol.beta_hat.segment(c * pd, pd) - direct).cwiseAbs().maxCoeff() < 1e-6);
    }
    CHECK(sol.kkt_residual < 1e-6);
}

TEST_CASE("large lambda gives the zero solution exactly") {
    std::mt19937_64 rng(2);
    auto prob = random_problem(rng, 3, 1);
    prob.lambda = 2.0 * prob.gamma_hat.cwiseAbs().maxCoeff() + 1e-9;
    auto sol = lasso_solve(prob);
    CHECK(sol.beta_hat.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("orthonormal design closed form") {
    std::mt19937_64 rng(3);
    LassoProblem prob;
    prob.d = 2;
    prob.p = 2;
    prob.gamma_big = Eigen::MatrixXd::Identity(4, 4);
    prob.gamma_hat.resize(8);
    std::normal_distribution<double> g;
    for (int i = 0; i < 8; ++i) prob.gamma_hat(i) = g(rng);
    prob.lambda = 0.7;
    auto sol = lasso_solve(prob);
    for (int j = 0; j < 8; ++j)
        CHECK(sol.beta_hat(j) ==
              doctest::Approx(soft(prob.gamma_hat(j), 0.35)).epsilon(1e-10));
}

TEST_CASE("KKT residual is small at convergence") {
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 5; ++rep) {
        auto prob = random_problem(rng, 3, 2);
        prob.lambda = 0.3;
        auto sol = lasso_solve(prob);
        CHECK(sol.converged);
        CHECK(sol.kkt_residual < 1e-6);
    }
}

TEST_CASE("coefficient reshape follows the stacked-transpose convention") {
    LassoProblem prob;
    prob.d = 2;
    prob.p = 1;
    prob.gamma_big = Eigen::MatrixXd::Identity(2, 2);
    // beta = gamma_hat at lambda 0 with identity design; B0 = [A1'].
    prob.gamma_hat.resize(4);
    prob.gamma_hat << 1.0, 2.0, 3.0, 4.0;
    prob.lambda = 0.0;
    auto sol = lasso_solve(prob);
    REQUIRE(sol.coeff_hats.size() == 1);
    // Column c of B0 holds row c of A1.
    CHECK(sol.coeff_hats[0](0, 0) == doctest::Approx(1.0));
    CHECK(sol.coeff_hats[0](0, 1) == doctest::Approx(2.0));
    CHECK(sol.coeff_hats[0](1, 0) == doctest::Approx(3.0));
    CHECK(sol.coeff_hats[0](1, 1) == doctest::Approx(4.0));
}

TEST_CASE("check_re identity oracles") {
    Eigen::MatrixXd id = Eigen::MatrixXd::Identity(5, 5);
    auto ok = check_re(id, 1.0, 0.0, 200, 1);
    CHECK_FALSE(ok.violated);
    CHECK(ok.margin == doctest::Approx(0.0).epsilon(1e-9));

    auto bad = check_re(id, 2.0, 0.0, 200, 1);
    CHECK(bad.violated);
    CHECK(bad.margin == doctest::Approx(-1.0).epsilon(1e-9));
    REQUIRE(bad.witness.has_value());

    // Eigen lower bound 0.3 implies RE with alpha = 0.2, tau = 0.
    Eigen::MatrixXd m = id * 0.3;
    m(0, 1) = m(1, 0) = 0.05;
    auto pass = check_re(m, 0.2, 0.0, 500, 2);
    CHECK_FALSE(pass.violated);
}

TEST_CASE("deviation_check matches the dense oracle") {
    std::mt19937_64 rng(5);
    auto prob = random_problem(rng, 3, 2);
    int pd = prob.p * prob.d, q = pd * prob.d;
    std::normal_distribution<double> g;
    Eigen::VectorXd beta0(q);
    for (int i = 0; i < q; ++i) beta0(i) = g(rng);

    Eigen::MatrixXd kron = Eigen::MatrixXd::Zero(q, q);
    for (int c = 0; c < prob.d; ++c)
        kron.block(c * pd, c * pd, pd, pd) = prob.gamma_big;
    double oracle = (prob.gamma_hat - kron * beta0).cwiseAbs().maxCoeff();
    CHECK(deviation_check(prob, beta0) == doctest::Approx(oracle).epsilon(1e-12));

    // Exact-match and zero-beta corner cases.
    Eigen::VectorXd exact = kron.ldlt().solve(prob.gamma_hat);
    CHECK(deviation_check(prob, exact) < 1e-9);
    CHECK(deviation_check(prob, Eigen::VectorXd::Zero(q)) ==
          doctest::Approx(prob.gamma_hat.cwiseAbs().maxCoeff()));
}

TEST_CASE("prop41_bounds values and homogeneity") {
    auto b = prop41_bounds(1, 0.1, 0.5);
    CHECK(b.l2 == doctest::Approx(3.2).epsilon(1e-12));
    CHECK(b.l1 == doctest::Approx(12.8).epsilon(1e-12));
    CHECK(b.quad == doctest::Approx(2.56).epsilon(1e-12));

    auto b2 = prop41_bounds(1, 0.2, 0.5);
    CHECK(b2.l1 == doctest::Approx(2.0 * b.l1));
    CHECK(b2.l2 == doctest::Approx(2.0 * b.l2));
    CHECK(b2.quad == doctest::Approx(4.0 * b.quad));

    auto b3 = prop41_bounds(1, 0.1, 5000.0);
    CHECK(b3.l1 < 1e-2);
}

TEST_CASE("permutation stability of the solution") {
    std::mt19937_64 rng(6);
    auto prob = random_problem(rng, 4, 1);
    prob.lambda = 0.4;
    auto sol = lasso_solve(prob);

    // Permute coordinates of the shared design and each response block.
    int pd = prob.p * prob.d;
    std::vector<int> perm{2, 0, 3, 1};
    LassoProblem pp = prob;
    for (int i = 0; i < pd; ++i)
        for (int j = 0; j < pd; ++j)
            pp.gamma_big(i, j) = prob.gamma_big(perm[i], perm[j]);
    for (int c = 0; c < prob.d; ++c)
        for (int i = 0; i < pd; ++i)
            pp.gamma_hat(c * pd + i) = prob.gamma_hat(c * pd + perm[i]);
    auto sol2 = lasso_solve(pp);
    for (int c = 0; c < prob.d; ++c)
        for (int i = 0; i < pd; ++i)
            CHECK(sol2.beta_hat(c * pd + i) ==
                  doctest::Approx(sol.beta_hat(c * pd + perm[i])).epsilon(1e-6));
}
