#include <doctest.h>

#include "lgc/bounds.hpp"

#include <cmath>

using namespace lgc;

TEST_CASE("moment_suprema Bernoulli(1/2) closed forms") {
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.5)};
    auto ms = moment_suprema(specs, 0.5, 0.0, 1);
    CHECK(ms.m_big == doctest::Approx(0.3989422804014327).epsilon(1e-9));
    CHECK(ms.m1 == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
    CHECK(ms.delta_eps == doctest::Approx(0.0));
    // mu for Bernoulli(1/2): |dC/dp| = 1 and the 1/phi(0) threshold-gradient
    // factor cancels the Gaussian kernel, so mu = 1 at any u.
    CHECK(ms.mu_big == doctest::Approx(1.0).epsilon(1e-9));
    // M2: m^(0) is u-free at q=0, so the ratio is 1/m^2 = 2 pi.
    CHECK(ms.m2 == doctest::Approx(2.0 * M_PI).epsilon(1e-9));
}

TEST_CASE("moment_suprema nondecreasing in eps") {
    std::vector<MarginalSpec> specs{MarginalSpec::poisson(2.0),
                                    MarginalSpec::bernoulli(0.4)};
    auto a = moment_suprema(specs, 0.3, 0.0, 1);
    auto b = moment_suprema(specs, 0.3, 0.05, 5);
    auto c = moment_suprema(specs, 0.3, 0.1, 5);
    CHECK(b.m_big >= a.m_big - 1e-12);
    CHECK(c.m_big >= b.m_big - 1e-12);
    CHECK(c.delta_eps >= b.delta_eps - 1e-12);
    CHECK(c.m1 >= b.m1 - 1e-12);
}

TEST_CASE("moment_suprema rejects a box leaving the domain") {
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.05)};
    CHECK_THROWS_AS(moment_suprema(specs, 0.3, 0.1, 5), std::domain_error);
}

TEST_CASE("q_of_gamma composes the displayed formulas") {
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.5),
                                    MarginalSpec::bernoulli(0.5)};
    LatentAcvf acvf;
    acvf.lags = {Eigen::MatrixXd::Identity(2, 2)};
    acvf.standardized = true;
    double c_z = 0.4, eps = 0.0, dt = 0.01, et = 0.01;
    auto bc = q_of_gamma(specs, acvf, 1, c_z, eps, dt, et, 1);

    // Recompose independently from the moment pieces.
    auto at = [&](double c) { return moment_suprema(specs, c, eps, 1); };
    auto half = at(0.5);
    auto zero = at(0.0);
    auto main = at(c_z);
    double d_c = std::sqrt(half.m1) * 2.0 * std::max(3.0 * main.delta_eps, 1.0);
    double om = 1.0 - c_z * c_z;
    double r_c = (8.0 * M_PI * zero.m1 + 24.0 * M_PI / (om * om) * main.m2) *
                 bc.gamma_norm_s;
    double s_c = 12.0 / std::pow(om, 3.5) * main.m_big * main.mu_big * bc.gamma_norm_s;
    CHECK(bc.d_const == doctest::Approx(d_c).epsilon(1e-10));
    CHECK(bc.r_const == doctest::Approx(r_c).epsilon(1e-10));
    CHECK(bc.s_const == doctest::Approx(s_c).epsilon(1e-10));
    CHECK(bc.gamma_norm_s == doctest::Approx(1.0).epsilon(1e-10));

    double s2 = std::max(bc.s_const * bc.s_const, 1.0);
    CHECK(bc.q_const ==
          doctest::Approx(4.0 *
                          std::max({bc.d_const, 4.0 * bc.r_const, 2.0 * bc.u_const,
                                    bc.t_const}) *
                          s2)
              .epsilon(1e-12));
    CHECK(bc.c_of_delta >= 0.0);
    CHECK(bc.c_of_delta < 1.0);
}

TEST_CASE("r_const increases with c_z") {
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.4),
                                    MarginalSpec::poisson(1.0)};
    LatentAcvf acvf;
    acvf.lags = {Eigen::MatrixXd::Identity(2, 2)};
    acvf.standardized = true;
    double prev = -1.0;
    for (double c : {0.1, 0.3, 0.5, 0.7}) {
        auto bc = q_of_gamma(specs, acvf, 1, c, 0.0, 0.01, 0.01, 1);
        CHECK(bc.r_const >= prev);
        prev = bc.r_const;
    }
}

TEST_CASE("var_bound_quantities scalar frequency oracle") {
    // A = 0.5 I (d=2), Sigma = 0.75 I: mu_max = max |1 - 0.5 e^{iw}|^2 = 2.25.
    Eigen::MatrixXd a = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::MatrixXd sig = 0.75 * Eigen::MatrixXd::Identity(2, 2);
    VarModel m({a}, sig);
    Eigen::MatrixXd b0 = a.transpose();
    auto vb = var_bound_quantities(m, b0, 1, 1.0, 1000);
    CHECK(vb.mu_max == doctest::Approx(2.25).epsilon(1e-9));
    CHECK(vb.alpha == doctest::Approx(0.75 / 4.5).epsilon(1e-9));

    // A = 0: mu_max = 1, alpha = lambda_min/2.
    VarModel m0({Eigen::MatrixXd::Zero(2, 2)}, sig);
    auto vb0 = var_bound_quantities(m0, Eigen::MatrixXd::Zero(2, 2), 1, 1.0, 1000);
    CHECK(vb0.mu_max == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(vb0.alpha == doctest::Approx(0.375).epsilon(1e-10));

    // Unit columns of B0 leave the max factor at 1.
    Eigen::MatrixXd b1 = Eigen::MatrixXd::Identity(2, 2);
    auto vb1 = var_bound_quantities(m0, b1, 1, 2.0, 1000);
    CHECK(vb1.q_beta0 == doctest::Approx(2.0 * 1.0 * 2.0 * 1.0).epsilon(1e-10));
    double lam = 4.0 * vb1.q_beta0 * std::sqrt(std::log(4.0) / 1000.0);
    CHECK(vb1.lambda_threshold == doctest::Approx(lam).epsilon(1e-12));
}
