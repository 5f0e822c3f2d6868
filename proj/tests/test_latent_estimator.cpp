#include <doctest.h>

#include "lgc/latent_estimator.hpp"
#include "lgc/link.hpp"

#include <cmath>

using namespace lgc;

namespace {

StandardizedModel two_dim_model(double cross) {
    Eigen::MatrixXd a(2, 2), sig(2, 2);
    a << 0.0, cross, cross, 0.0;
    sig << 1.0, 0.0, 0.0, 1.0;
    return standardize(VarModel({a}, sig), 2);
}

} // namespace

TEST_CASE("force_one pins the lag-0 diagonal") {
    auto sm = two_dim_model(0.4);
    Eigen::MatrixXd z = simulate(sm.model, 5000, 1);
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.5),
                                    MarginalSpec::bernoulli(0.5)};
    auto x = transform_counts(z, specs);
    auto est = estimate_latent_acvf(x, 2, {Family::Bernoulli, Family::Bernoulli},
                                    DiagMode::ForceOne);
    CHECK(est.acvf_hat.lag_blocks[0](0, 0) == 1.0);
    CHECK(est.acvf_hat.lag_blocks[0](1, 1) == 1.0);

    auto est2 = estimate_latent_acvf(x, 2, {Family::Bernoulli, Family::Bernoulli},
                                     DiagMode::EstimateClamped);
    CHECK(est2.acvf_hat.lag_blocks[0](0, 0) >= 0.0);
    CHECK(est2.acvf_hat.lag_blocks[0](0, 0) <= 1.0);
}

TEST_CASE("latent cross-lag recovery through the arcsin link") {
    // Standardized cross-symmetric VAR(1); truth from the Lyapunov solve.
    auto sm = two_dim_model(0.45);
    Eigen::MatrixXd z = simulate(sm.model, 100000, 42);
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.5),
                                    MarginalSpec::bernoulli(0.5)};
    auto x = transform_counts(z, specs);
    auto est = estimate_latent_acvf(x, 1, {Family::Bernoulli, Family::Bernoulli},
                                    DiagMode::ForceOne);
    CHECK(est.acvf_hat.lag_blocks[1](0, 1) ==
          doctest::Approx(sm.acvf.lags[1](0, 1)).epsilon(0.15));
    CHECK(std::abs(est.acvf_hat.lag_blocks[1](0, 1) - sm.acvf.lags[1](0, 1)) < 0.05);
    CHECK(est.clamp_hits == 0);
}

TEST_CASE("independent columns stay near zero") {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 0.3;
    auto sm = standardize(VarModel({a}, Eigen::MatrixXd::Identity(2, 2)), 2);
    Eigen::MatrixXd z = simulate(sm.model, 100000, 9);
    std::vector<MarginalSpec> specs{MarginalSpec::poisson(2.0),
                                    MarginalSpec::bernoulli(0.4)};
    auto x = transform_counts(z, specs);
    auto est = estimate_latent_acvf(x, 1, {Family::Poisson, Family::Bernoulli},
                                    DiagMode::ForceOne);
    double band = 5.0 / std::sqrt(static_cast<double>(x.rows() - 1));
    CHECK(std::abs(est.acvf_hat.lag_blocks[0](0, 1)) < band);
    CHECK(std::abs(est.acvf_hat.lag_blocks[1](0, 1)) < band);
}

TEST_CASE("sign preservation") {
    auto sm = two_dim_model(-0.4);
    Eigen::MatrixXd z = simulate(sm.model, 20000, 3);
    std::vector<MarginalSpec> specs{MarginalSpec::bernoulli(0.5),
                                    MarginalSpec::poisson(1.5)};
    auto x = transform_counts(z, specs);
    auto sample = sample_block_acvf(x, 1);
    auto est = estimate_latent_acvf(x, 1, {Family::Bernoulli, Family::Poisson},
                                    DiagMode::ForceOne);
    for (int h = 0; h <= 1; ++h)
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                if (h == 0 && i == j) continue;
                double a = sample.lag_blocks[h](i, j);
                double b = est.acvf_hat.lag_blocks[h](i, j);
                CHECK(a * b >= 0.0);
            }
}

TEST_CASE("degenerate column is rejected") {
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> x(10, 1);
    x.setZero();
    CHECK_THROWS(estimate_latent_acvf(x, 1, {Family::Bernoulli}));
}

TEST_CASE("recovery_error oracles") {
    LatentAcvf truth;
    truth.lags = {Eigen::MatrixXd::Identity(3, 3), 0.3 * Eigen::MatrixXd::Identity(3, 3)};
    truth.standardized = true;

    LatentEstimate est;
    est.acvf_hat = block_acvf_from_lags(truth.lags);
    auto zero = recovery_error(est, truth, 1);
    CHECK(zero.max_norm == 0.0);
    CHECK(zero.frobenius == 0.0);
    CHECK(zero.sparse_norm_err == 0.0);

    // Single symmetric off-diagonal perturbation of size eps at lag 0.
    auto lags = truth.lags;
    lags[0](0, 1) = lags[0](1, 0) = 0.01;
    est.acvf_hat = block_acvf_from_lags(lags);
    auto e = recovery_error(est, truth, 1);
    CHECK(e.max_norm == doctest::Approx(0.01).epsilon(1e-12));
    CHECK(e.sparse_norm_err == doctest::Approx(0.01).epsilon(1e-10));
    CHECK(e.frobenius == doctest::Approx(std::sqrt(2.0) * 0.01).epsilon(1e-10));
}
