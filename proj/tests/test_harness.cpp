#include <doctest.h>

#include "lgc/harness.hpp"

#include <cmath>
#include <sstream>

using namespace lgc;

namespace {

ExperimentConfig small_config() {
    ExperimentConfig cfg;
    cfg.d = 2;
    cfg.p = 1;
    cfg.s = 1;
    cfg.coeff_value = 0.4;
    cfg.families = {"bernoulli", "bernoulli"};
    cfg.thetas = {{0.5}, {0.5}};
    cfg.n_grid = {300, 600};
    cfg.replicates = 2;
    cfg.master_seed = 77;
    cfg.lambda_grid = {0.05, 0.2};
    cfg.L = 1;
    return cfg;
}

} // namespace

TEST_CASE("config JSON round trip and hashing") {
    auto cfg = small_config();
    auto again = ExperimentConfig::from_json(cfg.to_json());
    CHECK(again.to_json() == cfg.to_json());
    CHECK(again.hash() == cfg.hash());
    again.master_seed = 78;
    CHECK(again.hash() != cfg.hash());
}

TEST_CASE("config validation") {
    auto cfg = small_config();
    cfg.n_grid = {600, 300};
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.s = 100;
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.diag_mode = "bogus";
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("model generation is deterministic, sparse, and causal") {
    auto cfg = small_config();
    auto m1 = cfg.make_model(2);
    auto m2 = cfg.make_model(2);
    CHECK((m1.model.coeffs[0] - m2.model.coeffs[0]).cwiseAbs().maxCoeff() == 0.0);
    CHECK(check_causal(m1.model).causal);
    long nnz = 0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j) nnz += m1.model.coeffs[0](i, j) != 0.0;
    CHECK(nnz == 1);
    CHECK(m1.acvf.lags[0](0, 0) == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("run_experiment is thread-count independent byte for byte") {
    auto cfg = small_config();
    auto r1 = run_experiment(cfg, 1);
    auto r8 = run_experiment(cfg, 8);
    std::ostringstream a, b;
    write_csv(r1, a);
    write_csv(r8, b);
    CHECK(a.str() == b.str());
    CHECK(r1.rows.size() == cfg.n_grid.size() * cfg.replicates * cfg.lambda_grid.size());
    CHECK(r1.failed_cells == 0);
}

TEST_CASE("rate_fit recovers synthetic slopes exactly") {
    auto cfg = small_config();
    cfg.n_grid = {100, 400, 1600};
    ExperimentResult res;
    res.config = cfg;
    for (long n : cfg.n_grid) {
        for (int rep = 0; rep < cfg.replicates; ++rep) {
            for (double lam : cfg.lambda_grid) {
                CellRow r;
                r.n = n;
                r.replicate = rep;
                r.lambda = lam;
                r.latent_max = 3.0 / std::sqrt(static_cast<double>(n));
                r.latent_frob = 5.0 / static_cast<double>(n);
                r.latent_sparse = r.latent_max;
                r.lasso_l1 = r.lasso_l2 = 1.0;
                res.rows.push_back(r);
            }
        }
    }
    CHECK(rate_fit(res, "latent_max").slope == doctest::Approx(-0.5).epsilon(1e-12));
    CHECK(rate_fit(res, "latent_frob").slope == doctest::Approx(-1.0).epsilon(1e-12));
    CHECK(rate_fit(res, "latent_max").intercept ==
          doctest::Approx(std::log(3.0)).epsilon(1e-10));
}

TEST_CASE("default lambda grid spans the documented range") {
    auto grid = default_lambda_grid(1, 4, 1000);
    REQUIRE(grid.size() == 20);
    double base = std::sqrt(std::log(16.0) / 1000.0);
    CHECK(grid.front() == doctest::Approx(0.01 * base).epsilon(1e-12));
    CHECK(grid.back() == doctest::Approx(8.0 * base).epsilon(1e-12));
    for (size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
}

TEST_CASE("replay reproduces a sweep cell") {
    auto cfg = small_config();
    auto res = run_experiment(cfg, 2);
    auto cell = run_cell(cfg, 1, 1);
    REQUIRE(cell.size() == cfg.lambda_grid.size());
    for (const auto& row : cell) {
        bool found = false;
        for (const auto& r : res.rows)
            if (r.n == row.n && r.replicate == row.replicate && r.lambda == row.lambda) {
                found = true;
                CHECK(r.latent_max == row.latent_max);
                CHECK(r.lasso_l2 == row.lasso_l2);
            }
        CHECK(found);
    }
}
