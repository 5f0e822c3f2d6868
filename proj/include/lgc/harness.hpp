#pragma once

#include "lgc/latent_estimator.hpp"
#include "lgc/sparse_var.hpp"
#include "lgc/var_model.hpp"

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace lgc {

struct ExperimentConfig {
    int d = 2;
    int p = 1;
    int s = 1;                  // nonzero coefficients in the generated model
    double coeff_value = 0.5;   // magnitude of the nonzero coefficients
    double noise_sigma = 1.0;   // isotropic noise standard deviation
    std::vector<std::string> families;        // per column
    std::vector<std::vector<double>> thetas;  // per column
    std::vector<int> known_counts;            // optional, per column
    std::vector<long> n_grid;                 // strictly increasing
    int replicates = 1;
    std::uint64_t master_seed = 0;
    std::vector<double> lambda_grid;  // empty selects the default grid per N
    int L = 1;
    std::string diag_mode = "force_one";

    void validate() const;
    static ExperimentConfig from_json(const std::string& text);
    std::string to_json() const;  // canonical; hashed into every output row
    std::string hash() const;

    std::vector<MarginalSpec> marginal_specs() const;
    /// Deterministic sparse model derived from master_seed; standardized.
    StandardizedModel make_model(int max_lag) const;
    /// vec([A1' ; ... ; Ap']) of the standardized model.
    Eigen::VectorXd true_beta(const StandardizedModel& m) const;
};

struct CellRow {
    long n = 0;
    int replicate = 0;
    double lambda = 0.0;
    double latent_max = 0.0;
    double latent_sparse = 0.0;
    double latent_frob = 0.0;
    double lasso_l1 = 0.0;
    double lasso_l2 = 0.0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    double deviation = 0.0;
    double kkt = 0.0;
    long iterations = 0;
    std::string error;  // empty on success; other fields NaN on failure
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<CellRow> rows;  // ordered by (n, replicate, lambda)
    long failed_cells = 0;
};

/// Per-N-per-replicate rows; deterministic given the master seed regardless of
/// thread count (independent seed streams, ordered reduction).
ExperimentResult run_experiment(const ExperimentConfig& config, int threads = 1);

/// Rows for a single (N-index, replicate) cell; used by replay.
std::vector<CellRow> run_cell(const ExperimentConfig& config, int n_index, int replicate);

/// Default lambda grid: 20 geometric points on [0.01, 2] sqrt(log(q)/N).
std::vector<double> default_lambda_grid(int p, int d, long n);

struct RateFit {
    double slope = 0.0;
    double intercept = 0.0;
};

/// Least squares of log(median metric) against log(N). Metrics: latent_max,
/// latent_sparse, latent_frob, lasso_l1, lasso_l2 (lasso metrics use the
/// per-replicate minimum over lambda).
RateFit rate_fit(const ExperimentResult& result, const std::string& metric);

/// Per-N median of a metric, replicate-reduced as in rate_fit.
std::vector<std::pair<long, double>> metric_medians(const ExperimentResult& result,
                                                    const std::string& metric);

/// Config echo in comment lines, then one row per cell, 17 significant digits.
void write_csv(const ExperimentResult& result, std::ostream& os);

} // namespace lgc
