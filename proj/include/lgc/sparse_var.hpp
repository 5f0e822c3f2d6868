#pragma once

#include "lgc/latent_estimator.hpp"

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace lgc {

/// Penalized regression data on the latent scale. The full design I_d (x)
/// gamma_big is never materialized; the d column subproblems share gamma_big.
struct LassoProblem {
    Eigen::VectorXd gamma_hat;  // length q = p d^2, vec of the stacked lag vector
    Eigen::MatrixXd gamma_big;  // pd x pd
    double lambda = 0.0;
    int d = 0;
    int p = 0;
};

struct LassoSolution {
    Eigen::VectorXd beta_hat;              // length q, vec of [A1' ; ... ; Ap']
    std::vector<Eigen::MatrixXd> coeff_hats;  // reconstructed A_1..A_p
    double objective = 0.0;                // -2 b'g + b'Gb + lambda ||b||_1
    long iterations = 0;                   // total coordinate sweeps
    double kkt_residual = 0.0;
    bool converged = false;
};

struct LassoOptions {
    double tol = 1e-9;
    long max_iter = 100000;
    bool psd_project = true;
};

/// Sample block ACVF over lags 0..p, latent inversion with force_one
/// diagonals, vectorized with the B0 = [A1' ; ... ; Ap'] convention.
LassoProblem build_problem(const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x,
                           int p, const std::vector<Family>& families, double lambda,
                           const std::vector<int>& known_counts = {});

/// Cyclic coordinate descent, one independent subproblem per response column.
LassoSolution lasso_solve(const LassoProblem& prob, const LassoOptions& opts = {});

struct ReCheck {
    bool violated = false;
    std::optional<Eigen::VectorXd> witness;
    double margin = 0.0;  // min over tested unit x of x'Gx - alpha + tau ||x||_1^2
};

/// Randomized falsification of x'Gx >= alpha ||x||^2 - tau ||x||_1^2 over
/// sparse sign vectors (exhaustive when affordable), Gaussian and eigenvector
/// directions. A pass is evidence, not proof.
ReCheck check_re(const Eigen::MatrixXd& gamma_big, double alpha, double tau,
                 long trials, int s);

/// ||gamma_hat - (I (x) gamma_big) beta0||_max via the block structure.
double deviation_check(const LassoProblem& prob, const Eigen::VectorXd& beta0);

struct Prop41Bounds {
    double l1 = 0.0;    // 64 s lambda / alpha
    double l2 = 0.0;    // 16 sqrt(s) lambda / alpha
    double quad = 0.0;  // 128 s lambda^2 / alpha
};

Prop41Bounds prop41_bounds(int s, double lambda, double alpha);

} // namespace lgc
