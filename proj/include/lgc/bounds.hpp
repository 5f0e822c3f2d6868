#pragma once

#include "lgc/marginals.hpp"
#include "lgc/var_model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace lgc {

struct MomentSuprema {
    double m_big = 0.0;     // max_{i, k in {0,3}} sup m^(k)(1+c)
    double mu_big = 0.0;    // max_{i, k in {0,3}} sup mu^(k)(1+c)
    double m1 = 0.0;        // max_i sup 1/(m^(0)(1-c))^2
    double m2 = 0.0;        // max_{i, k in {0,2}} sup (m^(k)(1/(1-c)))^2/(m^(0)(1-c))^4
    double delta_eps = 0.0; // max_i sup Delta_i
};

/// Suprema over the eps-box around each spec's theta, approximated by a tensor
/// grid (grid points per parameter; grid=1 evaluates at theta only). The grid
/// max lower-bounds the true sup.
MomentSuprema moment_suprema(const std::vector<MarginalSpec>& specs, double c_z,
                             double eps, int grid = 5);

struct BoundConstants {
    MomentSuprema moments;  // at c_z
    double d_const = 0.0;
    double r_const = 0.0;
    double s_const = 0.0;
    double t_const = 0.0;
    double u_const = 0.0;
    double q_const = 0.0;
    double c_z = 0.0;
    double eps = 0.0;
    double delta_tilde = 0.0;
    double eps_tilde = 0.0;
    double gamma_norm_s = 0.0;
    bool gamma_norm_heuristic = false;  // sparse norm is a lower bound only
    double c_of_delta = 0.0;            // computed c(delta_tilde), capped
    bool grid_sup = true;               // suprema are grid maxima (lower bounds)
};

/// Composite constants D, R, S, T, U and Q = 4 max{D, 4R, 2U, T} max{S^2, 1}.
BoundConstants q_of_gamma(const std::vector<MarginalSpec>& specs,
                          const LatentAcvf& acvf_z, int s, double c_z, double eps,
                          double delta_tilde, double eps_tilde, int grid = 5);

struct VarBoundQuantities {
    double mu_max = 0.0;  // max over frequencies of lambda_max(A*(w) A(w))
    double alpha = 0.0;
    double tau = 0.0;
    double nu = 0.0;
    double q_beta0 = 0.0;
    double lambda_threshold = 0.0;
};

/// alpha = lambda_min(Sigma)/(2 mu_max), tau = alpha max{nu^-2,1} log(dp)/N,
/// nu = lambda_min(Sigma)/(54 mu_max q_gamma s),
/// q_beta0 = 2 max_j{||B0 e_j||_F, 1} q_gamma s,
/// lambda_threshold = 4 q_beta0 sqrt(log(q)/N) with q = p d^2.
VarBoundQuantities var_bound_quantities(const VarModel& model,
                                        const Eigen::MatrixXd& b0, int s,
                                        double q_gamma, long N);

} // namespace lgc
