#pragma once

#include "lgc/marginals.hpp"
#include "lgc/var_model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace lgc {

/// Block-Toeplitz autocovariance matrix over lags 0..L with the stacked
/// lag-vector (Gamma(1)', ..., Gamma(L)')' used by the VAR estimator.
struct BlockAcvf {
    int L = 0;
    int d = 0;
    std::vector<Eigen::MatrixXd> lag_blocks;  // Gamma(0..L)
    Eigen::MatrixXd big;                      // Ld x Ld, block(r,s) = Gamma(s-r)
    Eigen::MatrixXd gamma_stack;              // Ld x d
};

/// Assemble big and gamma_stack from per-lag matrices Gamma(0..L).
BlockAcvf block_acvf_from_lags(std::vector<Eigen::MatrixXd> lags);

/// Sample block ACVF of counts: columns centered by their sample means, all
/// lags share the single divisor N = T - L.
BlockAcvf sample_block_acvf(
    const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x, int L);

/// Gamma_X = l(Gamma_Z) entrywise; lag-0 diagonal via the variance identity.
BlockAcvf theoretical_count_acvf(const LatentAcvf& acvf_z,
                                 const std::vector<MarginalSpec>& specs);

enum class SparseNormMode { Exact, Heuristic };

/// ||A||_s = sup over unit vectors with at most 2s nonzeros of |v' A v|.
/// Exact mode enumerates principal submatrices (budget C(dim, 2s) <= 1e6);
/// heuristic mode is a truncated-power lower bound.
double sparse_norm(const Eigen::MatrixXd& a, int s,
                   SparseNormMode mode = SparseNormMode::Exact);

} // namespace lgc
