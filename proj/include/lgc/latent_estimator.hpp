#pragma once

#include "lgc/acvf.hpp"
#include "lgc/marginals.hpp"
#include "lgc/var_model.hpp"

#include <Eigen/Dense>
#include <vector>

namespace lgc {

enum class DiagMode { ForceOne, EstimateClamped };

struct LatentEstimate {
    BlockAcvf acvf_hat;                    // latent scale, lags 0..L
    std::vector<MarginalSpec> theta_hats;  // fitted marginals, one per column
    DiagMode diag_mode = DiagMode::EstimateClamped;
    long clamp_hits = 0;  // off-diagonal entries pushed to +-u_clamp
};

/// Plug-in latent ACVF: fit marginals per column, build the estimated link per
/// unordered pair, invert the sample count ACVF entrywise. Lag-0 diagonal
/// entries are forced to 1 or estimated and clamped to [0,1] per diag_mode.
LatentEstimate estimate_latent_acvf(
    const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x, int L,
    const std::vector<Family>& families, DiagMode diag_mode = DiagMode::EstimateClamped,
    const std::vector<int>& known_counts = {});

struct RecoveryError {
    double max_norm = 0.0;
    double sparse_norm_err = 0.0;
    double frobenius = 0.0;
};

/// Norms of (estimated big matrix) - (true big matrix over the same lags).
RecoveryError recovery_error(const LatentEstimate& est, const LatentAcvf& truth, int s);

} // namespace lgc
