#pragma once

#include "lgc/marginals.hpp"

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace lgc {

/// Latent VAR(p) process: coefficient matrices A_1..A_p and noise covariance.
struct VarModel {
    int p = 0;
    int d = 0;
    std::vector<Eigen::MatrixXd> coeffs;
    Eigen::MatrixXd noise_cov;

    VarModel() = default;
    VarModel(std::vector<Eigen::MatrixXd> a, Eigen::MatrixXd sigma);

    Eigen::MatrixXd companion() const;  // pd x pd
    void validate() const;
};

struct LatentAcvf {
    std::vector<Eigen::MatrixXd> lags;  // Gamma_Z(0..L)
    bool standardized = false;
};

struct CausalCheck {
    bool causal = false;
    double spectral_radius = 0.0;
};

CausalCheck check_causal(const VarModel& model);

/// Stationary autocovariances via the companion-form Lyapunov solve extended
/// by the Yule-Walker recursion. Throws for non-causal models.
LatentAcvf stationary_acvf(const VarModel& model, int max_lag);

struct StandardizedModel {
    VarModel model;
    LatentAcvf acvf;  // standardized, up to the requested lag
};

/// Rescale so the stationary process has unit variance per component.
StandardizedModel standardize(const VarModel& model, int max_lag = -1);

/// Deterministic per-stream seed derivation (splitmix64 of master and index).
std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index);

/// Simulate T observations after discarding burn_in warm-up steps
/// (burn_in < 0 selects the default 10 p + 500). Deterministic given the seed.
Eigen::MatrixXd simulate(const VarModel& model, long T, std::uint64_t seed, long burn_in = -1);

/// X[t,i] = quantile(spec_i, Phi(Z[t,i])).
Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> transform_counts(
    const Eigen::MatrixXd& z, const std::vector<MarginalSpec>& specs);

} // namespace lgc
