#include "lgc/latent_estimator.hpp"
#include "lgc/link.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <stdexcept>

namespace lgc {

LatentEstimate estimate_latent_acvf(
    const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x, int L,
    const std::vector<Family>& families, DiagMode diag_mode,
    const std::vector<int>& known_counts) {
    int d = static_cast<int>(x.cols());
    if (static_cast<int>(families.size()) != d)
        throw std::invalid_argument("one family per column required");
    if (!known_counts.empty() && static_cast<int>(known_counts.size()) != d)
        throw std::invalid_argument("known_counts must be empty or length d");

    LatentEstimate out;
    out.diag_mode = diag_mode;
    for (int j = 0; j < d; ++j) {
        std::vector<long> col(x.rows());
        for (long t = 0; t < x.rows(); ++t) col[t] = x(t, j);
        if (*std::max_element(col.begin(), col.end()) ==
            *std::min_element(col.begin(), col.end()))
            throw std::runtime_error("degenerate marginal: column " + std::to_string(j) +
                                     " is constant");
        int kc = known_counts.empty() ? 0 : known_counts[j];
        out.theta_hats.push_back(fit_theta(col, families[j], kc).spec);
    }

    // One estimated link context per unordered pair; shared across lags.
    std::vector<std::vector<std::unique_ptr<LinkContext>>> ctx(d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j <= i; ++j)
            ctx[i].push_back(std::make_unique<LinkContext>(out.theta_hats[i],
                                                           out.theta_hats[j], i == j));
    auto pair_ctx = [&](int i, int j) -> const LinkContext& {
        return i >= j ? *ctx[i][j] : *ctx[j][i];
    };

    BlockAcvf sample = sample_block_acvf(x, L);
    std::vector<Eigen::MatrixXd> lags;
    for (int h = 0; h <= L; ++h) {
        Eigen::MatrixXd g(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                const LinkContext& c = pair_ctx(i, j);
                double val = sample.lag_blocks[h](i, j);
                if (h == 0 && i == j) {
                    if (diag_mode == DiagMode::ForceOne) {
                        g(i, j) = 1.0;
                    } else {
                        double u = link_invert(c, val);
                        g(i, j) = std::clamp(u, 0.0, 1.0);
                    }
                    continue;
                }
                double u = link_invert(c, val);
                if (u >= c.u_clamp || u <= -c.u_clamp) ++out.clamp_hits;
                g(i, j) = u;
            }
        }
        lags.push_back(g);
    }
    out.acvf_hat = block_acvf_from_lags(std::move(lags));
    return out;
}

RecoveryError recovery_error(const LatentEstimate& est, const LatentAcvf& truth, int s) {
    if (truth.lags.size() < est.acvf_hat.lag_blocks.size() ||
        truth.lags.empty() || truth.lags[0].rows() != est.acvf_hat.d)
        throw std::invalid_argument("truth must cover the estimated lags and dimension");
    std::vector<Eigen::MatrixXd> tl(truth.lags.begin(),
                                    truth.lags.begin() + est.acvf_hat.lag_blocks.size());
    BlockAcvf tb = block_acvf_from_lags(std::move(tl));
    Eigen::MatrixXd diff = est.acvf_hat.big - tb.big;
    RecoveryError err;
    err.max_norm = diff.cwiseAbs().maxCoeff();
    err.frobenius = diff.norm();
    SparseNormMode mode = SparseNormMode::Exact;
    int n = static_cast<int>(diff.rows());
    int m = std::min(2 * s, n);
    double budget = 1.0;
    for (int i = 1; i <= m; ++i) budget *= static_cast<double>(n - m + i) / i;
    if (budget > 1e6) mode = SparseNormMode::Heuristic;
    err.sparse_norm_err = sparse_norm(diff, s, mode);
    return err;
}

} // namespace lgc
