#include "lgc/bounds.hpp"
#include "lgc/acvf.hpp"
#include "lgc/link.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace lgc {

namespace {

// All theta vectors on the tensor grid of the eps-box; each must validate.
std::vector<MarginalSpec> grid_specs(const MarginalSpec& spec, double eps, int grid) {
    if (grid < 1) throw std::invalid_argument("grid must be at least 1");
    if (eps == 0.0 || grid == 1) {
        spec.validate();
        return {spec};
    }
    size_t k = spec.theta.size();
    std::vector<MarginalSpec> out;
    std::vector<int> idx(k, 0);
    while (true) {
        std::vector<double> t(k);
        for (size_t j = 0; j < k; ++j)
            t[j] = spec.theta[j] - eps + 2.0 * eps * idx[j] / (grid - 1);
        try {
            MarginalSpec cand = spec.with_theta(std::move(t));
            cand.validate();
            out.push_back(std::move(cand));
        } catch (const std::invalid_argument&) {
            throw std::domain_error("eps-box leaves the parameter domain");
        }
        size_t j = 0;
        while (j < k && ++idx[j] == grid) idx[j++] = 0;
        if (j == k) break;
    }
    return out;
}

} // namespace

MomentSuprema moment_suprema(const std::vector<MarginalSpec>& specs, double c_z,
                             double eps, int grid) {
    if (!(c_z >= 0.0 && c_z < 1.0))
        throw std::invalid_argument("c_z must lie in [0,1)");
    MomentSuprema out;
    out.m1 = 0.0;
    for (const auto& base : specs) {
        for (const auto& spec : grid_specs(base, eps, grid)) {
            for (int k : {0, 3}) {
                out.m_big = std::max(out.m_big, moment_m(spec, k, 1.0 + c_z));
                out.mu_big = std::max(out.mu_big, moment_mu(spec, k, 1.0 + c_z));
            }
            double m0 = moment_m(spec, 0, 1.0 - c_z);
            if (m0 <= 0.0) {
                // As c_z -> 1 the kernel exp(-q^2/(2(1-c_z))) underflows for any
                // nonzero threshold; M1 and M2 exceed double range, so report inf.
                out.m1 = out.m2 = std::numeric_limits<double>::infinity();
            } else {
                out.m1 = std::max(out.m1, 1.0 / (m0 * m0));
                for (int k : {0, 2}) {
                    double mk = moment_m(spec, k, 1.0 / (1.0 - c_z));
                    out.m2 = std::max(out.m2, mk * mk / (m0 * m0 * m0 * m0));
                }
            }
            out.delta_eps = std::max(out.delta_eps, delta_big(spec));
        }
    }
    return out;
}

BoundConstants q_of_gamma(const std::vector<MarginalSpec>& specs,
                          const LatentAcvf& acvf_z, int s, double c_z, double eps,
                          double delta_tilde, double eps_tilde, int grid) {
    if (!acvf_z.standardized)
        throw std::invalid_argument("q_of_gamma expects a standardized latent ACVF");
    BoundConstants out;
    out.c_z = c_z;
    out.eps = eps;
    out.delta_tilde = delta_tilde;
    out.eps_tilde = eps_tilde;
    out.moments = moment_suprema(specs, c_z, eps, grid);

    BlockAcvf gz = block_acvf_from_lags(acvf_z.lags);
    int n = static_cast<int>(gz.big.rows());
    int m = std::min(2 * s, n);
    double budget = 1.0;
    for (int i = 1; i <= m; ++i) budget *= static_cast<double>(n - m + i) / i;
    out.gamma_norm_heuristic = budget > 1e6;
    out.gamma_norm_s = sparse_norm(gz.big, s,
                                   out.gamma_norm_heuristic ? SparseNormMode::Heuristic
                                                            : SparseNormMode::Exact);

    // c(dt): max over off-diagonal entries of g_ij(Gamma_X,ij + 2 dt), capped.
    auto c_of = [&](double dt) {
        BlockAcvf gx = theoretical_count_acvf(acvf_z, specs);
        int d = gx.d;
        std::vector<std::vector<LinkContext>> ctx(d);
        for (int i = 0; i < d; ++i)
            for (int j = 0; j <= i; ++j) ctx[i].emplace_back(specs[i], specs[j], i == j);
        double c = 0.0;
        for (size_t h = 0; h < gx.lag_blocks.size(); ++h) {
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    if (h == 0 && i == j) continue;
                    const LinkContext& lc = i >= j ? ctx[i][j] : ctx[j][i];
                    double u = link_invert(lc, gx.lag_blocks[h](i, j) + 2.0 * dt);
                    c = std::max(c, std::abs(u));
                }
            }
        }
        return std::min(c, 1.0 - 1e-6);
    };

    MomentSuprema ms_half = moment_suprema(specs, 0.5, eps, grid);
    MomentSuprema ms_zero = moment_suprema(specs, 0.0, eps, grid);

    out.d_const = std::sqrt(ms_half.m1) * 2.0 * std::max(3.0 * out.moments.delta_eps, 1.0);
    double om = 1.0 - c_z * c_z;
    out.r_const = (8.0 * M_PI * ms_zero.m1 + 24.0 * M_PI / (om * om) * out.moments.m2) *
                  out.gamma_norm_s;
    out.s_const = 12.0 / std::pow(om, 3.5) * out.moments.m_big * out.moments.mu_big *
                  out.gamma_norm_s;

    auto t_of = [&](double dt) {
        double c = c_of(dt);
        MomentSuprema ms = moment_suprema(specs, c, eps, grid);
        return std::pair<double, double>(6.0 / (1.0 - c * c) * ms.m1 * ms.m2, c);
    };
    auto [t_val, c_dt] = t_of(delta_tilde);
    out.t_const = t_val;
    out.c_of_delta = c_dt;
    double s2 = std::max(out.s_const * out.s_const, 1.0);
    out.u_const = t_of(s2 * eps_tilde).first;

    out.q_const = 4.0 *
                  std::max({out.d_const, 4.0 * out.r_const, 2.0 * out.u_const, out.t_const}) *
                  s2;
    return out;
}

VarBoundQuantities var_bound_quantities(const VarModel& model,
                                        const Eigen::MatrixXd& b0, int s,
                                        double q_gamma, long N) {
    auto cc = check_causal(model);
    if (!cc.causal) throw std::invalid_argument("var_bound_quantities requires a causal model");
    if (b0.rows() != model.p * model.d || b0.cols() != model.d)
        throw std::invalid_argument("b0 must be pd x d");
    if (N < 2) throw std::invalid_argument("N must be at least 2");

    // mu_max over a frequency grid, refined by golden-section around the max.
    auto mu_at = [&](double w) {
        Eigen::MatrixXcd a = Eigen::MatrixXcd::Identity(model.d, model.d);
        for (int u = 1; u <= model.p; ++u)
            a -= model.coeffs[u - 1] * std::exp(std::complex<double>(0.0, w * u));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a.adjoint() * a,
                                                           Eigen::EigenvaluesOnly);
        return es.eigenvalues().maxCoeff();
    };
    const int kGrid = 2048;
    double best = 0.0, best_w = 0.0;
    for (int i = 0; i < kGrid; ++i) {
        double w = 2.0 * M_PI * i / kGrid;
        double v = mu_at(w);
        if (v > best) {
            best = v;
            best_w = w;
        }
    }
    double lo = best_w - 2.0 * M_PI / kGrid, hi = best_w + 2.0 * M_PI / kGrid;
    const double kGold = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - kGold * (hi - lo), x2 = lo + kGold * (hi - lo);
    double f1 = mu_at(x1), f2 = mu_at(x2);
    for (int it = 0; it < 60; ++it) {
        if (f1 > f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - kGold * (hi - lo);
            f1 = mu_at(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + kGold * (hi - lo);
            f2 = mu_at(x2);
        }
    }
    best = std::max({best, f1, f2});

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(model.noise_cov, Eigen::EigenvaluesOnly);
    double lmin = es.eigenvalues().minCoeff();

    VarBoundQuantities out;
    out.mu_max = best;
    out.alpha = lmin / (2.0 * best);
    out.nu = lmin / (54.0 * best * q_gamma * s);
    out.tau = out.alpha * std::max(1.0 / (out.nu * out.nu), 1.0) *
              std::log(static_cast<double>(model.d) * model.p) / static_cast<double>(N);
    double col_max = 1.0;
    for (int j = 0; j < model.d; ++j) col_max = std::max(col_max, b0.col(j).norm());
    out.q_beta0 = 2.0 * col_max * q_gamma * s;
    double q = static_cast<double>(model.p) * model.d * model.d;
    out.lambda_threshold = 4.0 * out.q_beta0 * std::sqrt(std::log(q) / N);
    return out;
}

} // namespace lgc
