#include "lgc/var_model.hpp"
#include "lgc/normal.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lgc {

namespace {

Eigen::MatrixXd noise_sqrt(const Eigen::MatrixXd& sigma) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sigma);
    Eigen::VectorXd vals = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return es.eigenvectors() * vals.asDiagonal() * es.eigenvectors().transpose();
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    return x ^ (x >> 31);
}

// Standard normal draw via the inverse CDF; identical across platforms.
double draw_normal(std::mt19937_64& rng) {
    double u = (static_cast<double>(rng() >> 11) + 0.5) * 0x1p-53;
    return norm_quantile(u);
}

} // namespace

VarModel::VarModel(std::vector<Eigen::MatrixXd> a, Eigen::MatrixXd sigma)
    : p(static_cast<int>(a.size())),
      d(a.empty() ? static_cast<int>(sigma.rows()) : static_cast<int>(a[0].rows())),
      coeffs(std::move(a)),
      noise_cov(std::move(sigma)) {
    validate();
}

void VarModel::validate() const {
    if (p < 1 || d < 1) throw std::invalid_argument("VarModel requires p >= 1 and d >= 1");
    for (const auto& a : coeffs)
        if (a.rows() != d || a.cols() != d)
            throw std::invalid_argument("coefficient matrix dimension mismatch");
    if (noise_cov.rows() != d || noise_cov.cols() != d)
        throw std::invalid_argument("noise covariance dimension mismatch");
    if ((noise_cov - noise_cov.transpose()).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("noise covariance must be symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(noise_cov);
    if (es.eigenvalues().minCoeff() < -1e-10)
        throw std::invalid_argument("noise covariance must be positive semidefinite");
}

Eigen::MatrixXd VarModel::companion() const {
    int n = p * d;
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
    for (int u = 0; u < p; ++u) c.block(0, u * d, d, d) = coeffs[u];
    if (p > 1) c.block(d, 0, (p - 1) * d, (p - 1) * d).setIdentity();
    return c;
}

CausalCheck check_causal(const VarModel& model) {
    model.validate();
    Eigen::EigenSolver<Eigen::MatrixXd> es(model.companion());
    double radius = es.eigenvalues().cwiseAbs().maxCoeff();
    return {radius < 1.0 - 1e-9, radius};
}

LatentAcvf stationary_acvf(const VarModel& model, int max_lag) {
    auto cc = check_causal(model);
    if (!cc.causal) throw std::runtime_error("stationary_acvf requires a causal model");
    int n = model.p * model.d;
    Eigen::MatrixXd a = model.companion();
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(n, n);
    q.topLeftCorner(model.d, model.d) = model.noise_cov;

    // Doubling iteration for P = A P A' + Q.
    Eigen::MatrixXd pmat = q, ak = a;
    for (int it = 0; it < 200; ++it) {
        Eigen::MatrixXd next = pmat + ak * pmat * ak.transpose();
        ak = ak * ak;
        double change = (next - pmat).cwiseAbs().maxCoeff();
        pmat = next;
        if (change < 1e-13) break;
    }
    pmat = 0.5 * (pmat + pmat.transpose());
    double residual = (pmat - a * pmat * a.transpose() - q).cwiseAbs().maxCoeff();
    if (residual > 1e-9) throw std::runtime_error("Lyapunov solve did not converge");

    LatentAcvf acvf;
    acvf.standardized = false;
    for (int h = 0; h <= std::min(max_lag, model.p - 1); ++h)
        acvf.lags.push_back(pmat.block(0, h * model.d, model.d, model.d));
    for (int h = static_cast<int>(acvf.lags.size()); h <= max_lag; ++h) {
        Eigen::MatrixXd g = Eigen::MatrixXd::Zero(model.d, model.d);
        for (int u = 1; u <= model.p; ++u) {
            int lag = h - u;
            Eigen::MatrixXd gm = (lag >= 0)
                                     ? acvf.lags[lag]
                                     : Eigen::MatrixXd(acvf.lags[-lag].transpose());
            g += model.coeffs[u - 1] * gm;
        }
        acvf.lags.push_back(g);
    }
    return acvf;
}

StandardizedModel standardize(const VarModel& model, int max_lag) {
    if (max_lag < 0) max_lag = model.p;
    auto acvf = stationary_acvf(model, max_lag);
    Eigen::VectorXd var = acvf.lags[0].diagonal();
    if (var.minCoeff() <= 0.0) throw std::runtime_error("degenerate model: zero variance component");
    Eigen::VectorXd dvec = var.cwiseSqrt();
    Eigen::MatrixXd dmat = dvec.asDiagonal();
    Eigen::MatrixXd dinv = dvec.cwiseInverse().asDiagonal();

    StandardizedModel out;
    std::vector<Eigen::MatrixXd> a;
    for (const auto& m : model.coeffs) a.push_back(dinv * m * dmat);
    out.model = VarModel(std::move(a), dinv * model.noise_cov * dinv);
    out.acvf.standardized = true;
    for (const auto& g : acvf.lags) out.acvf.lags.push_back(dinv * g * dinv);
    return out;
}

std::uint64_t derive_stream_seed(std::uint64_t master_seed, std::uint64_t index) {
    return splitmix64(master_seed ^ splitmix64(index));
}

Eigen::MatrixXd simulate(const VarModel& model, long T, std::uint64_t seed, long burn_in) {
    auto cc = check_causal(model);
    if (!cc.causal) throw std::runtime_error("simulate requires a causal model");
    if (T < 1) throw std::invalid_argument("T must be positive");
    if (burn_in < 0) burn_in = 10L * model.p + 500;

    Eigen::MatrixXd l = noise_sqrt(model.noise_cov);
    std::mt19937_64 rng(seed);
    std::vector<Eigen::VectorXd> history(model.p, Eigen::VectorXd::Zero(model.d));
    Eigen::MatrixXd out(T, model.d);
    Eigen::VectorXd eta(model.d);
    for (long t = -burn_in; t < T; ++t) {
        for (int i = 0; i < model.d; ++i) eta(i) = draw_normal(rng);
        Eigen::VectorXd z = l * eta;
        for (int u = 0; u < model.p; ++u) z += model.coeffs[u] * history[u];
        for (int u = model.p - 1; u > 0; --u) history[u] = history[u - 1];
        history[0] = z;
        if (t >= 0) out.row(t) = z.transpose();
    }
    return out;
}

Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> transform_counts(
    const Eigen::MatrixXd& z, const std::vector<MarginalSpec>& specs) {
    if (static_cast<long>(specs.size()) != z.cols())
        throw std::invalid_argument("one marginal spec per column required");
    Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic> x(z.rows(), z.cols());
    for (long j = 0; j < z.cols(); ++j) {
        // Precomputed CDF table; values beyond the 1e-16 tail fall back to quantile().
        std::vector<double> cum;
        double c = 0.0;
        long smax = specs[j].support_max();
        for (long n = 0;; ++n) {
            c = std::min(c + pmf(specs[j], n), 1.0);
            cum.push_back(c);
            if (1.0 - c < 1e-16 || (smax >= 0 && n >= smax) || n > 1000000) break;
        }
        for (long t = 0; t < z.rows(); ++t) {
            double u = norm_cdf(z(t, j));
            u = std::clamp(u, 1e-300, 1.0 - 1e-16);
            auto it = std::lower_bound(cum.begin(), cum.end(), u);
            if (it != cum.end())
                x(t, j) = static_cast<long>(it - cum.begin());
            else
                x(t, j) = quantile(specs[j], u);
        }
    }
    return x;
}

} // namespace lgc
