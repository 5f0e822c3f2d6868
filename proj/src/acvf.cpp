#include "lgc/acvf.hpp"
#include "lgc/link.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <stdexcept>

namespace lgc {

namespace {

double binomial_count(int n, int k) {
    double c = 1.0;
    for (int i = 1; i <= k; ++i) c *= static_cast<double>(n - k + i) / i;
    return c;
}

// Visit all index subsets of {0..n-1} of size m.
template <typename F>
void for_each_support(int n, int m, F&& visit) {
    std::vector<int> idx(m);
    for (int i = 0; i < m; ++i) idx[i] = i;
    while (true) {
        visit(idx);
        int i = m - 1;
        while (i >= 0 && idx[i] == n - m + i) --i;
        if (i < 0) break;
        ++idx[i];
        for (int j = i + 1; j < m; ++j) idx[j] = idx[j - 1] + 1;
    }
}

} // namespace

BlockAcvf block_acvf_from_lags(std::vector<Eigen::MatrixXd> lags) {
    if (lags.empty()) throw std::invalid_argument("need at least the lag-0 block");
    BlockAcvf out;
    out.L = static_cast<int>(lags.size()) - 1;
    out.d = static_cast<int>(lags[0].rows());
    out.lag_blocks = std::move(lags);
    int L = std::max(out.L, 1);
    out.big.resize(L * out.d, L * out.d);
    for (int r = 0; r < L; ++r) {
        for (int s = 0; s < L; ++s) {
            int h = s - r;
            if (h >= 0)
                out.big.block(r * out.d, s * out.d, out.d, out.d) = out.lag_blocks[h];
            else
                out.big.block(r * out.d, s * out.d, out.d, out.d) =
                    out.lag_blocks[-h].transpose();
        }
    }
    out.gamma_stack.resize(std::max(out.L, 0) * out.d, out.d);
    for (int h = 1; h <= out.L; ++h)
        out.gamma_stack.block((h - 1) * out.d, 0, out.d, out.d) =
            out.lag_blocks[h].transpose();
    return out;
}

BlockAcvf sample_block_acvf(
    const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x, int L) {
    long T = x.rows();
    int d = static_cast<int>(x.cols());
    if (L < 1) throw std::invalid_argument("L must be at least 1");
    if (T <= L) throw std::invalid_argument("insufficient data: need T > L");
    long N = T - L;

    Eigen::MatrixXd xc = x.cast<double>();
    Eigen::RowVectorXd means = xc.colwise().mean();
    xc.rowwise() -= means;

    std::vector<Eigen::MatrixXd> lags;
    for (int h = 0; h <= L; ++h) {
        Eigen::MatrixXd g =
            xc.middleRows(h, N).transpose() * xc.middleRows(0, N) / static_cast<double>(N);
        lags.push_back(g);
    }
    return block_acvf_from_lags(std::move(lags));
}

BlockAcvf theoretical_count_acvf(const LatentAcvf& acvf_z,
                                 const std::vector<MarginalSpec>& specs) {
    if (!acvf_z.standardized)
        throw std::invalid_argument("theoretical_count_acvf expects a standardized latent ACVF");
    int d = static_cast<int>(specs.size());
    if (acvf_z.lags.empty() || acvf_z.lags[0].rows() != d)
        throw std::invalid_argument("dimension mismatch between latent ACVF and marginals");

    // One context per unordered pair; all lags share it.
    std::vector<std::vector<LinkContext>> ctx;
    for (int i = 0; i < d; ++i) {
        ctx.emplace_back();
        for (int j = 0; j <= i; ++j)
            ctx[i].emplace_back(specs[i], specs[j], i == j);
    }
    auto pair_ctx = [&](int i, int j) -> const LinkContext& {
        return i >= j ? ctx[i][j] : ctx[j][i];
    };

    std::vector<Eigen::MatrixXd> lags;
    for (size_t h = 0; h < acvf_z.lags.size(); ++h) {
        Eigen::MatrixXd g(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                double u = acvf_z.lags[h](i, j);
                if (h == 0 && i == j)
                    g(i, j) = link_at_one(specs[i]);
                else
                    g(i, j) = link_eval(pair_ctx(i, j), u);
            }
        }
        lags.push_back(g);
    }
    return block_acvf_from_lags(std::move(lags));
}

double sparse_norm(const Eigen::MatrixXd& a, int s, SparseNormMode mode) {
    int n = static_cast<int>(a.rows());
    if (a.cols() != n) throw std::invalid_argument("sparse_norm requires a square matrix");
    if ((a - a.transpose()).cwiseAbs().maxCoeff() > 1e-9)
        throw std::invalid_argument("sparse_norm requires a symmetric matrix");
    if (s < 1) throw std::invalid_argument("s must be at least 1");
    int m = std::min(2 * s, n);
    if (m == n) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
        return es.eigenvalues().cwiseAbs().maxCoeff();
    }
    if (mode == SparseNormMode::Exact) {
        if (binomial_count(n, m) > 1e6)
            throw std::runtime_error(
                "sparse_norm exact enumeration over budget; use heuristic mode");
        double best = 0.0;
        for_each_support(n, m, [&](const std::vector<int>& idx) {
            Eigen::MatrixXd sub(m, m);
            for (int r = 0; r < m; ++r)
                for (int c = 0; c < m; ++c) sub(r, c) = a(idx[r], idx[c]);
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sub, Eigen::EigenvaluesOnly);
            best = std::max(best, es.eigenvalues().cwiseAbs().maxCoeff());
        });
        return best;
    }
    // Truncated power method on +A and -A; a certified lower bound only.
    std::mt19937_64 rng(0x5eed5eedULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    auto truncate = [&](Eigen::VectorXd v) {
        std::vector<int> order(n);
        for (int i = 0; i < n; ++i) order[i] = i;
        std::partial_sort(order.begin(), order.begin() + m, order.end(),
                          [&](int i, int j) { return std::abs(v(i)) > std::abs(v(j)); });
        Eigen::VectorXd w = Eigen::VectorXd::Zero(n);
        for (int i = 0; i < m; ++i) w(order[i]) = v(order[i]);
        double nrm = w.norm();
        return nrm > 0.0 ? Eigen::VectorXd(w / nrm) : w;
    };
    double best = 0.0;
    for (int restart = 0; restart < 50; ++restart) {
        for (double sign : {1.0, -1.0}) {
            Eigen::VectorXd v(n);
            for (int i = 0; i < n; ++i) v(i) = gauss(rng);
            v = truncate(v);
            for (int it = 0; it < 100; ++it) {
                Eigen::VectorXd next = truncate(sign * (a * v));
                if (next.norm() == 0.0) break;
                if ((next - v).norm() < 1e-12) {
                    v = next;
                    break;
                }
                v = next;
            }
            best = std::max(best, std::abs(v.dot(a * v)));
        }
    }
    return best;
}

} // namespace lgc
