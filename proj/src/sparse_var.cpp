#include "lgc/sparse_var.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

namespace lgc {

namespace {

double soft_threshold(double z, double t) {
    if (z > t) return z - t;
    if (z < -t) return z + t;
    return 0.0;
}

double column_objective(const Eigen::MatrixXd& g, const Eigen::VectorXd& gam,
                        const Eigen::VectorXd& b, double lambda) {
    return -2.0 * b.dot(gam) + b.dot(g * b) + lambda * b.lpNorm<1>();
}

} // namespace

LassoProblem build_problem(const Eigen::Matrix<long, Eigen::Dynamic, Eigen::Dynamic>& x,
                           int p, const std::vector<Family>& families, double lambda,
                           const std::vector<int>& known_counts) {
    if (p < 1) throw std::invalid_argument("p must be at least 1");
    if (x.rows() <= p + 1) throw std::invalid_argument("need T > p + 1");
    LatentEstimate est =
        estimate_latent_acvf(x, p, families, DiagMode::ForceOne, known_counts);
    LassoProblem prob;
    prob.d = static_cast<int>(x.cols());
    prob.p = p;
    prob.lambda = lambda;
    prob.gamma_big = est.acvf_hat.big;
    prob.gamma_hat = Eigen::Map<const Eigen::VectorXd>(est.acvf_hat.gamma_stack.data(),
                                                       est.acvf_hat.gamma_stack.size());
    return prob;
}

LassoSolution lasso_solve(const LassoProblem& prob, const LassoOptions& opts) {
    int pd = prob.p * prob.d;
    if (prob.gamma_big.rows() != pd || prob.gamma_hat.size() != pd * prob.d)
        throw std::invalid_argument("problem dimensions inconsistent");
    if (prob.gamma_big.diagonal().minCoeff() <= 0.0)
        throw std::invalid_argument("gamma_big diagonal must be strictly positive");

    Eigen::MatrixXd g = prob.gamma_big;
    if (opts.psd_project) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (g + g.transpose()));
        g = es.eigenvectors() * es.eigenvalues().cwiseMax(0.0).asDiagonal() *
            es.eigenvectors().transpose();
        g = 0.5 * (g + g.transpose());
        g.diagonal() = prob.gamma_big.diagonal();
    }

    LassoSolution sol;
    sol.beta_hat.resize(pd * prob.d);
    sol.converged = true;
    for (int c = 0; c < prob.d; ++c) {
        Eigen::VectorXd gam = prob.gamma_hat.segment(c * pd, pd);
        Eigen::VectorXd b = Eigen::VectorXd::Zero(pd);
        Eigen::VectorXd gb = Eigen::VectorXd::Zero(pd);  // g * b, maintained incrementally
        double prev_obj = column_objective(g, gam, b, prob.lambda);
        bool col_converged = false;
        long sweep = 0;
        for (; sweep < opts.max_iter; ++sweep) {
            double max_change = 0.0;
            for (int j = 0; j < pd; ++j) {
                double z = gam(j) - (gb(j) - g(j, j) * b(j));
                double next = soft_threshold(z, 0.5 * prob.lambda) / g(j, j);
                double delta = next - b(j);
                if (delta != 0.0) {
                    gb += delta * g.col(j);
                    b(j) = next;
                    max_change = std::max(max_change, std::abs(delta));
                }
            }
            if (!opts.psd_project) {
                double obj = column_objective(g, gam, b, prob.lambda);
                if (obj > prev_obj + 1e-12 * (1.0 + std::abs(prev_obj)))
                    throw std::runtime_error(
                        "objective increased across a sweep (indefinite gamma_big); "
                        "enable psd_project");
                prev_obj = obj;
            }
            if (max_change < opts.tol) {
                col_converged = true;
                ++sweep;
                break;
            }
        }
        sol.converged = sol.converged && col_converged;
        sol.iterations += sweep;
        sol.beta_hat.segment(c * pd, pd) = b;

        // KKT residual: 2(Gb - gam)_j = -lambda sign(b_j) on the active set,
        // |2(Gb - gam)_j| <= lambda off it.
        Eigen::VectorXd grad = 2.0 * (g * b - gam);
        for (int j = 0; j < pd; ++j) {
            double r = (b(j) != 0.0)
                           ? std::abs(grad(j) + prob.lambda * (b(j) > 0 ? 1.0 : -1.0))
                           : std::max(0.0, std::abs(grad(j)) - prob.lambda);
            sol.kkt_residual = std::max(sol.kkt_residual, r);
        }
        sol.objective += column_objective(g, gam, b, prob.lambda);
    }

    Eigen::Map<const Eigen::MatrixXd> bmat(sol.beta_hat.data(), pd, prob.d);
    for (int u = 0; u < prob.p; ++u)
        sol.coeff_hats.push_back(bmat.middleRows(u * prob.d, prob.d).transpose());
    return sol;
}

ReCheck check_re(const Eigen::MatrixXd& gamma_big, double alpha, double tau,
                 long trials, int s) {
    if (!(alpha > 0.0) || !(tau >= 0.0))
        throw std::invalid_argument("check_re requires alpha > 0 and tau >= 0");
    int q = static_cast<int>(gamma_big.rows());
    ReCheck out;
    out.margin = std::numeric_limits<double>::infinity();
    auto test = [&](const Eigen::VectorXd& x) {
        double nrm = x.norm();
        if (nrm == 0.0) return;
        Eigen::VectorXd v = x / nrm;
        double m = v.dot(gamma_big * v) - alpha + tau * std::pow(v.lpNorm<1>(), 2);
        if (m < out.margin) {
            out.margin = m;
            if (m < -1e-10) {
                out.violated = true;
                out.witness = v;
            }
        }
    };

    int m = std::min(2 * s, q);
    // Count (support, sign) combinations up to size m.
    double combos = 0.0;
    {
        double c = 1.0;
        for (int k = 1; k <= m; ++k) {
            c *= static_cast<double>(q - k + 1) / k;
            combos += c * std::pow(2.0, k - 1);  // sign symmetry halves the count
        }
    }
    std::mt19937_64 rng(0xAB5EEDULL);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (combos <= std::max<double>(static_cast<double>(trials), 100000.0)) {
        // Exhaustive sparse sign vectors.
        std::vector<int> idx;
        std::function<void(int, int)> rec = [&](int start, int left) {
            if (!idx.empty()) {
                int k = static_cast<int>(idx.size());
                for (long mask = 0; mask < (1L << (k - 1)); ++mask) {
                    Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
                    for (int i = 0; i < k; ++i)
                        x(idx[i]) = (i > 0 && (mask >> (i - 1)) & 1) ? -1.0 : 1.0;
                    test(x);
                }
            }
            if (left == 0) return;
            for (int j = start; j < q; ++j) {
                idx.push_back(j);
                rec(j + 1, left - 1);
                idx.pop_back();
            }
        };
        rec(0, m);
    } else {
        std::uniform_int_distribution<int> pick(0, q - 1);
        for (long t = 0; t < trials; ++t) {
            Eigen::VectorXd x = Eigen::VectorXd::Zero(q);
            int k = 1 + static_cast<int>(rng() % m);
            for (int i = 0; i < k; ++i) x(pick(rng)) = (rng() & 1) ? 1.0 : -1.0;
            test(x);
        }
    }
    for (long t = 0; t < trials; ++t) {
        Eigen::VectorXd x(q);
        for (int i = 0; i < q; ++i) x(i) = gauss(rng);
        test(x);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (gamma_big + gamma_big.transpose()));
    for (int i = 0; i < q; ++i) test(es.eigenvectors().col(i));
    return out;
}

double deviation_check(const LassoProblem& prob, const Eigen::VectorXd& beta0) {
    int pd = prob.p * prob.d;
    if (beta0.size() != pd * prob.d) throw std::invalid_argument("beta0 length mismatch");
    Eigen::Map<const Eigen::MatrixXd> b0(beta0.data(), pd, prob.d);
    double dev = 0.0;
    for (int c = 0; c < prob.d; ++c) {
        Eigen::VectorXd r = prob.gamma_hat.segment(c * pd, pd) - prob.gamma_big * b0.col(c);
        dev = std::max(dev, r.cwiseAbs().maxCoeff());
    }
    return dev;
}

Prop41Bounds prop41_bounds(int s, double lambda, double alpha) {
    if (s < 1 || !(lambda >= 0.0) || !(alpha > 0.0))
        throw std::invalid_argument("prop41_bounds requires s >= 1, lambda >= 0, alpha > 0");
    Prop41Bounds out;
    out.l2 = 16.0 * std::sqrt(static_cast<double>(s)) * lambda / alpha;
    out.l1 = 64.0 * s * lambda / alpha;
    out.quad = 128.0 * s * lambda * lambda / alpha;
    return out;
}

} // namespace lgc
