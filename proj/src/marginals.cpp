#include "lgc/marginals.hpp"
#include "lgc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace lgc {

namespace {

constexpr long kTableCap = 1000000;

double lchoose(double n, double k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

double poisson_pmf(double lambda, long n) {
    return std::exp(-lambda + static_cast<double>(n) * std::log(lambda) - std::lgamma(n + 1.0));
}

// Truncated CMP series sums: Z, E[X]*Z, E[log X!]*Z.
struct CmpSums {
    double z = 0.0;
    double zx = 0.0;
    double zlogfac = 0.0;
};

CmpSums cmp_sums(double lambda, double nu) {
    CmpSums s;
    double log_lambda = std::log(lambda);
    for (long j = 0; j < 100000; ++j) {
        double lf = std::lgamma(j + 1.0);
        double term = std::exp(j * log_lambda - nu * lf);
        s.z += term;
        s.zx += j * term;
        s.zlogfac += lf * term;
        if (j > lambda && term < 1e-16 * s.z) break;
    }
    return s;
}

} // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Bernoulli: return "bernoulli";
        case Family::Binomial: return "binomial";
        case Family::Poisson: return "poisson";
        case Family::NegBinomial: return "neg_binomial";
        case Family::MixturePoisson: return "mixture_poisson";
        case Family::ConwayMaxwellPoisson: return "cmp";
    }
    throw std::logic_error("unknown family");
}

Family family_from_name(const std::string& name) {
    if (name == "bernoulli") return Family::Bernoulli;
    if (name == "binomial") return Family::Binomial;
    if (name == "poisson") return Family::Poisson;
    if (name == "neg_binomial") return Family::NegBinomial;
    if (name == "mixture_poisson") return Family::MixturePoisson;
    if (name == "cmp") return Family::ConwayMaxwellPoisson;
    throw std::invalid_argument("unknown marginal family: " + name);
}

MarginalSpec MarginalSpec::bernoulli(double p) {
    MarginalSpec s{Family::Bernoulli, 0, 0, {p}};
    s.validate();
    return s;
}

MarginalSpec MarginalSpec::binomial(int n_trials, double p) {
    MarginalSpec s{Family::Binomial, n_trials, 0, {p}};
    s.validate();
    return s;
}

MarginalSpec MarginalSpec::poisson(double lambda) {
    MarginalSpec s{Family::Poisson, 0, 0, {lambda}};
    s.validate();
    return s;
}

MarginalSpec MarginalSpec::neg_binomial(int r, double p) {
    MarginalSpec s{Family::NegBinomial, 0, r, {p}};
    s.validate();
    return s;
}

MarginalSpec MarginalSpec::mixture_poisson(std::vector<double> weights, std::vector<double> lambdas) {
    MarginalSpec s;
    s.family = Family::MixturePoisson;
    s.theta = std::move(weights);
    s.theta.insert(s.theta.end(), lambdas.begin(), lambdas.end());
    s.validate();
    return s;
}

MarginalSpec MarginalSpec::cmp(double lambda, double nu) {
    MarginalSpec s{Family::ConwayMaxwellPoisson, 0, 0, {lambda, nu}};
    s.validate();
    return s;
}

void MarginalSpec::validate() const {
    auto require = [](bool ok, const char* msg) {
        if (!ok) throw std::invalid_argument(msg);
    };
    switch (family) {
        case Family::Bernoulli:
            require(theta.size() == 1, "bernoulli needs one parameter");
            require(theta[0] > 0.0 && theta[0] < 1.0, "bernoulli p must lie in (0,1)");
            break;
        case Family::Binomial:
            require(theta.size() == 1, "binomial needs one free parameter");
            require(n_trials >= 1, "binomial n_trials must be positive");
            require(theta[0] > 0.0 && theta[0] < 1.0, "binomial p must lie in (0,1)");
            break;
        case Family::Poisson:
            require(theta.size() == 1, "poisson needs one parameter");
            require(theta[0] > 0.0, "poisson lambda must be positive");
            break;
        case Family::NegBinomial:
            require(theta.size() == 1, "neg_binomial needs one free parameter");
            require(r_failures >= 1, "neg_binomial r must be a positive integer");
            require(theta[0] > 0.0 && theta[0] < 1.0, "neg_binomial p must lie in (0,1)");
            break;
        case Family::MixturePoisson: {
            require(theta.size() >= 2 && theta.size() % 2 == 0,
                    "mixture_poisson needs weights and lambdas of equal length");
            size_t m = theta.size() / 2;
            double wsum = 0.0;
            for (size_t i = 0; i < m; ++i) {
                require(theta[i] > 0.0, "mixture weights must be positive");
                wsum += theta[i];
            }
            require(std::abs(wsum - 1.0) <= 1e-12, "mixture weights must sum to 1");
            for (size_t i = m; i < theta.size(); ++i)
                require(theta[i] > 0.0, "mixture rates must be positive");
            break;
        }
        case Family::ConwayMaxwellPoisson:
            require(theta.size() == 2, "cmp needs (lambda, nu)");
            require(theta[0] > 0.0, "cmp lambda must be positive");
            require(theta[1] > 0.0, "cmp nu must be positive");
            break;
    }
}

double MarginalSpec::mean() const {
    switch (family) {
        case Family::Bernoulli: return theta[0];
        case Family::Binomial: return n_trials * theta[0];
        case Family::Poisson: return theta[0];
        case Family::NegBinomial: return r_failures * (1.0 - theta[0]) / theta[0];
        case Family::MixturePoisson: {
            size_t m = theta.size() / 2;
            double mu = 0.0;
            for (size_t i = 0; i < m; ++i) mu += theta[i] * theta[m + i];
            return mu;
        }
        case Family::ConwayMaxwellPoisson: {
            auto s = cmp_sums(theta[0], theta[1]);
            return s.zx / s.z;
        }
    }
    throw std::logic_error("unknown family");
}

double MarginalSpec::variance() const {
    switch (family) {
        case Family::Bernoulli: return theta[0] * (1.0 - theta[0]);
        case Family::Binomial: return n_trials * theta[0] * (1.0 - theta[0]);
        case Family::Poisson: return theta[0];
        case Family::NegBinomial: return r_failures * (1.0 - theta[0]) / (theta[0] * theta[0]);
        case Family::MixturePoisson: {
            size_t m = theta.size() / 2;
            double mu = mean(), ex2 = 0.0;
            for (size_t i = 0; i < m; ++i) {
                double lam = theta[m + i];
                ex2 += theta[i] * (lam + lam * lam);
            }
            return ex2 - mu * mu;
        }
        case Family::ConwayMaxwellPoisson: {
            double lambda = theta[0], nu = theta[1];
            double log_lambda = std::log(lambda);
            double z = 0.0, zx = 0.0, zx2 = 0.0;
            for (long j = 0; j < 100000; ++j) {
                double term = std::exp(j * log_lambda - nu * std::lgamma(j + 1.0));
                z += term;
                zx += j * term;
                zx2 += static_cast<double>(j) * j * term;
                if (j > lambda && term < 1e-16 * z) break;
            }
            double mu = zx / z;
            return zx2 / z - mu * mu;
        }
    }
    throw std::logic_error("unknown family");
}

bool MarginalSpec::finite_support() const {
    return family == Family::Bernoulli || family == Family::Binomial;
}

long MarginalSpec::support_max() const {
    if (family == Family::Bernoulli) return 1;
    if (family == Family::Binomial) return n_trials;
    return -1;
}

MarginalSpec MarginalSpec::with_theta(std::vector<double> t) const {
    MarginalSpec s = *this;
    s.theta = std::move(t);
    s.validate();
    return s;
}

double pmf(const MarginalSpec& spec, long n) {
    if (n < 0) return 0.0;
    switch (spec.family) {
        case Family::Bernoulli:
            if (n == 0) return 1.0 - spec.theta[0];
            if (n == 1) return spec.theta[0];
            return 0.0;
        case Family::Binomial: {
            if (n > spec.n_trials) return 0.0;
            double p = spec.theta[0];
            return std::exp(lchoose(spec.n_trials, n) + n * std::log(p) +
                            (spec.n_trials - n) * std::log1p(-p));
        }
        case Family::Poisson:
            return poisson_pmf(spec.theta[0], n);
        case Family::NegBinomial: {
            double p = spec.theta[0];
            double r = spec.r_failures;
            return std::exp(std::lgamma(n + r) - std::lgamma(r) - std::lgamma(n + 1.0) +
                            n * std::log1p(-p) + r * std::log(p));
        }
        case Family::MixturePoisson: {
            size_t m = spec.theta.size() / 2;
            double f = 0.0;
            for (size_t i = 0; i < m; ++i) f += spec.theta[i] * poisson_pmf(spec.theta[m + i], n);
            return f;
        }
        case Family::ConwayMaxwellPoisson: {
            auto s = cmp_sums(spec.theta[0], spec.theta[1]);
            return std::exp(n * std::log(spec.theta[0]) - spec.theta[1] * std::lgamma(n + 1.0)) / s.z;
        }
    }
    throw std::logic_error("unknown family");
}

double cdf(const MarginalSpec& spec, long n) {
    if (n < 0) return 0.0;
    spec.validate();
    double c = 0.0;
    for (long k = 0; k <= n; ++k) c += pmf(spec, k);
    return std::min(c, 1.0);
}

long quantile(const MarginalSpec& spec, double u) {
    if (!(u > 0.0 && u < 1.0)) throw std::domain_error("quantile argument must lie in (0,1)");
    double c = 0.0;
    long smax = spec.support_max();
    for (long n = 0;; ++n) {
        c += pmf(spec, n);
        if (c >= u) return n;
        if (smax >= 0 && n >= smax) return smax;
        if (n > 100000000L) throw std::runtime_error("quantile search exceeded iteration cap");
    }
}

std::vector<double> cdf_grad(const MarginalSpec& spec, long n) {
    spec.validate();
    switch (spec.family) {
        case Family::Bernoulli:
            return {n >= 1 ? 0.0 : (n == 0 ? -1.0 : 0.0)};
        case Family::Binomial: {
            // d/dp pmf(k) = pmf(k) * (k - N p) / (p (1-p))
            double p = spec.theta[0];
            double g = 0.0;
            long top = std::min<long>(n, spec.n_trials);
            for (long k = 0; k <= top; ++k)
                g += pmf(spec, k) * (k - spec.n_trials * p) / (p * (1.0 - p));
            return {g};
        }
        case Family::Poisson:
            return {n < 0 ? 0.0 : -poisson_pmf(spec.theta[0], n)};
        case Family::NegBinomial: {
            double p = spec.theta[0];
            double r = spec.r_failures;
            double g = 0.0;
            for (long k = 0; k <= n; ++k)
                g += pmf(spec, k) * (r / p - k / (1.0 - p));
            return {g};
        }
        case Family::MixturePoisson: {
            size_t m = spec.theta.size() / 2;
            std::vector<double> g(2 * m, 0.0);
            for (size_t i = 0; i < m; ++i) {
                double lam = spec.theta[m + i];
                double c = 0.0;
                for (long k = 0; k <= n; ++k) c += poisson_pmf(lam, k);
                g[i] = std::min(c, 1.0);
                g[m + i] = -spec.theta[i] * poisson_pmf(lam, n);
            }
            return g;
        }
        case Family::ConwayMaxwellPoisson: {
            double lambda = spec.theta[0], nu = spec.theta[1];
            auto s = cmp_sums(lambda, nu);
            double ex = s.zx / s.z, elogfac = s.zlogfac / s.z;
            double c = 0.0, cx = 0.0, clogfac = 0.0;
            for (long k = 0; k <= n; ++k) {
                double f = std::exp(k * std::log(lambda) - nu * std::lgamma(k + 1.0)) / s.z;
                c += f;
                cx += k * f;
                clogfac += std::lgamma(k + 1.0) * f;
            }
            double dlambda = (cx - c * ex) / lambda;
            double dnu = -clogfac + c * elogfac;
            return {dlambda, dnu};
        }
    }
    throw std::logic_error("unknown family");
}

std::vector<double> survival_grad(const MarginalSpec& spec, long n) {
    // For infinite-support families the gradient is summed over the tail
    // k > n directly: the equivalent forward sum -d/dtheta CDF(n) cancels to a
    // quantity of the tail's magnitude and drowns in roundoff once the tail is
    // small, which matters because the M3 series divides by sqrt(P[X > n]).
    constexpr long kTailCap = 200000;
    switch (spec.family) {
        case Family::NegBinomial: {
            double p = spec.theta[0];
            double r = spec.r_failures;
            double logp = std::log(p);
            double harm = 0.0;
            for (long k = 0; k < n + 1; ++k) harm += 1.0 / (r + k);
            double dp = 0.0, dr = 0.0, fmax = 0.0;
            for (long k = n + 1; k <= n + kTailCap; ++k) {
                double f = pmf(spec, k);
                dp += f * (r / p - k / (1.0 - p));
                dr += f * (harm + logp);
                harm += 1.0 / (r + k);
                fmax = std::max(fmax, f);
                if (k > n + 10 && f < 1e-17 * fmax) break;
            }
            return {dp, dr};
        }
        case Family::MixturePoisson: {
            size_t m = spec.theta.size() / 2;
            std::vector<double> g(2 * m, 0.0);
            for (size_t i = 0; i < m; ++i) {
                double lam = spec.theta[m + i];
                double s = 0.0, fmax = 0.0;
                for (long k = n + 1; k <= n + kTailCap; ++k) {
                    double f = poisson_pmf(lam, k);
                    s += f;
                    fmax = std::max(fmax, f);
                    if (k > n + 10 && f < 1e-17 * fmax) break;
                }
                g[i] = s;  // d/dw_i of sum_i w_i P_i[X > n]
                g[m + i] = spec.theta[i] * poisson_pmf(lam, n);  // telescoping tail
            }
            return g;
        }
        case Family::ConwayMaxwellPoisson: {
            double lambda = spec.theta[0], nu = spec.theta[1];
            auto s = cmp_sums(lambda, nu);
            double ex = s.zx / s.z, elogfac = s.zlogfac / s.z;
            double log_lambda = std::log(lambda);
            double dl = 0.0, dn = 0.0, fmax = 0.0;
            for (long k = n + 1; k <= n + kTailCap; ++k) {
                double lf = std::lgamma(k + 1.0);
                double f = std::exp(k * log_lambda - nu * lf) / s.z;
                dl += f * (k - ex) / lambda;
                dn += f * (elogfac - lf);
                fmax = std::max(fmax, f);
                if (k > n + 10 && f < 1e-17 * fmax) break;
            }
            return {dl, dn};
        }
        default: {
            // Bernoulli/Binomial have finite support; Poisson's forward form
            // -d/dlambda CDF(n) = pmf(n) is already exact and tail-sized.
            auto g = cdf_grad(spec, n);
            for (double& v : g) v = -v;
            return g;
        }
    }
}

ThresholdTable threshold_table(const MarginalSpec& spec, double tail_tol) {
    if (!(tail_tol > 0.0 && tail_tol < 1.0))
        throw std::domain_error("tail_tol must lie in (0,1)");
    spec.validate();
    ThresholdTable table;
    table.tail_tol = tail_tol;
    double c = 0.0;
    long smax = spec.support_max();
    for (long n = 0;; ++n) {
        c = std::min(c + pmf(spec, n), 1.0);
        // Thresholds with tail mass below tail_tol are dropped: their kernel
        // weight exp(-Q^2/2) is below the requested resolution.
        if (1.0 - c < tail_tol) break;
        table.q_values.push_back(norm_quantile(c));
        if (smax >= 0 && n >= smax) break;
        if (n + 1 >= kTableCap)
            throw std::runtime_error("threshold table truncation failed; achieved tail mass " +
                                     std::to_string(1.0 - c));
    }
    table.n_max = static_cast<long>(table.q_values.size()) - 1;
    return table;
}

double moment_m(const ThresholdTable& table, int k, double u) {
    double s = 0.0;
    for (double q : table.q_values) {
        if (!std::isfinite(q)) continue;  // saturated CDF entry, zero weight in the limit
        s += std::exp(-q * q / (2.0 * u)) * std::pow(std::abs(q), k);
    }
    return kInvSqrt2Pi * s;
}

double moment_m(const MarginalSpec& spec, int k, double u) {
    return moment_m(threshold_table(spec, 1e-14), k, u);
}

double moment_mu(const MarginalSpec& spec, int k, double u) {
    auto table = threshold_table(spec, 1e-14);
    double s = 0.0;
    for (long n = 0; n <= table.n_max; ++n) {
        double q = table.q_values[n];
        if (!std::isfinite(q)) continue;
        auto gc = cdf_grad(spec, n);
        double l1 = 0.0;
        for (double v : gc) l1 += std::abs(v);
        double grad_q_l1 = l1 / norm_pdf(q);
        s += std::exp(-q * q / (2.0 * u)) * std::pow(std::abs(q), k) * grad_q_l1;
    }
    return kInvSqrt2Pi * s;
}

double delta_big(const MarginalSpec& spec) {
    auto table = threshold_table(spec, 1e-14);
    double s = 0.0;
    for (long n = 1; n <= table.n_max; ++n) {
        auto gc = cdf_grad(spec, n);
        double l1 = 0.0;
        for (double v : gc) l1 += std::abs(v);
        s += static_cast<double>(n) * l1;
    }
    return s;
}

M3Result m3_series(const MarginalSpec& spec, long n_cap) {
    if (n_cap < 1) throw std::domain_error("n_cap must be at least 1");
    spec.validate();
    M3Result res;
    long smax = spec.support_max();
    double c = 0.0;
    double block = 0.0, prev_block = -1.0;
    double last_term = 0.0;
    constexpr long kBlock = 16;
    // P[X > n] by direct tail summation once 1 - CDF(n) loses precision; the
    // terms decay like sqrt(pmf), far slower than the survival function itself.
    auto survival = [&](long n, double one_minus_cdf) {
        if (one_minus_cdf > 1e-12) return one_minus_cdf;
        double sf = 0.0;
        for (long k = n + 1; k <= n + 100000; ++k) {
            double pk = pmf(spec, k);
            sf += pk;
            if (sf > 0.0 && pk < sf * 1e-17) break;
        }
        return sf;
    };
    for (long n = 0; n <= (smax >= 0 ? smax - 1 : n_cap); ++n) {
        c = std::min(c + pmf(spec, n), 1.0);
        double sf = survival(n, 1.0 - c);
        if (sf <= 0.0) break;
        auto g = survival_grad(spec, n);
        double l1 = 0.0;
        for (double v : g) l1 += std::abs(v);
        last_term = l1 / std::sqrt(sf);
        res.partial_sum += last_term;
        block += last_term;
        if ((n + 1) % kBlock == 0) {
            if (prev_block > 0.0) res.tail_ratio = block / prev_block;
            prev_block = block;
            block = 0.0;
            if (res.tail_ratio > 0.0 && res.tail_ratio < 0.9 && last_term < 1e-13) break;
        }
    }
    if (smax >= 0) {
        res.converged = true;
        res.tail_ratio = 0.0;
    } else {
        res.converged = (res.tail_ratio < 0.9 && res.tail_ratio > 0.0 && last_term < 1e-12);
    }
    return res;
}

FitResult fit_theta(std::span<const long> samples, Family family, int known_count) {
    if (samples.empty()) throw std::invalid_argument("fit_theta requires a nonempty sample");
    constexpr double kMargin = 1e-6;
    double mean = 0.0;
    for (long x : samples) mean += static_cast<double>(x);
    mean /= static_cast<double>(samples.size());
    FitResult res;
    auto clip01 = [&](double v) {
        double c = std::clamp(v, kMargin, 1.0 - kMargin);
        if (c != v) res.clipped = true;
        return c;
    };
    switch (family) {
        case Family::Bernoulli:
            res.spec = MarginalSpec::bernoulli(clip01(mean));
            break;
        case Family::Binomial: {
            if (known_count < 1) throw std::invalid_argument("binomial fit needs known n_trials");
            res.spec = MarginalSpec::binomial(known_count, clip01(mean / known_count));
            break;
        }
        case Family::Poisson: {
            double lam = mean;
            if (lam < kMargin) {
                lam = kMargin;
                res.clipped = true;
            }
            res.spec = MarginalSpec::poisson(lam);
            break;
        }
        case Family::NegBinomial: {
            if (known_count < 1) throw std::invalid_argument("neg_binomial fit needs known r");
            res.spec = MarginalSpec::neg_binomial(known_count, clip01(known_count / (known_count + mean)));
            break;
        }
        default:
            throw std::invalid_argument("fit_theta does not support family " + family_name(family));
    }
    return res;
}

} // namespace lgc
