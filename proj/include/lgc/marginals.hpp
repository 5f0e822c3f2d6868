#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace lgc {

enum class Family {
    Bernoulli,
    Binomial,
    Poisson,
    NegBinomial,
    MixturePoisson,
    ConwayMaxwellPoisson,
};

std::string family_name(Family f);
Family family_from_name(const std::string& name);

/// A count marginal distribution: family, fixed integer constants and the free
/// parameter vector theta. Immutable after construction.
struct MarginalSpec {
    Family family = Family::Bernoulli;
    int n_trials = 0;    // Binomial: known number of trials
    int r_failures = 0;  // NegBinomial: known r
    std::vector<double> theta;

    static MarginalSpec bernoulli(double p);
    static MarginalSpec binomial(int n_trials, double p);
    static MarginalSpec poisson(double lambda);
    static MarginalSpec neg_binomial(int r, double p);
    static MarginalSpec mixture_poisson(std::vector<double> weights, std::vector<double> lambdas);
    static MarginalSpec cmp(double lambda, double nu);

    /// Throws std::invalid_argument when theta leaves the open parameter domain.
    void validate() const;

    double mean() const;
    double variance() const;
    bool finite_support() const;
    long support_max() const;  // -1 when the support is infinite

    /// Copy with theta replaced (same family and fixed constants).
    MarginalSpec with_theta(std::vector<double> t) const;
};

double pmf(const MarginalSpec& spec, long n);
double cdf(const MarginalSpec& spec, long n);
long quantile(const MarginalSpec& spec, double u);

/// Partial derivatives of C_n(theta) with respect to each free parameter.
/// NegBinomial differentiates p only (r is a known integer).
std::vector<double> cdf_grad(const MarginalSpec& spec, long n);

/// Gradient of the survival function P[X > n], computed by direct tail
/// summation for infinite-support families so it stays accurate when the tail
/// is tiny (the M3 series divides by sqrt(P[X > n])). For NegBinomial the
/// r-derivative is appended for the series check below; for MixturePoisson the
/// weight components are d/dw_i of sum_i w_i P_i[X > n] (unconstrained).
std::vector<double> survival_grad(const MarginalSpec& spec, long n);

struct ThresholdTable {
    std::vector<double> q_values;  // Q_n = Phi^{-1}(C_n), n = 0..n_max
    double tail_tol = 0.0;
    long n_max = 0;
};

/// Q_n table truncated once 1 - C_n < tail_tol. Entries where C_n has saturated
/// to 1 in double precision are +inf; downstream sums drop them.
ThresholdTable threshold_table(const MarginalSpec& spec, double tail_tol);

/// m^(k)(u) = (1/sqrt(2 pi)) sum_n exp(-Q_n^2/(2u)) |Q_n|^k.
double moment_m(const MarginalSpec& spec, int k, double u);
double moment_m(const ThresholdTable& table, int k, double u);

/// mu^(k)(u) = (1/sqrt(2 pi)) sum_n exp(-Q_n^2/(2u)) |Q_n|^k ||grad_theta Q_n||_1
/// with grad Q_n = grad C_n / phi(Q_n).
double moment_mu(const MarginalSpec& spec, int k, double u);

/// Delta = sum_n n ||grad_theta C_n||_1.
double delta_big(const MarginalSpec& spec);

struct M3Result {
    double partial_sum = 0.0;
    bool converged = false;
    double tail_ratio = 0.0;
};

/// Partial sums of sum_n (P[X>n])^{-1/2} sum_j |d P[X>n] / d theta_j|.
M3Result m3_series(const MarginalSpec& spec, long n_cap);

struct FitResult {
    MarginalSpec spec;
    bool clipped = false;  // estimate hit the parameter-domain boundary
};

/// Sample-mean (method of moments) fit. known_count carries Binomial n_trials
/// or NegBinomial r; unused otherwise.
FitResult fit_theta(std::span<const long> samples, Family family, int known_count = 0);

} // namespace lgc
