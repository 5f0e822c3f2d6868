#pragma once

#include "lgc/marginals.hpp"

#include <vector>

namespace lgc {

/// Evaluation context for the link between one pair of marginals. Immutable
/// after construction; safe to share across threads.
struct LinkContext {
    MarginalSpec spec_i;
    MarginalSpec spec_j;
    ThresholdTable table_i;
    ThresholdTable table_j;
    std::vector<double> qi;  // finite threshold entries only
    std::vector<double> qj;
    bool diagonal = false;   // same component on both sides (i == j)
    double u_clamp = 1.0 - 1e-6;
    double ell_lo = 0.0;     // link value at -u_clamp
    double ell_hi = 0.0;     // link value at +u_clamp

    LinkContext(MarginalSpec si, MarginalSpec sj, bool diag = false,
                double u_clamp_in = 1.0 - 1e-6, double tail_tol = 1e-14);
};

/// c_k = (1/sqrt(2 pi)) sum_n exp(-Q_n^2/2) H_{k-1}(Q_n), probabilists' Hermite.
/// Throws on overflow of the unscaled polynomial (practically k beyond ~150).
double hermite_coeff(const ThresholdTable& table, int k);

/// c_k / sqrt((k-1)!), computed with a normalized recurrence; no overflow.
double hermite_coeff_scaled(const ThresholdTable& table, int k);

/// Truncated Hermite-series value sum_{k<=K} c_{i,k} c_{j,k} u^k / k!.
double hermite_series_eval(const ThresholdTable& ti, const ThresholdTable& tj, double u, int K);

/// First derivative of the link: positive double-sum kernel over thresholds.
double link_deriv(const LinkContext& ctx, double u);

/// Link value as the integral of link_deriv from 0 to u (absolute tol 1e-10).
double link_eval(const LinkContext& ctx, double u);

/// Diagonal value at u = 1: the marginal variance via the tail-sum identity.
double link_at_one(const MarginalSpec& spec);

/// Second derivative via the S1 / S2 / S3 truncated double sums.
double link_deriv2(const LinkContext& ctx, double u);

/// Monotone inverse with clamping to [-u_clamp, u_clamp] outside the range.
double link_invert(const LinkContext& ctx, double x);

struct InverseDerivs {
    double g1 = 0.0;  // (l^{-1})'(x), positive
    double g2 = 0.0;  // (l^{-1})''(x)
};

/// Derivatives of the inverse link at x strictly inside (ell_lo, ell_hi).
InverseDerivs inverse_link_derivs(const LinkContext& ctx, double x);

} // namespace lgc
