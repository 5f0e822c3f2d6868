#include "lgc/link.hpp"
#include "lgc/normal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace lgc {

namespace {

constexpr double kUnderflowExponent = -745.0;

std::vector<double> finite_entries(const ThresholdTable& t) {
    std::vector<double> q;
    for (double v : t.q_values)
        if (std::isfinite(v)) q.push_back(v);
    return q;
}

// S1-style kernel sums at latent correlation u.
struct KernelSums {
    double s1 = 0.0;
    double s2 = 0.0;  // weighted by G = qi^2 + qj^2 - 2 u qi qj
    double s3 = 0.0;  // weighted by qi * qj
};

KernelSums kernel_sums(const LinkContext& ctx, double u) {
    KernelSums out;
    const double denom = 2.0 * (1.0 - u * u);
    for (double a : ctx.qi) {
        for (double b : ctx.qj) {
            double g = a * a + b * b - 2.0 * u * a * b;
            double e = -g / denom;
            if (e < kUnderflowExponent) continue;
            double w = std::exp(e);
            out.s1 += w;
            out.s2 += w * g;
            out.s3 += w * a * b;
        }
    }
    return out;
}

void check_link_domain(const LinkContext& ctx, double u) {
    double limit = ctx.diagonal ? 1.0 - 1e-6 : 1.0 - 1e-9;
    if (std::abs(u) > limit)
        throw std::domain_error("link derivative argument too close to +-1");
}

// Integrand of the link in the angle variable: l'(sin t) cos t = S1(sin t)/(2 pi).
double angle_integrand(const LinkContext& ctx, double t) {
    return kernel_sums(ctx, std::sin(t)).s1 / kTwoPi;
}

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
constexpr double kGlNode[15] = {
    -0.9879925180204854, -0.9372733924007060, -0.8482065834104272, -0.7244177313601701,
    -0.5709721726085388, -0.3941513470775634, -0.2011940939974345, 0.0,
    0.2011940939974345,  0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
    0.8482065834104272,  0.9372733924007060,  0.9879925180204854};
constexpr double kGlWeight[15] = {
    0.0307532419961173, 0.0703660474881081, 0.1071592204671719, 0.1395706779261543,
    0.1662692058169939, 0.1861610000155622, 0.1984314853271116, 0.2025782419255613,
    0.1984314853271116, 0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
    0.1071592204671719, 0.0703660474881081, 0.0307532419961173};

double gl15(const LinkContext& ctx, double a, double b) {
    double mid = 0.5 * (a + b), half = 0.5 * (b - a);
    double s = 0.0;
    for (int i = 0; i < 15; ++i) s += kGlWeight[i] * angle_integrand(ctx, mid + half * kGlNode[i]);
    return s * half;
}

double adaptive_quad(const LinkContext& ctx, double a, double b, double whole, double tol,
                     int depth) {
    double mid = 0.5 * (a + b);
    double left = gl15(ctx, a, mid);
    double right = gl15(ctx, mid, b);
    double err = std::abs(left + right - whole);
    if (err < tol || depth >= 40) {
        if (depth >= 40 && err > 100.0 * tol)
            throw std::runtime_error("link quadrature failed to converge; estimate " +
                                     std::to_string(left + right));
        return left + right;
    }
    return adaptive_quad(ctx, a, mid, left, 0.5 * tol, depth + 1) +
           adaptive_quad(ctx, mid, b, right, 0.5 * tol, depth + 1);
}

double integrate_link(const LinkContext& ctx, double u) {
    double t1 = std::asin(u);
    return adaptive_quad(ctx, 0.0, t1, gl15(ctx, 0.0, t1), 1e-10, 0);
}

} // namespace

LinkContext::LinkContext(MarginalSpec si, MarginalSpec sj, bool diag, double u_clamp_in,
                         double tail_tol)
    : spec_i(std::move(si)),
      spec_j(std::move(sj)),
      table_i(threshold_table(spec_i, tail_tol)),
      table_j(threshold_table(spec_j, tail_tol)),
      qi(finite_entries(table_i)),
      qj(finite_entries(table_j)),
      diagonal(diag),
      u_clamp(u_clamp_in) {
    if (!(u_clamp > 0.0 && u_clamp < 1.0))
        throw std::invalid_argument("u_clamp must lie in (0,1)");
    ell_lo = integrate_link(*this, -u_clamp);
    ell_hi = integrate_link(*this, u_clamp);
}

double hermite_coeff_scaled(const ThresholdTable& table, int k) {
    if (k < 1) throw std::domain_error("hermite_coeff requires k >= 1");
    double s = 0.0;
    for (double q : table.q_values) {
        if (!std::isfinite(q)) continue;
        // a_m = H_m(q)/sqrt(m!) via a_m = q a_{m-1}/sqrt(m) - sqrt((m-1)/m) a_{m-2}.
        double am2 = 0.0, am1 = 1.0;
        for (int m = 1; m <= k - 1; ++m) {
            double am = q * am1 / std::sqrt(static_cast<double>(m)) -
                        std::sqrt((m - 1.0) / m) * am2;
            am2 = am1;
            am1 = am;
        }
        s += std::exp(-0.5 * q * q) * am1;
    }
    return kInvSqrt2Pi * s;
}

double hermite_coeff(const ThresholdTable& table, int k) {
    double scaled = hermite_coeff_scaled(table, k);
    double log_scale = 0.5 * std::lgamma(static_cast<double>(k));  // sqrt((k-1)!)
    if (log_scale + std::log(std::max(std::abs(scaled), 1e-300)) > std::log(1e300))
        throw std::runtime_error("hermite coefficient overflow before damping");
    return scaled * std::exp(log_scale);
}

double hermite_series_eval(const ThresholdTable& ti, const ThresholdTable& tj, double u, int K) {
    // c_{i,k} c_{j,k} u^k / k! = scaled_i(k) scaled_j(k) u^k / k.
    double s = 0.0;
    for (int k = 1; k <= K; ++k)
        s += hermite_coeff_scaled(ti, k) * hermite_coeff_scaled(tj, k) * std::pow(u, k) / k;
    return s;
}

double link_deriv(const LinkContext& ctx, double u) {
    check_link_domain(ctx, u);
    return kernel_sums(ctx, u).s1 / (kTwoPi * std::sqrt(1.0 - u * u));
}

double link_eval(const LinkContext& ctx, double u) {
    if (std::abs(u) > 1.0) throw std::domain_error("link argument must lie in [-1,1]");
    if (u == 0.0) return 0.0;
    if (ctx.diagonal && u == 1.0) return link_at_one(ctx.spec_i);
    return integrate_link(ctx, u);
}

double link_at_one(const MarginalSpec& spec) {
    // Var[X] = sum (2n+1) P[X>n] - (sum P[X>n])^2 over the truncated support.
    spec.validate();
    double c = 0.0, s1 = 0.0, s2 = 0.0;
    long smax = spec.support_max();
    for (long n = 0;; ++n) {
        c = std::min(c + pmf(spec, n), 1.0);
        double sf = 1.0 - c;
        s1 += sf;
        s2 += (2.0 * n + 1.0) * sf;
        if (sf < 1e-14) break;
        if (smax >= 0 && n >= smax) break;
        if (n > 1000000)
            throw std::runtime_error("variance tail-sum truncation failed");
    }
    return s2 - s1 * s1;
}

double link_deriv2(const LinkContext& ctx, double u) {
    check_link_domain(ctx, u);
    auto s = kernel_sums(ctx, u);
    double one_m = 1.0 - u * u;
    return u / (kTwoPi * std::pow(one_m, 1.5)) * s.s1 -
           u / (kTwoPi * std::pow(one_m, 2.5)) * s.s2 +
           1.0 / (kTwoPi * std::pow(one_m, 1.5)) * s.s3;
}

double link_invert(const LinkContext& ctx, double x) {
    if (x >= ctx.ell_hi) return ctx.u_clamp;
    if (x <= ctx.ell_lo) return -ctx.u_clamp;
    if (x == 0.0) return 0.0;
    double lo = -ctx.u_clamp, hi = ctx.u_clamp;
    double u = 0.0;
    double f = -x;  // link_eval(0) - x
    if (f > 0.0) hi = 0.0; else lo = 0.0;
    // Bisection to a decent bracket, then safeguarded Newton.
    for (int it = 0; it < 20; ++it) {
        u = 0.5 * (lo + hi);
        f = link_eval(ctx, u) - x;
        if (f > 0.0) hi = u; else lo = u;
        if (std::abs(f) < 1e-10) return u;
    }
    u = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        f = link_eval(ctx, u) - x;
        if (std::abs(f) < 1e-10) return u;
        if (f > 0.0) hi = u; else lo = u;
        double step = f / link_deriv(ctx, u);
        double next = u - step;
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        u = next;
    }
    throw std::runtime_error("link inversion failed to reach tolerance");
}

InverseDerivs inverse_link_derivs(const LinkContext& ctx, double x) {
    if (!(x > ctx.ell_lo && x < ctx.ell_hi))
        throw std::domain_error("inverse-link derivative argument outside open range");
    double u = link_invert(ctx, x);
    double lp = link_deriv(ctx, u);
    double lpp = link_deriv2(ctx, u);
    return {1.0 / lp, -lpp / (lp * lp * lp)};
}

} // namespace lgc
