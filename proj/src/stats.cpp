#include "relmart/stats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace relmart {

double normal_pdf(double x) {
    static const double inv_sqrt_2pi = 0.3989422804014326779;
    return inv_sqrt_2pi * std::exp(-0.5 * x * x);
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x * 0.7071067811865475244);
}

namespace {

// Acklam's inverse normal CDF, ~1.15e-9 relative accuracy before polishing.
double acklam(double p) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    const double plow = 0.02425, phigh = 1.0 - plow;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    if (p > phigh) {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5, r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw std::invalid_argument("normal_quantile: p must be in (0, 1)");
    double x = acklam(p);
    // One Halley step against the machine-accurate CDF.
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * 3.14159265358979323846) * std::exp(0.5 * x * x);
    x -= u / (1.0 + 0.5 * x * u);
    return x;
}

namespace {

double simpson(const std::function<double(double)>& f, double a, double fa, double b,
               double fb, double m, double fm) {
    return (b - a) / 6.0 * (fa + 4.0 * fm + fb);
}

double adaptive_step(const std::function<double(double)>& f, double a, double fa,
                     double b, double fb, double m, double fm, double whole, double tol,
                     int depth) {
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = simpson(f, a, fa, m, fm, lm, flm);
    const double right = simpson(f, m, fm, b, fb, rm, frm);
    const double delta = left + right - whole;
    if (depth <= 0 || std::abs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return adaptive_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1) +
           adaptive_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth) {
    if (a == b) return 0.0;
    const double m = 0.5 * (a + b);
    const double fa = f(a), fb = f(b), fm = f(m);
    const double whole = simpson(f, a, fa, b, fb, m, fm);
    return adaptive_step(f, a, fa, b, fb, m, fm, whole, tol, max_depth);
}

double owen_t(double h, double a) {
    if (a == 0.0) return 0.0;
    if (a < 0.0) return -owen_t(h, -a);
    h = std::abs(h);  // T is even in h
    // Keep the integration range at [0, 1] via the standard reduction.
    if (a > 1.0) {
        const double ph = normal_cdf(h), pah = normal_cdf(a * h);
        return 0.5 * (ph + pah) - ph * pah - owen_t(a * h, 1.0 / a);
    }
    const double h2 = h * h;
    auto f = [h2](double x) {
        return std::exp(-0.5 * h2 * (1.0 + x * x)) / (1.0 + x * x);
    };
    return adaptive_simpson(f, 0.0, a, 1e-13) / (2.0 * 3.14159265358979323846);
}

double RunningStat::stddev() const { return std::sqrt(variance()); }
double RunningStat::std_error() const {
    return n > 0 ? stddev() / std::sqrt(static_cast<double>(n)) : 0.0;
}

TestReport make_report(std::string name, double statistic, double threshold,
                       std::uint64_t n_samples, std::uint64_t seed, bool pass,
                       std::string details) {
    TestReport r;
    r.name = std::move(name);
    r.statistic = statistic;
    r.threshold = threshold;
    r.n_samples = n_samples;
    r.seed = seed;
    r.pass = pass;
    r.details = std::move(details);
    return r;
}

TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                   std::string name, std::uint64_t seed) {
    const std::size_t n = samples.size();
    if (n < 100) throw std::invalid_argument("ks_test: need at least 100 samples");
    std::sort(samples.begin(), samples.end());
    double d = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double F = cdf(samples[i]);
        d = std::max(d, F - static_cast<double>(i) / static_cast<double>(n));
        d = std::max(d, static_cast<double>(i + 1) / static_cast<double>(n) - F);
    }
    const double crit = ks_critical_001 / std::sqrt(static_cast<double>(n));
    return make_report(std::move(name), d, crit, n, seed, d < crit);
}

TestReport ks_test_two_sample(std::vector<double> a, std::vector<double> b,
                              std::string name, std::uint64_t seed) {
    if (a.size() < 100 || b.size() < 100)
        throw std::invalid_argument("ks_test_two_sample: need at least 100 samples each");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    double d = 0.0;
    std::size_t i = 0, j = 0;
    while (i < a.size() && j < b.size()) {
        if (a[i] <= b[j])
            ++i;
        else
            ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double crit = ks_critical_001 * std::sqrt((na + nb) / (na * nb));
    return make_report(std::move(name), d, crit, a.size() + b.size(), seed, d < crit);
}

TestReport proportion_test(std::uint64_t hits, std::uint64_t n, double p0,
                           std::string name, std::uint64_t seed) {
    if (n < 1000) throw std::invalid_argument("proportion_test: need n >= 1000");
    const double phat = static_cast<double>(hits) / static_cast<double>(n);
    const double band = 3.0 * std::sqrt(p0 * (1.0 - p0) / static_cast<double>(n));
    const double dev = std::abs(phat - p0);
    return make_report(std::move(name), dev, band, n, seed, dev <= band);
}

ConvergenceFit convergence_order(const std::vector<std::pair<double, double>>& dt_err) {
    if (dt_err.size() < 3)
        throw std::invalid_argument("convergence_order: need >= 3 refinement levels");
    for (std::size_t i = 1; i < dt_err.size(); ++i)
        if (!(dt_err[i].first < dt_err[i - 1].first))
            throw std::invalid_argument("convergence_order: dt must be strictly decreasing");
    ConvergenceFit fit;
    for (const auto& [dt, err] : dt_err) {
        (void)dt;
        if (err < 0.0) throw std::invalid_argument("convergence_order: negative error");
        if (err == 0.0) {
            fit.exact = true;
            return fit;
        }
    }
    const double n = static_cast<double>(dt_err.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
    for (const auto& [dt, err] : dt_err) {
        const double x = std::log(dt), y = std::log(err);
        sx += x; sy += y; sxx += x * x; sxy += x * y; syy += y * y;
    }
    const double cov = sxy - sx * sy / n;
    const double vx = sxx - sx * sx / n;
    const double vy = syy - sy * sy / n;
    fit.slope = cov / vx;
    fit.r_squared = (vy > 0.0) ? (cov * cov) / (vx * vy) : 1.0;
    return fit;
}

}  // namespace relmart
