#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace relmart {

// ---------------------------------------------------------------------------
// Normal law. The quantile is Acklam's rational approximation polished with
// one Halley step against the erfc-based CDF; absolute error is well below
// the 1e-10 contract.
// ---------------------------------------------------------------------------
double normal_pdf(double x);
double normal_cdf(double x);
double normal_quantile(double p);

/// Adaptive Simpson quadrature on [a, b] to absolute tolerance tol.
double adaptive_simpson(const std::function<double(double)>& f, double a, double b,
                        double tol, int max_depth = 40);

/// Owen's T function T(h, a) = (1/2pi) * int_0^a exp(-h^2(1+x^2)/2)/(1+x^2) dx.
double owen_t(double h, double a);

// ---------------------------------------------------------------------------
// Mergeable moment accumulator (Welford). merge() is associative and the
// suite always merges fixed chunk ranges in index order, so statistics are
// identical however many workers ran.
// ---------------------------------------------------------------------------
struct RunningStat {
    std::uint64_t n = 0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) {
        ++n;
        const double d = x - mean;
        mean += d / static_cast<double>(n);
        m2 += d * (x - mean);
    }
    void merge(const RunningStat& o) {
        if (o.n == 0) return;
        if (n == 0) { *this = o; return; }
        const double nd = static_cast<double>(n), od = static_cast<double>(o.n);
        const double d = o.mean - mean;
        const double tot = nd + od;
        mean += d * od / tot;
        m2 += o.m2 + d * d * nd * od / tot;
        n += o.n;
    }
    double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
    double stddev() const;
    double std_error() const;
};

// ---------------------------------------------------------------------------
// Test reporting
// ---------------------------------------------------------------------------
struct TestReport {
    std::string name;
    double statistic = 0.0;
    double threshold = 0.0;
    std::uint64_t n_samples = 0;
    std::uint64_t seed = 0;
    bool pass = false;
    std::string details;
};

TestReport make_report(std::string name, double statistic, double threshold,
                       std::uint64_t n_samples, std::uint64_t seed, bool pass,
                       std::string details = "");

/// One-sample Kolmogorov-Smirnov test at significance 0.01:
/// pass iff sup|F_emp - F| < 1.628 / sqrt(N).
TestReport ks_test(std::vector<double> samples, const std::function<double(double)>& cdf,
                   std::string name = "ks", std::uint64_t seed = 0);

/// Two-sample KS at significance 0.01: D < 1.628 * sqrt((n+m)/(n*m)).
TestReport ks_test_two_sample(std::vector<double> a, std::vector<double> b,
                              std::string name = "ks2", std::uint64_t seed = 0);

/// pass iff |hits/n - p0| <= 3 * sqrt(p0 (1-p0) / n).
TestReport proportion_test(std::uint64_t hits, std::uint64_t n, double p0,
                           std::string name = "proportion", std::uint64_t seed = 0);

/// Least-squares slope of log(err) vs log(dt). Requires >= 3 levels with dt
/// strictly decreasing. Negative errors are rejected; any exact zero error
/// short-circuits to a pass. statistic = slope; details carries R^2.
struct ConvergenceFit {
    double slope = 0.0;
    double r_squared = 0.0;
    bool exact = false;  // an error was exactly zero
};
ConvergenceFit convergence_order(const std::vector<std::pair<double, double>>& dt_err);

constexpr double ks_critical_001 = 1.628;

}  // namespace relmart
