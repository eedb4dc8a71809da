#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace brw {

// Replica outcomes for one scalar observable.  `values` holds observed
// outcomes, with +inf allowed for "observed never" (e.g. extinction before
// any hit).  `censor_count` counts replicas cut off by horizon or cap: their
// outcome is only known to exceed the observation window, so they are
// excluded from the plain ECDF but enter dominance denominators.
struct EmpiricalSample {
    std::vector<double> values;
    std::uint64_t censor_count = 0;

    std::uint64_t total() const { return values.size() + censor_count; }
    void add(double v) { values.push_back(v); }
    void add_censored() { ++censor_count; }
};

struct EcdfStep {
    double x;
    double f; // P(value <= x)
};

// Right-continuous empirical CDF over the observed finite support,
// normalized by the number of (uncensored) values; +inf observations hold
// back mass, so sup F < 1 when they are present.
inline std::vector<EcdfStep> ecdf(const EmpiricalSample& sample) {
    if (sample.values.empty()) throw std::invalid_argument("ecdf: empty sample");
    std::vector<double> finite;
    finite.reserve(sample.values.size());
    for (double v : sample.values)
        if (std::isfinite(v)) finite.push_back(v);
    std::sort(finite.begin(), finite.end());
    const double denom = static_cast<double>(sample.values.size());
    std::vector<EcdfStep> steps;
    std::size_t i = 0;
    while (i < finite.size()) {
        std::size_t j = i;
        while (j < finite.size() && finite[j] == finite[i]) ++j;
        steps.push_back({finite[i], static_cast<double>(j) / denom});
        i = j;
    }
    return steps;
}

inline double dkw_epsilon(std::uint64_t m, double alpha) {
    return std::sqrt(std::log(2.0 / alpha) / (2.0 * static_cast<double>(m)));
}

enum class Dominance { Consistent, Inconclusive, Violated };

inline const char* dominance_name(Dominance d) {
    switch (d) {
        case Dominance::Consistent: return "Consistent";
        case Dominance::Inconclusive: return "Inconclusive";
        default: return "Violated";
    }
}

struct DominanceVerdict {
    std::string claim; // "Y <=_st X" with the caller's labels substituted
    Dominance status = Dominance::Inconclusive;
    double max_violation = 0.0; // max_t (F_X(t) - F_Y(t))
    double band = 0.0;          // DKW epsilon_X + epsilon_Y
    double alpha = 0.0;
    std::uint64_t m_x = 0, m_y = 0;
};

// Tests the claim Y <=_st X, i.e. F_Y(t) >= F_X(t) for all t.  CDF values
// use the full replica count as denominator: censored replicas are ">
// horizon" observations, which is exact for every t inside the observation
// window, and no comparison point lies beyond it.  Consistent if the largest
// empirical excess of F_X over F_Y is <= 0, Violated only if it exceeds the
// combined two-sided DKW band, Inconclusive between.
inline DominanceVerdict dominance_test(const EmpiricalSample& sample_x,
                                       const EmpiricalSample& sample_y, double alpha,
                                       const std::string& label_x = "X",
                                       const std::string& label_y = "Y") {
    if (sample_x.total() < 100 || sample_y.total() < 100)
        throw std::invalid_argument("dominance_test: need at least 100 replicas per side");
    if (alpha <= 0.0 || alpha >= 1.0) throw std::invalid_argument("dominance_test: bad alpha");
    std::vector<double> vx, vy;
    vx.reserve(sample_x.values.size());
    vy.reserve(sample_y.values.size());
    for (double v : sample_x.values)
        if (std::isfinite(v)) vx.push_back(v);
    for (double v : sample_y.values)
        if (std::isfinite(v)) vy.push_back(v);
    std::sort(vx.begin(), vx.end());
    std::sort(vy.begin(), vy.end());
    const double denom_x = static_cast<double>(sample_x.total());
    const double denom_y = static_cast<double>(sample_y.total());

    double max_violation = 0.0;
    std::size_t ix = 0, iy = 0;
    while (ix < vx.size() || iy < vy.size()) {
        double t;
        if (iy == vy.size() || (ix < vx.size() && vx[ix] <= vy[iy]))
            t = vx[ix];
        else
            t = vy[iy];
        while (ix < vx.size() && vx[ix] <= t) ++ix;
        while (iy < vy.size() && vy[iy] <= t) ++iy;
        const double diff =
            static_cast<double>(ix) / denom_x - static_cast<double>(iy) / denom_y;
        max_violation = std::max(max_violation, diff);
    }

    DominanceVerdict v;
    v.claim = label_y + " <=_st " + label_x;
    v.max_violation = max_violation;
    v.band = dkw_epsilon(sample_x.total(), alpha) + dkw_epsilon(sample_y.total(), alpha);
    v.alpha = alpha;
    v.m_x = sample_x.total();
    v.m_y = sample_y.total();
    if (max_violation <= 0.0)
        v.status = Dominance::Consistent;
    else if (max_violation <= v.band)
        v.status = Dominance::Inconclusive;
    else
        v.status = Dominance::Violated;
    return v;
}

// Inverse standard-normal CDF: Acklam's rational approximation polished with
// one Halley step against erfc, giving near machine precision.
inline double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("normal_quantile: p outside (0,1)");
    static constexpr double A[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                    -2.759285104469687e+02, 1.383577518672690e+02,
                                    -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double B[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                    -1.556989798598866e+02, 6.680131188771972e+01,
                                    -1.328068155288572e+01};
    static constexpr double C[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                    -2.400758277161838e+00, -2.549732539343734e+00,
                                    4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double Dc[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                     2.445134137142996e+00, 3.754408661907416e+00};
    constexpr double plow = 0.02425;
    double x;
    if (p < plow) {
        const double q = std::sqrt(-2.0 * std::log(p));
        x = (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((Dc[0] * q + Dc[1]) * q + Dc[2]) * q + Dc[3]) * q + 1.0);
    } else if (p <= 1.0 - plow) {
        const double q = p - 0.5, r = q * q;
        x = (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q /
            (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0);
    } else {
        const double q = std::sqrt(-2.0 * std::log(1.0 - p));
        x = -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5]) /
            ((((Dc[0] * q + Dc[1]) * q + Dc[2]) * q + Dc[3]) * q + 1.0);
    }
    constexpr double sqrt_two_pi = 2.5066282746310002;
    const double e = 0.5 * std::erfc(-x / std::sqrt(2.0)) - p;
    const double u = e * sqrt_two_pi * std::exp(x * x / 2.0);
    return x - u / (1.0 + x * u / 2.0);
}

struct ProbEstimate {
    double point = 0.0;
    double lo = 0.0;
    double hi = 1.0;
    double alpha = 0.0;
};

// Wilson score interval at confidence level 1 - alpha.
inline ProbEstimate estimate_prob(std::uint64_t successes, std::uint64_t trials, double alpha) {
    if (trials < 1) throw std::invalid_argument("estimate_prob: trials must be >= 1");
    if (successes > trials) throw std::invalid_argument("estimate_prob: successes > trials");
    const double n = static_cast<double>(trials);
    const double phat = static_cast<double>(successes) / n;
    const double z = normal_quantile(1.0 - alpha / 2.0);
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double center = (phat + z2 / (2.0 * n)) / denom;
    const double half =
        z * std::sqrt(phat * (1.0 - phat) / n + z2 / (4.0 * n * n)) / denom;
    ProbEstimate e;
    e.point = phat;
    e.lo = std::max(0.0, center - half);
    e.hi = std::min(1.0, center + half);
    e.alpha = alpha;
    return e;
}

// Regularized upper incomplete gamma Q(a, x) = Γ(a, x)/Γ(a): power series for
// the lower half, Lentz continued fraction for the upper half.
inline double gamma_q(double a, double x) {
    if (a <= 0.0 || x < 0.0) throw std::invalid_argument("gamma_q: need a > 0, x >= 0");
    if (x == 0.0) return 1.0;
    constexpr double eps = 1e-15;
    const double log_prefactor = -x + a * std::log(x) - std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double del = 1.0 / a;
        double sum = del;
        for (int i = 0; i < 10000; ++i) {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if (std::abs(del) < std::abs(sum) * eps) break;
        }
        return 1.0 - sum * std::exp(log_prefactor);
    }
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i < 10000; ++i) {
        const double an = -static_cast<double>(i) * (static_cast<double>(i) - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < eps) break;
    }
    return std::exp(log_prefactor) * h;
}

struct ChiSquareVerdict {
    double statistic = 0.0;
    std::uint64_t dof = 0;
    double p_value = 1.0;
    double alpha = 0.0;
    bool pass = true;
    std::uint64_t bins = 0;
};

// Chi-square homogeneity test between two discrete samples.  Distinct pooled
// values become bins, then adjacent bins are merged left to right until every
// expected cell count reaches 5; a short leftover tail is folded into the
// last bin.
inline ChiSquareVerdict two_sample_marginal_test(const std::vector<std::uint64_t>& sample_a,
                                                 const std::vector<std::uint64_t>& sample_b,
                                                 double alpha) {
    if (sample_a.empty() || sample_b.empty())
        throw std::invalid_argument("two_sample_marginal_test: empty sample");
    std::vector<std::uint64_t> pooled;
    pooled.reserve(sample_a.size() + sample_b.size());
    pooled.insert(pooled.end(), sample_a.begin(), sample_a.end());
    pooled.insert(pooled.end(), sample_b.begin(), sample_b.end());
    std::sort(pooled.begin(), pooled.end());
    pooled.erase(std::unique(pooled.begin(), pooled.end()), pooled.end());

    auto count_in = [](const std::vector<std::uint64_t>& sorted_values, std::uint64_t lo,
                       std::uint64_t hi) {
        const auto l = std::lower_bound(sorted_values.begin(), sorted_values.end(), lo);
        const auto r = std::upper_bound(sorted_values.begin(), sorted_values.end(), hi);
        return static_cast<double>(r - l);
    };
    std::vector<std::uint64_t> sa = sample_a, sb = sample_b;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    const double grand = na + nb;

    // Greedy bin closing: a bin [lo, hi] closes once both expected counts
    // reach 5; expected = row total x (pooled bin mass) / grand total.
    struct Bin {
        double oa, ob;
    };
    std::vector<Bin> bins;
    std::size_t i = 0;
    while (i < pooled.size()) {
        std::size_t j = i;
        double oa = 0.0, ob = 0.0;
        for (; j < pooled.size(); ++j) {
            oa = count_in(sa, pooled[i], pooled[j]);
            ob = count_in(sb, pooled[i], pooled[j]);
            const double mass = oa + ob;
            if (na * mass / grand >= 5.0 && nb * mass / grand >= 5.0) break;
        }
        if (j == pooled.size()) {
            // Leftover tail too thin to stand alone: fold into the last bin.
            if (bins.empty()) throw std::runtime_error("two_sample_marginal_test: degenerate binning");
            bins.back().oa += oa;
            bins.back().ob += ob;
            break;
        }
        bins.push_back({oa, ob});
        i = j + 1;
    }
    if (bins.size() < 2) throw std::runtime_error("two_sample_marginal_test: degenerate binning");

    double stat = 0.0;
    for (const Bin& bin : bins) {
        const double mass = bin.oa + bin.ob;
        const double ea = na * mass / grand;
        const double eb = nb * mass / grand;
        stat += (bin.oa - ea) * (bin.oa - ea) / ea + (bin.ob - eb) * (bin.ob - eb) / eb;
    }
    ChiSquareVerdict v;
    v.statistic = stat;
    v.dof = bins.size() - 1;
    v.bins = bins.size();
    v.alpha = alpha;
    v.p_value = gamma_q(static_cast<double>(v.dof) / 2.0, stat / 2.0);
    v.pass = v.p_value >= alpha;
    return v;
}

} // namespace brw
