#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "brw/lattice.hpp"
#include "brw/offspring.hpp"
#include "brw/simulator.hpp"

namespace brw {

// Dense per-site real values over a box window.
template <std::size_t D>
struct ScalarGrid {
    BoxGeometry<D> box;
    std::vector<double> values;

    explicit ScalarGrid(const BoxGeometry<D>& b, double fill = 0.0)
        : box(b), values(static_cast<std::size_t>(b.site_count()), fill) {}

    double at(const Site<D>& s) const { return values[box.index_of(s)]; }
    double& at(const Site<D>& s) { return values[box.index_of(s)]; }
    // Out-of-window reads are zero; stencils use this at the window edge.
    double at_or_zero(const Site<D>& s) const { return box.contains(s) ? at(s) : 0.0; }

    double total() const {
        double acc = 0.0;
        for (double v : values) acc += v;
        return acc;
    }
};

struct FixedPointInfo {
    std::uint64_t iterations = 0;
    double residual = 0.0; // last sup-norm change
};

namespace detail {

inline double clamp01(double v) { return std::min(1.0, std::max(0.0, v)); }

// One sweep of g ← f(neighborhood average of g) over interior sites,
// boundary pinned at 0.  Returns the sup-norm change.  The update is
// pointwise monotone under IEEE rounding (sums, divisions by a positive
// constant, the ascending-order pgf, and the clamp all preserve ≤), so a
// nonincreasing iterate stays nonincreasing exactly.
template <std::size_t D>
double survival_sweep(const BoxGeometry<D>& box, KernelKind kind, const OffspringLaw& law,
                      const std::vector<double>& g, std::vector<double>& out) {
    const double k = static_cast<double>(kind == KernelKind::Lazy ? 2 * D + 1 : 2 * D);
    double change = 0.0;
    const std::uint64_t nsites = box.site_count();
    for (std::uint64_t i = 0; i < nsites; ++i) {
        const Site<D> s = box.site_at(i);
        if (box.boundary_contains(s)) {
            out[i] = 0.0;
            continue;
        }
        double acc = 0.0;
        if (kind == KernelKind::Lazy) acc += g[i];
        for (std::size_t a = 0; a < D; ++a) {
            Site<D> p = s;
            p[a] += 1;
            acc += g[box.index_of(p)];
            p[a] -= 2;
            acc += g[box.index_of(p)];
        }
        const double next = clamp01(law.pgf(acc / k));
        if (next > g[i])
            throw std::logic_error("survival iteration is not monotone at " + site_str(s));
        change = std::max(change, g[i] - next);
        out[i] = next;
    }
    return change;
}

} // namespace detail

// Probability that the progeny of one particle at x ever places a particle on
// ∂Λ.  Computed as p = 1 − q where q(x) = lim_t P(τ^x > t): iterate
// g_{t+1}(x) = f(average of g_t over neighbors(x)) from g_0 ≡ 1 on the
// interior, g ≡ 0 on the boundary, until the sup-norm change drops below eps.
// The iterate at step t is exactly P(τ^x > t) because the children's subtrees
// are independent, so the no-hit probability factorizes through the pgf.
template <std::size_t D>
ScalarGrid<D> escape_probability_grid(const BoxGeometry<D>& box, StepKernel kernel,
                                      const OffspringLaw& law, double eps = 1e-12,
                                      std::uint64_t max_iter = 1000000,
                                      FixedPointInfo* info = nullptr) {
    if (kernel.kind == KernelKind::Generalized)
        throw std::invalid_argument("escape_probability_grid: kernel must be Lazy or Strict");
    const std::uint64_t nsites = box.site_count();
    std::vector<double> g(static_cast<std::size_t>(nsites), 1.0);
    for (std::uint64_t i = 0; i < nsites; ++i)
        if (box.boundary_contains(box.site_at(i))) g[i] = 0.0;
    std::vector<double> next(g.size(), 0.0);
    double change = 0.0;
    std::uint64_t it = 0;
    for (; it < max_iter; ++it) {
        change = detail::survival_sweep(box, kernel.kind, law, g, next);
        g.swap(next);
        if (change < eps) break;
    }
    if (change >= eps)
        throw std::runtime_error("escape_probability_grid: no convergence after " +
                                 std::to_string(max_iter) +
                                 " iterations, residual=" + std::to_string(change));
    if (info) {
        info->iterations = it + 1;
        info->residual = change;
    }
    ScalarGrid<D> p(box, 0.0);
    for (std::uint64_t i = 0; i < nsites; ++i) p.values[i] = 1.0 - g[i];
    return p;
}

// Per-site exact CDF of the boundary hitting time: values[t*nsites + idx] =
// P(τ^x ≤ t) = 1 − g_t(x), for t = 0..t_max, same recursion as above.
template <std::size_t D>
struct TimeGrid {
    BoxGeometry<D> box;
    std::uint64_t t_max;
    std::vector<double> values; // layout: [t * site_count + site_index]

    double at(std::uint64_t t, const Site<D>& s) const {
        return values[t * box.site_count() + box.index_of(s)];
    }
};

template <std::size_t D>
TimeGrid<D> hitting_cdf_grid(const BoxGeometry<D>& box, StepKernel kernel,
                             const OffspringLaw& law, std::uint64_t t_max) {
    if (kernel.kind == KernelKind::Generalized)
        throw std::invalid_argument("hitting_cdf_grid: kernel must be Lazy or Strict");
    const std::uint64_t nsites = box.site_count();
    TimeGrid<D> out{box, t_max, {}};
    out.values.resize(static_cast<std::size_t>(nsites * (t_max + 1)));
    std::vector<double> g(static_cast<std::size_t>(nsites), 1.0);
    for (std::uint64_t i = 0; i < nsites; ++i)
        if (box.boundary_contains(box.site_at(i))) g[i] = 0.0;
    std::vector<double> next(g.size(), 0.0);
    for (std::uint64_t t = 0;; ++t) {
        for (std::uint64_t i = 0; i < nsites; ++i) out.values[t * nsites + i] = 1.0 - g[i];
        if (t == t_max) break;
        detail::survival_sweep(box, kernel.kind, law, g, next);
        g.swap(next);
    }
    return out;
}

// Mean-field recursion for expected per-site counts after t synchronized
// generations: each particle contributes mean(law) children spread uniformly
// over its neighborhood, plus (Generalized) itself with weight π.
template <std::size_t D>
ScalarGrid<D> expected_counts_discrete(const Site<D>& start, StepKernel kernel,
                                       double mean_offspring, std::uint64_t t,
                                       std::int32_t truncation_radius) {
    if (truncation_radius < linf_norm(start) + static_cast<std::int64_t>(t))
        throw std::invalid_argument("expected_counts_discrete: truncation radius too small");
    const BoxGeometry<D> box{truncation_radius};
    const double k = static_cast<double>(kernel.kind == KernelKind::Lazy ? 2 * D + 1 : 2 * D);
    const double w = mean_offspring / k;
    ScalarGrid<D> m(box, 0.0);
    m.at(start) = 1.0;
    ScalarGrid<D> next(box, 0.0);
    for (std::uint64_t s = 0; s < t; ++s) {
        const std::uint64_t nsites = box.site_count();
        for (std::uint64_t i = 0; i < nsites; ++i) {
            const Site<D> y = box.site_at(i);
            double acc = 0.0;
            if (kernel.kind == KernelKind::Lazy) acc += m.values[i];
            for (std::size_t a = 0; a < D; ++a) {
                Site<D> p = y;
                p[a] += 1;
                acc += m.at_or_zero(p);
                p[a] -= 2;
                acc += m.at_or_zero(p);
            }
            next.values[i] = w * acc;
            if (kernel.kind == KernelKind::Generalized) next.values[i] += kernel.pi * m.values[i];
        }
        m.values.swap(next.values);
    }
    return m;
}

struct CtCountsInfo {
    double step_error = 0.0; // Richardson estimate from step halving
    double mass_error = 0.0; // relative deviation of total mass from e^{(2dλ−1)t}
};

namespace detail {

template <std::size_t D>
void ct_rate(const BoxGeometry<D>& box, double lambda, const std::vector<double>& m,
             std::vector<double>& dm) {
    const std::uint64_t nsites = box.site_count();
    for (std::uint64_t i = 0; i < nsites; ++i) {
        const Site<D> y = box.site_at(i);
        double acc = 0.0;
        for (std::size_t a = 0; a < D; ++a) {
            Site<D> p = y;
            p[a] += 1;
            if (box.contains(p)) acc += m[box.index_of(p)];
            p[a] -= 2;
            if (box.contains(p)) acc += m[box.index_of(p)];
        }
        dm[i] = -m[i] + lambda * acc;
    }
}

template <std::size_t D>
std::vector<double> ct_integrate(const BoxGeometry<D>& box, double lambda,
                                 std::vector<double> m, double t, std::uint64_t steps) {
    const double h = t / static_cast<double>(steps);
    const std::size_t n = m.size();
    std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
    for (std::uint64_t s = 0; s < steps; ++s) {
        ct_rate(box, lambda, m, k1);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = m[i] + 0.5 * h * k1[i];
        ct_rate(box, lambda, tmp, k2);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = m[i] + 0.5 * h * k2[i];
        ct_rate(box, lambda, tmp, k3);
        for (std::size_t i = 0; i < n; ++i) tmp[i] = m[i] + h * k3[i];
        ct_rate(box, lambda, tmp, k4);
        for (std::size_t i = 0; i < n; ++i)
            m[i] += (h / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    }
    return m;
}

} // namespace detail

// Expected per-site counts for the continuous-time walk (death rate 1, birth
// rate λ toward each of the 2D neighbors): classic RK4 on
// dm(x)/dt = −m(x) + λ Σ_{|y−x|=1} m(y) over a truncated window, run at step
// h and h/2; the h/2 solution is returned with a Richardson error estimate.
template <std::size_t D>
ScalarGrid<D> expected_counts_ct(const Site<D>& start, double lambda, double t,
                                 std::int32_t truncation_radius, double dt = 0.0,
                                 CtCountsInfo* info = nullptr) {
    if (lambda <= 0.0) throw std::invalid_argument("expected_counts_ct: lambda must be > 0");
    if (t < 0.0) throw std::invalid_argument("expected_counts_ct: t must be >= 0");
    if (truncation_radius <= linf_norm(start))
        throw std::invalid_argument("expected_counts_ct: truncation radius too small");
    const BoxGeometry<D> box{truncation_radius};
    ScalarGrid<D> out(box, 0.0);
    out.at(start) = 1.0;
    if (t == 0.0) {
        if (info) *info = CtCountsInfo{};
        return out;
    }
    if (dt <= 0.0) dt = std::min(0.01, 0.1 / (1.0 + 2 * D * lambda));
    const auto steps = static_cast<std::uint64_t>(std::ceil(t / dt));
    const std::vector<double> coarse = detail::ct_integrate(box, lambda, out.values, t, steps);
    const std::vector<double> fine = detail::ct_integrate(box, lambda, out.values, t, 2 * steps);
    double diff = 0.0;
    for (std::size_t i = 0; i < fine.size(); ++i) diff = std::max(diff, std::abs(fine[i] - coarse[i]));
    out.values = fine;
    if (info) {
        info->step_error = diff / 15.0; // RK4: halving shrinks the error 16-fold
        const double expect = std::exp((2 * D * lambda - 1.0) * t);
        info->mass_error = std::abs(out.total() - expect) / expect;
    }
    return out;
}

// Both identities below read a converged strict-kernel grid on Λ_n in d=2.
// All four neighbors of the origin share the same no-hit probability by the
// symmetries of the box, so the one-step Markov decomposition at the origin
// collapses to q(0,0) = f(q(1,0)); the returned residual is its absolute gap.
inline double check_root_identity(const BoxGeometry<2>& box, const OffspringLaw& law) {
    const ScalarGrid<2> p = escape_probability_grid<2>(box, StepKernel::strict(), law);
    const double q_root = 1.0 - p.at(Site2{0, 0});
    const double q_nbr = 1.0 - p.at(Site2{1, 0});
    return std::abs(q_root - law.pgf(q_nbr));
}

// Companion inequality: f(q(0,0)) ≥ q(1,0), i.e. one step from a neighbor of
// the origin is no safer than sitting at the origin itself.  Returns the
// margin f(q(0,0)) − q(1,0), which should be ≥ −eps.
inline double check_neighbor_inequality(const BoxGeometry<2>& box, const OffspringLaw& law) {
    const ScalarGrid<2> p = escape_probability_grid<2>(box, StepKernel::strict(), law);
    const double q_root = 1.0 - p.at(Site2{0, 0});
    const double q_nbr = 1.0 - p.at(Site2{1, 0});
    return law.pgf(q_root) - q_nbr;
}

} // namespace brw
