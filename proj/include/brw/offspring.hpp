#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace brw {

// Finite-support offspring law 𝒫 = (P_0, …, P_K) plus an optional in-place
// survival probability π (used by the generalized kernel).
struct OffspringLaw {
    std::vector<double> probs;
    double survival = 0.0;
    std::vector<double> cdf; // prefix sums in index order, last entry forced to 1

    static OffspringLaw make(std::vector<double> probs, double survival = 0.0) {
        if (probs.empty()) throw std::invalid_argument("offspring law: empty support");
        double total = 0.0;
        for (double p : probs) {
            if (p < 0.0) throw std::invalid_argument("offspring law: NegativeProbability");
            total += p;
        }
        if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("offspring law: NotNormalized");
        if (survival < 0.0 || survival > 1.0)
            throw std::invalid_argument("offspring law: survival outside [0,1]");
        OffspringLaw law;
        law.probs = std::move(probs);
        law.survival = survival;
        law.cdf.resize(law.probs.size());
        double acc = 0.0;
        for (std::size_t i = 0; i < law.probs.size(); ++i) {
            acc += law.probs[i];
            law.cdf[i] = acc;
        }
        law.cdf.back() = 1.0;
        return law;
    }

    // f(s) = Σ P_i s^i, evaluated in fixed ascending-power order.
    double pgf(double s) const {
        double acc = 0.0, pw = 1.0;
        for (double p : probs) {
            acc += p * pw;
            pw *= s;
        }
        return acc;
    }

    double mean() const {
        double acc = 0.0;
        for (std::size_t i = 1; i < probs.size(); ++i) acc += static_cast<double>(i) * probs[i];
        return acc;
    }

    std::uint32_t max_children() const { return static_cast<std::uint32_t>(probs.size() - 1); }

    // Inverse-CDF draw; one uniform, fixed scan order.
    template <class Rng>
    std::uint32_t sample(Rng& rng) const {
        const double u = rng.uniform();
        for (std::size_t i = 0; i < cdf.size(); ++i)
            if (u < cdf[i]) return static_cast<std::uint32_t>(i);
        return max_children();
    }
};

// Offspring count = Σ_{j=1..4} Bernoulli(√(λ/N)) (i.e. Binomial(4, √(λ/N))),
// survival π_N = √(1−1/N): the discrete ladder feeding the continuous-time
// comparison. survival is a plain field and may be overridden by the caller.
inline OffspringLaw bernoulli_sum_law(double lambda, int N) {
    if (lambda <= 0.0) throw std::invalid_argument("bernoulli_sum_law: lambda must be > 0");
    if (N < 1) throw std::invalid_argument("bernoulli_sum_law: N must be >= 1");
    const double p = std::sqrt(lambda / static_cast<double>(N));
    if (p > 1.0) throw std::invalid_argument("bernoulli_sum_law: sqrt(lambda/N) > 1");
    const double q = 1.0 - p;
    std::vector<double> probs(5);
    probs[0] = q * q * q * q;
    probs[1] = 4.0 * p * q * q * q;
    probs[2] = 6.0 * p * p * q * q;
    probs[3] = 4.0 * p * p * p * q;
    probs[4] = p * p * p * p;
    const double pi = std::sqrt(1.0 - 1.0 / static_cast<double>(N));
    return OffspringLaw::make(std::move(probs), pi);
}

} // namespace brw
