#pragma once

#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

#include "brw/field.hpp"
#include "brw/lattice.hpp"
#include "brw/offspring.hpp"

namespace brw {

struct StepKernel {
    KernelKind kind = KernelKind::Strict;
    double pi = 0.0; // survival probability; meaningful for Generalized only

    static StepKernel lazy() { return {KernelKind::Lazy, 0.0}; }
    static StepKernel strict() { return {KernelKind::Strict, 0.0}; }
    static StepKernel generalized(double pi) { return {KernelKind::Generalized, pi}; }
};

inline const char* kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::Lazy: return "lazy";
        case KernelKind::Strict: return "strict";
        default: return "generalized";
    }
}

// Extended natural: a time value or "never observed".
constexpr std::uint64_t kNever = std::numeric_limits<std::uint64_t>::max();

inline std::string exttime_str(std::uint64_t t) { return t == kNever ? "inf" : std::to_string(t); }

enum class Censor { None, Horizon, Cap };

inline const char* censor_name(Censor c) {
    switch (c) {
        case Censor::None: return "none";
        case Censor::Horizon: return "horizon";
        default: return "cap";
    }
}

struct HittingTimes {
    std::uint64_t tau = kNever;
    // Decomposition components; only coupled runs fill these.
    bool has_components = false;
    std::uint64_t S = kNever, T = kNever, U = kNever;
    Censor censored = Censor::None;
    bool started_on_boundary = false;
    std::uint64_t max_population = 0;
};

struct cap_exceeded : std::runtime_error {
    explicit cap_exceeded(std::uint64_t pop)
        : std::runtime_error("population cap exceeded: " + std::to_string(pop)) {}
};

namespace detail {

// Per-child displacement table in the normative neighbor order.
template <std::size_t D>
struct MoveTable {
    Site<D> deltas[2 * D + 1];
    std::uint32_t count;

    explicit MoveTable(KernelKind kind) {
        std::uint32_t m = 0;
        if (kind == KernelKind::Lazy) deltas[m++] = Site<D>{};
        for (std::size_t i = 0; i < D; ++i) {
            Site<D> p{};
            p[i] = 1;
            deltas[m++] = p;
            p[i] = -1;
            deltas[m++] = p;
        }
        count = m;
    }
};

template <std::size_t D>
inline Site<D> shift(const Site<D>& s, const Site<D>& d) {
    Site<D> out = s;
    for (std::size_t i = 0; i < D; ++i) out[i] += d[i];
    return out;
}

} // namespace detail

// One synchronized generation: every particle draws an offspring count, places
// each child independently and uniformly over neighbors(site, kernel), then
// dies — except under Generalized, where it additionally persists in place
// with probability π.  Normative draw order per particle: offspring count,
// then one placement draw per child, then the survival draw (Generalized
// always consumes a survival draw, even at π = 0). Particles are processed in
// lexicographic site order.
template <std::size_t D, class Rng>
ParticleField<D> step_field(const ParticleField<D>& field, StepKernel kernel,
                            const OffspringLaw& law, Rng& rng) {
    const detail::MoveTable<D> moves(kernel.kind);
    FieldBuilder<D> next;
    next.raw.reserve(field.entries.size() * 2 + 16);
    for (const auto& [site, count] : field.entries) {
        for (std::uint64_t j = 0; j < count; ++j) {
            const std::uint32_t c = law.sample(rng);
            for (std::uint32_t k = 0; k < c; ++k)
                next.add(detail::shift(site, moves.deltas[rng.uniform_below(moves.count)]));
            if (kernel.kind == KernelKind::Generalized && rng.bernoulli(kernel.pi)) next.add(site);
        }
    }
    return next.build();
}

// First time the progeny of a single particle at `start` puts a particle on
// ∂Λ_n. The process itself evolves freely; the box is an observation window,
// and no particle can leave it without first standing on the boundary.
template <std::size_t D, class Rng>
HittingTimes run_hitting(const Site<D>& start, const BoxGeometry<D>& box, StepKernel kernel,
                         const OffspringLaw& law, std::uint64_t horizon, std::uint64_t cap,
                         Rng& rng) {
    if (!box.contains(start)) throw std::invalid_argument("run_hitting: start outside box");
    HittingTimes out;
    out.started_on_boundary = box.boundary_contains(start);
    ParticleField<D> field = ParticleField<D>::single(start);
    for (std::uint64_t t = 0;; ++t) {
        out.max_population = std::max(out.max_population, field.total());
        bool hit = false;
        for (const auto& e : field.entries)
            if (box.boundary_contains(e.first)) {
                hit = true;
                break;
            }
        if (hit) {
            out.tau = t;
            return out;
        }
        if (field.empty()) return out; // extinct: tau = infinity, uncensored
        if (t == horizon) {
            out.censored = Censor::Horizon;
            return out;
        }
        if (field.total() > cap) {
            out.censored = Censor::Cap;
            return out;
        }
        field = step_field(field, kernel, law, rng);
    }
}

// Count at `probe` after t steps of free evolution.
template <std::size_t D, class Rng>
std::uint64_t site_count_path(const Site<D>& start, StepKernel kernel, const OffspringLaw& law,
                              std::uint64_t t, const Site<D>& probe, std::uint64_t cap, Rng& rng) {
    ParticleField<D> field = ParticleField<D>::single(start);
    for (std::uint64_t s = 0; s < t; ++s) {
        field = step_field(field, kernel, law, rng);
        const std::uint64_t pop = field.total();
        if (pop > cap) throw cap_exceeded(pop);
    }
    return field.count_at(probe);
}

// Event-driven continuous-time branching random walk: each particle dies at
// rate 1 and gives birth onto each of its 2D neighbors at rate λ. With m
// particles the next event arrives after Exponential(m(1+2dλ)); it is a death
// of a uniform particle with probability 1/(1+2dλ), otherwise a birth at a
// uniform neighbor of a uniform particle. Draw order per event: waiting time,
// particle index, event-type uniform, then the direction if it is a birth.
template <std::size_t D, class Rng>
ParticleField<D> simulate_ct(const Site<D>& start, double lambda, double t, std::uint64_t cap,
                             Rng& rng) {
    if (lambda <= 0.0) throw std::invalid_argument("simulate_ct: lambda must be > 0");
    const double death_prob = 1.0 / (1.0 + 2 * D * lambda);
    std::vector<Site<D>> particles{start};
    double clock = 0.0;
    while (!particles.empty()) {
        const double m = static_cast<double>(particles.size());
        const double wait = rng.exponential(m * (1.0 + 2 * D * lambda));
        if (clock + wait > t) break;
        clock += wait;
        const std::uint32_t idx = rng.uniform_below(static_cast<std::uint32_t>(particles.size()));
        if (rng.uniform() < death_prob) {
            particles[idx] = particles.back();
            particles.pop_back();
        } else {
            const std::uint32_t dir = rng.uniform_below(2 * D);
            Site<D> child = particles[idx];
            child[dir / 2] += (dir % 2 == 0) ? 1 : -1;
            particles.push_back(child);
            if (particles.size() > cap) throw cap_exceeded(particles.size());
        }
    }
    FieldBuilder<D> b;
    b.raw.reserve(particles.size());
    for (const auto& s : particles) b.add(s);
    return b.build();
}

} // namespace brw
