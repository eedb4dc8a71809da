#pragma once

#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>

#include "brw/field.hpp"
#include "brw/lattice.hpp"
#include "brw/offspring.hpp"
#include "brw/simulator.hpp"

namespace brw {

// The three reflection couplings.  Each kind fixes both start sites, the
// kernel, the mirror map, and the near/far half-planes:
//   AxisShift1: (0,0) vs (1,0), Lazy kernel, mirror (x,y)->(1-x,y),
//               near {x<=0}, far {x>=1} (the axis x=1/2 carries no sites).
//   DiagShift:  (0,0) vs (1,1), Strict kernel, mirror (x,y)->(1-y,1-x),
//               near {x+y<=0}, far {x+y>=2}, axis diagonal {x+y=1}.
//   AxisShift2: (0,0) vs (2,0), Generalized(pi) kernel, mirror (x,y)->(2-x,y),
//               near {x<=0}, far {x>=2}, axis column {x=1}.
enum class CouplingKind { AxisShift1, DiagShift, AxisShift2 };

inline const char* coupling_name(CouplingKind k) {
    switch (k) {
        case CouplingKind::AxisShift1: return "AxisShift1";
        case CouplingKind::DiagShift: return "DiagShift";
        default: return "AxisShift2";
    }
}

inline StepKernel coupling_kernel(CouplingKind k, double pi) {
    switch (k) {
        case CouplingKind::AxisShift1: return StepKernel::lazy();
        case CouplingKind::DiagShift: return StepKernel::strict();
        default: return StepKernel::generalized(pi);
    }
}

inline Site2 coupled_start(CouplingKind k, int side) {
    if (side == 0) return {0, 0};
    switch (k) {
        case CouplingKind::AxisShift1: return {1, 0};
        case CouplingKind::DiagShift: return {1, 1};
        default: return {2, 0};
    }
}

inline Site2 mirror_site(CouplingKind k, const Site2& s) {
    switch (k) {
        case CouplingKind::AxisShift1: return reflect_phi(s);
        case CouplingKind::DiagShift: return reflect_upsilon(s);
        default: return reflect_psi(s);
    }
}

enum class HalfSpace { Near, Axis, Far };

inline HalfSpace half_space(CouplingKind k, const Site2& s) {
    switch (k) {
        case CouplingKind::AxisShift1: return s[0] <= 0 ? HalfSpace::Near : HalfSpace::Far;
        case CouplingKind::DiagShift: {
            const std::int64_t d = coord_sum(s);
            return d <= 0 ? HalfSpace::Near : (d == 1 ? HalfSpace::Axis : HalfSpace::Far);
        }
        default:
            return s[0] <= 0 ? HalfSpace::Near : (s[0] == 1 ? HalfSpace::Axis : HalfSpace::Far);
    }
}

// A near-side alpha parent breeds synthetically when it sits on the last
// near line before the axis (V_0 / the zero diagonal / V_0), antithetically
// anywhere deeper inside the near half.
inline bool synthetic_parent(CouplingKind k, const Site2& s) {
    return k == CouplingKind::DiagShift ? coord_sum(s) == 0 : s[0] == 0;
}

enum class Move : std::uint8_t { Stay, E, W, N, S };

inline const char* move_name(Move m) {
    switch (m) {
        case Move::Stay: return "Stay";
        case Move::E: return "E";
        case Move::W: return "W";
        case Move::N: return "N";
        default: return "S";
    }
}

inline Site2 apply_move(const Site2& s, Move m) {
    switch (m) {
        case Move::Stay: return s;
        case Move::E: return {s[0] + 1, s[1]};
        case Move::W: return {s[0] - 1, s[1]};
        case Move::N: return {s[0], s[1] + 1};
        default: return {s[0], s[1] - 1};
    }
}

// Placement alphabet per kernel, in the normative sampling order (matching
// the neighbor order used by the plain simulator).
inline const Move* kernel_moves(KernelKind kind, std::uint32_t& count) {
    static constexpr Move lazy[5] = {Move::Stay, Move::E, Move::W, Move::N, Move::S};
    static constexpr Move strict[4] = {Move::E, Move::W, Move::N, Move::S};
    if (kind == KernelKind::Lazy) {
        count = 5;
        return lazy;
    }
    count = 4;
    return strict;
}

struct PairedMove {
    Move partner;
    bool relabel;
};

// The displacement bijection between a near-side alpha parent's move and its
// far-side partner's move.  Exactly the same-site child pairs are relabelled
// sigma; every other pair is a mirror-image pair and stays alpha.
inline PairedMove paired_move(CouplingKind kind, bool synthetic, Move m0) {
    switch (kind) {
        case CouplingKind::AxisShift1:
            if (synthetic) {
                switch (m0) {
                    case Move::E: return {Move::Stay, true}; // both children on V_1
                    case Move::Stay: return {Move::W, true}; // both children on V_0
                    case Move::W: return {Move::E, false};
                    case Move::N: return {Move::N, false};
                    default: return {Move::S, false};
                }
            }
            switch (m0) {
                case Move::Stay: return {Move::Stay, false};
                case Move::E: return {Move::W, false};
                case Move::W: return {Move::E, false};
                case Move::N: return {Move::N, false};
                default: return {Move::S, false};
            }
        case CouplingKind::DiagShift:
            // The mirror conjugates the compass: N<->W and E<->S.  From the
            // zero diagonal, the N and E children land on the axis diagonal
            // and are relabelled.
            switch (m0) {
                case Move::N: return {Move::W, synthetic};
                case Move::E: return {Move::S, synthetic};
                case Move::W: return {Move::N, false};
                case Move::S: return {Move::E, false};
                default: throw std::logic_error("paired_move: Stay is not a strict-kernel move");
            }
        default: // AxisShift2
            switch (m0) {
                case Move::E: return {Move::W, synthetic}; // from V_0: both children on V_1
                case Move::W: return {Move::E, false};
                case Move::N: return {Move::N, false};
                case Move::S: return {Move::S, false};
                default: throw std::logic_error("paired_move: Stay is not a strict-kernel move");
            }
    }
}

struct CoupledState {
    CouplingKind kind = CouplingKind::AxisShift1;
    double pi = 0.0; // survival probability (meaningful for AxisShift2)
    std::uint64_t t = 0;
    ParticleField<2> sigma0, alpha0, sigma1, alpha1;
};

inline ParticleField<2> marginal_of(const CoupledState& state, int which) {
    return which == 0 ? field_sum(state.sigma0, state.alpha0)
                      : field_sum(state.sigma1, state.alpha1);
}

struct invariant_error : std::runtime_error {
    explicit invariant_error(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline std::string field_str(const ParticleField<2>& f) {
    std::ostringstream os;
    os << "{";
    bool first = true;
    for (const auto& [site, count] : f.entries) {
        if (!first) os << ", ";
        first = false;
        os << site_str(site) << ":" << count;
    }
    os << "}";
    return os.str();
}

} // namespace detail

inline std::string dump_state(const CoupledState& s) {
    std::ostringstream os;
    os << "kind=" << coupling_name(s.kind) << " pi=" << s.pi << " t=" << s.t
       << "\n  sigma0=" << detail::field_str(s.sigma0) << "\n  alpha0=" << detail::field_str(s.alpha0)
       << "\n  sigma1=" << detail::field_str(s.sigma1) << "\n  alpha1=" << detail::field_str(s.alpha1);
    return os.str();
}

// The four exact per-step invariants.  Throws invariant_error with a full
// state dump on the first violation.
inline void check_invariants(const CoupledState& s) {
    auto fail = [&s](const std::string& what) {
        throw invariant_error("coupling invariant violated: " + what + "\n" + dump_state(s));
    };
    // Decomposition: each side's marginal is the pointwise sum sigma + alpha,
    // which is meaningful only if all four summand representations are sound.
    if (!s.sigma0.well_formed() || !s.alpha0.well_formed() || !s.sigma1.well_formed() ||
        !s.alpha1.well_formed())
        fail("decomposition: malformed field representation");
    // Sigma equality.
    if (!(s.sigma0 == s.sigma1)) fail("sigma-equality: sigma0 != sigma1");
    // Alpha support: near-side alpha only on the near half, far-side only on
    // the far half (each also vanishes on the axis).
    for (const auto& [site, count] : s.alpha0.entries) {
        (void)count;
        if (half_space(s.kind, site) != HalfSpace::Near)
            fail("alpha-support: alpha0 off the near half-space at " + site_str(site));
    }
    for (const auto& [site, count] : s.alpha1.entries) {
        (void)count;
        if (half_space(s.kind, site) != HalfSpace::Far)
            fail("alpha-support: alpha1 off the far half-space at " + site_str(site));
    }
    // Alpha mirror: alpha1 is exactly the mirror image of alpha0.
    FieldBuilder<2> mirrored;
    mirrored.raw.reserve(s.alpha0.entries.size());
    for (const auto& [site, count] : s.alpha0.entries) mirrored.add(mirror_site(s.kind, site), count);
    if (!(mirrored.build() == s.alpha1)) fail("alpha-mirror: alpha1 != mirror(alpha0)");
}

inline CoupledState init_coupled(CouplingKind kind, double pi = 0.0) {
    if (pi < 0.0 || pi > 1.0) throw std::invalid_argument("init_coupled: pi outside [0,1]");
    CoupledState s;
    s.kind = kind;
    s.pi = pi;
    s.t = 0;
    s.alpha0 = ParticleField<2>::single(coupled_start(kind, 0));
    s.alpha1 = ParticleField<2>::single(coupled_start(kind, 1));
    check_invariants(s);
    return s;
}

// One synchronized generation of the coupled pair.  Sigma pairs (matched
// one-to-one at identical sites) breed identically; alpha pairs (matched
// through the mirror) breed synthetically on the axis-adjacent line and
// antithetically deeper inside, with relabelled children becoming sigma on
// both sides.  Draw order is fixed: sigma pairs in site-lexicographic order,
// then alpha pairs in alpha0-site-lexicographic order; per pair one offspring
// count, one placement draw per child, then (Generalized kernel) one shared
// survival draw.
template <class Rng>
CoupledState coupled_step(const CoupledState& state, const OffspringLaw& law, Rng& rng) {
    const StepKernel kernel = coupling_kernel(state.kind, state.pi);
    std::uint32_t n_moves = 0;
    const Move* moves = kernel_moves(kernel.kind, n_moves);
    const bool generalized = kernel.kind == KernelKind::Generalized;

    FieldBuilder<2> s0, a0, s1, a1;
    // (a) identical pairs: by sigma-equality the two sigma fields agree, so
    // pairs are formed by walking one of them.
    for (const auto& [site, count] : state.sigma0.entries) {
        for (std::uint64_t j = 0; j < count; ++j) {
            const std::uint32_t c = law.sample(rng);
            for (std::uint32_t k = 0; k < c; ++k) {
                const Site2 child = apply_move(site, moves[rng.uniform_below(n_moves)]);
                s0.add(child);
                s1.add(child);
            }
            if (generalized && rng.bernoulli(state.pi)) {
                s0.add(site);
                s1.add(site);
            }
        }
    }
    // (b)+(c) mirror pairs: each alpha0 particle is paired with an alpha1
    // particle at the mirror site (the pairing exists by the alpha-mirror
    // invariant, checked after every step).
    for (const auto& [site0, count] : state.alpha0.entries) {
        const Site2 site1 = mirror_site(state.kind, site0);
        const bool synthetic = synthetic_parent(state.kind, site0);
        for (std::uint64_t j = 0; j < count; ++j) {
            const std::uint32_t c = law.sample(rng);
            for (std::uint32_t k = 0; k < c; ++k) {
                const Move m0 = moves[rng.uniform_below(n_moves)];
                const PairedMove pm = paired_move(state.kind, synthetic, m0);
                const Site2 child0 = apply_move(site0, m0);
                const Site2 child1 = apply_move(site1, pm.partner);
                if (pm.relabel) {
                    if (!(child0 == child1))
                        throw std::logic_error("coupled_step: relabelled pair not at one site");
                    s0.add(child0);
                    s1.add(child1);
                } else {
                    if (!(mirror_site(state.kind, child0) == child1))
                        throw std::logic_error("coupled_step: alpha pair not mirror images");
                    a0.add(child0);
                    a1.add(child1);
                }
            }
            if (generalized && rng.bernoulli(state.pi)) {
                a0.add(site0);
                a1.add(site1);
            }
        }
    }
    CoupledState next;
    next.kind = state.kind;
    next.pi = state.pi;
    next.t = state.t + 1;
    next.sigma0 = s0.build();
    next.alpha0 = a0.build();
    next.sigma1 = s1.build();
    next.alpha1 = a1.build();
    check_invariants(next);
    return next;
}

namespace detail {

// Boundary component sets for the hitting decomposition, all on the standard
// observation box. For the axis kinds, T_i is the far-side column of side i's
// own escape direction and U is the top/bottom strips; for DiagShift, T_0 is
// the South+West sides and T_1 the North+East sides (corners belong to every
// side containing them).
inline bool t_component_contains(CouplingKind kind, int side, const BoxGeometry<2>& box,
                                 const Site2& s) {
    if (!box.contains(s)) return false;
    if (kind == CouplingKind::DiagShift)
        return side == 0 ? (s[0] == -box.n || s[1] == -box.n) : (s[0] == box.n || s[1] == box.n);
    return side == 0 ? s[0] == -box.n : s[0] == box.n;
}

inline bool u_component_contains(const BoxGeometry<2>& box, const Site2& s) {
    return box.contains(s) && (s[1] == box.n || s[1] == -box.n);
}

} // namespace detail

struct CoupledHittingResult {
    HittingTimes h0, h1;
    std::uint64_t final_t = 0;
    // True when the run ended by global extinction (both marginals empty);
    // unobserved components are then genuinely never-hit rather than censored.
    bool extinct = false;
};

// Runs the coupling until both hitting times are resolved (or extinction,
// horizon, cap), recording the component times S (shared), T_i, U_i and
// returning tau_i = min(S, T_i, U_i) per side.  The decomposition is
// verified against the direct definition (first marginal contact with the
// boundary) on every replica; the claimed ordering tau1 <= tau0 is NOT
// assumed or asserted here — it is what campaigns test.
template <class Rng>
CoupledHittingResult run_coupled_hitting(CouplingKind kind, double pi, const BoxGeometry<2>& box,
                                         const OffspringLaw& law, std::uint64_t horizon,
                                         std::uint64_t cap, Rng& rng) {
    if (box.n < 2 && kind != CouplingKind::AxisShift1)
        throw std::invalid_argument("run_coupled_hitting: need n >= 2 for this kind");
    if (box.n < 1) throw std::invalid_argument("run_coupled_hitting: need n >= 1");
    const bool has_u = kind != CouplingKind::DiagShift;
    CoupledState state = init_coupled(kind, pi);

    CoupledHittingResult out;
    out.h0.has_components = out.h1.has_components = true;
    std::uint64_t S = kNever, T0 = kNever, T1 = kNever, U0 = kNever, U1 = kNever;
    std::uint64_t direct0 = kNever, direct1 = kNever;
    out.h0.started_on_boundary = box.boundary_contains(coupled_start(kind, 0));
    out.h1.started_on_boundary = box.boundary_contains(coupled_start(kind, 1));

    for (std::uint64_t t = 0;; ++t) {
        const ParticleField<2> m0 = marginal_of(state, 0);
        const ParticleField<2> m1 = marginal_of(state, 1);
        out.h0.max_population = std::max(out.h0.max_population, m0.total());
        out.h1.max_population = std::max(out.h1.max_population, m1.total());

        if (S == kNever)
            for (const auto& e : state.sigma0.entries)
                if (box.boundary_contains(e.first)) {
                    S = t;
                    break;
                }
        bool u0_now = false, u1_now = false;
        for (const auto& e : state.alpha0.entries) {
            if (T0 == kNever && detail::t_component_contains(kind, 0, box, e.first)) T0 = t;
            if (has_u && U0 == kNever && detail::u_component_contains(box, e.first)) {
                U0 = t;
                u0_now = true;
            }
        }
        for (const auto& e : state.alpha1.entries) {
            if (T1 == kNever && detail::t_component_contains(kind, 1, box, e.first)) T1 = t;
            if (has_u && U1 == kNever && detail::u_component_contains(box, e.first)) {
                U1 = t;
                u1_now = true;
            }
        }
        // Mirror sharing of the strip component: a far-side strip contact
        // forces a simultaneous near-side one (the mirror pulls far-half strip
        // sites into the box).  A near-side strip contact whose mirror falls
        // outside the box can lead U0 strictly, but only when the far side
        // already escaped through its T column earlier.
        if (has_u) {
            if (u1_now && !(U0 <= U1))
                throw invariant_error("strip component: U1 observed before U0\n" + dump_state(state));
            if (u0_now && !u1_now && U1 == kNever && !(T1 < U0))
                throw invariant_error(
                    "strip component: U0 observed without U1 and without earlier T1\n" +
                    dump_state(state));
        }
        if (direct0 == kNever)
            for (const auto& e : m0.entries)
                if (box.boundary_contains(e.first)) {
                    direct0 = t;
                    break;
                }
        if (direct1 == kNever)
            for (const auto& e : m1.entries)
                if (box.boundary_contains(e.first)) {
                    direct1 = t;
                    break;
                }
        const std::uint64_t tau0 = std::min(S, std::min(T0, U0));
        const std::uint64_t tau1 = std::min(S, std::min(T1, U1));
        if (tau0 != direct0 || tau1 != direct1)
            throw invariant_error("hitting decomposition: min(S,T,U) disagrees with direct contact\n" +
                                  dump_state(state));

        const bool extinct = m0.empty() && m1.empty();
        if ((tau0 != kNever && tau1 != kNever) || extinct || t == horizon ||
            m0.total() > cap || m1.total() > cap) {
            out.h0.S = out.h1.S = S;
            out.h0.T = T0;
            out.h1.T = T1;
            out.h0.U = U0;
            out.h1.U = U1;
            out.h0.tau = tau0;
            out.h1.tau = tau1;
            const bool ran_out = t == horizon || m0.total() > cap || m1.total() > cap;
            if (tau0 == kNever && !extinct && ran_out)
                out.h0.censored = (t == horizon) ? Censor::Horizon : Censor::Cap;
            if (tau1 == kNever && !extinct && ran_out)
                out.h1.censored = (t == horizon) ? Censor::Horizon : Censor::Cap;
            out.final_t = t;
            out.extinct = extinct;
            return out;
        }
        state = coupled_step(state, law, rng);
    }
}

// Pathwise even-diagonal count ordering on AxisShift2 states (free
// evolution): at every probe (x,y) with x >= 2, y >= 0 and x+y even, the
// near process's count equals the shared sigma count and is dominated by the
// far process's count.  Checked exactly; throws on the first failure.
inline void check_even_diagonal_ordering(const CoupledState& s) {
    if (s.kind != CouplingKind::AxisShift2)
        throw std::invalid_argument("check_even_diagonal_ordering: AxisShift2 states only");
    const ParticleField<2> m0 = marginal_of(s, 0);
    const ParticleField<2> m1 = marginal_of(s, 1);
    auto in_region = [](const Site2& site) {
        return site[0] >= 2 && site[1] >= 0 && ((site[0] + site[1]) & 1) == 0;
    };
    auto check_site = [&](const Site2& site) {
        const std::uint64_t c_m0 = m0.count_at(site);
        const std::uint64_t c_s0 = s.sigma0.count_at(site);
        const std::uint64_t c_s1 = s.sigma1.count_at(site);
        const std::uint64_t c_m1 = m1.count_at(site);
        if (!(c_m0 == c_s0 && c_s0 == c_s1 && c_s1 <= c_m1))
            throw invariant_error("even-diagonal ordering violated at " + site_str(site) + ": " +
                                  std::to_string(c_m0) + " = " + std::to_string(c_s0) + " = " +
                                  std::to_string(c_s1) + " <= " + std::to_string(c_m1) + "\n" +
                                  dump_state(s));
    };
    for (const auto& e : m0.entries)
        if (in_region(e.first)) check_site(e.first);
    for (const auto& e : m1.entries)
        if (in_region(e.first)) check_site(e.first);
}

} // namespace brw
