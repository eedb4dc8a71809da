#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "brw/config.hpp"
#include "brw/coupling.hpp"
#include "brw/oracle.hpp"
#include "brw/parallel.hpp"
#include "brw/report.hpp"
#include "brw/rng.hpp"
#include "brw/simulator.hpp"
#include "brw/stats.hpp"

namespace brw {

// ---------------------------------------------------------------------------
// Option parsing shared by the CLI and the config layer.
// ---------------------------------------------------------------------------

inline std::vector<std::string> split_list(const std::string& text, char sep) {
    std::vector<std::string> out;
    std::size_t pos = 0;
    while (true) {
        const std::size_t next = text.find(sep, pos);
        out.push_back(text.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
        if (next == std::string::npos) break;
        pos = next + 1;
    }
    return out;
}

inline std::vector<double> parse_double_list(const std::string& text, const std::string& ctx) {
    std::vector<double> out;
    for (const std::string& piece : split_list(text, ',')) {
        const std::string tok = detail::trim(piece);
        double v = 0.0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw ConfigError(ctx + ": expected comma-separated numbers, got '" + text + "'");
        out.push_back(v);
    }
    return out;
}

inline std::vector<int> parse_int_list(const std::string& text, const std::string& ctx) {
    std::vector<int> out;
    for (const std::string& piece : split_list(text, ',')) {
        const std::string tok = detail::trim(piece);
        int v = 0;
        auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size())
            throw ConfigError(ctx + ": expected comma-separated integers, got '" + text + "'");
        out.push_back(v);
    }
    return out;
}

inline KernelKind parse_kernel_kind(const std::string& name) {
    if (name == "lazy") return KernelKind::Lazy;
    if (name == "strict") return KernelKind::Strict;
    if (name == "generalized") return KernelKind::Generalized;
    throw ConfigError("unknown kernel '" + name + "' (expected lazy, strict, or generalized)");
}

inline CouplingKind parse_coupling_kind(const std::string& name) {
    if (name == "AxisShift1" || name == "axis-shift-1") return CouplingKind::AxisShift1;
    if (name == "DiagShift" || name == "diag-shift") return CouplingKind::DiagShift;
    if (name == "AxisShift2" || name == "axis-shift-2") return CouplingKind::AxisShift2;
    throw ConfigError("unknown coupling kind '" + name +
                      "' (expected AxisShift1, DiagShift, or AxisShift2)");
}

// Builds the offspring law from config keys: `law` = comma-separated
// probabilities (P_0,P_1,...), `pi` = in-place survival (generalized kernel).
inline OffspringLaw law_from_config(const Config& cfg, double default_pi = 0.0) {
    const std::vector<double> probs =
        parse_double_list(cfg.get_string("law", "0.5,0,0.5"), "key 'law'");
    const double pi = cfg.get_double("pi", default_pi);
    try {
        return OffspringLaw::make(probs, pi);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("key 'law': ") + e.what());
    }
}

inline std::string probs_str(const std::vector<double>& probs) {
    std::string out;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (i) out += ",";
        out += fmt_double(probs[i]);
    }
    return out;
}

inline Json config_json(const Config& cfg) {
    Json out = Json::object();
    for (const auto& [key, value] : cfg.items()) out[key] = value;
    return out;
}

inline Json verdict_json(const DominanceVerdict& v) {
    return Json{{"claim", v.claim},
                {"status", dominance_name(v.status)},
                {"max_violation", v.max_violation},
                {"band", v.band},
                {"alpha", v.alpha},
                {"m_x", v.m_x},
                {"m_y", v.m_y}};
}

inline Json chi_square_json(const ChiSquareVerdict& v) {
    return Json{{"statistic", v.statistic}, {"dof", v.dof},     {"p_value", v.p_value},
                {"alpha", v.alpha},         {"pass", v.pass},   {"bins", v.bins}};
}

inline bool any_violated(const std::vector<DominanceVerdict>& verdicts) {
    for (const auto& v : verdicts)
        if (v.status == Dominance::Violated) return true;
    return false;
}

// ---------------------------------------------------------------------------
// Plain-simulator campaigns (replica-indexed, deterministic given seed).
// ---------------------------------------------------------------------------

inline std::vector<HittingTimes> run_direct_hitting_campaign(const Site2& start,
                                                             const BoxGeometry<2>& box,
                                                             StepKernel kernel,
                                                             const OffspringLaw& law,
                                                             std::uint64_t horizon, std::uint64_t cap,
                                                             std::uint64_t replicas,
                                                             std::uint64_t seed, unsigned threads) {
    return run_replicas<HittingTimes>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, i);
        return run_hitting(start, box, kernel, law, horizon, cap, rng);
    });
}

inline std::vector<std::uint64_t> sample_direct_population(const Site2& start, StepKernel kernel,
                                                           const OffspringLaw& law, std::uint64_t t,
                                                           std::uint64_t replicas, std::uint64_t seed,
                                                           unsigned threads) {
    return run_replicas<std::uint64_t>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, i);
        ParticleField<2> f = ParticleField<2>::single(start);
        for (std::uint64_t s = 0; s < t; ++s) f = step_field(f, kernel, law, rng);
        return f.total();
    });
}

inline std::vector<std::uint64_t> sample_coupled_population(CouplingKind kind, double pi,
                                                            const OffspringLaw& law, std::uint64_t t,
                                                            int side, std::uint64_t replicas,
                                                            std::uint64_t seed, unsigned threads) {
    return run_replicas<std::uint64_t>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, i);
        CoupledState st = init_coupled(kind, pi);
        for (std::uint64_t s = 0; s < t; ++s) st = coupled_step(st, law, rng);
        return marginal_of(st, side).total();
    });
}

// One free run per replica, counts read at every probe (shared-run samples
// are fine for the marginal claims tested downstream).
inline std::vector<std::vector<std::uint64_t>> sample_site_counts(
    const Site2& start, StepKernel kernel, const OffspringLaw& law, std::uint64_t t,
    const std::vector<Site2>& probes, std::uint64_t cap, std::uint64_t replicas, std::uint64_t seed,
    unsigned threads, std::uint64_t stream_base = 0) {
    return run_replicas<std::vector<std::uint64_t>>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, stream_base + i);
        ParticleField<2> f = ParticleField<2>::single(start);
        for (std::uint64_t s = 0; s < t; ++s) {
            f = step_field(f, kernel, law, rng);
            if (f.total() > cap) throw cap_exceeded(f.total());
        }
        std::vector<std::uint64_t> out(probes.size());
        for (std::size_t k = 0; k < probes.size(); ++k) out[k] = f.count_at(probes[k]);
        return out;
    });
}

inline std::vector<std::vector<std::uint64_t>> sample_ct_counts(const Site2& start, double lambda,
                                                                double t,
                                                                const std::vector<Site2>& probes,
                                                                std::uint64_t cap,
                                                                std::uint64_t replicas,
                                                                std::uint64_t seed, unsigned threads,
                                                                std::uint64_t stream_base = 0) {
    return run_replicas<std::vector<std::uint64_t>>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, stream_base + i);
        const ParticleField<2> f = simulate_ct(start, lambda, t, cap, rng);
        std::vector<std::uint64_t> out(probes.size());
        for (std::size_t k = 0; k < probes.size(); ++k) out[k] = f.count_at(probes[k]);
        return out;
    });
}

// ---------------------------------------------------------------------------
// Confined coupling campaign: hitting decomposition per replica plus sample
// assembly for the dominance verdicts.
// ---------------------------------------------------------------------------

struct CoupleCampaign {
    CouplingKind kind = CouplingKind::AxisShift1;
    double pi = 0.0;
    int n = 0;
    std::uint64_t horizon = 0, cap = 0, replicas = 0, seed = 0;
    std::vector<CoupledHittingResult> rows;
    EmpiricalSample tau0, tau1, comp_t0, comp_t1, comp_u0, comp_u1, comp_s;
    std::uint64_t tau0_observed = 0, order_exceptions = 0, extinct = 0;
    std::uint64_t horizon_censored0 = 0, horizon_censored1 = 0;
    std::uint64_t cap_censored0 = 0, cap_censored1 = 0;
    std::uint64_t max_population = 0;
};

namespace detail {

// Observed -> finite value; unobserved at an extinction stop -> genuinely
// never (+inf); unobserved at any other stop -> censored.
inline void add_time_sample(EmpiricalSample& s, std::uint64_t value, bool never) {
    if (value != kNever)
        s.add(static_cast<double>(value));
    else if (never)
        s.add(std::numeric_limits<double>::infinity());
    else
        s.add_censored();
}

} // namespace detail

inline CoupleCampaign run_couple_campaign(CouplingKind kind, double pi, int n,
                                          const OffspringLaw& law, std::uint64_t horizon,
                                          std::uint64_t cap, std::uint64_t replicas,
                                          std::uint64_t seed, unsigned threads) {
    CoupleCampaign c;
    c.kind = kind;
    c.pi = pi;
    c.n = n;
    c.horizon = horizon;
    c.cap = cap;
    c.replicas = replicas;
    c.seed = seed;
    const BoxGeometry<2> box{n};
    c.rows = run_replicas<CoupledHittingResult>(replicas, threads, [&](std::uint64_t i) {
        Philox rng(seed, i);
        return run_coupled_hitting(kind, pi, box, law, horizon, cap, rng);
    });
    for (const CoupledHittingResult& r : c.rows) {
        detail::add_time_sample(c.tau0, r.h0.tau, r.h0.censored == Censor::None);
        detail::add_time_sample(c.tau1, r.h1.tau, r.h1.censored == Censor::None);
        detail::add_time_sample(c.comp_t0, r.h0.T, r.extinct);
        detail::add_time_sample(c.comp_t1, r.h1.T, r.extinct);
        detail::add_time_sample(c.comp_u0, r.h0.U, r.extinct);
        detail::add_time_sample(c.comp_u1, r.h1.U, r.extinct);
        detail::add_time_sample(c.comp_s, r.h0.S, r.extinct);
        if (r.h0.tau != kNever) {
            ++c.tau0_observed;
            if (!(r.h1.tau != kNever && r.h1.tau <= r.h0.tau)) ++c.order_exceptions;
        }
        c.extinct += r.extinct ? 1 : 0;
        c.horizon_censored0 += r.h0.censored == Censor::Horizon;
        c.horizon_censored1 += r.h1.censored == Censor::Horizon;
        c.cap_censored0 += r.h0.censored == Censor::Cap;
        c.cap_censored1 += r.h1.censored == Censor::Cap;
        c.max_population =
            std::max({c.max_population, r.h0.max_population, r.h1.max_population});
    }
    return c;
}

// Dominance verdicts for the hitting time and its components.  Orientation
// follows the coupling mechanism: the far start leads tau and T, the near
// start leads the strip component U, and S is shared (trivial self-claim for
// completeness).
inline std::vector<DominanceVerdict> couple_verdicts(const CoupleCampaign& c, double alpha) {
    std::vector<DominanceVerdict> out;
    out.push_back(dominance_test(c.tau0, c.tau1, alpha, "tau0", "tau1"));
    out.push_back(dominance_test(c.comp_t0, c.comp_t1, alpha, "T0", "T1"));
    out.push_back(dominance_test(c.comp_u1, c.comp_u0, alpha, "U1", "U0"));
    out.push_back(dominance_test(c.comp_s, c.comp_s, alpha, "S", "S"));
    return out;
}

// ---------------------------------------------------------------------------
// Free coupled evolution: invariant soak and the even-diagonal ordering.
// ---------------------------------------------------------------------------

struct FreeCoupleOutcome {
    std::uint64_t capped = 0;       // replicas stopped early by the cap
    std::uint64_t extinct = 0;      // replicas that died out before the last step
    std::uint64_t max_population = 0;
    std::uint64_t steps_executed = 0; // total generations stepped across replicas
};

inline FreeCoupleOutcome run_free_couple_campaign(CouplingKind kind, double pi,
                                                  const OffspringLaw& law, std::uint64_t steps,
                                                  std::uint64_t cap, std::uint64_t replicas,
                                                  std::uint64_t seed, unsigned threads,
                                                  bool even_diagonal_check = false) {
    struct PerReplica {
        std::uint64_t capped = 0, extinct = 0, max_population = 0, steps_executed = 0;
    };
    std::vector<PerReplica> stats =
        run_replicas<PerReplica>(replicas, threads, [&](std::uint64_t i) {
            Philox rng(seed, i);
            PerReplica st;
            CoupledState state = init_coupled(kind, pi);
            while (true) {
                const std::uint64_t pop =
                    std::max(marginal_of(state, 0).total(), marginal_of(state, 1).total());
                st.max_population = std::max(st.max_population, pop);
                if (even_diagonal_check && state.t % 2 == 0) check_even_diagonal_ordering(state);
                if (pop == 0) {
                    st.extinct = 1;
                    break;
                }
                if (state.t == steps) break;
                if (pop > cap) {
                    st.capped = 1;
                    break;
                }
                state = coupled_step(state, law, rng);
                ++st.steps_executed;
            }
            return st;
        });
    FreeCoupleOutcome out;
    for (const PerReplica& st : stats) {
        out.capped += st.capped;
        out.extinct += st.extinct;
        out.max_population = std::max(out.max_population, st.max_population);
        out.steps_executed += st.steps_executed;
    }
    return out;
}

// ---------------------------------------------------------------------------
// Oracle-grid audits.
// ---------------------------------------------------------------------------

struct MonotonicityAudit {
    std::uint64_t pairs_checked = 0, violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity(); // min of p(b) - p(a)
    std::string worst_pair;
    std::uint64_t symmetry_checked = 0, symmetry_violations = 0;
    double worst_symmetry = 0.0; // max |p(s) - p(|s|)|
    bool vacuous = false;        // no comparable interior pair exists (n = 1)
};

// Escape probabilities must be componentwise monotone on the positive-orthant
// interior; the reflection symmetries of the box extend the conclusion to the
// whole grid, so the audit also checks p(s) == p(|s|) up to tolerance.
inline MonotonicityAudit audit_grid_monotonicity(const ScalarGrid<2>& grid, double tol) {
    MonotonicityAudit a;
    const BoxGeometry<2>& box = grid.box;
    std::vector<Site2> orthant;
    for (std::int32_t x = 0; x < box.n; ++x)
        for (std::int32_t y = 0; y < box.n; ++y) orthant.push_back({x, y});
    for (const Site2& lo : orthant)
        for (const Site2& hi : orthant) {
            if (lo == hi || !leq_partial(lo, hi)) continue;
            ++a.pairs_checked;
            const double margin = grid.at(hi) - grid.at(lo);
            if (margin < a.worst_margin) {
                a.worst_margin = margin;
                a.worst_pair = site_str(lo) + "->" + site_str(hi);
            }
            if (margin < -tol) ++a.violations;
        }
    const std::uint64_t nsites = box.site_count();
    for (std::uint64_t i = 0; i < nsites; ++i) {
        const Site2 s = box.site_at(i);
        const Site2 abs_s{std::abs(s[0]), std::abs(s[1])};
        if (s == abs_s) continue;
        ++a.symmetry_checked;
        const double diff = std::abs(grid.at(s) - grid.at(abs_s));
        a.worst_symmetry = std::max(a.worst_symmetry, diff);
        if (diff > tol) ++a.symmetry_violations;
    }
    a.vacuous = a.pairs_checked == 0;
    if (a.vacuous) a.worst_margin = 0.0;
    return a;
}

struct CdfAudit {
    std::uint64_t checked = 0, violations = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    std::string worst_at;
};

// First-hit CDF dominance F_t(y) >= F_t(x) - tol for a single ordered pair.
inline void audit_cdf_pair(CdfAudit& a, const TimeGrid<2>& cdf, const Site2& x, const Site2& y,
                           double tol) {
    for (std::uint64_t t = 0; t <= cdf.t_max; ++t) {
        ++a.checked;
        const double margin = cdf.at(t, y) - cdf.at(t, x);
        if (margin < a.worst_margin) {
            a.worst_margin = margin;
            a.worst_at = site_str(x) + "->" + site_str(y) + "@t=" + std::to_string(t);
        }
        if (margin < -tol) ++a.violations;
    }
}

// All comparable positive-orthant interior pairs, every time slice.
inline CdfAudit audit_cdf_dominance_all(const TimeGrid<2>& cdf, double tol) {
    CdfAudit a;
    const BoxGeometry<2>& box = cdf.box;
    std::vector<Site2> orthant;
    for (std::int32_t x = 0; x < box.n; ++x)
        for (std::int32_t y = 0; y < box.n; ++y) orthant.push_back({x, y});
    for (const Site2& lo : orthant)
        for (const Site2& hi : orthant) {
            if (lo == hi || !leq_partial(lo, hi)) continue;
            audit_cdf_pair(a, cdf, lo, hi, tol);
        }
    if (a.checked == 0) a.worst_margin = 0.0;
    return a;
}

// ---------------------------------------------------------------------------
// Continuous-time corollary campaign: dominance pairs plus the discrete
// embedding ladder.
// ---------------------------------------------------------------------------

struct LadderRung {
    int N = 0;
    double pi_n = 0.0;
    std::uint64_t steps = 0;     // 2*floor(N*t) discrete generations
    double exact_embedded = 0.0; // mean-field count at the doubled probe
    double zeta_mean = 0.0;      // continuous-time oracle count at the probe
    double gap = 0.0;            // |exact_embedded - zeta_mean|
    bool mc_ran = false;
    std::uint64_t mc_replicas = 0, mc_cap_hits = 0;
    double mc_mean = 0.0, mc_stderr = 0.0;
};

struct CorollaryPairReport {
    Site2 x{0, 0}, y{0, 0};
    bool skipped = false;
    std::string note;
    DominanceVerdict farther_dominated; // count(y) <=_st count(x)
    DominanceVerdict reverse;           // count(x) <=_st count(y), for visibility
};

struct CorollaryCampaign {
    double lambda = 0.0, t = 0.0;
    Site2 probe{0, 0};
    std::uint64_t replicas = 0, ladder_replicas = 0, seed = 0;
    double alpha = 0.01;
    std::vector<LadderRung> ladder;
    bool gap_monotone_shrinking = false;
    std::vector<CorollaryPairReport> pairs;
};

inline CorollaryCampaign run_corollary_campaign(double lambda, double t, const Site2& probe,
                                                const std::vector<int>& ladder_ns,
                                                const std::vector<std::pair<Site2, Site2>>& pairs,
                                                std::uint64_t replicas,
                                                std::uint64_t ladder_replicas, std::uint64_t cap,
                                                std::uint64_t seed, unsigned threads, double alpha) {
    CorollaryCampaign c;
    c.lambda = lambda;
    c.t = t;
    c.probe = probe;
    c.replicas = replicas;
    c.ladder_replicas = ladder_replicas;
    c.seed = seed;
    c.alpha = alpha;

    // Continuous-time dominance pairs: counts at both sites from shared runs.
    if (!pairs.empty()) {
        std::vector<Site2> sites;
        for (const auto& [x, y] : pairs) {
            sites.push_back(x);
            sites.push_back(y);
        }
        std::sort(sites.begin(), sites.end());
        sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
        const std::vector<std::vector<std::uint64_t>> counts =
            sample_ct_counts({0, 0}, lambda, t, sites, cap, replicas, seed, threads);
        auto site_index = [&sites](const Site2& s) {
            return static_cast<std::size_t>(
                std::lower_bound(sites.begin(), sites.end(), s) - sites.begin());
        };
        for (const auto& [x, y] : pairs) {
            CorollaryPairReport rep;
            rep.x = x;
            rep.y = y;
            if (!leq_partial(x, y)) {
                rep.skipped = true;
                rep.note = "pair is not componentwise ordered";
                c.pairs.push_back(rep);
                continue;
            }
            EmpiricalSample sx, sy;
            const std::size_t ix = site_index(x), iy = site_index(y);
            for (const auto& row : counts) {
                sx.add(static_cast<double>(row[ix]));
                sy.add(static_cast<double>(row[iy]));
            }
            const std::string lx = "count" + site_str(x), ly = "count" + site_str(y);
            rep.farther_dominated = dominance_test(sx, sy, alpha, lx, ly);
            rep.reverse = dominance_test(sy, sx, alpha, ly, lx);
            c.pairs.push_back(rep);
        }
    }

    // Embedding ladder: exact mean-field count of the discrete family at the
    // doubled probe after 2*floor(N*t) generations vs the continuous-time
    // oracle at the probe.  Monte Carlo estimates are attempted alongside but
    // degrade gracefully (per-rung) when the population cap bites.
    const Site2 doubled{2 * probe[0], 2 * probe[1]};
    const std::int32_t ct_radius = static_cast<std::int32_t>(
        linf_norm(probe) + std::max(15.0, std::ceil(3.0 * (1.0 + 4.0 * lambda) * t)));
    const ScalarGrid<2> zeta = expected_counts_ct(Site2{0, 0}, lambda, t, ct_radius);
    for (std::size_t k = 0; k < ladder_ns.size(); ++k) {
        const int N = ladder_ns[k];
        LadderRung rung;
        rung.N = N;
        const OffspringLaw law = bernoulli_sum_law(lambda, N);
        rung.pi_n = law.survival;
        rung.steps = 2 * static_cast<std::uint64_t>(std::floor(N * t));
        const std::int32_t radius = static_cast<std::int32_t>(rung.steps);
        const ScalarGrid<2> mf = expected_counts_discrete<2>(
            {0, 0}, StepKernel::generalized(law.survival), law.mean(), rung.steps,
            std::max<std::int32_t>(radius, linf_norm(doubled) + 1));
        rung.exact_embedded = mf.at(doubled);
        rung.zeta_mean = zeta.at(probe);
        rung.gap = std::abs(rung.exact_embedded - rung.zeta_mean);
        if (ladder_replicas > 0) {
            rung.mc_ran = true;
            rung.mc_replicas = ladder_replicas;
            const std::uint64_t stream_base = (k + 1) << 32;
            std::vector<double> vals =
                run_replicas<double>(ladder_replicas, threads, [&](std::uint64_t i) {
                    Philox rng(seed, stream_base + i);
                    try {
                        return static_cast<double>(site_count_path(
                            Site2{0, 0}, StepKernel::generalized(law.survival), law,
                            rung.steps, doubled, cap, rng));
                    } catch (const cap_exceeded&) {
                        return -1.0; // marked, counted below
                    }
                });
            double sum = 0.0, sumsq = 0.0;
            std::uint64_t ok = 0;
            for (double v : vals) {
                if (v < 0.0) {
                    ++rung.mc_cap_hits;
                    continue;
                }
                sum += v;
                sumsq += v * v;
                ++ok;
            }
            if (ok > 1) {
                rung.mc_mean = sum / static_cast<double>(ok);
                const double var =
                    (sumsq - sum * sum / static_cast<double>(ok)) / static_cast<double>(ok - 1);
                rung.mc_stderr = std::sqrt(std::max(var, 0.0) / static_cast<double>(ok));
            }
        }
        c.ladder.push_back(rung);
    }
    c.gap_monotone_shrinking = c.ladder.size() >= 2;
    for (std::size_t k = 1; k < c.ladder.size(); ++k)
        if (!(c.ladder[k].gap < c.ladder[k - 1].gap)) c.gap_monotone_shrinking = false;
    return c;
}

// ---------------------------------------------------------------------------
// Free-evolution site-count dominance campaign.
// ---------------------------------------------------------------------------

struct CountsPairReport {
    Site2 x{0, 0}, y{0, 0};
    bool skipped = false;
    std::string note;
    DominanceVerdict verdict; // count(y) <=_st count(x)
    double mc_mean_x = 0.0, mc_mean_y = 0.0;
    double oracle_x = 0.0, oracle_y = 0.0;
};

struct CountsCampaign {
    Site2 start{0, 0};
    std::uint64_t t = 0, replicas = 0, seed = 0;
    double alpha = 0.01;
    std::vector<CountsPairReport> pairs;
};

inline CountsCampaign run_counts_campaign(const Site2& start, StepKernel kernel,
                                          const OffspringLaw& law, std::uint64_t t,
                                          const std::vector<std::pair<Site2, Site2>>& pairs,
                                          std::uint64_t cap, std::uint64_t replicas,
                                          std::uint64_t seed, unsigned threads, double alpha) {
    CountsCampaign c;
    c.start = start;
    c.t = t;
    c.replicas = replicas;
    c.seed = seed;
    c.alpha = alpha;

    // The strict kernel conserves parity: a site whose parity differs from
    // (start parity + t) carries count 0 almost surely, so pairs touching one
    // are skipped (the ordering claim is vacuous there).
    auto reachable_parity = [&](const Site2& s) {
        return kernel.kind != KernelKind::Strict ||
               ((parity(s) ^ parity(start)) == static_cast<int>(t % 2));
    };

    std::vector<Site2> sites;
    for (const auto& [x, y] : pairs) {
        if (!leq_partial(x, y)) continue;
        if (!reachable_parity(x) || !reachable_parity(y)) continue;
        sites.push_back(x);
        sites.push_back(y);
    }
    std::sort(sites.begin(), sites.end());
    sites.erase(std::unique(sites.begin(), sites.end()), sites.end());
    std::vector<std::vector<std::uint64_t>> counts;
    if (!sites.empty())
        counts = sample_site_counts(start, kernel, law, t, sites, cap, replicas, seed, threads);
    auto site_index = [&sites](const Site2& s) {
        return static_cast<std::size_t>(std::lower_bound(sites.begin(), sites.end(), s) -
                                        sites.begin());
    };

    const std::int32_t radius = linf_norm(start) + static_cast<std::int32_t>(t);
    const ScalarGrid<2> oracle =
        expected_counts_discrete<2>(start, kernel, law.mean(), t, std::max(radius, 1));

    for (const auto& [x, y] : pairs) {
        CountsPairReport rep;
        rep.x = x;
        rep.y = y;
        if (!leq_partial(x, y)) {
            rep.skipped = true;
            rep.note = "pair is not componentwise ordered";
            c.pairs.push_back(rep);
            continue;
        }
        if (!reachable_parity(x) || !reachable_parity(y)) {
            rep.skipped = true;
            rep.note = "strict kernel: site parity incompatible with t, count is 0 almost surely";
            c.pairs.push_back(rep);
            continue;
        }
        EmpiricalSample sx, sy;
        double sumx = 0.0, sumy = 0.0;
        const std::size_t ix = site_index(x), iy = site_index(y);
        for (const auto& row : counts) {
            sx.add(static_cast<double>(row[ix]));
            sy.add(static_cast<double>(row[iy]));
            sumx += static_cast<double>(row[ix]);
            sumy += static_cast<double>(row[iy]);
        }
        const std::string lx = "count" + site_str(x), ly = "count" + site_str(y);
        rep.verdict = dominance_test(sx, sy, alpha, lx, ly);
        rep.mc_mean_x = sumx / static_cast<double>(replicas);
        rep.mc_mean_y = sumy / static_cast<double>(replicas);
        rep.oracle_x = oracle.box.contains(x) ? oracle.at(x) : 0.0;
        rep.oracle_y = oracle.box.contains(y) ? oracle.at(y) : 0.0;
        c.pairs.push_back(rep);
    }
    return c;
}

} // namespace brw
