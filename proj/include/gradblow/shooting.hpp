// Two-parameter shooting over the initial-data family (d0, d1).
//
// Each probe integrates the similarity equation until the difference from
// the profile leaves the bootstrap set (or the horizon is reached) and
// reduces the outcome to an exit signature: which component left first, with
// which sign, at which time s*. The normalized exit image
//
//   Phi = (s*^{2 beta + 1} / A) (v0(s*), v1(s*)) / max-norm
//
// maps exited probes onto the boundary of the unit square; its winding
// number along the boundary of the search rectangle is the discrete degree
// whose value 1 justifies searching inside. find_trapped then runs a
// quadrant-subdivision search keyed on exit signatures: a sub-rectangle
// whose corner signatures disagree must contain a sign change of the exit
// map, and the trapped parameter is cornered to the rectangle diameter.
//
// Exits through components other than v0/v1 would contradict the
// two-dimensional reduction this search relies on; every probe records them
// and the aggregate count is surfaced, never suppressed.

#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "sim_pde.hpp"
#include "util.hpp"

namespace gradblow {

struct ShootState {
    double d0 = 0.0;
    double d1 = 0.0;
    double s_star = 0.0;
    bool exited = false;
    std::string exit_component = "none"; // "v0","v1","v2","vminus","ve","none"
    double exit_sign = 0.0;
    double phi_image0 = 0.0; // valid when exited via v0/v1
    double phi_image1 = 0.0;
    bool mode_exclusivity_violated = false;
    SimTermination termination = SimTermination::horizon;
};

// Runs one probe. Offsets off0/off1 shift the data-family coordinates
// without moving the probe's nominal (d0, d1); stability studies use them as
// controlled perturbations of the initial data along h0/h1.
inline ShootState exit_probe(double d0, double d1, const SolverConfig& cfg, double A,
                             double gamma, const Params& params,
                             RunRecord* record_out = nullptr, double off0 = 0.0,
                             double off1 = 0.0) {
    RunRecord rec = run_similarity(cfg, d0 + off0, d1 + off1, A, gamma, params);
    ShootState st;
    st.d0 = d0;
    st.d1 = d1;
    st.termination = rec.termination;
    if (rec.termination == SimTermination::numerical_failure) {
        if (record_out) *record_out = std::move(rec);
        throw numerical_error("exit_probe(" + std::to_string(d0) + ", " + std::to_string(d1) +
                              "): " + rec.failure_reason);
    }
    if (rec.termination == SimTermination::horizon) {
        st.s_star = cfg.s_end;
        if (record_out) *record_out = std::move(rec);
        return st;
    }
    st.exited = true;
    st.s_star = rec.exit.s_star;
    st.exit_component = rec.exit.component;
    st.exit_sign = rec.exit.sign;
    st.mode_exclusivity_violated = rec.exit.mode_exclusivity_violated;
    const double scale = std::pow(st.s_star, 2.0 * derive_constants(params).beta + 1.0) / A;
    double p0 = scale * rec.exit.at_exit.v0;
    double p1 = scale * rec.exit.at_exit.v1;
    const double mn = std::max(std::fabs(p0), std::fabs(p1));
    if (st.exit_component == "v0" || st.exit_component == "v1") {
        p0 /= mn;
        p1 /= mn;
        st.phi_image0 = p0;
        st.phi_image1 = p1;
    }
    if (record_out) *record_out = std::move(rec);
    return st;
}

// --- transversality ----------------------------------------------------------

struct TransverseReport {
    bool applicable = false; // state exited via v0 or v1
    bool conclusive = false;
    double vm_prime = 0.0;     // one-sided estimate of the exiting mode's derivative
    double omega = 0.0;        // exit sign
    double excess_prime = 0.0; // d/ds of (omega v_m - bound) at s*
    bool transversal = false;
    std::string reason;
};

// One-sided second-order derivative at the last of three samples.
inline double one_sided_derivative(double x1, double f1, double x2, double f2, double x3,
                                   double f3) {
    return f1 * (x3 - x2) / ((x1 - x2) * (x1 - x3)) +
           f2 * (x3 - x1) / ((x2 - x1) * (x2 - x3)) +
           f3 * (2.0 * x3 - x1 - x2) / ((x3 - x1) * (x3 - x2));
}

// Estimates the crossing slope at the exit from the tail of the mode
// history. Grazing contact (slope comparable to the bound's own drift within
// tolerance) is reported as inconclusive rather than as a sign.
inline TransverseReport transverse_check(const ShootState& st, const RunRecord& run, double A,
                                         const ProfileConstants& c,
                                         double graze_tol = 0.05) {
    TransverseReport rep;
    if (!(st.exit_component == "v0" || st.exit_component == "v1")) {
        rep.reason = "exit not via v0/v1";
        return rep;
    }
    rep.applicable = true;
    rep.omega = st.exit_sign;
    const auto& h = run.history;
    if (h.size() < 3) {
        rep.reason = "mode history too sparse";
        return rep;
    }
    auto pick = [&](const ModeVector& m) {
        return st.exit_component == "v0" ? m.v0 : m.v1;
    };
    const auto &m1 = h[h.size() - 3], &m2 = h[h.size() - 2], &m3 = h[h.size() - 1];
    if (!(m1.s < m2.s && m2.s < m3.s)) {
        rep.reason = "history times not strictly increasing at the tail";
        return rep;
    }
    rep.vm_prime = one_sided_derivative(m1.s, pick(m1), m2.s, pick(m2), m3.s, pick(m3));

    const double s = m3.s;
    const double bound_drift = (2.0 * c.beta + 1.0) * A / std::pow(s, 2.0 * c.beta + 2.0);
    rep.excess_prime = rep.omega * rep.vm_prime + bound_drift;
    if (std::fabs(rep.excess_prime) < graze_tol * bound_drift) {
        rep.reason = "grazing contact: crossing slope below resolution";
        return rep;
    }
    rep.conclusive = true;
    rep.transversal = rep.excess_prime > 0.0;
    return rep;
}

// --- boundary degree ---------------------------------------------------------

struct Rect {
    double lo0 = -2.0, hi0 = 2.0;
    double lo1 = -2.0, hi1 = 2.0;

    bool contains(double d0, double d1) const {
        return d0 >= lo0 - 1e-15 && d0 <= hi0 + 1e-15 && d1 >= lo1 - 1e-15 &&
               d1 <= hi1 + 1e-15;
    }
    double diameter() const { return std::max(hi0 - lo0, hi1 - lo1); }
};

// Counterclockwise boundary sample points, corner-started, evenly spaced by
// perimeter length.
inline std::vector<std::pair<double, double>> boundary_samples(const Rect& r, int n) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(n);
    const double w = r.hi0 - r.lo0, h = r.hi1 - r.lo1;
    const double per = 2.0 * (w + h);
    for (int k = 0; k < n; ++k) {
        double u = per * k / n;
        double d0, d1;
        if (u < w) {
            d0 = r.lo0 + u;
            d1 = r.lo1;
        } else if (u < w + h) {
            d0 = r.hi0;
            d1 = r.lo1 + (u - w);
        } else if (u < 2.0 * w + h) {
            d0 = r.hi0 - (u - w - h);
            d1 = r.hi1;
        } else {
            d0 = r.lo0;
            d1 = r.hi1 - (u - 2.0 * w - h);
        }
        pts.push_back({d0, d1});
    }
    return pts;
}

// Winding number of a planar map along the boundary loop: accumulated atan2
// increments, each wrapped to (-pi, pi], divided by 2 pi.
template <typename MapFn>
int winding_of_map(MapFn&& map, const Rect& rect, int n_samples) {
    if (n_samples < 8) throw config_error("winding: need at least 8 boundary samples");
    const auto pts = boundary_samples(rect, n_samples);
    constexpr double pi = std::numbers::pi;
    auto wrap = [pi](double dth) {
        while (dth > pi) dth -= 2.0 * pi;
        while (dth <= -pi) dth += 2.0 * pi;
        return dth;
    };
    double total = 0.0;
    double prev = 0.0;
    bool have_prev = false;
    double first = 0.0;
    for (const auto& [d0, d1] : pts) {
        const auto [f0, f1] = map(d0, d1);
        if (f0 == 0.0 && f1 == 0.0)
            throw numerical_error("winding: map vanished on the boundary");
        const double th = std::atan2(f1, f0);
        if (have_prev) total += wrap(th - prev);
        else first = th;
        prev = th;
        have_prev = true;
    }
    total += wrap(first - prev);
    return static_cast<int>(std::lround(total / (2.0 * pi)));
}

struct DegreeReport {
    bool ok = false;
    int winding = 0;
    std::size_t samples = 0;
    std::size_t exits_outside_01 = 0;
    std::vector<ShootState> boundary_states;
    std::string reason;
};

// Degree of the exit map along the rectangle boundary. Probes run
// concurrently; each sample that fails to exit (horizon reached) makes the
// degree undefined and is reported, not fudged.
inline DegreeReport boundary_degree(const Rect& rect, int n_samples, const SolverConfig& cfg,
                                    double A, double gamma, const Params& params) {
    DegreeReport rep;
    rep.samples = n_samples;
    const auto pts = boundary_samples(rect, n_samples);
    std::vector<ShootState> states(pts.size());
    std::vector<std::string> failures(pts.size());
    parallel_for(pts.size(), [&](std::size_t i) {
        try {
            states[i] = exit_probe(pts[i].first, pts[i].second, cfg, A, gamma, params);
        } catch (const numerical_error& e) {
            failures[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (!failures[i].empty()) {
            rep.reason = "probe failed: " + failures[i];
            rep.boundary_states = std::move(states);
            return rep;
        }
        if (!states[i].exited) {
            rep.reason = "boundary sample did not exit (d0 = " +
                         std::to_string(pts[i].first) + ", d1 = " +
                         std::to_string(pts[i].second) + ")";
            rep.boundary_states = std::move(states);
            return rep;
        }
        if (states[i].mode_exclusivity_violated) ++rep.exits_outside_01;
    }
    std::size_t idx = 0;
    rep.winding = winding_of_map(
        [&](double, double) {
            const auto& st = states[idx++];
            return std::pair<double, double>{st.phi_image0, st.phi_image1};
        },
        rect, n_samples);
    rep.ok = true;
    rep.boundary_states = std::move(states);
    return rep;
}

// --- trapped-point search ----------------------------------------------------

struct ProbeRow {
    int level = 0;
    double d0 = 0.0, d1 = 0.0;
    double s_star = 0.0;
    std::string component;
    double sign = 0.0;
};

struct TrappedResult {
    ShootState best;
    Rect rect;
    std::vector<ProbeRow> table;
    std::vector<double> s_star_ladder; // best-so-far after each level
    std::size_t probes = 0;
    std::size_t exits_outside_01 = 0;
    bool horizon_hit = false; // a probe survived to the horizon
    bool failed = false;      // no signature disagreement at some level
    std::string reason;
};

inline TrappedResult find_trapped(const Rect& rect0, int budget, const SolverConfig& cfg,
                                  double A, double gamma, const Params& params,
                                  double off0 = 0.0, double off1 = 0.0) {
    if (budget < 1) throw config_error("find_trapped: budget must be >= 1");
    TrappedResult res;
    res.rect = rect0;

    std::map<std::pair<double, double>, ShootState> cache;
    auto probe = [&](double d0, double d1) -> const ShootState& {
        const auto key = std::make_pair(d0, d1);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        ShootState st = exit_probe(d0, d1, cfg, A, gamma, params, nullptr, off0, off1);
        ++res.probes;
        if (st.mode_exclusivity_violated) ++res.exits_outside_01;
        return cache.emplace(key, std::move(st)).first->second;
    };
    auto signature = [](const ShootState& st) {
        return st.exit_component + (st.exit_sign > 0 ? "+" : st.exit_sign < 0 ? "-" : "0");
    };
    auto record = [&](int level, const ShootState& st) {
        res.table.push_back({level, st.d0, st.d1, st.s_star, st.exit_component, st.exit_sign});
    };

    Rect rect = rect0;
    std::vector<Rect> lineage{rect};
    ShootState best;
    best.s_star = -1.0;
    auto consider = [&](const ShootState& st) {
        if (st.s_star > best.s_star) best = st;
        if (!st.exited) res.horizon_hit = true;
    };

    // Probe the 3 x 3 corner grid of the 4 sub-rectangles per level; the two
    // corners shared with the parent are cache hits.
    for (int level = 0; level < budget; ++level) {
        const double m0 = 0.5 * (rect.lo0 + rect.hi0);
        const double m1 = 0.5 * (rect.lo1 + rect.hi1);
        const double g0[3] = {rect.lo0, m0, rect.hi0};
        const double g1[3] = {rect.lo1, m1, rect.hi1};

        // Warm the cache concurrently over the not-yet-probed grid points.
        std::vector<std::pair<double, double>> todo;
        for (double a0 : g0)
            for (double a1 : g1)
                if (cache.find({a0, a1}) == cache.end()) todo.push_back({a0, a1});
        std::vector<ShootState> fresh(todo.size());
        parallel_for(todo.size(), [&](std::size_t i) {
            fresh[i] = exit_probe(todo[i].first, todo[i].second, cfg, A, gamma, params,
                                  nullptr, off0, off1);
        });
        for (std::size_t i = 0; i < todo.size(); ++i) {
            ++res.probes;
            if (fresh[i].mode_exclusivity_violated) ++res.exits_outside_01;
            cache.emplace(todo[i], std::move(fresh[i]));
        }

        for (double a0 : g0)
            for (double a1 : g1) {
                const auto& st = probe(a0, a1);
                record(level, st);
                consider(st);
            }

        const Rect quads[4] = {
            {rect.lo0, m0, rect.lo1, m1}, // SW
            {m0, rect.hi0, rect.lo1, m1}, // SE
            {rect.lo0, m0, m1, rect.hi1}, // NW
            {m0, rect.hi0, m1, rect.hi1}, // NE
        };
        int chosen = -1;
        double chosen_score = -1.0;
        for (int qi = 0; qi < 4; ++qi) {
            const Rect& qr = quads[qi];
            const ShootState* corner[4] = {&probe(qr.lo0, qr.lo1), &probe(qr.hi0, qr.lo1),
                                           &probe(qr.lo0, qr.hi1), &probe(qr.hi0, qr.hi1)};
            bool mixed = false;
            double score = 0.0;
            for (int ci = 0; ci < 4; ++ci) {
                if (signature(*corner[ci]) != signature(*corner[0])) mixed = true;
                score = std::max(score, corner[ci]->s_star);
            }
            if (mixed && score > chosen_score) {
                chosen = qi;
                chosen_score = score;
            }
        }
        if (chosen < 0) {
            res.failed = true;
            res.reason = "no sub-rectangle with disagreeing corner signatures at level " +
                         std::to_string(level);
            break;
        }
        rect = quads[chosen];
        lineage.push_back(rect);
        res.s_star_ladder.push_back(best.s_star);
    }

    res.best = best;
    res.rect = rect;
    // The reported rectangle must contain the reported point; back off to the
    // deepest ancestor that does.
    for (auto it = lineage.rbegin(); it != lineage.rend(); ++it)
        if (it->contains(best.d0, best.d1)) {
            res.rect = *it;
            break;
        }
    return res;
}

// --- stability ---------------------------------------------------------------

struct StabilityRow {
    std::string kind; // "none", "h0", "h1", "s0"
    double eps = 0.0;
    double d0 = 0.0, d1 = 0.0;
    double s_star = 0.0;
    bool failed = false;
};

struct StabilityReport {
    std::vector<StabilityRow> rows;
    double d0_shift_slope = 0.0; // recovered d0 shift per unit h0 perturbation
    bool slope_finite = false;
};

// Re-runs the trapped-point search under controlled perturbations of the
// initial data (h0 and h1 directions, in family coordinates) and of s0, and
// reports how the recovered optimum moves. Report-only: nothing here throws
// on a degraded recovery.
inline StabilityReport stability_probe(const TrappedResult& trapped,
                                       const std::vector<double>& eps_list,
                                       const SolverConfig& cfg, double A, double gamma,
                                       const Params& params, int budget = 6) {
    StabilityReport rep;
    const double c0 = trapped.best.d0, c1 = trapped.best.d1;
    const double r = std::max(4.0 * trapped.rect.diameter(), 1e-3);
    const Rect seed{c0 - r, c0 + r, c1 - r, c1 + r};

    auto run_case = [&](const std::string& kind, double eps, const SolverConfig& case_cfg,
                        double off0, double off1) {
        StabilityRow row;
        row.kind = kind;
        row.eps = eps;
        try {
            const TrappedResult t =
                find_trapped(seed, budget, case_cfg, A, gamma, params, off0, off1);
            row.d0 = t.best.d0;
            row.d1 = t.best.d1;
            row.s_star = t.best.s_star;
            row.failed = t.failed;
        } catch (const numerical_error&) {
            row.failed = true;
        }
        rep.rows.push_back(row);
    };

    run_case("none", 0.0, cfg, 0.0, 0.0);
    std::vector<double> xs, ys;
    for (double eps : eps_list) {
        run_case("h0", eps, cfg, eps, 0.0);
        if (!rep.rows.back().failed) {
            xs.push_back(eps);
            ys.push_back(rep.rows.back().d0 - rep.rows.front().d0);
        }
        run_case("h1", eps, cfg, 0.0, eps);
        SolverConfig shifted = cfg;
        shifted.s0 = cfg.s0 * (1.0 + eps);
        run_case("s0", eps, shifted, 0.0, 0.0);
    }
    if (xs.size() >= 2) {
        const auto lf = line_fit(xs, ys);
        rep.d0_shift_slope = lf.coef[1];
        rep.slope_finite = std::isfinite(rep.d0_shift_slope);
    }
    return rep;
}

} // namespace gradblow
