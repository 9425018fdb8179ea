// Physical-space integration of u_t = u_xx + mu |u_x|^q + |u|^{p-1} u and
// the blow-up diagnostics built on it.
//
// The scheme mirrors the similarity solver: diffusion implicit (tridiagonal
// solve), both nonlinearities explicit, frozen Dirichlet boundary values,
// adaptive steps limited by the reaction rate, a gradient CFL, and a fixed
// fraction of the blow-up time guess.
//
// Because the blow-up feature width sqrt(T - t) collapses below any fixed
// grid spacing, the solver exploits the equation's exact scaling invariance
// u_lambda(t, x) = lambda^{2/(p-1)} u(lambda^2 t, lambda x): whenever the sup
// norm grows by a fixed factor, the state is rescaled by lambda < 1 chosen to
// undo the growth, resampled onto the same grid (cubic interpolation), and
// physical time advances as Lambda^2 d tau with Lambda the cumulative zoom.
// Each zoom discards the annulus |x| > lambda L in current variables; those
// samples have already converged in physical units and are archived as the
// final-profile composite u*(x). zoom_budget = 0 recovers a plain fixed-grid
// solver.
//
// Blow-up time: ||u||_inf^{-(p-1)} is asymptotically linear in t, so its
// root is extrapolated from a line fit (both a last-20-steps window and a
// last-decade window are reported). The limiting slope p-1 is approached
// only like 1 - O(s^{-2 beta}) with s = -log(T-t), so the reported limit
// extrapolates local slopes linearly in s^{-2 beta} over the window where
// the feature is still resolved (T - t >= (8 dx_eff)^2).

#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "constants.hpp"
#include "field.hpp"
#include "linalg.hpp"
#include "sim_pde.hpp"

namespace gradblow {

struct PhysConfig {
    double L = 0.0;
    int n = 0;
    double safety = 0.2;
    double depth = 30000.0;      // stop once T - t has shrunk by about this factor
    double stop_sup_frac = 0.7;  // fraction of the depth-implied sup norm
    double t_budget = 1.5;       // multiple of T_guess before declaring no blow-up
    std::size_t max_steps = 5'000'000;
    int zoom_budget = 0;
    double zoom_growth = 2.0;    // sup-norm growth factor that triggers a zoom

    void validate() const {
        if (!(L > 0.0)) throw config_error("phys config: L must be positive");
        if (n < 9 || n % 2 == 0) throw config_error("phys config: n must be odd and >= 9");
        if (!(safety > 0.0) || safety > 1.0)
            throw config_error("phys config: need 0 < safety <= 1");
        if (!(depth > 1.0)) throw config_error("phys config: depth must exceed 1");
        if (zoom_budget < 0) throw config_error("phys config: zoom_budget must be >= 0");
        if (zoom_budget > 0 && !(zoom_growth > 1.0))
            throw config_error("phys config: zoom_growth must exceed 1");
    }
};

// u(x, 0) on [-L, L] from the similarity profile plus the two-mode
// perturbation at s0, mapped through u = T^{-1/(p-1)} w(x/sqrt(T), s0) with
// T = e^{-s0}. The window may be narrower than the perturbation support; the
// cutoff is simply evaluated where the grid lives.
inline Field build_physical_initial(double s0, double d0, double d1, double A, double K,
                                    double L, int n, const ProfileConstants& c) {
    require_similarity_time(s0);
    const double T = std::exp(-s0);
    const double rT = std::sqrt(T);
    const double ampT = std::pow(T, -1.0 / (c.p - 1.0));
    const double amp = A / std::pow(s0, 2.0 * c.beta + 1.0);
    return sample_field(L, n, 0.0, [&](double x) {
        const double y = x / rT;
        const double chi = cutoff_chi(2.0 * y, s0, K, c);
        return ampT * (phi(y, s0, c) + amp * (d0 + d1 * y) * chi);
    });
}

enum class PhysTermination { depth_reached, budget_exhausted, numerical_failure };

inline const char* to_string(PhysTermination t) {
    switch (t) {
        case PhysTermination::depth_reached: return "depth-reached";
        case PhysTermination::budget_exhausted: return "budget-exhausted";
        case PhysTermination::numerical_failure: return "numerical-failure";
    }
    return "?";
}

struct PhysTraceRow {
    double t = 0.0;       // physical time
    double sup = 0.0;     // physical sup norm
    double dt = 0.0;      // physical step taken to reach this row
    double lambda = 1.0;  // cumulative zoom factor at this row
};

struct ZoomEvent {
    double t = 0.0;
    double lambda_after = 1.0;
};

struct PhysRunRecord {
    std::vector<PhysTraceRow> trace;
    std::vector<ZoomEvent> zooms;
    // Archived converged-outer samples (|x|, u) in physical units, appended
    // outermost shell first.
    std::vector<std::pair<double, double>> ustar;
    Field u_final;          // current (rescaled) variables; .s holds grid time
    double lambda_final = 1.0;
    double t_final = 0.0;
    double dx_grid = 0.0;
    double u0_sup = 0.0;
    double T_guess = 0.0;
    PhysTermination termination = PhysTermination::budget_exhausted;
    std::string failure_reason;
    bool inconclusive = false;
};

namespace detail {
// One IMEX step of the physical equation in current (possibly zoomed)
// variables; returns the grid step taken.
inline void phys_step(Field& u, double dtau, double mu, double q, double p, double ubc0,
                      double ubc1) {
    const int n = u.n;
    const double h = u.dy();
    const double r = dtau / (h * h);
    const auto d1 = deriv1(u);
    std::vector<double> sub(n, -r), diag(n, 1.0 + 2.0 * r), sup(n, -r), rhs(n, 0.0);
    for (int i = 0; i < n; ++i) {
        const double nl = mu * std::pow(std::fabs(d1[i]), q) +
                          std::pow(std::fabs(u.v[i]), p - 1.0) * u.v[i];
        rhs[i] = u.v[i] + dtau * nl;
    }
    diag[0] = 1.0;
    sup[0] = 0.0;
    rhs[0] = ubc0;
    diag[n - 1] = 1.0;
    sub[n - 1] = 0.0;
    rhs[n - 1] = ubc1;
    thomas_solve(sub, diag, sup, rhs);
    u.v = std::move(rhs);
    for (double x : u.v)
        if (!std::isfinite(x)) throw numerical_error("phys_step: non-finite value");
}
} // namespace detail

inline PhysRunRecord run_physical_rescaled(const Params& params, double T_guess,
                                           const Field& u0, const PhysConfig& cfg) {
    params.validate();
    cfg.validate();
    if (!(T_guess > 0.0)) throw config_error("run_physical_rescaled: T_guess must be positive");
    const double p = params.p, mu = params.mu, q = params.q();
    const double scale_pow = 2.0 / (p - 1.0);

    PhysRunRecord rec;
    rec.T_guess = T_guess;
    rec.dx_grid = u0.dy();
    Field u = u0;
    double ubc0 = u.v[0], ubc1 = u.v[u.n - 1];
    double Lam = 1.0;
    double t = 0.0;
    int zooms = 0;

    double m_grid = 0.0;
    for (double x : u.v) m_grid = std::max(m_grid, std::fabs(x));
    rec.u0_sup = m_grid;
    double m_ref = m_grid;
    const double sup_cap =
        std::pow(T_guess / cfg.depth, -1.0 / (p - 1.0)) * cfg.stop_sup_frac;

    double dt_phys = 0.0;
    for (std::size_t k = 0; k < cfg.max_steps; ++k) {
        m_grid = 0.0;
        for (double x : u.v) m_grid = std::max(m_grid, std::fabs(x));
        const double sup_phys = std::pow(Lam, -scale_pow) * m_grid;
        rec.trace.push_back({t, sup_phys, dt_phys, Lam});

        if (sup_phys >= sup_cap) {
            rec.termination = PhysTermination::depth_reached;
            break;
        }
        if (t > cfg.t_budget * T_guess) {
            rec.termination = PhysTermination::budget_exhausted;
            rec.inconclusive = true;
            break;
        }

        if (zooms < cfg.zoom_budget && m_grid >= m_ref * cfg.zoom_growth) {
            const double lam = std::pow(cfg.zoom_growth, -(p - 1.0) / 2.0);
            // Archive the annulus that the zoom is about to discard.
            for (int i = 0; i < u.n; ++i) {
                const double xg = u.y(i);
                if (std::fabs(xg) > lam * cfg.L)
                    rec.ustar.push_back(
                        {Lam * std::fabs(xg), std::pow(Lam, -scale_pow) * u.v[i]});
            }
            Field zoomed(cfg.L, cfg.n, u.s);
            for (int i = 0; i < cfg.n; ++i)
                zoomed.v[i] = std::pow(lam, scale_pow) * interp(u, lam * zoomed.y(i));
            u = std::move(zoomed);
            Lam *= lam;
            ++zooms;
            rec.zooms.push_back({t, Lam});
            ubc0 = u.v[0];
            ubc1 = u.v[u.n - 1];
            m_grid = 0.0;
            for (double x : u.v) m_grid = std::max(m_grid, std::fabs(x));
            m_ref = m_grid;
        }

        const auto d1 = deriv1(u);
        double gmax = 0.0;
        for (double g : d1) gmax = std::max(gmax, std::fabs(g));
        const double react = 1.0 / std::max(p * std::pow(m_grid, p - 1.0), 1e-300);
        const double grad =
            u.dy() / std::max(mu * q * std::pow(gmax, q - 1.0), 1e-300);
        const double tcap = T_guess / (50.0 * Lam * Lam);
        const double dtau = cfg.safety * std::min({react, grad, tcap});

        try {
            detail::phys_step(u, dtau, mu, q, p, ubc0, ubc1);
        } catch (const numerical_error& err) {
            rec.termination = PhysTermination::numerical_failure;
            rec.failure_reason = err.what();
            break;
        }
        dt_phys = Lam * Lam * dtau;
        t += dt_phys;
        u.s = t;
    }
    if (rec.trace.empty())
        throw numerical_error("run_physical_rescaled: no steps recorded");
    rec.u_final = std::move(u);
    rec.lambda_final = Lam;
    rec.t_final = t;
    if (rec.termination == PhysTermination::budget_exhausted) rec.inconclusive = true;
    return rec;
}

// --- blow-up time and slope fits --------------------------------------------

struct BlowupFit {
    double That_last20 = 0.0;
    double slope_last20 = 0.0;
    double That_decade = 0.0;
    double slope_decade = 0.0;
    double slope_extrapolated = 0.0; // intercept of local slope vs s^{-2 beta}
    std::size_t points_extrapolation = 0;
    bool conclusive = false;
    std::string reason;
};

// z(t) = ||u||_inf^{-(p-1)} is fit linearly in t; its root estimates the
// blow-up time. Local slopes -dz/dt are then extrapolated in s^{-2 beta},
// restricted to steps where sqrt(T-t) spans at least 8 effective grid cells.
inline BlowupFit fit_blowup_time(const PhysRunRecord& rec, const ProfileConstants& c) {
    BlowupFit fit;
    const auto& tr = rec.trace;
    if (tr.size() < 30) {
        fit.reason = "trace too short";
        return fit;
    }
    std::vector<double> t(tr.size()), z(tr.size());
    for (std::size_t i = 0; i < tr.size(); ++i) {
        t[i] = tr[i].t;
        z[i] = std::pow(tr[i].sup, -(c.p - 1.0));
    }

    {
        std::vector<double> tt(t.end() - 20, t.end()), zz(z.end() - 20, z.end());
        const auto lf = line_fit(tt, zz);
        fit.slope_last20 = -lf.coef[1];
        fit.That_last20 = -lf.coef[0] / lf.coef[1];
    }
    {
        std::vector<double> tt, zz;
        for (std::size_t i = 0; i < z.size(); ++i)
            if (z[i] <= 0.1 * z.front()) {
                tt.push_back(t[i]);
                zz.push_back(z[i]);
            }
        if (tt.size() < 10) {
            fit.That_decade = fit.That_last20;
            fit.slope_decade = fit.slope_last20;
        } else {
            const auto lf = line_fit(tt, zz);
            fit.slope_decade = -lf.coef[1];
            fit.That_decade = -lf.coef[0] / lf.coef[1];
        }
    }
    const double That = fit.That_decade;
    if (!(That > t.back())) {
        fit.reason = "extrapolated blow-up time not beyond the trace";
        return fit;
    }

    // Local slopes on the nonuniform grid, 2nd-order interior formula.
    const double s_base = -std::log(That);
    std::vector<double> xreg, yreg;
    for (std::size_t i = 1; i + 1 < t.size(); ++i) {
        const double hs = t[i] - t[i - 1], hd = t[i + 1] - t[i];
        if (!(hs > 0.0) || !(hd > 0.0)) continue;
        const double dz = (hs * hs * z[i + 1] - hd * hd * z[i - 1] +
                           (hd * hd - hs * hs) * z[i]) /
                          (hs * hd * (hs + hd));
        const double rem = That - t[i];
        if (!(rem > 0.0)) continue;
        const double s = -std::log(rem);
        const double dx_eff = tr[i].lambda * rec.dx_grid;
        if (s <= s_base + 0.8) continue;
        if (rem < 64.0 * dx_eff * dx_eff) continue;
        xreg.push_back(std::pow(s, -2.0 * c.beta));
        yreg.push_back(-dz);
    }
    fit.points_extrapolation = xreg.size();
    if (xreg.size() < 10) {
        fit.reason = "resolved slope window too small";
        return fit;
    }
    const auto lf = line_fit(xreg, yreg);
    fit.slope_extrapolated = lf.coef[0];
    fit.conclusive = true;
    return fit;
}

// --- profile parameter recovery ---------------------------------------------

struct ProfileFit {
    double b_hat = 0.0;
    double beta_hat = 0.0;
    double residual = 0.0; // worst per-snapshot relative linear-fit residual
    bool inconclusive = false;
    std::string reason;
};

namespace detail {
// Per-snapshot reduction: fit (w - a/s^{2 beta})^{-(p-1)} - (p-1) through the
// origin against y^2 over |y| <= K s^beta. For profile-generated data this
// slope is exactly b / s^{2 beta}.
struct SnapshotSlope {
    double slope = 0.0;
    double rel_residual = 0.0;
    bool ok = false;
};

inline SnapshotSlope snapshot_slope(const Field& f, double offset_s_pow, double K,
                                    const ProfileConstants& c) {
    SnapshotSlope out;
    const double win = K * std::pow(f.s, c.beta);
    double sxx = 0.0, sxy = 0.0;
    std::vector<double> ys, gs;
    for (int i = 0; i < f.n; ++i) {
        const double y = f.y(i);
        if (std::fabs(y) > win) continue;
        const double base = f.v[i] - offset_s_pow;
        if (!(base > 0.0)) return out;
        const double g = std::pow(base, -(c.p - 1.0)) - (c.p - 1.0);
        ys.push_back(y);
        gs.push_back(g);
        sxx += y * y * y * y;
        sxy += y * y * g;
    }
    if (ys.size() < 8 || !(sxx > 0.0)) return out;
    out.slope = sxy / sxx;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < ys.size(); ++i) {
        const double r = gs[i] - out.slope * ys[i] * ys[i];
        num += r * r;
        den += gs[i] * gs[i];
    }
    out.rel_residual = den > 0.0 ? std::sqrt(num / den) : 0.0;
    out.ok = true;
    return out;
}
} // namespace detail

// Joint recovery of (b_hat, beta_hat) from two or more snapshots at distinct
// similarity times: each snapshot yields c(s) = b_hat / s^{2 beta_hat}
// exactly (after subtracting the known offset a/s^{2 beta}), and a line fit
// of log c against log s separates the two parameters.
inline ProfileFit fit_profile_parameters(const std::vector<Field>& snaps,
                                         const ProfileConstants& c, double K = 10.0) {
    ProfileFit fit;
    if (snaps.size() < 2) {
        fit.inconclusive = true;
        fit.reason = "need at least two snapshots at distinct times";
        return fit;
    }
    std::vector<double> ls, lc;
    for (const auto& f : snaps) {
        require_similarity_time(f.s);
        const double offset = c.a / std::pow(f.s, 2.0 * c.beta);
        const auto red = detail::snapshot_slope(f, offset, K, c);
        if (!red.ok || !(red.slope > 0.0)) {
            fit.inconclusive = true;
            fit.reason = "snapshot not in the profile regime";
            return fit;
        }
        if (red.rel_residual > 0.5) {
            fit.inconclusive = true;
            fit.reason = "pre-asymptotic snapshot (linear fit residual > 0.5)";
            return fit;
        }
        ls.push_back(std::log(f.s));
        lc.push_back(std::log(red.slope));
        fit.residual = std::max(fit.residual, red.rel_residual);
    }
    const auto lf = line_fit(ls, lc);
    fit.beta_hat = -0.5 * lf.coef[1];
    fit.b_hat = std::exp(lf.coef[0]);
    return fit;
}

// Fixed-exponent variant: recover b_hat alone at a prescribed beta and report
// the fit residual. Used to compare how well data matches the s^{2 beta}
// scaling family; data generated by a different scaling shows up as a large
// residual here.
inline ProfileFit fit_profile_parameters_fixed_beta(const Field& f, double beta_fixed,
                                                    const ProfileConstants& c,
                                                    double K = 10.0) {
    ProfileFit fit;
    require_similarity_time(f.s);
    const double offset = c.a / std::pow(f.s, 2.0 * c.beta);
    const auto red = detail::snapshot_slope(f, offset, K, c);
    if (!red.ok) {
        fit.inconclusive = true;
        fit.reason = "window empty or data not invertible";
        return fit;
    }
    fit.beta_hat = beta_fixed;
    fit.b_hat = red.slope * std::pow(f.s, 2.0 * beta_fixed);
    fit.residual = red.rel_residual;
    return fit;
}

// --- final profile ----------------------------------------------------------

struct FinalProfileReport {
    bool conclusive = false;
    std::string reason;
    double growth = 0.0;          // sup ||u||_inf growth over the run
    double slope_loglog = 0.0;    // d log u* / d log |x|
    double slope_target = 0.0;    // -2/(p-1), modulo logarithmic corrections
    double trend_raw = 0.0;       // log-log trend of u*^{-(p-1)} |x|^{-2}
    double trend_corrected = 0.0; // same after dividing out the log factor
    bool corrected_flatter = false;
    bool all_positive = false;
    std::size_t samples = 0;
};

// Compares the archived outer composite u*(x) with the expected final-time
// shape: u* ~ (b x^2 / [2 |log x|]^{(p+1)/(p-1)})^{-1/(p-1)} as x -> 0, i.e.
// a -2/(p-1) power with a logarithmic correction whose removal should
// flatten u*^{-(p-1)} x^{-2}.
inline FinalProfileReport final_profile_check(const PhysRunRecord& rec,
                                              const ProfileConstants& c) {
    FinalProfileReport rep;
    rep.slope_target = -2.0 / (c.p - 1.0);
    if (rec.trace.empty() || !(rec.u0_sup > 0.0)) {
        rep.reason = "empty run record";
        return rep;
    }
    rep.growth = rec.trace.back().sup / rec.u0_sup;
    if (rep.growth < 1e3) {
        rep.reason = "insufficient blow-up depth (growth < 1e3)";
        return rep;
    }
    std::vector<std::pair<double, double>> pts;
    for (const auto& [x, uval] : rec.ustar)
        if (x > 0.0) pts.push_back({x, uval});
    if (pts.size() < 16) {
        rep.reason = "too few archived outer samples";
        return rep;
    }
    rep.samples = pts.size();
    rep.all_positive = true;
    std::vector<double> lx, lu, raw, corr;
    for (const auto& [x, uval] : pts) {
        if (!(uval > 0.0) || !std::isfinite(uval)) {
            rep.all_positive = false;
            continue;
        }
        if (!(x < 1.0)) continue; // the log correction needs |log x| bounded away from 0
        lx.push_back(std::log(x));
        lu.push_back(std::log(uval));
        const double y1 = std::pow(uval, -(c.p - 1.0)) / (x * x);
        const double lg = std::pow(2.0 * std::fabs(std::log(x)), (c.p + 1.0) / (c.p - 1.0));
        raw.push_back(std::log(y1));
        corr.push_back(std::log(y1 * lg));
    }
    if (lx.size() < 16) {
        rep.reason = "too few usable samples below |x| = 1";
        return rep;
    }
    rep.slope_loglog = line_fit(lx, lu).coef[1];
    rep.trend_raw = line_fit(lx, raw).coef[1];
    rep.trend_corrected = line_fit(lx, corr).coef[1];
    rep.corrected_flatter = std::fabs(rep.trend_corrected) < std::fabs(rep.trend_raw);
    rep.conclusive = true;
    return rep;
}

} // namespace gradblow
