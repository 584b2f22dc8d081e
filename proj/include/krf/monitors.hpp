#pragma once

// Runtime-checkable monitors over a FlowTrajectory.
//
// Each monitor turns one of the flow's a-priori estimates into a concrete
// inequality on snapshot data: sup-type quantities must not increase, and
// pointwise parabolic inequalities (d/dt - Lap) q <= c must hold up to a
// discretization slack.  All unnamed constants become measured constants.
//
// Slack policy: inequalities are one-sided with additive slack
// eps = C_disc (h^2 + dt_loc).  The C_disc constants are calibrated once on
// the exact homothetic P^m solution, where every monitored inequality holds
// analytically, so a slack violation on another run is a genuine signal.
// The radial monitor's constant is calibrated on a run driven to the same
// relative depth T - t = stop_fraction * T as production runs: the central
// time difference of log phi' carries an error growing like 1/(T-t) near
// collapse, and only a calibration run reaching the same depth sees it.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "krf/cohomology.hpp"
#include "krf/errors.hpp"
#include "krf/flow.hpp"
#include "krf/profile.hpp"

namespace krf {

struct MonitorReport {
    std::string name;
    std::string paper_tag;          // which estimate family the monitor tracks
    std::vector<double> times;
    std::vector<double> values;     // sup-type or residual-type series
    double measured_constant = std::numeric_limits<double>::quiet_NaN();
    bool pass = false;
    double tolerance = 0.0;
    std::string detail;

    const char* verdict() const { return pass ? "pass" : "fail"; }
};

namespace detail {

// Second-order derivative at t_k from three nonuniformly spaced samples.
inline double time_derivative_3pt(double fm, double f0, double fp, double h1, double h2) {
    return -h2 / (h1 * (h1 + h2)) * fm + (h2 - h1) / (h1 * h2) * f0 +
           h1 / (h2 * (h1 + h2)) * fp;
}

inline std::vector<double> log_phi_prime(const FlowProfile& p) {
    std::vector<double> f(p.N());
    for (int i = 0; i < p.N(); ++i) {
        const double v = p.phi_prime()[i];
        if (!(v > 0.0)) throw DegeneracyError("log phi': nonpositive derivative");
        f[i] = std::log(v);
    }
    return f;
}

inline double slope_log_log(const std::vector<double>& x, const std::vector<double>& y) {
    // least-squares slope of y vs x
    const std::size_t n = x.size();
    if (n < 2) throw InsufficientData("exponent fit needs at least two samples");
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sx += x[i]; sy += y[i]; sxx += x[i] * x[i]; sxy += x[i] * y[i];
    }
    const double den = n * sxx - sx * sx;
    if (den == 0.0) throw InsufficientData("exponent fit degenerate");
    return (n * sxy - sx * sy) / den;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Calibrated discretization-slack constants.

struct DiscretizationSlack {
    double c_radial = 1.0;
    double c_schwarz = 0.1;
    double c_aubin_yau = 0.1;
};

// --------------------------------------------------------------------------
// sup_X |V|^2 must not increase along the flow.

inline MonitorReport monitor_vf_max_principle(const FlowTrajectory& traj,
                                              const VectorFieldSpec& V) {
    if (!V.lifts_to_blowup())
        throw DomainError("monitor_vf_max_principle: field does not lift to the blow-up");
    MonitorReport r;
    r.name = "vf_max_principle[" + V.name() + "]";
    r.paper_tag = "holomorphic-vf-max-principle";
    r.tolerance = 1e-6;
    const double h2 = traj.snapshots.front().grid_step() * traj.snapshots.front().grid_step();
    for (const auto& p : traj.snapshots) {
        r.times.push_back(p.t());
        r.values.push_back(vf_sup(p, V));
    }
    bool ok = true;
    for (std::size_t k = 0; k + 1 < r.values.size(); ++k) {
        const double dt = r.times[k + 1] - r.times[k];
        const double slack = (1e-6 + 10.0 * (dt + h2)) * std::fabs(r.values[k]);
        if (r.values[k + 1] > r.values[k] + slack) {
            ok = false;
            r.detail += "increase at t=" + std::to_string(r.times[k + 1]) + "; ";
        }
    }
    r.pass = ok;
    double cmax = 0.0;
    for (double v : r.values) cmax = std::max(cmax, v / r.values.front());
    r.measured_constant = cmax;
    return r;
}

namespace detail {

// Pointwise checks run on interior nodes whose difference stencils read only
// central-stencil data.  The first and last interior nodes see the boundary
// nodes' one-sided derivative values, whose O(h^2) truncation bias differs
// from the central one; divided by phi' ~ e^-L that mismatch swamps any
// genuine residual.
inline constexpr int kEdgeSkip = 2;

// Snapshot values carry a representability floor of a few ulps from the
// implicit solver.  Differencing them divides that floor by the local slope,
// so log phi' (and the log of any trace built from phi') carries a per-node
// data-noise amplitude of about eps |phi| / (h phi').  Residuals are
// compared after subtracting the propagated bound; in the exponentially flat
// tails this is the only honest reading the arithmetic supports.
inline std::vector<double> log_value_noise(const FlowProfile& p) {
    constexpr double kKappa = 32.0;  // covers the solver's accept floor
    constexpr double eps = 2.220446049250313e-16;
    const double h = p.grid_step();
    const int n = p.N();
    std::vector<double> nu(n);
    for (int i = 0; i < n; ++i) {
        const int ip = std::min(i + 1, n - 1), im = std::max(i - 1, 0);
        const double amp = std::fabs(p.phi()[ip]) + std::fabs(p.phi()[im]);
        nu[i] = kKappa * eps * amp / (2 * h * p.phi_prime()[i]);
    }
    return nu;
}

// Bound for the noise of (d/dt - Lap) at node i given the per-node log-value
// noise of the three snapshots entering the time stencil.
inline double residual_noise_allowance(const FlowProfile& p, int i,
                                       const std::vector<double>& nu_m,
                                       const std::vector<double>& nu_0,
                                       const std::vector<double>& nu_p,
                                       double h1, double h2) {
    const double wsum = std::fabs(-h2 / (h1 * (h1 + h2))) +
                        std::fabs((h2 - h1) / (h1 * h2)) +
                        std::fabs(h1 / (h2 * (h1 + h2)));
    const double h = p.grid_step();
    const double time_part =
        wsum * std::max({nu_m[i], nu_0[i], nu_p[i]});
    const double lap_part =
        (nu_0[i - 1] + 2 * nu_0[i] + nu_0[i + 1]) / (h * h) / p.phi_prime()[i] +
        (p.m() - 1) * (nu_0[i - 1] + nu_0[i + 1]) / (2 * h) / p.phi()[i];
    return time_part + lap_part;
}

}  // namespace detail

// --------------------------------------------------------------------------
// Pointwise subsolution check for log phi' = log |V^rad|^2:
// R = (d/dt - Lap) log phi' <= eps_disc on interior nodes.

inline MonitorReport monitor_radial_pointwise(const FlowTrajectory& traj, double c_disc) {
    if (traj.snapshots.size() < 3)
        throw InsufficientData("monitor_radial_pointwise: needs at least 3 snapshots");
    MonitorReport r;
    r.name = "radial_pointwise";
    r.paper_tag = "radial-log-norm-subsolution";
    const auto& snaps = traj.snapshots;
    const double h = snaps.front().grid_step();
    const double h2 = h * h;
    bool ok = true;
    double implied_c = 0.0;
    for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
        const auto fm = detail::log_phi_prime(snaps[k - 1]);
        const auto f0 = detail::log_phi_prime(snaps[k]);
        const auto fp = detail::log_phi_prime(snaps[k + 1]);
        const auto num = detail::log_value_noise(snaps[k - 1]);
        const auto nu0 = detail::log_value_noise(snaps[k]);
        const auto nup = detail::log_value_noise(snaps[k + 1]);
        const double h1 = snaps[k].t() - snaps[k - 1].t();
        const double hh2 = snaps[k + 1].t() - snaps[k].t();
        const auto lap = laplacian_radial(snaps[k], f0);
        double rmax = -std::numeric_limits<double>::infinity();
        for (int i = detail::kEdgeSkip; i + detail::kEdgeSkip < snaps[k].N(); ++i) {
            const double ft = detail::time_derivative_3pt(fm[i], f0[i], fp[i], h1, hh2);
            const double alw =
                detail::residual_noise_allowance(snaps[k], i, num, nu0, nup, h1, hh2);
            rmax = std::max(rmax, ft - lap[i - 1] - alw);
        }
        const double dt_loc = 0.5 * (h1 + hh2);
        const double eps = c_disc * (h2 + dt_loc);
        r.times.push_back(snaps[k].t());
        r.values.push_back(rmax);
        implied_c = std::max(implied_c, rmax / (h2 + dt_loc));
        if (rmax > eps) {
            ok = false;
            r.detail += "residual " + std::to_string(rmax) + " > eps " +
                        std::to_string(eps) + " at t=" + std::to_string(snaps[k].t()) + "; ";
        }
    }
    r.pass = ok;
    r.measured_constant = implied_c;
    r.tolerance = c_disc;
    return r;
}

namespace detail {

// Shared engine for the two trace monitors: checks
// (d/dt - Lap) log Numer <= C * Normalizer + eps pointwise and reports the
// smallest admissible C.  Nodes where the numerator drops below the guard
// threshold are excluded (the estimates assume positivity).
struct TraceMonitorResult {
    double c_meas = -std::numeric_limits<double>::infinity();
    int excluded = 0;
    std::vector<double> times;
    std::vector<double> worst;  // per-time sup of (LHS - eps) / normalizer
};

template <typename NumerFn, typename NormFn>
TraceMonitorResult trace_parabolic_sup(const FlowTrajectory& traj, double c_disc,
                                       NumerFn numer, NormFn normalizer) {
    if (traj.snapshots.size() < 3)
        throw InsufficientData("trace monitor: needs at least 3 snapshots");
    const auto& snaps = traj.snapshots;
    const double h2 = snaps.front().grid_step() * snaps.front().grid_step();
    const double guard = 1e-12;
    TraceMonitorResult out;
    for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
        const std::vector<double> sm = numer(snaps[k - 1]);
        const std::vector<double> s0 = numer(snaps[k]);
        const std::vector<double> sp = numer(snaps[k + 1]);
        const std::vector<double> norm = normalizer(snaps[k]);
        const auto num = log_value_noise(snaps[k - 1]);
        const auto nu0 = log_value_noise(snaps[k]);
        const auto nup = log_value_noise(snaps[k + 1]);
        const double h1 = snaps[k].t() - snaps[k - 1].t();
        const double hh2 = snaps[k + 1].t() - snaps[k].t();
        std::vector<double> logs(s0.size());
        for (std::size_t i = 0; i < s0.size(); ++i)
            logs[i] = s0[i] > guard ? std::log(s0[i]) : 0.0;
        const auto lap = laplacian_radial(snaps[k], logs);
        const double dt_loc = 0.5 * (h1 + hh2);
        const double eps = c_disc * (h2 + dt_loc);
        double worst = -std::numeric_limits<double>::infinity();
        for (int i = kEdgeSkip; i + kEdgeSkip < snaps[k].N(); ++i) {
            // the Laplacian stencil at i also reads the log at i -+ 1
            if (!(sm[i] > guard && s0[i] > guard && sp[i] > guard &&
                  s0[i - 1] > guard && s0[i + 1] > guard)) {
                ++out.excluded;
                continue;
            }
            const double ft = time_derivative_3pt(std::log(sm[i]), std::log(s0[i]),
                                                  std::log(sp[i]), h1, hh2);
            const double alw = residual_noise_allowance(snaps[k], i, num, nu0, nup, h1, hh2);
            const double lhs = ft - lap[i - 1] - alw;
            worst = std::max(worst, (lhs - eps) / norm[i]);
        }
        out.times.push_back(snaps[k].t());
        out.worst.push_back(worst);
        out.c_meas = std::max(out.c_meas, worst);
    }
    return out;
}

}  // namespace detail

// (d/dt - Lap) log tr_omega(FS) <= C tr_omega(FS): trace against the
// Fubini-Study pullback through the blow-down.
inline MonitorReport monitor_schwarz(const FlowTrajectory& traj, double c_disc) {
    const auto& p0 = traj.snapshots.front();
    std::vector<double> fs1(p0.N()), fs2(p0.N());
    for (int i = 0; i < p0.N(); ++i) {
        fs1[i] = sigmoid(p0.rho(i));
        fs2[i] = sigmoid_prime(p0.rho(i));
    }
    auto S = [&](const FlowProfile& p) { return trace_radial(p, fs1, fs2); };
    auto res = detail::trace_parabolic_sup(traj, c_disc, S, S);
    MonitorReport r;
    r.name = "schwarz";
    r.paper_tag = "parabolic-schwarz-trace";
    r.times = res.times;
    r.values = res.worst;
    r.measured_constant = res.c_meas;
    r.tolerance = c_disc;
    r.pass = std::isfinite(res.c_meas);
    r.detail = "excluded_nodes=" + std::to_string(res.excluded);
    return r;
}

// (d/dt - Lap) log tr_{omega_0} omega <= C tr_omega omega_0.
inline MonitorReport monitor_trace_aubin_yau(const FlowTrajectory& traj, double c_disc) {
    const auto& p0 = traj.snapshots.front();
    auto Q = [&](const FlowProfile& p) { return trace_in_reference(p, p0); };
    auto norm = [&](const FlowProfile& p) {
        return trace_radial(p, p0.phi(), p0.phi_prime());
    };
    auto res = detail::trace_parabolic_sup(traj, c_disc, Q, norm);
    MonitorReport r;
    r.name = "trace_aubin_yau";
    r.paper_tag = "reference-trace-bound";
    r.times = res.times;
    r.values = res.worst;
    r.measured_constant = res.c_meas;
    r.tolerance = c_disc;
    r.pass = std::isfinite(res.c_meas);
    r.detail = "excluded_nodes=" + std::to_string(res.excluded);
    return r;
}

// omega^m <= C omega_0^m with C expected to stay at 1 for these flows.
inline MonitorReport monitor_volume_bound(const FlowTrajectory& traj) {
    MonitorReport r;
    r.name = "volume_bound";
    r.paper_tag = "volume-form-upper-bound";
    r.tolerance = 1e-3;
    const auto& p0 = traj.snapshots.front();
    const int m = p0.m();
    double sup_all = 0.0;
    for (const auto& p : traj.snapshots) {
        double sup_t = 0.0;
        for (int i = 0; i < p.N(); ++i) {
            const double den = std::pow(p0.phi()[i], m - 1) * p0.phi_prime()[i];
            if (!(den > 0.0)) throw DegeneracyError("volume_bound: degenerate reference");
            const double ratio = std::pow(p.phi()[i], m - 1) * p.phi_prime()[i] / den;
            sup_t = std::max(sup_t, ratio);
        }
        r.times.push_back(p.t());
        r.values.push_back(sup_t);
        sup_all = std::max(sup_all, sup_t);
    }
    r.measured_constant = sup_all;
    const double initial = r.values.front();
    r.pass = sup_all <= 1.0 + 1e-3 && sup_all <= 10.0 * initial;
    return r;
}

// Three metric upper bounds:
//  (i)  sup_rho phi(t) <= b(0) (1 + 1e-9)            [the C/r^2 bound]
//  (ii) sup_rho (phi')^2 e^-rho never above its t=0 value by more than 0.1%
//  (iii) radial_length(-L -> rho) <= C e^{rho/4} on rho <= 0, C finite
inline MonitorReport monitor_metric_bounds(const FlowTrajectory& traj) {
    MonitorReport r;
    r.name = "metric_bounds";
    r.paper_tag = "metric-upper-bounds";
    r.tolerance = 1e-3;
    const double b0 = traj.snapshots.front().b0();
    bool ok_i = true, ok_ii = true;
    double m0 = 0.0;
    double c_meas = 0.0;
    for (std::size_t k = 0; k < traj.snapshots.size(); ++k) {
        const auto& p = traj.snapshots[k];
        double sup_phi = 0.0, sup_q = 0.0;
        for (int i = 0; i < p.N(); ++i) {
            sup_phi = std::max(sup_phi, p.phi()[i]);
            sup_q = std::max(sup_q, p.phi_prime()[i] * p.phi_prime()[i] * std::exp(-p.rho(i)));
        }
        if (sup_phi > b0 * (1.0 + 1e-9)) ok_i = false;
        if (k == 0) m0 = sup_q;
        if (sup_q > m0 * 1.001) ok_ii = false;
        for (int i = 1; i < p.N() && p.rho(i) <= 0.0; ++i)
            c_meas = std::max(c_meas, radial_length(p, -p.L(), p.rho(i)) /
                                          std::exp(p.rho(i) / 4.0));
        r.times.push_back(p.t());
        r.values.push_back(sup_q);
    }
    r.measured_constant = c_meas;
    r.pass = ok_i && ok_ii && std::isfinite(c_meas);
    if (!ok_i) r.detail += "phi exceeded b(0); ";
    if (!ok_ii) r.detail += "(phi')^2 e^-rho grew past 0.1%; ";
    return r;
}

// Fiber-diameter decay rate near the singular time (CollapseFiber only).
// Reports sup D(t)/(T-t)^{1/5}; fits the exponent over the last decade and
// requires alpha_hat >= 0.2; checks the exceptional-sphere proxy exponent
// >= 1/3 - 0.02 and the exact linear decay of the proper-transform area.
inline MonitorReport monitor_diam_rate(const FlowTrajectory& traj) {
    if (traj.scenario != ScenarioKind::CollapseFiber)
        throw DomainError("monitor_diam_rate: requires a CollapseFiber trajectory");
    MonitorReport r;
    r.name = "diam_rate";
    r.paper_tag = "fiber-diameter-rate";
    const double T = traj.T_predicted;
    const double t_last = traj.snapshots.back().t();
    const double tail = T - t_last;

    double sup_ratio = 0.0;
    std::vector<double> lx, ly, ex, ey;
    bool area_exact = true;
    for (const auto& p : traj.snapshots) {
        const double d = fiber_diam_upper(p);
        r.times.push_back(p.t());
        r.values.push_back(d);
        const double gap = T - p.t();
        if (p.t() >= 0.9 * T)
            sup_ratio = std::max(sup_ratio, d / std::pow(gap, 0.2));
        if (gap <= 10.0 * tail * (1.0 + 1e-12)) {
            lx.push_back(std::log(gap));
            ly.push_back(std::log(d));
            ex.push_back(std::log(gap));
            ey.push_back(std::log(sphere_diam_upper(p, -p.L())));
        }
        const double area = curve_area(class_at(traj.config.c0, p.t()),
                                       CurveClass::ProperTransformLine);
        if (!is_validation_mode(traj.config.c0) &&
            std::fabs(area - 2.0 * gap) > 1e-12 * std::max(1.0, traj.config.c0.h))
            area_exact = false;
    }
    const double alpha_hat = detail::slope_log_log(lx, ly);
    const double exc_hat = detail::slope_log_log(ex, ey);
    r.measured_constant = sup_ratio;
    r.tolerance = 0.2;
    r.pass = std::isfinite(sup_ratio) && alpha_hat >= 0.2 &&
             exc_hat >= 1.0 / 3.0 - 0.02 && area_exact;
    r.detail = "alpha_hat=" + std::to_string(alpha_hat) +
               " exc_hat=" + std::to_string(exc_hat) +
               " area_exact=" + (area_exact ? std::string("yes") : std::string("no"));
    return r;
}

// --------------------------------------------------------------------------
// Calibration on the exact homothety.  Returns the slack constants measured
// on validation runs with the same discretization policy as `like`.

inline DiscretizationSlack calibrate_disc_constants(const FlowConfig& like) {
    DiscretizationSlack out;
    const int m = like.c0.m;
    // Calibration transfers truncation constants from the homothety to runs
    // with genuine shape dynamics; those carry the same error structure with
    // a moderately larger coefficient.  One global headroom factor covers
    // the transfer; nothing is tuned per run.
    constexpr double kTransferHeadroom = 2.0;

    auto validation_cfg = [&](double stop_fraction) {
        FlowConfig cfg = like;
        cfg.c0 = KahlerClass{m, 1.0, 0.0};
        cfg.stop_fraction = stop_fraction;
        return cfg;
    };

    // Deep run for the radial subsolution monitor: the residual's time-
    // differencing error scales like 1/(T-t) and must be measured at depth.
    {
        const FlowTrajectory traj = run_flow(validation_cfg(like.stop_fraction));
        const auto& snaps = traj.snapshots;
        const double h2 = snaps.front().grid_step() * snaps.front().grid_step();
        double c = 1.0;
        for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
            const auto fm = detail::log_phi_prime(snaps[k - 1]);
            const auto f0 = detail::log_phi_prime(snaps[k]);
            const auto fp = detail::log_phi_prime(snaps[k + 1]);
            const auto num = detail::log_value_noise(snaps[k - 1]);
            const auto nu0 = detail::log_value_noise(snaps[k]);
            const auto nup = detail::log_value_noise(snaps[k + 1]);
            const double h1 = snaps[k].t() - snaps[k - 1].t();
            const double hh2 = snaps[k + 1].t() - snaps[k].t();
            const auto lap = laplacian_radial(snaps[k], f0);
            const double dt_loc = 0.5 * (h1 + hh2);
            for (int i = detail::kEdgeSkip; i + detail::kEdgeSkip < snaps[k].N(); ++i) {
                const double ft = detail::time_derivative_3pt(fm[i], f0[i], fp[i], h1, hh2);
                const double alw =
                    detail::residual_noise_allowance(snaps[k], i, num, nu0, nup, h1, hh2);
                const double res = ft - lap[i - 1] - alw;
                if (res > 0.0) c = std::max(c, res / (h2 + dt_loc));
            }
        }
        out.c_radial = kTransferHeadroom * c;
    }

    // Shallow run (to 0.8 T) for the trace monitors: away from the singular
    // time both sides of their inequalities are closed-form on the homothety,
    // so the positive part of (measured - analytic) is pure discretization.
    {
        const FlowTrajectory traj = run_flow(validation_cfg(0.2));
        const auto& snaps = traj.snapshots;
        const auto& p0 = snaps.front();
        const double h2 = p0.grid_step() * p0.grid_step();
        std::vector<double> fs1(p0.N()), fs2(p0.N());
        for (int i = 0; i < p0.N(); ++i) {
            fs1[i] = sigmoid(p0.rho(i));
            fs2[i] = sigmoid_prime(p0.rho(i));
        }
        double cs = 0.1, ca = 0.1;
        for (std::size_t k = 1; k + 1 < snaps.size(); ++k) {
            const double h1 = snaps[k].t() - snaps[k - 1].t();
            const double hh2 = snaps[k + 1].t() - snaps[k].t();
            const double dt_loc = 0.5 * (h1 + hh2);
            const double denom = h2 + dt_loc;
            const double s = 1.0 - (m + 1) * snaps[k].t();

            const auto num = detail::log_value_noise(snaps[k - 1]);
            const auto nu0 = detail::log_value_noise(snaps[k]);
            const auto nup = detail::log_value_noise(snaps[k + 1]);
            auto lhs_of = [&](auto make) {
                const auto vm = make(snaps[k - 1]);
                const auto v0 = make(snaps[k]);
                const auto vp = make(snaps[k + 1]);
                std::vector<double> logs(v0.size());
                for (std::size_t i = 0; i < v0.size(); ++i) logs[i] = std::log(v0[i]);
                const auto lap = laplacian_radial(snaps[k], logs);
                std::vector<double> lhs(v0.size() - 2);
                for (int i = 1; i + 1 < snaps[k].N(); ++i)
                    lhs[i - 1] = detail::time_derivative_3pt(std::log(vm[i]), std::log(v0[i]),
                                                             std::log(vp[i]), h1, hh2) -
                                 lap[i - 1] -
                                 detail::residual_noise_allowance(snaps[k], i, num, nu0, nup,
                                                                  h1, hh2);
                return lhs;
            };

            // Schwarz: LHS = ((m+1)/m) S analytically.
            {
                auto S = [&](const FlowProfile& p) { return trace_radial(p, fs1, fs2); };
                const auto lhs = lhs_of(S);
                const auto s0 = S(snaps[k]);
                for (int i = detail::kEdgeSkip; i + detail::kEdgeSkip < snaps[k].N(); ++i) {
                    const double overshoot = lhs[i - 1] - ((m + 1.0) / m) * s0[i];
                    if (overshoot > 0.0) cs = std::max(cs, overshoot / denom);
                }
            }
            // Aubin-Yau: LHS = -(m+1)/s analytically (log Q = log(ms)).
            {
                auto Q = [&](const FlowProfile& p) { return trace_in_reference(p, p0); };
                const auto lhs = lhs_of(Q);
                for (int i = detail::kEdgeSkip; i + detail::kEdgeSkip < snaps[k].N(); ++i) {
                    const double overshoot = lhs[i - 1] + (m + 1.0) / s;
                    if (overshoot > 0.0) ca = std::max(ca, overshoot / denom);
                }
            }
        }
        out.c_schwarz = kTransferHeadroom * cs;
        out.c_aubin_yau = kTransferHeadroom * ca;
    }
    return out;
}

}  // namespace krf
