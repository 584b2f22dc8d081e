#pragma once

// Kähler-Ricci flow under the rotation-invariant ansatz.
//
// With det g = e^{-m rho} phi^{m-1} phi', the flow reduces to the quasilinear
// parabolic equation
//
//     dphi/dt = (m-1) phi'/phi + phi''/phi' - m
//
// on rho in [-L, L].  The diffusion coefficient 1/phi' blows up where the
// profile flattens (it always does near the truncation ends), so time
// stepping is implicit backward Euler with a damped Newton solve on the
// analytic tridiagonal Jacobian.  The PDE transports the boundary values at
// exactly the cohomological rates b' = -(m+1), a' = -(m-1), which is why
// Dirichlet pinning to the evolved class values is consistent up to the
// e^{-L} truncation error.

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "krf/cohomology.hpp"
#include "krf/errors.hpp"
#include "krf/profile.hpp"

namespace krf {

struct FlowConfig {
    KahlerClass c0{2, 3.0, 1.0};
    double L = 15.0;
    int N = 4096;
    double dt_init = 1e-4;
    double stop_fraction = 1e-3;  // run until T - t = stop_fraction * T
    double dt_cap_factor = 0.1;   // dt <= dt_cap_factor * (T - t)
    double dt_growth = 1.2;       // growth factor after an accepted step
    double newton_tol = 1e-10;
    int newton_max_iter = 20;
    int snapshot_every = 1;       // store every k-th accepted step

    void validate() const {
        if (!(stop_fraction > 0.0 && stop_fraction < 1.0))
            throw ConfigError("FlowConfig: stop_fraction must lie in (0, 1)");
        if (!(dt_init > 0.0)) throw ConfigError("FlowConfig: dt_init must be positive");
        if (!(dt_cap_factor > 0.0 && dt_cap_factor <= 0.5))
            throw ConfigError("FlowConfig: dt_cap_factor must lie in (0, 0.5]");
        if (!(dt_growth >= 1.0)) throw ConfigError("FlowConfig: dt_growth must be >= 1");
        if (!(newton_tol > 0.0)) throw ConfigError("FlowConfig: newton_tol must be positive");
        if (newton_max_iter < 1) throw ConfigError("FlowConfig: newton_max_iter must be >= 1");
        if (snapshot_every < 1) throw ConfigError("FlowConfig: snapshot_every must be >= 1");
        require_kahler(c0, "FlowConfig");
        if (N < 64) throw ConfigError("FlowConfig: need N >= 64");
        if (L < 8.0) throw ConfigError("FlowConfig: need L >= 8");
    }
};

struct StepStats {
    double dt = 0.0;
    int newton_iters = 0;
};

struct FlowTrajectory {
    std::vector<FlowProfile> snapshots;  // strictly increasing times, all < T
    double T_predicted = 0.0;
    ScenarioKind scenario = ScenarioKind::CollapseFiber;
    std::vector<StepStats> step_stats;   // every accepted step
    FlowConfig config;
    bool singularity_reached = false;    // dt underflowed before t_stop

    // Checks the stored-class consistency of every snapshot.
    void validate() const {
        if (snapshots.empty()) throw DomainError("FlowTrajectory: no snapshots");
        double prev = -1.0;
        for (const auto& p : snapshots) {
            if (!(p.t() > prev) && prev >= 0.0)
                throw DomainError("FlowTrajectory: snapshot times not strictly increasing");
            if (!(p.t() < T_predicted))
                throw DomainError("FlowTrajectory: snapshot at or past the singular time");
            const KahlerClass ct = class_at(config.c0, p.t());
            const double a_expect = is_validation_mode(config.c0) ? 0.0 : ct.e;
            if (std::fabs(p.a() - a_expect) > 1e-9 || std::fabs(p.b() - ct.h) > 1e-9)
                throw DomainError("FlowTrajectory: stored boundary sizes drift from the class");
            prev = p.t();
        }
    }
};

// Homothetic shrinking of the Fubini-Study solution on plain P^m:
// phi(rho, t) = (1 - (m+1) t) sigma(rho).  The gold validation oracle.
inline FlowProfile exact_pm_profile(int m, double t, double L = 15.0, int N = 4096) {
    if (m < 2) throw DomainError("exact_pm_profile: m must be >= 2");
    if (!(t >= 0.0 && t < 1.0 / (m + 1)))
        throw DomainError("exact_pm_profile: t outside [0, 1/(m+1))");
    const double s = 1.0 - (m + 1) * t;
    std::vector<double> phi(N), dphi(N);
    const double h = 2.0 * L / (N - 1);
    for (int i = 0; i < N; ++i) {
        const double rho = -L + i * h;
        phi[i] = s * sigmoid(rho);
        dphi[i] = s * sigmoid_prime(rho);
    }
    return FlowProfile(m, L, N, std::move(phi), t, 0.0, s, 1.0, std::move(dphi));
}

namespace detail {

// Dirichlet targets at the truncation ends.  Blow-up classes pin to the exact
// evolved class values; validation mode (plain P^m, a = 0) pins to the exact
// homothety values so the truncated problem carries exact boundary data.
struct BoundaryData {
    double a, b;            // stored class sizes
    double left, right;     // grid endpoint values
};

inline BoundaryData boundary_at(const KahlerClass& c0, double L, double t) {
    const KahlerClass ct = class_at(c0, t);
    if (is_validation_mode(c0)) {
        const double s = ct.h;
        return {0.0, s, s * sigmoid(-L), s * sigmoid(L)};
    }
    return {ct.e, ct.h, ct.e, ct.h};
}

inline double reduced_rhs(int m, double phi, double dphi, double ddphi) {
    return (m - 1) * dphi / phi + ddphi / dphi - m;
}

}  // namespace detail

// One backward-Euler step of size dt.  Throws StepFailure when Newton does
// not converge and DegeneracyError when the converged profile is rejected
// (non-monotone or out of range); the caller retries with a smaller dt.
inline FlowProfile step(const FlowProfile& p, double dt, const FlowConfig& cfg,
                        int* newton_iters_out = nullptr) {
    if (!(dt > 0.0)) throw DomainError("step: dt must be positive");
    const int m = p.m();
    const int n = p.N();
    const double h = p.grid_step();
    const double t_new = p.t() + dt;
    const double T = first_singular_time(cfg.c0);
    if (!(t_new < T)) throw DomainError("step: t + dt reaches the singular time");

    const auto bd = detail::boundary_at(cfg.c0, p.L(), t_new);
    const std::vector<double>& uold = p.phi();

    // Newton seed: affine rescale of the old profile onto the new boundary
    // data.  Strictly monotone by construction (positive scale), exact on
    // the homothety, and free of the finite-difference noise a forward-Euler
    // predictor would inject into the exponentially flat tails.
    std::vector<double> u(n);
    const double scale = (bd.b - bd.a) / (p.b() - p.a());
    for (int i = 0; i < n; ++i) u[i] = bd.a + (uold[i] - p.a()) * scale;
    u.front() = bd.left;
    u.back() = bd.right;

    std::vector<double> F(n, 0.0), lo(n, 0.0), di(n, 1.0), up(n, 0.0), delta(n, 0.0);

    auto interior_ok = [&](const std::vector<double>& v) {
        for (int i = 1; i + 1 < n; ++i)
            if (!(v[i + 1] - v[i - 1] > 0.0) || !(v[i] > 0.0)) return false;
        return true;
    };
    if (!interior_ok(u)) throw StepFailure("step: predictor iterate degenerate");

    bool converged = false;
    int iters = 0;
    // Residuals carry phi units, which collapse like (b - a) near the
    // singular time; the tolerance must follow that scale.  On top of it
    // each node gets a representability allowance: the phi''/phi' term
    // divides rounding noise of nearly equal phi values by an exponentially
    // small phi', so the residual cannot be evaluated below
    // ~ dt * eps * |phi| / (h^2 phi').  Accepting at that floor is safe: the
    // same 1/phi' makes the Jacobian diagonal huge at those nodes, which
    // pins the solution error to ulp size there.
    const double tol = cfg.newton_tol * (bd.b - bd.a);
    constexpr double eps_mach = 2.220446049250313e-16;
    for (; iters < cfg.newton_max_iter; ++iters) {
        double excess = 0.0;
        for (int i = 1; i + 1 < n; ++i) {
            const double d1 = (u[i + 1] - u[i - 1]) / (2 * h);
            const double d2 = (u[i + 1] - 2 * u[i] + u[i - 1]) / (h * h);
            F[i] = u[i] - uold[i] - dt * detail::reduced_rhs(m, u[i], d1, d2);
            const double mag = std::fabs(u[i + 1]) + 2 * std::fabs(u[i]) + std::fabs(u[i - 1]);
            const double noise =
                8.0 * eps_mach *
                (std::fabs(u[i]) +
                 dt * (mag / (h * h) + std::fabs(d2) * mag / (2 * h * d1)) / d1);
            excess = std::max(excess, std::fabs(F[i]) - noise);
            // d RHS / d u_i and d RHS / d u_{i +- 1}
            const double dr_dc = -(m - 1) * d1 / (u[i] * u[i]) - (2.0 / (h * h)) / d1;
            const double common = (1.0 / (h * h)) / d1;
            const double dd1 = 1.0 / (2 * h);
            const double dr_dp = (m - 1) * dd1 / u[i] + common - d2 * dd1 / (d1 * d1);
            const double dr_dm = -(m - 1) * dd1 / u[i] + common + d2 * dd1 / (d1 * d1);
            di[i] = 1.0 - dt * dr_dc;
            up[i] = -dt * dr_dp;
            lo[i] = -dt * dr_dm;
        }
        if (excess <= tol) {
            converged = true;
            break;
        }
        // Thomas solve of J delta = -F on the interior band.
        std::vector<double> cp(n, 0.0), dp(n, 0.0);
        double den = di[1];
        if (std::fabs(den) < 1e-300) throw StepFailure("step: singular Jacobian");
        cp[1] = up[1] / den;
        dp[1] = -F[1] / den;
        for (int i = 2; i + 1 < n; ++i) {
            den = di[i] - lo[i] * cp[i - 1];
            if (std::fabs(den) < 1e-300) throw StepFailure("step: singular Jacobian");
            cp[i] = up[i] / den;
            dp[i] = (-F[i] - lo[i] * dp[i - 1]) / den;
        }
        delta[n - 2] = dp[n - 2];
        for (int i = n - 3; i >= 1; --i) delta[i] = dp[i] - cp[i] * delta[i + 1];

        // Damped update: keep the iterate evaluable (positive phi, positive
        // central differences).
        double lambda = 1.0;
        std::vector<double> trial(u);
        for (int tries = 0; tries < 30; ++tries) {
            for (int i = 1; i + 1 < n; ++i) trial[i] = u[i] + lambda * delta[i];
            if (interior_ok(trial)) break;
            lambda *= 0.5;
            if (tries == 29) throw StepFailure("step: damping underflow");
        }
        u.swap(trial);
    }
    if (newton_iters_out) *newton_iters_out = iters;
    if (!converged) throw StepFailure("step: Newton did not converge in " +
                                      std::to_string(cfg.newton_max_iter) + " iterations");

    if (!FlowProfile::admissible(u, bd.a, bd.b, p.b0()))
        throw DegeneracyError("step: converged profile rejected at t = " +
                              std::to_string(t_new));
    return FlowProfile(m, p.L(), n, std::move(u), t_new, bd.a, bd.b, p.b0());
}

// Adaptive backward-Euler integration from the reference metric to
// t_stop = T (1 - stop_fraction).  dt halves on a rejected step, grows by
// dt_growth on success, and is capped by dt_cap_factor * (T - t).  When dt
// underflows (< 1e-12) the trajectory is returned with singularity_reached
// set and the last good profile as final snapshot.
inline FlowTrajectory run_flow(const FlowConfig& cfg) {
    cfg.validate();
    FlowTrajectory traj;
    traj.config = cfg;
    traj.T_predicted = first_singular_time(cfg.c0);
    traj.scenario = classify(cfg.c0);

    const double T = traj.T_predicted;
    const double t_stop = T * (1.0 - cfg.stop_fraction);

    FlowProfile current = init_profile(cfg.c0, cfg.L, cfg.N);
    traj.snapshots.push_back(current);

    double dt = cfg.dt_init;
    long step_index = 0;
    while (current.t() < t_stop * (1.0 - 1e-15)) {
        dt = std::min({dt, cfg.dt_cap_factor * (T - current.t()), t_stop - current.t()});
        int iters = 0;
        try {
            FlowProfile next = step(current, dt, cfg, &iters);
            current = std::move(next);
        } catch (const StepFailure&) {
            dt *= 0.5;
            if (dt < 1e-12) { traj.singularity_reached = true; break; }
            continue;
        } catch (const DegeneracyError&) {
            dt *= 0.5;
            if (dt < 1e-12) { traj.singularity_reached = true; break; }
            continue;
        }
        traj.step_stats.push_back({dt, iters});
        ++step_index;
        const bool at_stop = current.t() >= t_stop * (1.0 - 1e-15);
        if (step_index % cfg.snapshot_every == 0 || at_stop)
            traj.snapshots.push_back(current);
        dt *= cfg.dt_growth;
    }
    if (traj.singularity_reached && traj.snapshots.back().t() < current.t())
        traj.snapshots.push_back(current);
    return traj;
}

}  // namespace krf
