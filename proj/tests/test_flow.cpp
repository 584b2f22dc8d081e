#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "krf/cohomology.hpp"
#include "krf/flow.hpp"

using namespace krf;
using Catch::Approx;

namespace {

double max_error_vs_exact(const FlowTrajectory& traj) {
    double err = 0.0;
    for (const auto& p : traj.snapshots) {
        const FlowProfile exact = exact_pm_profile(p.m(), p.t(), p.L(), p.N());
        for (int i = 0; i < p.N(); ++i)
            err = std::max(err, std::fabs(p.phi()[i] - exact.phi()[i]));
    }
    return err;
}

}  // namespace

TEST_CASE("exact_pm_profile: values and domain") {
    const auto p = exact_pm_profile(2, 0.0, 15.0, 1025);
    CHECK(p.phi_at(0.0) == Approx(0.5).margin(1e-9));
    CHECK(p.a() == 0.0);
    CHECK(p.b() == 1.0);
    CHECK_THROWS_AS(exact_pm_profile(2, 1.0 / 3.0, 15.0, 1025), DomainError);
    CHECK_THROWS_AS(exact_pm_profile(2, -0.1, 15.0, 1025), DomainError);
}

TEST_CASE("reduced RHS: boundary transport rates are algebraic identities") {
    // near +L the profile looks like b - c e^-rho and the RHS limits to -(m+1)
    for (int m : {2, 3}) {
        const double b = 2.3, c = 0.4;
        for (double rho : {12.0, 14.0}) {
            const double phi = b - c * std::exp(-rho);
            const double dphi = c * std::exp(-rho);
            const double ddphi = -c * std::exp(-rho);
            CHECK(detail::reduced_rhs(m, phi, dphi, ddphi) ==
                  Approx(-(m + 1.0)).margin(1e-4));
        }
        // near -L with positive exceptional size a: rate -(m-1)
        const double a = 0.8;
        for (double rho : {-14.0, -12.0}) {
            const double phi = a + c * std::exp(rho);
            const double dphi = c * std::exp(rho);
            CHECK(detail::reduced_rhs(m, phi, dphi, dphi) ==
                  Approx(-(m - 1.0)).margin(1e-4));
        }
    }
}

TEST_CASE("step: one backward-Euler step tracks the exact homothety") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 1.0, 0.0};
    cfg.N = 1025;
    const auto p = exact_pm_profile(2, 0.1, cfg.L, cfg.N);
    const auto next = step(p, 1e-4, cfg);
    const auto exact = exact_pm_profile(2, 0.1001, cfg.L, cfg.N);
    double err = 0.0;
    for (int i = 0; i < cfg.N; ++i)
        err = std::max(err, std::fabs(next.phi()[i] - exact.phi()[i]));
    CHECK(err <= 1e-6);
    CHECK_THROWS_AS(step(p, 0.5, cfg), DomainError);  // reaches T
}

TEST_CASE("run_flow: Dirichlet boundary transport to t = 0.1") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 1.0};
    cfg.N = 512;
    cfg.stop_fraction = 0.9;  // T = 1, so t_stop = 0.1
    const auto traj = run_flow(cfg);
    traj.validate();
    const auto& last = traj.snapshots.back();
    CHECK(last.t() == Approx(0.1).margin(1e-12));
    CHECK(std::fabs(last.phi().back() - 2.7) <= 1e-9);
    CHECK(std::fabs(last.phi().front() - 0.9) <= 1e-9);
}

TEST_CASE("run_flow: class consistency at every snapshot") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 1.0};
    cfg.N = 512;
    cfg.stop_fraction = 0.02;
    const auto traj = run_flow(cfg);
    traj.validate();
    CHECK(traj.scenario == ScenarioKind::CollapseFiber);
    for (const auto& p : traj.snapshots) {
        const auto ct = class_at(cfg.c0, p.t());
        CHECK(std::fabs(p.b() - ct.h) <= 1e-9);
        CHECK(std::fabs(p.phi().front() - curve_area(ct, CurveClass::ExcLine)) <=
              1e-6 * 3.0);
        CHECK(std::fabs(p.phi().back() - ct.h) <= 1e-9);
    }
}

TEST_CASE("run_flow: validation mode tracks the exact solution") {
    for (int m : {2, 3}) {
        FlowConfig cfg;
        cfg.c0 = KahlerClass{m, 1.0, 0.0};
        cfg.N = 512;
        cfg.stop_fraction = 0.2;  // up to t = 0.8 / (m+1)
        const auto traj = run_flow(cfg);
        traj.validate();
        CHECK(traj.snapshots.back().t() == Approx(0.8 / (m + 1)).margin(1e-12));
        CHECK(max_error_vs_exact(traj) <= 1e-3);
    }
}

TEST_CASE("run_flow: refinement shrinks the validation error by >= 3.5x") {
    auto run_at = [](int N, double dt_scale) {
        FlowConfig cfg;
        cfg.c0 = KahlerClass{2, 1.0, 0.0};
        cfg.N = N;
        cfg.stop_fraction = 0.2;
        cfg.dt_init *= dt_scale;
        cfg.dt_cap_factor *= dt_scale;
        return max_error_vs_exact(run_flow(cfg));
    };
    const double coarse = run_at(512, 1.0);
    const double fine = run_at(1024, 0.5);
    CHECK(coarse / fine >= 3.5);
}

TEST_CASE("run_flow: ContractExceptional endgame") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 0.5};
    cfg.N = 1024;
    const auto traj = run_flow(cfg);
    traj.validate();
    CHECK(traj.scenario == ScenarioKind::ContractExceptional);
    CHECK(traj.T_predicted == Approx(0.5));
    const auto& last = traj.snapshots.back();
    // exceptional size collapses, hyperplane side survives
    CHECK(last.phi().front() < 1e-3);
    CHECK(last.phi().back() >= 0.9 * 1.5);
    CHECK(sphere_diam_upper(last, -last.L()) <= 0.12);
    double near_edge = 0.0;
    for (int i = 0; i < 8; ++i) near_edge = std::max(near_edge, last.phi_prime()[i]);
    CHECK(near_edge <= 1e-4);
}

TEST_CASE("run_flow: CollapseFiber endgame") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 1.0};
    cfg.N = 1024;
    const auto traj = run_flow(cfg);
    traj.validate();
    CHECK_FALSE(traj.singularity_reached);
    const auto& last = traj.snapshots.back();
    CHECK(last.t() == Approx(0.999).margin(1e-12));
    double sup_phi = 0.0;
    for (double v : last.phi()) sup_phi = std::max(sup_phi, v);
    CHECK(sup_phi <= 3.0 * 1e-3 * 1.001);
}

TEST_CASE("comparison principle: ordered initial data stays ordered") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 1.0};
    cfg.N = 512;
    const auto lo0 = init_profile(cfg.c0, cfg.L, cfg.N);
    std::vector<double> bumped = lo0.phi();
    for (int i = 0; i < cfg.N; ++i) {
        const double rho = lo0.rho(i);
        bumped[i] += 0.01 * std::exp(-0.5 * rho * rho);
    }
    FlowProfile hi0(2, cfg.L, cfg.N, std::move(bumped), 0.0, 1.0, 3.0, 3.0);

    FlowProfile lo = lo0, hi = hi0;
    double dt = 1e-4;
    for (int k = 0; k < 40; ++k) {
        lo = step(lo, dt, cfg);
        hi = step(hi, dt, cfg);
        bool ordered = true;
        for (int i = 0; i < cfg.N; ++i)
            ordered = ordered && lo.phi()[i] <= hi.phi()[i] + 1e-10;
        CHECK(ordered);
        dt = std::min(1.2 * dt, 2e-3);
    }
}

TEST_CASE("step stats are recorded") {
    FlowConfig cfg;
    cfg.c0 = KahlerClass{2, 3.0, 1.0};
    cfg.N = 256;
    cfg.stop_fraction = 0.5;
    const auto traj = run_flow(cfg);
    CHECK_FALSE(traj.step_stats.empty());
    for (const auto& s : traj.step_stats) {
        CHECK(s.dt > 0.0);
        CHECK(s.newton_iters >= 0);
        CHECK(s.newton_iters <= cfg.newton_max_iter);
    }
}
