#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "krf/profile.hpp"
#include "support/oracles.hpp"

using namespace krf;
using Catch::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

FlowProfile model_profile(int m, double c, double L = 15.0, int N = 4096) {
    // phi = c + e^rho: the reference blow-up model with exceptional size c
    return FlowProfile::from_function(
        m, L, N, [c](double r) { return c + std::exp(r); }, 0.0,
        [](double r) { return std::exp(r); });
}

FlowProfile flat_profile(int m, double L = 4.0, int N = 1025) {
    return FlowProfile::from_function(
        m, L, N, [](double r) { return std::exp(r); }, 0.0,
        [](double r) { return std::exp(r); });
}

}  // namespace

TEST_CASE("init_profile: sigmoid reference metric") {
    const KahlerClass c0{2, 3.0, 1.0};
    const auto p = init_profile(c0, 15.0, 4096);
    CHECK(p.phi_at(0.0) == Approx(2.0).margin(1e-6));
    CHECK(std::fabs(p.phi()[0] - 1.0) <= 5e-6 * 2.0);
    CHECK(std::fabs(p.phi().back() - 3.0) <= 5e-6 * 2.0);
    double min_gap = 1e300;
    for (int i = 0; i + 1 < p.N(); ++i) min_gap = std::min(min_gap, p.phi()[i + 1] - p.phi()[i]);
    CHECK(min_gap > 0.0);
    CHECK_THROWS_AS(init_profile(KahlerClass{2, 1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(init_profile(c0, 15.0, 32), ConfigError);
    CHECK_THROWS_AS(init_profile(c0, 4.0, 4096), ConfigError);
}

TEST_CASE("metric_eigenvalues: flat metric is (1, 1)") {
    const auto p = flat_profile(2);
    for (int i : {0, 100, 512, 1024}) {
        const auto ev = metric_eigenvalues(p, p.rho(i));
        CHECK(ev.sphere == Approx(1.0).epsilon(1e-12));
        CHECK(ev.radial == Approx(1.0).epsilon(1e-12));
    }
}

TEST_CASE("metric_eigenvalues: blow-up model matches the coordinate matrix") {
    // Ansatz eigenvalues against a direct 2m x 2m eigendecomposition of
    // delta_ij + c (1/r^2)(delta_ij - z_i conj(z_j)/r^2).
    for (int m : {2, 3}) {
        const double c = 0.7;
        const auto p = model_profile(m, c);
        std::mt19937_64 rng(2024);
        for (int trial = 0; trial < 10; ++trial) {
            const int node = 512 + (trial * 997) % 3000;
            const double rho = p.rho(node);
            const double r2 = std::exp(rho);
            const auto z = oracle::random_sphere_point(m, r2, rng);
            std::vector<std::vector<oracle::cplx>> M(m, std::vector<oracle::cplx>(m, 0.0));
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < m; ++j) {
                    M[i][j] = -(c / (r2 * r2)) * z[i] * std::conj(z[j]);
                    if (i == j) M[i][j] += 1.0 + c / r2;
                }
            const auto ev = oracle::hermitian_eigenvalues(M);  // ascending
            const auto got = metric_eigenvalues(p, rho);
            const double sphere_scaled = got.sphere * std::exp(rho) / r2;  // == got.sphere
            CHECK(got.radial == Approx(ev.front()).epsilon(1e-10));
            CHECK(sphere_scaled == Approx(ev.back()).epsilon(1e-10));
        }
    }
}

TEST_CASE("metric_eigenvalues: init profile values at rho = 0") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0});
    const auto ev = metric_eigenvalues(p, 0.0);
    CHECK(ev.sphere == Approx(2.0).margin(1e-6));
    CHECK(ev.radial == Approx(0.5).margin(1e-4));
}

TEST_CASE("vf_norm_sq_on_line: closed forms") {
    const auto model = model_profile(2, 0.7);
    for (int node : {100, 2000, 3000}) {
        const double rho = model.rho(node);
        CHECK(vf_norm_sq_on_line(model, rho, VectorFieldSpec::radial()) ==
              Approx(std::exp(rho)).epsilon(1e-12));
    }
    const auto flat = flat_profile(2);
    CHECK(vf_norm_sq_on_line(flat, flat.rho(700), VectorFieldSpec::coord(2)) ==
          Approx(1.0).epsilon(1e-12));
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0});
    CHECK(vf_norm_sq_on_line(p, 0.0, VectorFieldSpec::linear(2, 1)) ==
          Approx(2.0).margin(1e-6));
    // fields with no component along the line
    CHECK(vf_norm_sq_on_line(p, 0.0, VectorFieldSpec::linear(1, 2)) == 0.0);
    CHECK(vf_norm_sq_on_line(p, 0.0, VectorFieldSpec::radial_scaled(2)) == 0.0);
}

TEST_CASE("ansatz vs coordinates: contraction reproduces the evaluators") {
    // At random (rho, angular) configurations the m x m matrix contraction
    // must match vf_norm_sq_on_line / the vf_sphere_sup integrand to 1e-10.
    const int m = 3;
    const auto p = init_profile(KahlerClass{3, 4.0, 2.0});
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<int> node_pick(64, p.N() - 65);
    for (int trial = 0; trial < 20; ++trial) {
        const int node = node_pick(rng);
        const double rho = p.rho(node);
        const double r2 = std::exp(rho);
        const double phi = p.phi_at(rho), dphi = p.phi_prime_at(rho);

        // on-line values: z = (sqrt(r2), 0, ..., 0)
        std::vector<oracle::cplx> zline(m, 0.0);
        zline[0] = std::sqrt(r2);
        const auto Hline = oracle::ansatz_metric(zline, phi, dphi);
        for (const auto& V : field_catalog(m)) {
            const double direct = vf_norm_sq_on_line(p, rho, V);
            const double assembled =
                oracle::contract_norm_sq(Hline, oracle::field_components(V, zline));
            CHECK(assembled == Approx(direct).margin(1e-10 * (1.0 + direct)));
        }

        // sup integrand values at explicit angular allocations
        std::uniform_real_distribution<double> frac(0.05, 0.95);
        const double s = frac(rng) * r2;
        {
            // Linear(1,2): |w^2|^2 = s, remainder on w^1
            std::vector<oracle::cplx> z(m, 0.0);
            z[1] = std::sqrt(s);
            z[0] = std::sqrt(r2 - s);
            const auto H = oracle::ansatz_metric(z, phi, dphi);
            const double assembled = oracle::contract_norm_sq(
                H, oracle::field_components(VectorFieldSpec::linear(1, 2), z));
            const double integrand =
                s * (std::exp(-rho) * phi + std::exp(-2 * rho) * (dphi - phi) * (r2 - s));
            CHECK(assembled == Approx(integrand).margin(1e-10 * (1.0 + integrand)));
        }
        {
            // RadialScaled(1): |w^1|^2 = s, remainder elsewhere
            std::vector<oracle::cplx> z(m, 0.0);
            z[0] = std::sqrt(s);
            z[2] = std::sqrt(r2 - s);
            const auto H = oracle::ansatz_metric(z, phi, dphi);
            const double assembled = oracle::contract_norm_sq(
                H, oracle::field_components(VectorFieldSpec::radial_scaled(1), z));
            CHECK(assembled == Approx(s * dphi).margin(1e-10 * (1.0 + s * dphi)));
        }
    }
}

TEST_CASE("vf_sup: angular maximization against Monte-Carlo sampling") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 1024);
    std::mt19937_64 rng(99);
    const VectorFieldSpec fields[] = {VectorFieldSpec::linear(2, 1),
                                      VectorFieldSpec::linear(1, 1),
                                      VectorFieldSpec::radial_scaled(1)};
    for (const auto& V : fields) {
        for (int node : {200, 512, 800}) {
            const double rho = p.rho(node);
            const double r2 = std::exp(rho);
            const double phi = p.phi_at(rho), dphi = p.phi_prime_at(rho);
            const double analytic = vf_sphere_sup(p, rho, V);
            double mc = 0.0;
            for (int k = 0; k < 100000; ++k) {
                const auto z = oracle::random_sphere_point(2, r2, rng);
                const auto H = oracle::ansatz_metric(z, phi, dphi);
                mc = std::max(mc, oracle::contract_norm_sq(H, oracle::field_components(V, z)));
            }
            CHECK(mc <= analytic * (1.0 + 1e-9));
            CHECK(mc >= analytic * (1.0 - 5e-3));
        }
    }
}

TEST_CASE("vf_sup: global values") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0});
    // phi' < phi everywhere here, so the Linear(i, j != i) sup is b
    CHECK(vf_sup(p, VectorFieldSpec::linear(2, 1)) == Approx(3.0).epsilon(1e-12));
    // flat truncated profile: |V^rad_1|^2 = |w^1|^2 phi' peaks at the boundary
    const auto flat = flat_profile(2, 4.0, 1025);
    CHECK(vf_sup(flat, VectorFieldSpec::radial_scaled(1)) ==
          Approx(std::exp(2 * 4.0)).epsilon(1e-9));
    // non-lifting fields are rejected
    CHECK_THROWS_AS(vf_sup(p, VectorFieldSpec::radial()), DomainError);
    CHECK_THROWS_AS(vf_sup(p, VectorFieldSpec::coord(1)), DomainError);
}

TEST_CASE("vf_sup: scales linearly under profile scaling") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 512);
    for (double s : {0.25, 4.0}) {
        const auto q = p.scaled(s);
        for (const auto& V : lifting_catalog(2))
            CHECK(vf_sup(q, V) == Approx(s * vf_sup(p, V)).epsilon(1e-12));
    }
}

TEST_CASE("radial_length: model profile closed form") {
    const auto p = model_profile(2, 0.7);
    for (double rho2 : {-3.0, 0.0, 2.0}) {
        const double expect = std::exp(rho2 / 2) - std::exp(-p.L() / 2);
        CHECK(radial_length(p, -p.L(), rho2) == Approx(expect).epsilon(1e-5));
    }
    CHECK(radial_length(p, 1.3, 1.3) == 0.0);
    // additivity over concatenation is exact
    const double whole = radial_length(p, -2.0, 3.0);
    CHECK(radial_length(p, -2.0, 0.7) + radial_length(p, 0.7, 3.0) ==
          Approx(whole).margin(1e-14));
}

TEST_CASE("radial_length: quadrature oracle on the sigmoid profile") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0});
    const double numeric = radial_length(p, -p.L(), p.L());
    const double exact = oracle::adaptive_simpson(
        [](double r) { return 0.5 * std::sqrt(2.0 * sigmoid_prime(r)); }, -15.0, 15.0);
    CHECK(numeric == Approx(exact).epsilon(0.01));
}

TEST_CASE("sphere_diam_upper: flat unit sphere and degeneration") {
    const auto flat = flat_profile(2);
    CHECK(sphere_diam_upper(flat, 0.0) == Approx(kPi).epsilon(1e-9));
    // scaling by s multiplies diameters by sqrt(s)
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 512);
    for (double s : {0.25, 4.0}) {
        const auto q = p.scaled(s);
        CHECK(sphere_diam_upper(q, 1.0) ==
              Approx(std::sqrt(s) * sphere_diam_upper(p, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("fiber_diam_upper: refinement, scaling, near-degenerate slab") {
    const KahlerClass c0{2, 3.0, 1.0};
    const auto coarse = init_profile(c0, 15.0, 4096);
    const auto fine = init_profile(c0, 15.0, 65536);
    CHECK(fiber_diam_upper(coarse) == Approx(fiber_diam_upper(fine)).epsilon(0.01));

    for (double s : {0.25, 4.0}) {
        const auto q = coarse.scaled(s);
        CHECK(fiber_diam_upper(q) ==
              Approx(std::sqrt(s) * fiber_diam_upper(coarse)).epsilon(1e-9));
    }

    // a near-flat slab contributes almost nothing to the radial integral
    const auto slab = FlowProfile::from_function(
        2, 15.0, 8192,
        [](double r) { return sigmoid(r + 10.0) + sigmoid(r - 10.0); });
    const double mid = radial_length(slab, -5.0, 5.0);
    CHECK(mid <= 11.0 * std::sqrt(sigmoid_prime(5.0)));
}

TEST_CASE("volume_ratio: identity and homothety") {
    const auto p0 = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 1024);
    for (int node : {10, 500, 1000})
        CHECK(volume_ratio(p0, p0, p0.rho(node)) == Approx(1.0).epsilon(1e-12));
    // exact homothety: ratio is s^m uniformly
    for (int m : {2, 3}) {
        const auto e0 = FlowProfile::from_function(
            m, 15.0, 1024, [](double r) { return sigmoid(r); }, 0.0,
            [](double r) { return sigmoid_prime(r); });
        const double s = 0.55;
        const auto et = e0.scaled(s);
        for (int node : {50, 512, 990})
            CHECK(volume_ratio(et, e0, e0.rho(node)) ==
                  Approx(std::pow(s, m)).epsilon(1e-10));
    }
}

TEST_CASE("laplacian_radial: constants, flat log r^2, PDE self-consistency") {
    const auto flat = flat_profile(2, 6.0, 4097);
    std::vector<double> ones(flat.N(), 3.14);
    const auto lap0 = laplacian_radial(flat, ones);
    for (double v : lap0) CHECK(v == Approx(0.0).margin(1e-14));

    // f = rho = log r^2 on flat C^m: reduced formula vs coordinate-space
    // finite differences of the radial Laplacian (1/4)(f_rr + (2m-1) f_r / r)
    for (int m : {2, 3}) {
        const auto fl = flat_profile(m, 6.0, 4097);
        std::vector<double> f(fl.N());
        for (int i = 0; i < fl.N(); ++i) f[i] = fl.rho(i);
        const auto lap = laplacian_radial(fl, f);
        for (int i : {500, 2048, 3500}) {
            const double r = std::exp(fl.rho(i) / 2);
            const double dr = 1e-4 * r;
            auto g = [](double rr) { return std::log(rr * rr); };
            const double f_r = (g(r + dr) - g(r - dr)) / (2 * dr);
            const double f_rr = (g(r + dr) - 2 * g(r) + g(r - dr)) / (dr * dr);
            const double coord = 0.25 * (f_rr + (2 * m - 1) * f_r / r);
            CHECK(lap[i - 1] == Approx((m - 1) * std::exp(-fl.rho(i))).epsilon(1e-6));
            CHECK(lap[i - 1] == Approx(coord).epsilon(1e-5));
        }
    }

    // exact P^m profile: dphi/dt = Lap(phi) - m must hold to 1e-6.  The
    // check covers |rho| <= 6: in the tails the second difference of phi
    // divided by phi' ~ e^-|rho| amplifies double rounding noise past any
    // discretization target (noise ~ eps |phi| e^{|rho|} / h^2).
    for (int m : {2, 3}) {
        const int N = 32769;
        const double t = 0.05;
        const double s = 1.0 - (m + 1) * t;
        const auto p = FlowProfile::from_function(
            m, 15.0, N, [s](double r) { return s * sigmoid(r); }, t,
            [s](double r) { return s * sigmoid_prime(r); });
        const auto lap = laplacian_radial(p, p.phi());
        double worst = 0.0;
        for (int i = 1; i + 1 < N; ++i) {
            if (std::fabs(p.rho(i)) > 6.0) continue;
            const double dphi_dt = -(m + 1) * sigmoid(p.rho(i));
            worst = std::max(worst, std::fabs(dphi_dt - (lap[i - 1] - m)));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("trace_radial: self-trace, Fubini-Study on the homothety, linearity") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 1024);
    const auto self_trace = trace_in_reference(p, p);
    for (double v : self_trace) CHECK(v == Approx(2.0).epsilon(1e-12));

    for (int m : {2, 3}) {
        const double t = 0.07;
        const double s = 1.0 - (m + 1) * t;
        const int N = 2049;
        const auto pt = FlowProfile::from_function(
            m, 15.0, N, [s](double r) { return s * sigmoid(r); }, t,
            [s](double r) { return s * sigmoid_prime(r); });
        std::vector<double> fs1(N), fs2(N);
        for (int i = 0; i < N; ++i) {
            fs1[i] = sigmoid(pt.rho(i));
            fs2[i] = sigmoid_prime(pt.rho(i));
        }
        const auto tr = trace_radial(pt, fs1, fs2);
        for (int i : {0, 1000, 2048})
            CHECK(tr[i] == Approx(m / s).epsilon(1e-12));
        // scaling the reference scales the trace
        std::vector<double> fs1c(fs1), fs2c(fs2);
        for (auto& v : fs1c) v *= 2.5;
        for (auto& v : fs2c) v *= 2.5;
        const auto tr2 = trace_radial(pt, fs1c, fs2c);
        for (int i : {0, 1000, 2048}) CHECK(tr2[i] == Approx(2.5 * tr[i]).epsilon(1e-12));
    }
}

TEST_CASE("homogeneity: lengths scale by sqrt(s), traces by 1/s") {
    const auto p = init_profile(KahlerClass{2, 3.0, 1.0}, 15.0, 512);
    for (double s : {0.25, 4.0}) {
        const auto q = p.scaled(s);
        CHECK(radial_length(q, -3.0, 2.0) ==
              Approx(std::sqrt(s) * radial_length(p, -3.0, 2.0)).epsilon(1e-12));
        const auto trp = trace_in_reference(p, p);
        const auto trq = trace_in_reference(q, p);
        for (int i : {5, 250, 500})
            CHECK(trq[i] == Approx(s * trp[i]).epsilon(1e-12));  // omega scaled up
        const auto trr = trace_in_reference(p, q);
        for (int i : {5, 250, 500})
            CHECK(trr[i] == Approx(trp[i] / s).epsilon(1e-12));  // reference scaled up
    }
}

TEST_CASE("profile invariants: range and pinning are enforced") {
    // out-of-range phi
    std::vector<double> bad(128);
    for (int i = 0; i < 128; ++i) bad[i] = 0.5 + 3.0 * i / 127.0;
    CHECK_THROWS_AS(FlowProfile(2, 15.0, 128, bad, 0.0, 1.0, 3.0, 3.0), DegeneracyError);
    // non-monotone phi
    std::vector<double> wiggle(128);
    for (int i = 0; i < 128; ++i) wiggle[i] = 1.0 + 2.0 * i / 127.0;
    std::swap(wiggle[60], wiggle[61]);
    CHECK_THROWS_AS(FlowProfile(2, 15.0, 128, wiggle, 0.0, 1.0, 3.0, 3.0), DegeneracyError);
}
