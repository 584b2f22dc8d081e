#pragma once

// U(m)-invariant metrics on Bl_p P^m through their momentum profile.
//
// In the log-radius variable rho = log r^2 a rotation-invariant Kähler metric
// is determined by one increasing function phi(rho) = u'(rho):
//
//     g_{ij} = e^{-rho} phi delta_ij + e^{-2rho} (phi' - phi) conj(z_i) z_j
//
// with eigenvalues e^{-rho} phi (sphere directions, multiplicity m-1) and
// e^{-rho} phi' (radial direction).  phi(-inf) = a is the exceptional-divisor
// size, phi(+inf) = b the hyperplane size; both are intersection numbers in
// the convention where a line in P^1 has Fubini-Study area 1.
//
// The profile lives on a truncated uniform grid rho in [-L, L].  A profile is
// an immutable value after construction; every evaluation here is read-only.

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "krf/cohomology.hpp"
#include "krf/errors.hpp"

namespace krf {

inline double sigmoid(double x) {
    // exp(-|x|) form avoids overflow at large |x|
    if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
    const double ex = std::exp(x);
    return ex / (1.0 + ex);
}

inline double sigmoid_prime(double x) {
    const double s = sigmoid(x);
    return s * (1.0 - s);
}

struct VectorFieldSpec {
    enum class Kind { Coord, Linear, RadialScaled, Radial };
    Kind kind = Kind::Radial;
    int i = 1;  // 1-based coordinate indices
    int j = 1;

    static VectorFieldSpec coord(int i) { return {Kind::Coord, i, 0}; }
    static VectorFieldSpec linear(int i, int j) { return {Kind::Linear, i, j}; }
    static VectorFieldSpec radial_scaled(int i) { return {Kind::RadialScaled, i, 0}; }
    static VectorFieldSpec radial() { return {Kind::Radial, 0, 0}; }

    // Fields vanishing at the blow-up point extend to Bl_p P^m.
    bool lifts_to_blowup() const {
        return kind == Kind::Linear || kind == Kind::RadialScaled;
    }

    std::string name() const {
        switch (kind) {
            case Kind::Coord: return "Coord(" + std::to_string(i) + ")";
            case Kind::Linear:
                return "Linear(" + std::to_string(i) + "," + std::to_string(j) + ")";
            case Kind::RadialScaled: return "RadialScaled(" + std::to_string(i) + ")";
            case Kind::Radial: return "Radial";
        }
        return "?";
    }
};

// The m^2 + 2m = (m+1)^2 - 1 spanning holomorphic fields of P^m in the chart
// around the blow-up point.
inline std::vector<VectorFieldSpec> field_catalog(int m) {
    std::vector<VectorFieldSpec> v;
    for (int i = 1; i <= m; ++i) v.push_back(VectorFieldSpec::coord(i));
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) v.push_back(VectorFieldSpec::linear(i, j));
    for (int i = 1; i <= m; ++i) v.push_back(VectorFieldSpec::radial_scaled(i));
    return v;
}

// The subset that lifts to the blow-up (admissible for global sup monitors).
inline std::vector<VectorFieldSpec> lifting_catalog(int m) {
    std::vector<VectorFieldSpec> v;
    for (int i = 1; i <= m; ++i)
        for (int j = 1; j <= m; ++j) v.push_back(VectorFieldSpec::linear(i, j));
    for (int i = 1; i <= m; ++i) v.push_back(VectorFieldSpec::radial_scaled(i));
    return v;
}

class FlowProfile {
public:
    // phi must be strictly increasing, within [a, b] up to 1e-9 * b0, and
    // pinned to (a, b) at the ends to 5e-6 * (b - a) once L >= 12.
    // An exact derivative array may be supplied for analytic profiles;
    // otherwise phi' comes from second-order finite differences.
    FlowProfile(int m, double L, int N, std::vector<double> phi, double t,
                double a, double b, double b0,
                std::vector<double> dphi_exact = {})
        : m_(m), L_(L), N_(N), t_(t), a_(a), b_(b), b0_(b0),
          phi_(std::move(phi)), dphi_(std::move(dphi_exact)) {
        validate();
        build_caches();
    }

    static FlowProfile from_function(int m, double L, int N,
                                     const std::function<double(double)>& f,
                                     double t = 0.0,
                                     const std::function<double(double)>& fprime = {}) {
        std::vector<double> phi(N), dphi;
        const double h = 2.0 * L / (N - 1);
        for (int i = 0; i < N; ++i) phi[i] = f(-L + i * h);
        if (fprime) {
            dphi.resize(N);
            for (int i = 0; i < N; ++i) dphi[i] = fprime(-L + i * h);
        }
        const double a = phi.front(), b = phi.back();
        return FlowProfile(m, L, N, std::move(phi), t, a, b, b, std::move(dphi));
    }

    int m() const { return m_; }
    double L() const { return L_; }
    int N() const { return N_; }
    double t() const { return t_; }
    double a() const { return a_; }
    double b() const { return b_; }
    double b0() const { return b0_; }
    double grid_step() const { return 2.0 * L_ / (N_ - 1); }
    double rho(int i) const { return -L_ + i * grid_step(); }

    const std::vector<double>& phi() const { return phi_; }
    const std::vector<double>& phi_prime() const { return dphi_; }

    double phi_at(double rho) const { return interp(phi_, rho); }
    double phi_prime_at(double rho) const { return interp(dphi_, rho); }

    // (1/2) * integral of sqrt(phi') from -L to rho, by composite trapezoid;
    // exactly additive over concatenation.
    double cumulative_radial_length(double rho) const { return interp(cum_, rho); }

    FlowProfile scaled(double s) const {
        if (s <= 0) throw DomainError("FlowProfile::scaled: factor must be positive");
        std::vector<double> phi(phi_), dphi(dphi_);
        for (auto& v : phi) v *= s;
        for (auto& v : dphi) v *= s;
        return FlowProfile(m_, L_, N_, std::move(phi), t_, s * a_, s * b_, s * b0_,
                           std::move(dphi));
    }

    // True when phi is strictly increasing and inside [a, b] within tolerances.
    static bool admissible(const std::vector<double>& phi, double a, double b, double b0) {
        const double tol = 1e-9 * b0;
        for (std::size_t i = 0; i + 1 < phi.size(); ++i)
            if (!(phi[i + 1] > phi[i])) return false;
        for (double v : phi)
            if (v < a - tol || v > b + tol) return false;
        return true;
    }

private:
    void validate() const {
        if (m_ < 2) throw DomainError("FlowProfile: m must be >= 2");
        if (N_ < 8) throw ConfigError("FlowProfile: need at least 8 grid nodes");
        if (L_ <= 0) throw ConfigError("FlowProfile: L must be positive");
        if (static_cast<int>(phi_.size()) != N_)
            throw ConfigError("FlowProfile: phi size does not match N");
        if (!(b_ > a_) || a_ < 0)
            throw DomainError("FlowProfile: need 0 <= a < b");
        for (int i = 0; i + 1 < N_; ++i)
            if (!(phi_[i + 1] > phi_[i]))
                throw DegeneracyError("FlowProfile: phi not strictly increasing at node " +
                                      std::to_string(i));
        const double tol = 1e-9 * b0_;
        for (int i = 0; i < N_; ++i)
            if (phi_[i] < a_ - tol || phi_[i] > b_ + tol)
                throw DegeneracyError("FlowProfile: phi out of [a, b] range at node " +
                                      std::to_string(i));
        if (L_ >= 12.0) {
            const double eps_l = 5e-6 * (b_ - a_);
            if (std::fabs(phi_.front() - a_) > eps_l || std::fabs(phi_.back() - b_) > eps_l)
                throw DegeneracyError("FlowProfile: boundary values not pinned to (a, b)");
        }
    }

    void build_caches() {
        const double h = grid_step();
        if (dphi_.empty()) {
            dphi_.resize(N_);
            for (int i = 1; i + 1 < N_; ++i) dphi_[i] = (phi_[i + 1] - phi_[i - 1]) / (2 * h);
            // second-order one-sided stencils at the ends
            dphi_[0] = (-3 * phi_[0] + 4 * phi_[1] - phi_[2]) / (2 * h);
            dphi_[N_ - 1] = (3 * phi_[N_ - 1] - 4 * phi_[N_ - 2] + phi_[N_ - 3]) / (2 * h);
            for (auto& v : dphi_) v = std::max(v, 0.0);
        } else if (static_cast<int>(dphi_.size()) != N_) {
            throw ConfigError("FlowProfile: exact derivative size does not match N");
        }

        cum_.resize(N_);
        cum_[0] = 0.0;
        for (int i = 1; i < N_; ++i) {
            const double seg =
                0.25 * h * (std::sqrt(dphi_[i - 1]) + std::sqrt(dphi_[i]));
            cum_[i] = cum_[i - 1] + seg;
        }
    }

    double interp(const std::vector<double>& field, double rho) const {
        if (rho < -L_ - 1e-12 || rho > L_ + 1e-12)
            throw DomainError("FlowProfile: rho outside [-L, L]");
        const double h = grid_step();
        double x = (rho + L_) / h;
        int i = static_cast<int>(std::floor(x));
        i = std::clamp(i, 0, N_ - 2);
        const double w = std::clamp(x - i, 0.0, 1.0);
        return (1.0 - w) * field[i] + w * field[i + 1];
    }

    int m_;
    double L_;
    int N_;
    double t_;
    double a_, b_, b0_;
    std::vector<double> phi_;
    std::vector<double> dphi_;
    std::vector<double> cum_;
};

// Reference metric in the class h[H] - e[E]: phi_0 = e + (h-e) sigma(rho).
// For blow-up classes the sigmoid is renormalized affinely so the truncated
// ends carry the exact class values; overwriting the endpoints instead would
// leave an e^{-L} kink that one-sided derivative stencils amplify by 1/h.
// Validation mode (e = 0) keeps the plain sigmoid: there the flow pins the
// ends to the homothety's own values, which are the sigmoid's.
inline FlowProfile init_profile(const KahlerClass& c0, double L = 15.0, int N = 4096) {
    require_kahler(c0, "init_profile");
    if (N < 64) throw ConfigError("init_profile: need N >= 64");
    if (L < 8.0) throw ConfigError("init_profile: need L >= 8");
    std::vector<double> phi(N);
    const double h = 2.0 * L / (N - 1);
    if (is_validation_mode(c0)) {
        for (int i = 0; i < N; ++i) phi[i] = c0.h * sigmoid(-L + i * h);
    } else {
        const double lo = sigmoid(-L), hi = sigmoid(L);
        for (int i = 0; i < N; ++i)
            phi[i] = c0.e + (c0.h - c0.e) * (sigmoid(-L + i * h) - lo) / (hi - lo);
    }
    return FlowProfile(c0.m, L, N, std::move(phi), 0.0, c0.e, c0.h, c0.h);
}

struct MetricEigenvalues {
    double sphere;  // multiplicity m-1
    double radial;
};

inline MetricEigenvalues metric_eigenvalues(const FlowProfile& p, double rho) {
    const double er = std::exp(-rho);
    const double phi = p.phi_at(rho);
    const double dphi = p.phi_prime_at(rho);
    if (dphi <= 0.0)
        throw DegeneracyError("metric_eigenvalues: phi' <= 0 at rho=" + std::to_string(rho));
    return {er * phi, er * dphi};
}

// |V|^2 along the complex line {z^2 = ... = z^m = 0}, rho = log|z^1|^2.
inline double vf_norm_sq_on_line(const FlowProfile& p, double rho, const VectorFieldSpec& V) {
    const double phi = p.phi_at(rho);
    const double dphi = p.phi_prime_at(rho);
    const double er = std::exp(rho);
    using K = VectorFieldSpec::Kind;
    switch (V.kind) {
        case K::Radial:
            return dphi;
        case K::Coord:
            return V.i == 1 ? dphi / er : phi / er;
        case K::Linear:
            if (V.j != 1) return 0.0;  // w^j vanishes on the line
            return V.i == 1 ? dphi : phi;
        case K::RadialScaled:
            return V.i == 1 ? er * dphi : 0.0;
    }
    throw DomainError("vf_norm_sq_on_line: unknown field kind");
}

// Supremum of |V|^2 over the sphere r^2 = e^rho.  With s = |w^j|^2 and
// q = |w^i|^2 the norm of w^j d/dw^i is s (e^-rho phi + e^-2rho (phi'-phi) q);
// the sphere constraint s + q <= e^rho makes the maximization a clamped
// quadratic with the closed forms below.  |V^rad_i|^2 = |w^i|^2 phi'.
inline double vf_sphere_sup(const FlowProfile& p, double rho, const VectorFieldSpec& V) {
    const double phi = p.phi_at(rho);
    const double dphi = p.phi_prime_at(rho);
    using K = VectorFieldSpec::Kind;
    switch (V.kind) {
        case K::Radial:
            return dphi;  // constant on each sphere
        case K::Coord:
            return std::exp(-rho) * std::max(phi, dphi);
        case K::RadialScaled:
            return std::exp(rho) * dphi;
        case K::Linear:
            if (V.i != V.j) {
                // max_s s phi e^-rho + s (R - s) (phi'-phi) e^-2rho, R = e^rho
                if (dphi > 2.0 * phi) return dphi * dphi / (4.0 * (dphi - phi));
                return phi;
            }
            // q = s branch
            if (phi > 2.0 * dphi) return phi * phi / (4.0 * (phi - dphi));
            return dphi;
    }
    throw DomainError("vf_sphere_sup: unknown field kind");
}

// Global sup over the (truncated) manifold; only meaningful for fields that
// extend over the exceptional divisor.
inline double vf_sup(const FlowProfile& p, const VectorFieldSpec& V) {
    if (!V.lifts_to_blowup())
        throw DomainError("vf_sup: field " + V.name() + " does not lift to the blow-up");
    double best = 0.0;
    for (int i = 0; i < p.N(); ++i) best = std::max(best, vf_sphere_sup(p, p.rho(i), V));
    return best;
}

// Length of the radial segment between rho1 and rho2:
// (1/2) int sqrt(phi') drho, composite trapezoid.
inline double radial_length(const FlowProfile& p, double rho1, double rho2) {
    if (rho2 < rho1) throw DomainError("radial_length: need rho1 <= rho2");
    return p.cumulative_radial_length(rho2) - p.cumulative_radial_length(rho1);
}

// Upper bound for the intrinsic diameter of the rho-level hypersurface:
// Fubini-Study part at scale phi plus Hopf-circle part at scale phi'.
inline double sphere_diam_upper(const FlowProfile& p, double rho) {
    return 0.5 * std::numbers::pi * (std::sqrt(p.phi_at(rho)) + std::sqrt(p.phi_prime_at(rho)));
}

// Any two fiber points connect by two radial runs plus one sphere walk.
inline double fiber_diam_upper(const FlowProfile& p) {
    const double radial_full = 2.0 * radial_length(p, -p.L(), p.L());
    double sphere_max = 0.0;
    for (int i = 0; i < p.N(); ++i) {
        const double d = 0.5 * std::numbers::pi *
                         (std::sqrt(p.phi()[i]) + std::sqrt(p.phi_prime()[i]));
        sphere_max = std::max(sphere_max, d);
    }
    return radial_full + sphere_max;
}

// omega^m / omega_0^m at fixed rho: (phi^{m-1} phi')(t) / (phi^{m-1} phi')(0).
inline double volume_ratio(const FlowProfile& p, const FlowProfile& p0, double rho) {
    if (p.m() != p0.m() || p.N() != p0.N() || p.L() != p0.L())
        throw DomainError("volume_ratio: profiles live on different grids");
    const int m = p.m();
    const double num = std::pow(p.phi_at(rho), m - 1) * p.phi_prime_at(rho);
    const double den = std::pow(p0.phi_at(rho), m - 1) * p0.phi_prime_at(rho);
    if (den <= 0.0) throw DegeneracyError("volume_ratio: degenerate reference profile");
    return num / den;
}

// Laplacian of a radial function f(rho) w.r.t. the profile metric:
// 4f = f'' / phi' + (m-1) f' / phi, second-order stencils, interior nodes.
inline std::vector<double> laplacian_radial(const FlowProfile& p,
                                            const std::vector<double>& fvals) {
    if (static_cast<int>(fvals.size()) != p.N())
        throw DomainError("laplacian_radial: f not sampled on the profile grid");
    const double h = p.grid_step();
    const int n = p.N();
    std::vector<double> out(n - 2);
    for (int i = 1; i + 1 < n; ++i) {
        const double f1 = (fvals[i + 1] - fvals[i - 1]) / (2 * h);
        const double f2 = (fvals[i + 1] - 2 * fvals[i] + fvals[i - 1]) / (h * h);
        const double dphi = p.phi_prime()[i];
        const double phi = p.phi()[i];
        if (dphi <= 0.0 || phi <= 0.0)
            throw DegeneracyError("laplacian_radial: degenerate metric at node " +
                                  std::to_string(i));
        out[i - 1] = f2 / dphi + (p.m() - 1) * f1 / phi;
    }
    return out;
}

// Trace of the radial reference form with potential psi against the profile
// metric:  tr_omega eta = psi'' / phi' + (m-1) psi' / phi, all grid nodes.
inline std::vector<double> trace_radial(const FlowProfile& p,
                                        const std::vector<double>& psi_prime,
                                        const std::vector<double>& psi_double_prime) {
    if (static_cast<int>(psi_prime.size()) != p.N() ||
        static_cast<int>(psi_double_prime.size()) != p.N())
        throw DomainError("trace_radial: reference not sampled on the profile grid");
    const int n = p.N();
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) {
        if (psi_prime[i] <= 0.0 || psi_double_prime[i] <= 0.0)
            throw DegeneracyError("trace_radial: reference form not positive at node " +
                                  std::to_string(i));
        const double dphi = p.phi_prime()[i];
        const double phi = p.phi()[i];
        if (dphi <= 0.0 || phi <= 0.0)
            throw DegeneracyError("trace_radial: degenerate metric at node " +
                                  std::to_string(i));
        out[i] = psi_double_prime[i] / dphi + (p.m() - 1) * psi_prime[i] / phi;
    }
    return out;
}

// tr_{omega_ref} omega_p = phi' / phi_ref' + (m-1) phi / phi_ref.
inline std::vector<double> trace_in_reference(const FlowProfile& p,
                                              const FlowProfile& ref) {
    return trace_radial(ref, p.phi(), p.phi_prime());
}

}  // namespace krf
