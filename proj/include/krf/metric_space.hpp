#pragma once

// Finite metric-space samples of the fiber and of products B x F, and the
// Gromov-Hausdorff certificate against the base.
//
// Fiber distances are shortest paths on a (rho, theta) grid, theta in [0, pi]
// being the angular separation on the totally symmetric 2D slice.  The slice
// metric is  ds^2 = (1/4) phi' drho^2 + w(rho) dtheta^2  with the
// conservative angular weight w = max(phi, phi'), so every reported distance
// is an upper bound.  Edge costs integrate this metric sub-segment by
// sub-segment along straight segments, radial part through the exactly
// additive cumulative length, angular part with the cell-wise max weight:
// hypot(dCUM, dtheta sqrt(W)) bounds the segment cost from above because a
// path linear in (CUM, theta) realizes it with the true w <= W.
//
// Grids carry hierarchical edge strides (1, 2, 4, ...): a 2x-refined grid
// contains the coarse graph node-for-node and edge-for-edge, so refinement
// can only shrink distances.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <queue>
#include <random>
#include <string>
#include <vector>

#include "krf/errors.hpp"
#include "krf/flow.hpp"
#include "krf/monitors.hpp"
#include "krf/parallel.hpp"
#include "krf/profile.hpp"

namespace krf {

// Riemannian product distance.
inline double product_distance(double dB, double dF) {
    if (dB < 0 || dF < 0) throw DomainError("product_distance: negative input");
    return std::hypot(dB, dF);
}

// Flat square torus of complex dimension 1 (side x side, opposite edges glued).
struct FlatTorus {
    double side = 1.0;

    double wrap(double u) const {
        double v = std::fmod(std::fabs(u), side);
        return std::min(v, side - v);
    }
    double distance(double x1, double y1, double x2, double y2) const {
        return std::hypot(wrap(x1 - x2), wrap(y1 - y2));
    }
    double diameter() const { return std::hypot(side / 2, side / 2); }
};

// --------------------------------------------------------------------------
// Shortest-path machinery on the (rho, theta) slice.

class FiberMetricGrid {
public:
    FiberMetricGrid(const FlowProfile& p, int n_rho = 129, int n_theta = 33,
                    int levels = 2)
        : p_(&p), n_rho_(n_rho), n_theta_(n_theta) {
        if (n_rho < 9 || n_theta < 5)
            throw ConfigError("FiberMetricGrid: grid too coarse");
        build(levels);
    }

    int n_rho() const { return n_rho_; }
    int n_theta() const { return n_theta_; }
    int nodes() const { return n_rho_ * n_theta_; }
    double rho_of(int i) const { return -p_->L() + i * (2.0 * p_->L() / (n_rho_ - 1)); }
    double theta_of(int j) const { return j * (std::numbers::pi / (n_theta_ - 1)); }
    int node(int i, int j) const { return i * n_theta_ + j; }

    int snap(double rho, double theta) const {
        if (rho < -p_->L() - 1e-12 || rho > p_->L() + 1e-12 || theta < -1e-12 ||
            theta > std::numbers::pi + 1e-12)
            throw DomainError("FiberMetricGrid: coordinates out of range");
        const double hr = 2.0 * p_->L() / (n_rho_ - 1);
        const double ht = std::numbers::pi / (n_theta_ - 1);
        const int i = std::clamp(static_cast<int>(std::lround((rho + p_->L()) / hr)), 0, n_rho_ - 1);
        const int j = std::clamp(static_cast<int>(std::lround(theta / ht)), 0, n_theta_ - 1);
        return node(i, j);
    }

    // Single-source shortest paths (binary-heap Dijkstra).
    std::vector<double> distances_from(int source) const {
        std::vector<double> dist(nodes(), std::numeric_limits<double>::infinity());
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        dist[source] = 0.0;
        heap.emplace(0.0, source);
        while (!heap.empty()) {
            auto [d, u] = heap.top();
            heap.pop();
            if (d > dist[u]) continue;
            for (int e = head_[u]; e != -1; e = next_[e]) {
                const double nd = d + cost_[e];
                const int v = to_[e];
                if (nd < dist[v]) {
                    dist[v] = nd;
                    heap.emplace(nd, v);
                }
            }
        }
        return dist;
    }

private:
    void add_edge(int u, int v, double c) {
        to_.push_back(v); cost_.push_back(c); next_.push_back(head_[u]); head_[u] = int(to_.size()) - 1;
        to_.push_back(u); cost_.push_back(c); next_.push_back(head_[v]); head_[v] = int(to_.size()) - 1;
    }

    double w_at(double rho) const {
        return std::max(p_->phi_at(rho), p_->phi_prime_at(rho));
    }

    // Cost of the straight segment (r1,t1) -> (r2,t2), integrated between
    // consecutive crossings of the underlying profile grid.
    double segment_cost(double r1, double t1, double r2, double t2) const {
        const double dtheta = std::fabs(t2 - t1);
        if (r1 == r2) return dtheta * std::sqrt(w_at(r1));
        if (r2 < r1) { std::swap(r1, r2); }  // symmetric weight, orientation-free
        const double h = p_->grid_step();
        double cost = 0.0;
        double a = r1;
        const double span = r2 - r1;
        int cell = static_cast<int>(std::floor((a + p_->L()) / h)) + 1;
        while (a < r2) {
            double b = std::min(-p_->L() + cell * h, r2);
            if (b <= a) { ++cell; continue; }
            const double dcum = p_->cumulative_radial_length(b) - p_->cumulative_radial_length(a);
            const double dth = dtheta * (b - a) / span;
            const double wmax = std::max(w_at(a), w_at(b));
            cost += std::hypot(dcum, dth * std::sqrt(wmax));
            a = b;
            ++cell;
        }
        return cost;
    }

    void build(int levels) {
        head_.assign(nodes(), -1);
        static constexpr int kDirs[8][2] = {{1, 0},  {0, 1},  {1, 1},  {1, -1},
                                            {1, 2},  {1, -2}, {2, 1},  {2, -1}};
        int stride = 1;
        for (int level = 0; level < levels; ++level, stride *= 2) {
            if ((n_rho_ - 1) % stride != 0 || (n_theta_ - 1) % stride != 0) break;
            for (int i = 0; i < n_rho_; i += stride) {
                for (int j = 0; j < n_theta_; j += stride) {
                    for (const auto& d : kDirs) {
                        const int i2 = i + d[0] * stride;
                        const int j2 = j + d[1] * stride;
                        if (i2 < 0 || i2 >= n_rho_ || j2 < 0 || j2 >= n_theta_) continue;
                        add_edge(node(i, j), node(i2, j2),
                                 segment_cost(rho_of(i), theta_of(j), rho_of(i2), theta_of(j2)));
                    }
                }
            }
        }
    }

    const FlowProfile* p_;
    int n_rho_, n_theta_;
    std::vector<int> head_, to_, next_;
    std::vector<double> cost_;
};

// Upper bound for the distance between two points of the 2D fiber slice.
inline double fiber_distance_upper(const FlowProfile& p, double rho1, double theta1,
                                   double rho2, double theta2,
                                   int n_rho = 257, int n_theta = 65) {
    FiberMetricGrid grid(p, n_rho, n_theta);
    const int s = grid.snap(rho1, theta1);
    const int t = grid.snap(rho2, theta2);
    if (s == t) return 0.0;
    return grid.distances_from(s)[t];
}

// --------------------------------------------------------------------------
// Sampled metric spaces.

struct SampledSpace {
    struct Point {
        int base = -1;   // index into base sample, -1 for pure-fiber spaces
        int fiber = -1;  // index into fiber sample, -1 for pure-base spaces
        double bx = 0, by = 0;      // base coordinates
        double rho = 0, theta = 0;  // fiber coordinates
    };
    std::vector<Point> points;
    std::vector<double> dist;  // row-major n x n

    int size() const { return static_cast<int>(points.size()); }
    double d(int i, int j) const { return dist[static_cast<std::size_t>(i) * size() + j]; }
    double& d(int i, int j) { return dist[static_cast<std::size_t>(i) * size() + j]; }

    double diameter() const {
        double out = 0.0;
        for (double v : dist) out = std::max(out, v);
        return out;
    }

    // Worst triangle-inequality violation over up to `samples` random triples
    // (all triples when the space is small enough).
    double triangle_violation(int samples = 10000, std::uint64_t seed = 1) const {
        const int n = size();
        double worst = 0.0;
        auto check = [&](int a, int b, int c) {
            worst = std::max(worst, d(a, c) - (d(a, b) + d(b, c)));
        };
        const long all = static_cast<long>(n) * n * n;
        if (all <= samples) {
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) check(a, b, c);
            return worst;
        }
        std::mt19937_64 rng(seed);
        std::uniform_int_distribution<int> pick(0, n - 1);
        for (int k = 0; k < samples; ++k) check(pick(rng), pick(rng), pick(rng));
        return worst;
    }
};

// Deterministic lattice of base samples: first nB points of the k x k grid,
// k = ceil(sqrt(nB)), spacing side/k.
inline SampledSpace sample_base(const FlatTorus& torus, int nB) {
    if (nB < 1) throw ConfigError("sample_base: need at least one point");
    const int k = static_cast<int>(std::ceil(std::sqrt(double(nB))));
    SampledSpace out;
    for (int idx = 0; idx < nB; ++idx) {
        SampledSpace::Point pt;
        pt.base = idx;
        pt.bx = (idx % k) * torus.side / k;
        pt.by = (idx / k) * torus.side / k;
        out.points.push_back(pt);
    }
    out.dist.assign(static_cast<std::size_t>(nB) * nB, 0.0);
    for (int i = 0; i < nB; ++i)
        for (int j = i + 1; j < nB; ++j) {
            const double v = torus.distance(out.points[i].bx, out.points[i].by,
                                            out.points[j].bx, out.points[j].by);
            out.d(i, j) = v;
            out.d(j, i) = v;
        }
    return out;
}

// Fiber sample: the section point (rho=0, theta=0) first, then a lattice over
// the slice, snapped to grid nodes and deduplicated.
struct FiberSample {
    std::vector<int> node;           // grid node ids
    std::vector<double> rho, theta;  // snapped coordinates
    std::vector<double> dist;        // nF x nF upper bounds

    int size() const { return static_cast<int>(node.size()); }
    double d(int i, int j) const { return dist[static_cast<std::size_t>(i) * size() + j]; }
};

inline FiberSample sample_fiber(const FlowProfile& p, int nF,
                                const FiberMetricGrid& grid) {
    if (nF < 2) throw ConfigError("sample_fiber: need at least two points");
    FiberSample out;
    std::vector<int> seen;
    auto push = [&](double rho, double theta) {
        const int id = grid.snap(rho, theta);
        if (std::find(seen.begin(), seen.end(), id) != seen.end()) return;
        seen.push_back(id);
        const int i = id / grid.n_theta(), j = id % grid.n_theta();
        out.node.push_back(id);
        out.rho.push_back(grid.rho_of(i));
        out.theta.push_back(grid.theta_of(j));
    };
    push(0.0, 0.0);  // the section point
    const int k_theta = 4;
    const int k_rho = (nF + k_theta - 1) / k_theta;
    for (int a = 0; a < k_rho && out.size() < nF; ++a) {
        const double rho = -p.L() + (2.0 * p.L()) * (k_rho == 1 ? 0.5 : double(a) / (k_rho - 1));
        for (int b = 0; b < k_theta && out.size() < nF; ++b)
            push(rho, std::numbers::pi * b / (k_theta - 1));
    }
    const int n = out.size();
    out.dist.assign(static_cast<std::size_t>(n) * n, 0.0);
    std::vector<std::vector<double>> rows(n);
    parallel_for(n, [&](int i) { rows[i] = grid.distances_from(out.node[i]); });
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            // one Dijkstra per source keeps the matrix exactly symmetric
            const double v = i <= j ? rows[i][out.node[j]] : rows[j][out.node[i]];
            out.dist[static_cast<std::size_t>(i) * n + j] = v;
        }
    return out;
}

// Product sample B x F with the Riemannian product distance over the exact
// torus distance and the fiber upper bounds.
inline SampledSpace build_product_sample(const FlowProfile& p, const FlatTorus& torus,
                                         int nB, int nF, int n_rho = 129,
                                         int n_theta = 33) {
    FiberMetricGrid grid(p, n_rho, n_theta);
    const FiberSample fiber = sample_fiber(p, nF, grid);
    const SampledSpace base = sample_base(torus, nB);
    SampledSpace out;
    for (int b = 0; b < base.size(); ++b)
        for (int f = 0; f < fiber.size(); ++f) {
            SampledSpace::Point pt;
            pt.base = b;
            pt.fiber = f;
            pt.bx = base.points[b].bx;
            pt.by = base.points[b].by;
            pt.rho = fiber.rho[f];
            pt.theta = fiber.theta[f];
            out.points.push_back(pt);
        }
    const int n = out.size();
    out.dist.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) {
            const double dB = base.d(out.points[i].base, out.points[j].base);
            const double dF = fiber.d(out.points[i].fiber, out.points[j].fiber);
            const double v = product_distance(dB, dF);
            out.d(i, j) = v;
            out.d(j, i) = v;
        }
    return out;
}

// --------------------------------------------------------------------------
// Gromov-Hausdorff upper bound via explicit almost-isometries.

struct GHEstimate {
    double epsilon = 0.0;
    int n_sample_x = 0;
    int n_sample_base = 0;
    std::string maps = "F: projection to base, G: section through (rho=0, theta=0)";
};

// projection[i] gives the base index of X-sample i; section[b] gives the
// X-sample index of the chosen lift of base sample b.
inline GHEstimate gh_upper_bound(const SampledSpace& X, const SampledSpace& B,
                                 const std::vector<int>& projection,
                                 const std::vector<int>& section) {
    const int nx = X.size(), nb = B.size();
    if (static_cast<int>(projection.size()) != nx || static_cast<int>(section.size()) != nb)
        throw DomainError("gh_upper_bound: mismatched samples");
    for (int b = 0; b < nb; ++b)
        if (section[b] < 0 || section[b] >= nx || projection[section[b]] != b)
            throw DomainError("gh_upper_bound: section does not right-invert projection");
    double eps = 0.0;
    for (int i = 0; i < nx; ++i)
        for (int j = 0; j < nx; ++j)
            eps = std::max(eps, std::fabs(X.d(i, j) - B.d(projection[i], projection[j])));
    for (int i = 0; i < nx; ++i)
        eps = std::max(eps, X.d(i, section[projection[i]]));
    for (int a = 0; a < nb; ++a)
        for (int b = 0; b < nb; ++b)
            eps = std::max(eps, std::fabs(B.d(a, b) - X.d(section[a], section[b])));
    // fourth condition, d_B(b, F(G(b))), vanishes by the section contract
    GHEstimate out;
    out.epsilon = eps;
    out.n_sample_x = nx;
    out.n_sample_base = nb;
    return out;
}

namespace detail {

inline std::vector<int> product_projection(const SampledSpace& X) {
    std::vector<int> proj(X.size());
    for (int i = 0; i < X.size(); ++i) proj[i] = X.points[i].base;
    return proj;
}

// Lift of each base point through fiber sample 0 (the section point).
inline std::vector<int> product_section(const SampledSpace& X, int nb) {
    std::vector<int> sec(nb, -1);
    for (int i = 0; i < X.size(); ++i)
        if (X.points[i].fiber == 0) sec[X.points[i].base] = i;
    for (int b = 0; b < nb; ++b)
        if (sec[b] < 0) throw DomainError("product_section: base point without a lift");
    return sec;
}

}  // namespace detail

struct GHCertificate {
    MonitorReport report;            // epsilon series and verdict
    std::vector<double> fiber_diams; // sampled fiber diameter per snapshot
    double base_diam = 0.0;          // sampled base diameter
};

// Certifies Gromov-Hausdorff collapse to the base along a CollapseFiber
// trajectory: epsilon(t_n) must drop below 0.01 * diam(B) by the stop time,
// be eventually monotone, and the distance functions must be uniformly
// Cauchy at sample resolution over the final decade.  Base distances are
// exactly static by the decoupled-product construction, so d_X >= d_B o pr
// holds with constant 1 and is audited exactly.
inline GHCertificate gh_convergence_certificate(const FlowTrajectory& traj,
                                                const FlatTorus& torus, int nB, int nF,
                                                int n_rho = 129, int n_theta = 33) {
    if (traj.scenario != ScenarioKind::CollapseFiber)
        throw DomainError("gh_convergence_certificate: requires a CollapseFiber trajectory");
    const std::size_t n_snap = traj.snapshots.size();
    const SampledSpace base = sample_base(torus, nB);
    const double base_diam = base.diameter();

    GHCertificate cert;
    cert.base_diam = base_diam;
    cert.report.name = "gh_convergence";
    cert.report.paper_tag = "gh-collapse-to-base";
    cert.report.tolerance = 0.01;
    cert.fiber_diams.resize(n_snap);
    cert.report.values.resize(n_snap);
    cert.report.times.resize(n_snap);

    std::vector<FiberSample> fibers(n_snap);
    parallel_for(static_cast<int>(n_snap), [&](int k) {
        const auto& p = traj.snapshots[k];
        FiberMetricGrid grid(p, n_rho, n_theta);
        fibers[k] = sample_fiber(p, nF, grid);
    });

    bool floor_ok = true;
    for (std::size_t k = 0; k < n_snap; ++k) {
        const auto& fib = fibers[k];
        SampledSpace X;
        {
            const auto& p = traj.snapshots[k];
            X = SampledSpace{};
            for (int b = 0; b < base.size(); ++b)
                for (int f = 0; f < fib.size(); ++f) {
                    SampledSpace::Point pt;
                    pt.base = b; pt.fiber = f;
                    pt.bx = base.points[b].bx; pt.by = base.points[b].by;
                    pt.rho = fib.rho[f]; pt.theta = fib.theta[f];
                    X.points.push_back(pt);
                }
            const int n = X.size();
            X.dist.assign(static_cast<std::size_t>(n) * n, 0.0);
            for (int i = 0; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    const double dB = base.d(X.points[i].base, X.points[j].base);
                    const double dF = fib.d(X.points[i].fiber, X.points[j].fiber);
                    const double v = product_distance(dB, dF);
                    X.d(i, j) = v;
                    X.d(j, i) = v;
                    if (v < dB) floor_ok = false;
                }
            (void)p;
        }
        const auto proj = detail::product_projection(X);
        const auto sec = detail::product_section(X, base.size());
        cert.report.values[k] = gh_upper_bound(X, base, proj, sec).epsilon;
        cert.report.times[k] = traj.snapshots[k].t();
        double fd = 0.0;
        for (double v : fib.dist) fd = std::max(fd, v);
        cert.fiber_diams[k] = fd;
    }

    const double T = traj.T_predicted;
    const double tail = T - traj.snapshots.back().t();
    // eventually monotone: non-increasing over the final decade
    bool monotone_tail = true;
    std::vector<std::size_t> decade;
    for (std::size_t k = 0; k < n_snap; ++k)
        if (T - traj.snapshots[k].t() <= 10.0 * tail * (1.0 + 1e-12)) decade.push_back(k);
    for (std::size_t q = 0; q + 1 < decade.size(); ++q) {
        const double cur = cert.report.values[decade[q]];
        const double nxt = cert.report.values[decade[q + 1]];
        if (nxt > cur * (1.0 + 1e-6) + 1e-12) monotone_tail = false;
    }
    // uniform-Cauchy audit over final-decade snapshot pairs: product
    // distances may move by at most 3 epsilon(t_min) per sampled pair.
    bool cauchy_ok = true;
    for (std::size_t a = 0; a + 1 < decade.size() && cauchy_ok; ++a) {
        for (std::size_t b = a + 1; b < decade.size() && cauchy_ok; ++b) {
            const auto& fa = fibers[decade[a]];
            const auto& fb = fibers[decade[b]];
            const double allowance = 3.0 * cert.report.values[decade[a]];
            for (int i = 0; i < fa.size() && cauchy_ok; ++i)
                for (int j = 0; j < fa.size(); ++j) {
                    // same-base pairs move the most; base offsets only shrink
                    // the gap, so auditing dB = 0 pairs covers the worst case
                    if (std::fabs(fa.d(i, j) - fb.d(i, j)) > allowance) {
                        cauchy_ok = false;
                        break;
                    }
                }
        }
    }

    const double final_eps = cert.report.values.back();
    cert.report.measured_constant = final_eps / base_diam;
    cert.report.pass = final_eps <= 0.01 * base_diam && monotone_tail && cauchy_ok && floor_ok;
    cert.report.detail = "final_eps=" + std::to_string(final_eps) +
                         " base_diam=" + std::to_string(base_diam) +
                         (monotone_tail ? "" : " tail-not-monotone") +
                         (cauchy_ok ? "" : " cauchy-audit-failed") +
                         (floor_ok ? "" : " base-floor-violated");
    return cert;
}

}  // namespace krf
