#pragma once
// Orbit realizer: plans paths Gamma_k through a waypoint target, assembles
// the shell-by-shell map f out of spiral and interpolation pieces, and
// samples the rescaled orbit curve gamma(t) = f(t e_1) / rho_f(t).
//
// The map is kept in log radius throughout. At every shell boundary f is
// x -> G S_K(x), with S_K the K-stretch along e_1 and G orthogonal, so the
// rescaled orbit at that radius is K^{1-1/n} G e_1.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "qcmap/canonical_maps.hpp"

namespace qcmap {

struct TargetSet {
    std::vector<Vector> waypoints;
    bool closed = false;
    double c = 2.0; // annulus bound: 1/C <= |y| <= C

    int dim() const { return waypoints.empty() ? 0 : static_cast<int>(waypoints.front().size()); }

    void validate() const
    {
        if (waypoints.empty())
            throw error(errc::invalid_input, "target has no waypoints");
        if (!std::isfinite(c) || !(c > 1.0))
            throw error(errc::invalid_input, "annulus bound C must exceed 1");
        const int n = dim();
        if (n < 3)
            throw error(errc::invalid_input, "target dimension must be at least 3");
        for (std::size_t i = 0; i < waypoints.size(); ++i) {
            const Vector& w = waypoints[i];
            if (w.size() != n || !all_finite(w))
                throw error(errc::invalid_input, "waypoint " + std::to_string(i) + " has the wrong dimension");
            const double r = w.norm();
            if (r == 0.0)
                throw error(errc::invalid_input, "waypoint " + std::to_string(i) + " is the origin");
            if (r < 1.0 / c || r > c)
                throw error(errc::invalid_input, "waypoint " + std::to_string(i) + " lies outside the annulus");
            if (i > 0 && (w - waypoints[i - 1]).norm() == 0.0)
                throw error(errc::invalid_input, "consecutive waypoints " + std::to_string(i - 1) + " and " +
                                                     std::to_string(i) + " coincide");
        }
        if (closed && waypoints.size() > 1 && (waypoints.back() - waypoints.front()).norm() == 0.0)
            throw error(errc::invalid_input, "closed target repeats its first waypoint");
    }
};

struct RadialSegment {
    double u1;
    double u2;
    Vector sigma;
};

struct ArcSegment {
    double u;
    Vector sigma1;
    Vector sigma2;
    int orientation = -1; // sign of the spiral rate that turns sigma1 into sigma2
};

using PathSegment = std::variant<RadialSegment, ArcSegment>;

inline Vector segment_start(const PathSegment& s)
{
    if (const auto* r = std::get_if<RadialSegment>(&s))
        return r->u1 * r->sigma;
    const auto& a = std::get<ArcSegment>(s);
    return a.u * a.sigma1;
}

inline Vector segment_end(const PathSegment& s)
{
    if (const auto* r = std::get_if<RadialSegment>(&s))
        return r->u2 * r->sigma;
    const auto& a = std::get<ArcSegment>(s);
    return a.u * a.sigma2;
}

/// Point at parameter tau in [0, 1] along a segment.
inline Vector segment_point(const PathSegment& s, double tau)
{
    if (const auto* r = std::get_if<RadialSegment>(&s))
        return (r->u1 + (r->u2 - r->u1) * tau) * r->sigma;
    const auto& a = std::get<ArcSegment>(s);
    return a.u * slerp(a.sigma1, a.sigma2, tau);
}

/// Gamma_k: a chain of segments from start to end.
struct PathPlan {
    int k = 1;
    Vector start;
    Vector end;
    std::vector<PathSegment> segments;
};

/// Point at fraction tau of the hop a -> b: radius linear, direction along
/// the minor great-circle arc.
inline Vector hop_point(const Vector& a, const Vector& b, double tau)
{
    const double ra = a.norm();
    const double rb = b.norm();
    return (ra + (rb - ra) * tau) * slerp(a / ra, b / rb, tau);
}

/// Dense samples of the target curve: each hop (and the closing hop of a
/// closed target) sampled at per_hop + 1 points.
inline std::vector<Vector> sample_target(const TargetSet& x, int per_hop)
{
    x.validate();
    std::vector<Vector> out;
    const auto& w = x.waypoints;
    if (w.size() == 1)
        return {w.front()};
    const std::size_t hops = x.closed ? w.size() : w.size() - 1;
    for (std::size_t h = 0; h < hops; ++h) {
        const Vector& a = w[h];
        const Vector& b = w[(h + 1) % w.size()];
        for (int i = 0; i <= per_hop; ++i)
            out.push_back(hop_point(a, b, static_cast<double>(i) / per_hop));
    }
    return out;
}

/// Smallest k >= 1 such that the 1/k neighbourhood of the target stays in
/// the annulus 1/C <= |y| <= C.
inline int first_depth(const TargetSet& x)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const Vector& w : x.waypoints) {
        lo = std::min(lo, w.norm());
        hi = std::max(hi, w.norm());
    }
    const double room = std::min(x.c - hi, lo - 1.0 / x.c);
    if (!(room > 0.0))
        return std::numeric_limits<int>::max();
    return std::max(1, static_cast<int>(std::ceil(1.0 / room - 1e-12)));
}

namespace detail {

inline void append_hop(std::vector<PathSegment>& out, const Vector& a, const Vector& b, int k, std::size_t ia,
                       std::size_t ib)
{
    const double u1 = a.norm();
    const double u2 = b.norm();
    const Vector s1 = a / u1;
    const Vector s2 = b / u2;
    double theta;
    try {
        theta = great_circle_angle(s1, s2);
    } catch (const error& e) {
        if (e.code() != errc::ambiguous_arc)
            throw;
        throw error(errc::requires_intermediate_waypoint,
                    "waypoints " + std::to_string(ia) + " and " + std::to_string(ib) + " are antipodal");
    }
    const double du = u2 - u1;
    const bool mixed = theta > 0.0 && du != 0.0;
    const int steps =
        mixed ? std::max(1, static_cast<int>(std::ceil(4.0 * k * (std::abs(du) + std::max(u1, u2) * theta)))) : 1;

    Vector prev = a;
    for (int i = 1; i <= steps; ++i) {
        const Vector next = i == steps ? b : hop_point(a, b, static_cast<double>(i) / steps);
        const double r = prev.norm();
        const Vector d1 = prev / r;
        const Vector d2 = next / next.norm();
        const double angle = great_circle_angle(d1, d2);
        if (angle > 0.0) {
            const int pieces = std::max(1, static_cast<int>(std::ceil(angle / half_pi - 1e-12)));
            Vector from = d1;
            for (int p = 1; p <= pieces; ++p) {
                const Vector to = p == pieces ? d2 : slerp(d1, d2, static_cast<double>(p) / pieces);
                out.push_back(ArcSegment{r, from, to, -1});
                from = to;
            }
        }
        if (next.norm() != r)
            out.push_back(RadialSegment{r, next.norm(), d2});
        prev = next;
    }
}

} // namespace detail

/// Gamma_K ... Gamma_{k_max}, K the first admissible depth. Open targets are
/// swept forwards and backwards alternately, closed ones loop, so each plan
/// ends where the next begins.
inline std::vector<PathPlan> plan_paths(const TargetSet& x, int k_max)
{
    x.validate();
    if (k_max < 1)
        throw error(errc::invalid_input, "k_max must be at least 1");
    const int k0 = first_depth(x);
    if (k0 > k_max)
        throw error(errc::invalid_input, "the target needs depth " +
                                             (k0 == std::numeric_limits<int>::max() ? std::string("beyond any k")
                                                                                    : std::to_string(k0)) +
                                             " to fit the annulus, above k_max");
    const auto& w = x.waypoints;
    const std::size_t count = w.size();
    std::vector<PathPlan> plans;
    for (int k = k0; k <= k_max; ++k) {
        std::vector<std::size_t> order;
        if (x.closed) {
            for (std::size_t i = 0; i < count; ++i)
                order.push_back(i);
            if (count > 1)
                order.push_back(0);
        } else {
            const bool backward = (k - k0) % 2 == 1;
            for (std::size_t i = 0; i < count; ++i)
                order.push_back(backward ? count - 1 - i : i);
        }
        PathPlan plan;
        plan.k = k;
        plan.start = w[order.front()];
        plan.end = w[order.back()];
        for (std::size_t h = 0; h + 1 < order.size(); ++h)
            detail::append_hop(plan.segments, w[order[h]], w[order[h + 1]], k, order[h], order[h + 1]);
        plans.push_back(std::move(plan));
    }
    return plans;
}

/// Dense samples of a plan's trace.
inline std::vector<Vector> plan_trace(const PathPlan& plan, int per_segment)
{
    std::vector<Vector> out{plan.start};
    for (const PathSegment& s : plan.segments)
        for (int i = 1; i <= per_segment; ++i)
            out.push_back(segment_point(s, static_cast<double>(i) / per_segment));
    return out;
}

// ---------------------------------------------------------------------------
// Assembled map

enum class PieceKind { interp, spiral };

struct ShellPiece {
    PieceKind kind = PieceKind::interp;
    double log_r_out = 0.0;
    double log_r_in = 0.0;
    Matrix g;      // boundary state on the outer sphere: x -> g S_k(x)
    Matrix g_exit; // state on the inner sphere
    double k = 1.0;      // stretch on the outer sphere
    double k_exit = 1.0; // stretch on the inner sphere
    double alpha = 0.0;  // spiral rate
    double theta = 0.0;  // arc angle
    Matrix q;            // spiral plane frame in input coordinates (q e_1 = e_1)
    int plan_k = 0;
    std::size_t segment = 0; // index into RealizedMap::segments
    Vector target_out;       // planned orbit point on the outer sphere
    Vector target_in;        // planned orbit point on the inner sphere
};

struct RealizedMap {
    int n = 3;
    double log_r_start = 0.0;
    double outer_k = 1.0;
    Matrix outer_g;
    std::vector<ShellPiece> pieces;
    std::vector<PathSegment> segments;
    std::map<double, AlphaCertificate> alphas; // keyed by K

    double log_r_end() const { return pieces.empty() ? log_r_start : pieces.back().log_r_in; }
    double inner_k() const { return pieces.empty() ? outer_k : pieces.back().k_exit; }
    const Matrix& inner_g() const { return pieces.empty() ? outer_g : pieces.back().g_exit; }
};

struct BuildOptions {
    double log_r_start = 0.0;
    int alpha_grid = 33;
};

/// Orthogonal polar factor U V^T of m; removes round-off drift from a
/// product of rotations.
inline Matrix nearest_rotation(const Matrix& m)
{
    const SvdResult s = svd_small_full(m);
    return s.u * s.v.transpose();
}

/// K = u^{n/(n-1)}: the boundary stretch whose rescaled orbit has length u.
inline double stretch_for_radius(double u, int n) { return std::pow(u, static_cast<double>(n) / (n - 1)); }

/// Assembles f from chained plans. Arc segments become spiral shells of log
/// depth theta/|alpha|; radial segments become interpolation shells of log
/// depth 2|ln(K/L)| + 1. Outside the first shell f is the first boundary
/// stretch, inside the last one the last boundary stretch.
inline RealizedMap build_map(const std::vector<PathPlan>& plans, const BuildOptions& opt = {})
{
    if (plans.empty())
        throw error(errc::invalid_input, "build_map needs at least one plan");
    if (!std::isfinite(opt.log_r_start))
        throw error(errc::invalid_input, "start radius must be positive and finite");
    const Vector& start = plans.front().start;
    const int n = static_cast<int>(start.size());
    RealizedMap f;
    f.n = n;
    f.log_r_start = opt.log_r_start;
    f.outer_k = stretch_for_radius(start.norm(), n);
    f.outer_g = frame_from_direction(start / start.norm()).matrix();

    Matrix g = f.outer_g;
    double log_r = opt.log_r_start;
    Vector here = start;
    for (std::size_t p = 0; p < plans.size(); ++p) {
        const PathPlan& plan = plans[p];
        if ((plan.start - here).norm() > 1e-9 * std::max(1.0, here.norm()))
            throw error(errc::invalid_input, "plans are not chained end to start");
        for (const PathSegment& seg : plan.segments) {
            ShellPiece piece;
            piece.plan_k = plan.k;
            piece.segment = f.segments.size();
            piece.log_r_out = log_r;
            piece.g = g;
            piece.target_out = segment_start(seg);
            piece.target_in = segment_end(seg);
            if (const auto* arc = std::get_if<ArcSegment>(&seg)) {
                piece.kind = PieceKind::spiral;
                piece.k = piece.k_exit = stretch_for_radius(arc->u, n);
                auto it = f.alphas.find(piece.k);
                if (it == f.alphas.end())
                    it = f.alphas
                             .emplace(piece.k, detail::select_alpha_any(piece.k, n, arc->orientation, opt.alpha_grid))
                             .first;
                piece.alpha = it->second.alpha;
                piece.theta = great_circle_angle(g.col(0), arc->sigma2);
                const Frame spiral_frame = frame_from_direction(g.col(0).normalized(), arc->sigma2);
                piece.q = g.transpose() * spiral_frame.matrix();
                piece.log_r_in = log_r - piece.theta / std::abs(piece.alpha);
                const Matrix turn = spiral_frame.matrix() * planar_rotation(n, piece.theta, 0, 1) *
                                    spiral_frame.matrix().transpose();
                piece.g_exit = nearest_rotation(turn * g);
            } else {
                const auto& rad = std::get<RadialSegment>(seg);
                piece.kind = PieceKind::interp;
                piece.k = stretch_for_radius(rad.u1, n);
                piece.k_exit = stretch_for_radius(rad.u2, n);
                piece.log_r_in = log_r - InterpSpec::minimal_depth(piece.k, piece.k_exit);
                piece.g_exit = g;
            }
            g = piece.g_exit;
            log_r = piece.log_r_in;
            f.pieces.push_back(std::move(piece));
            f.segments.push_back(seg);
        }
        here = plan.end;
    }
    return f;
}

namespace detail {

/// Index of the piece holding log radius lr, pieces.size() below the last
/// shell, or -1 outside the first one.
inline std::ptrdiff_t locate_piece(const RealizedMap& f, double lr)
{
    if (f.pieces.empty() || lr >= f.log_r_start)
        return -1;
    const auto it = std::partition_point(f.pieces.begin(), f.pieces.end(),
                                         [lr](const ShellPiece& p) { return p.log_r_in > lr; });
    return it - f.pieces.begin();
}

inline double interp_nu(const ShellPiece& p, double lr)
{
    return std::clamp((lr - p.log_r_in) / (p.log_r_out - p.log_r_in), 0.0, 1.0);
}

} // namespace detail

/// f(e^{lr} w) / e^{lr} for a unit vector w.
inline Vector eval_normalized(const RealizedMap& f, const Vector& w, double lr)
{
    const double c2 = w(0) * w(0);
    const std::ptrdiff_t i = detail::locate_piece(f, lr);
    if (i < 0)
        return std::exp(log_stretch_factor(f.outer_k, c2)) * (f.outer_g * w);
    if (static_cast<std::size_t>(i) == f.pieces.size())
        return std::exp(log_stretch_factor(f.inner_k(), c2)) * (f.inner_g() * w);
    const ShellPiece& p = f.pieces[i];
    if (p.kind == PieceKind::interp) {
        const double nu = detail::interp_nu(p, lr);
        const double v = nu * log_stretch_factor(p.k, c2) + (1.0 - nu) * log_stretch_factor(p.k_exit, c2);
        return std::exp(v) * (p.g * w);
    }
    const Vector local = p.q.transpose() * w;
    const Vector turned = planar_rotation(f.n, p.alpha * (lr - p.log_r_out), 0, 1) * local;
    return std::exp(log_stretch_factor(p.k, c2)) * (p.g * (p.q * turned));
}

inline Vector eval_map(const RealizedMap& f, const Vector& x)
{
    if (x.size() != f.n || !all_finite(x))
        throw error(errc::invalid_input, "eval_map: bad point");
    const double r = x.norm();
    if (r == 0.0)
        throw error(errc::undefined_at_origin, "the realized map is evaluated away from the origin");
    return r * eval_normalized(f, x / r, std::log(r));
}

// ---------------------------------------------------------------------------
// Mean radius

struct GaussRule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss-Legendre rule with m nodes on [-1, 1] (Newton on P_m).
inline GaussRule gauss_legendre(int m)
{
    if (m < 1)
        throw error(errc::invalid_input, "gauss_legendre needs m >= 1");
    GaussRule rule{std::vector<double>(m), std::vector<double>(m)};
    for (int i = 0; i < (m + 1) / 2; ++i) {
        double z = std::cos(pi * (i + 0.75) / (m + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = 0.0;
            for (int j = 1; j <= m; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j - 1.0) * z * p1 - (j - 1.0) * p2) / j;
            }
            dp = m * (z * p0 - p1) / (z * z - 1.0);
            const double dz = p0 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16)
                break;
        }
        rule.nodes[i] = -z;
        rule.nodes[m - 1 - i] = z;
        const double w = 2.0 / ((1.0 - z * z) * dp * dp);
        rule.weights[i] = w;
        rule.weights[m - 1 - i] = w;
    }
    return rule;
}

namespace detail {

struct ZonalRule {
    int n = 0;
    int nodes = 0;
    std::vector<double> cosines;
    std::vector<double> weights; // normalized to sum 1
};

inline const ZonalRule& zonal_rule(int n, int nodes)
{
    thread_local ZonalRule cached;
    if (cached.n == n && cached.nodes == nodes)
        return cached;
    static const GaussRule rule = gauss_legendre(8);
    const int panels = std::max(1, nodes / 8);
    const double width = pi / panels;
    ZonalRule z{n, nodes, {}, {}};
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double mid = (p + 0.5) * width;
        for (int j = 0; j < 8; ++j) {
            const double phi = mid + 0.5 * width * rule.nodes[j];
            const double w = rule.weights[j] * std::pow(std::sin(phi), n - 2);
            z.cosines.push_back(std::cos(phi));
            z.weights.push_back(w);
            total += w;
        }
    }
    for (double& w : z.weights)
        w /= total;
    cached = std::move(z);
    return cached;
}

} // namespace detail

/// Mean over S^{n-1} of g(<e_1, w>) for a zonal integrand: composite 8-point
/// Gauss-Legendre in the polar angle with weight sin^{n-2}.
template <class Zonal>
double zonal_mean(Zonal&& g, int n, int nodes = 4096)
{
    const detail::ZonalRule& rule = detail::zonal_rule(n, nodes);
    double mean = 0.0;
    for (std::size_t i = 0; i < rule.cosines.size(); ++i)
        mean += rule.weights[i] * g(rule.cosines[i]);
    return mean;
}

/// rho_f(e^{lr}) / e^{lr}. Closed form K^{1/n} where the image sphere is an
/// ellipsoid; zonal quadrature of lambda^n inside interpolation shells.
inline double mean_radius_normalized(const RealizedMap& f, double lr, int nodes = 4096)
{
    const std::ptrdiff_t i = detail::locate_piece(f, lr);
    const double dn = f.n;
    if (i < 0)
        return std::pow(f.outer_k, 1.0 / dn);
    if (static_cast<std::size_t>(i) == f.pieces.size())
        return std::pow(f.inner_k(), 1.0 / dn);
    const ShellPiece& p = f.pieces[i];
    if (p.kind == PieceKind::spiral)
        return std::pow(p.k, 1.0 / dn);
    const double nu = detail::interp_nu(p, lr);
    if (nu == 1.0)
        return std::pow(p.k, 1.0 / dn);
    if (nu == 0.0)
        return std::pow(p.k_exit, 1.0 / dn);
    const double k2 = p.k * p.k;
    const double l2 = p.k_exit * p.k_exit;
    const double scale = std::exp(dn * (nu * std::log(p.k) + (1.0 - nu) * std::log(p.k_exit)));
    const double ea = -0.5 * dn * nu;
    const double eb = -0.5 * dn * (1.0 - nu);
    const double mean = zonal_mean(
        [&](double c) {
            const double c2 = c * c;
            return scale * std::exp(ea * std::log(k2 + (1.0 - k2) * c2) + eb * std::log(l2 + (1.0 - l2) * c2));
        },
        f.n, nodes);
    return std::pow(mean, 1.0 / dn);
}

inline double mean_radius(const RealizedMap& f, double r, int nodes = 4096)
{
    if (!(r > 0.0))
        throw error(errc::invalid_input, "mean_radius needs r > 0");
    return r * mean_radius_normalized(f, std::log(r), nodes);
}

/// Same quantity from a Fibonacci sphere of the given size (n = 3 only).
inline double mean_radius_fibonacci(const RealizedMap& f, double r, int nodes = 4096)
{
    if (f.n != 3)
        throw error(errc::invalid_input, "Fibonacci quadrature is for n = 3");
    const double lr = std::log(r);
    double sum = 0.0;
    const double golden = pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < nodes; ++k) {
        const double z = 1.0 - (2.0 * k + 1.0) / nodes;
        const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
        Vector w(3);
        w << z, s * std::cos(golden * k), s * std::sin(golden * k);
        sum += std::pow(eval_normalized(f, w, lr).norm(), 3.0);
    }
    return r * std::cbrt(sum / nodes);
}

// ---------------------------------------------------------------------------
// Orbit curve

/// f(e^{log_t} x) / rho_f(e^{log_t}), with f(0) = 0.
inline Vector rescaled_map_log(const RealizedMap& f, double log_t, const Vector& x, int nodes = 4096)
{
    if (x.size() != f.n || !all_finite(x))
        throw error(errc::invalid_input, "rescaled_map: bad point");
    const double r = x.norm();
    if (r == 0.0)
        return Vector::Zero(f.n);
    return r * eval_normalized(f, x / r, log_t + std::log(r)) / mean_radius_normalized(f, log_t, nodes);
}

inline Vector rescaled_map(const RealizedMap& f, double t, const Vector& x, int nodes = 4096)
{
    if (!(t > 0.0))
        throw error(errc::invalid_input, "rescaled_map needs t > 0");
    return rescaled_map_log(f, std::log(t), x, nodes);
}

/// gamma(t) = f(t e_1) / rho_f(t) at each log t.
inline std::vector<Vector> orbit_curve(const RealizedMap& f, const std::vector<double>& log_t, int nodes = 4096)
{
    std::vector<Vector> out;
    out.reserve(log_t.size());
    const Vector e1 = basis_vector(f.n, 0);
    for (double lt : log_t)
        out.push_back(rescaled_map_log(f, lt, e1, nodes));
    return out;
}

struct Checkpoint {
    double log_r;
    Vector planned;
    Vector sampled;
    double error;
};

/// The orbit at every shell boundary against its planned point.
inline std::vector<Checkpoint> checkpoints(const RealizedMap& f)
{
    std::vector<Checkpoint> out;
    for (const ShellPiece& p : f.pieces) {
        for (const auto& [lr, planned] : {std::pair{p.log_r_out, p.target_out}, std::pair{p.log_r_in, p.target_in}}) {
            const Vector s = orbit_curve(f, {lr}).front();
            out.push_back({lr, planned, s, (s - planned).norm()});
        }
    }
    return out;
}

/// Log-radius samples: per_piece + 1 per shell (boundaries included), or
/// the start radius alone for an empty map.
inline std::vector<double> orbit_log_radii(const RealizedMap& f, int per_piece, std::size_t first_piece = 0)
{
    std::vector<double> out;
    if (f.pieces.empty()) {
        out.push_back(f.log_r_start);
        return out;
    }
    for (std::size_t i = first_piece; i < f.pieces.size(); ++i) {
        const ShellPiece& p = f.pieces[i];
        for (int j = i == first_piece ? 0 : 1; j <= per_piece; ++j)
            out.push_back(p.log_r_out + (p.log_r_in - p.log_r_out) * j / per_piece);
    }
    return out;
}

inline double hausdorff_distance(const std::vector<Vector>& a, const std::vector<Vector>& b)
{
    if (a.empty() || b.empty())
        throw error(errc::invalid_input, "hausdorff_distance needs two non-empty sets");
    auto directed = [](const std::vector<Vector>& from, const std::vector<Vector>& to) {
        double worst = 0.0;
        for (const Vector& p : from) {
            double best = std::numeric_limits<double>::infinity();
            for (const Vector& q : to)
                best = std::min(best, (p - q).squaredNorm());
            worst = std::max(worst, best);
        }
        return std::sqrt(worst);
    };
    return std::max(directed(a, b), directed(b, a));
}


// ---------------------------------------------------------------------------
// Probe

/// Cell centres of [-1, 1]^n with per_axis cells per axis, origin excluded.
inline std::vector<Vector> probe_grid(int n, int per_axis)
{
    if (n < 1 || per_axis < 1)
        throw error(errc::invalid_input, "probe grid needs n >= 1 and per_axis >= 1");
    std::vector<Vector> xs;
    std::vector<int> idx(n, 0);
    for (;;) {
        Vector x(n);
        for (int d = 0; d < n; ++d)
            x(d) = -1.0 + 2.0 * (idx[d] + 0.5) / per_axis;
        if (x.norm() > 1e-12)
            xs.push_back(x);
        int d = 0;
        while (d < n && ++idx[d] == per_axis)
            idx[d++] = 0;
        if (d == n)
            break;
    }
    return xs;
}

/// Largest |f_s(x) - f_t(x)| over pairs of tabulated slices.
inline double max_slice_distance(const std::vector<std::vector<Vector>>& slices)
{
    double spread = 0.0;
    for (std::size_t a = 0; a < slices.size(); ++a)
        for (std::size_t b = a + 1; b < slices.size(); ++b) {
            if (slices[a].size() != slices[b].size())
                throw error(errc::invalid_input, "slices differ in size");
            for (std::size_t i = 0; i < slices[a].size(); ++i)
                spread = std::max(spread, (slices[a][i] - slices[b][i]).norm());
        }
    return spread;
}

} // namespace qcmap
