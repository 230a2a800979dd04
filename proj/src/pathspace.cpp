#include "ogc/pathspace.hpp"

#include <algorithm>
#include <cmath>

namespace ogc {

Vec DiscreteCurve::at(double s) const {
    s = std::clamp(s, 0.0, 1.0);
    double t = s * n;
    int i = std::min(static_cast<int>(t), n - 1);
    double f = t - i;
    return (1.0 - f) * nodes[i] + f * nodes[i + 1];
}

bool DiscreteCurve::is_constant(double tol) const {
    for (int i = 1; i <= n; ++i)
        if ((nodes[i] - nodes[0]).norm() > tol) return false;
    return true;
}

namespace {

inline int grid_index(const DiscreteCurve& x, double s, const char* what) {
    double t = s * x.n;
    int i = static_cast<int>(std::lround(t));
    if (std::abs(t - i) > 1e-6 * x.n) throw BadInterval(std::string(what) + ": not grid aligned");
    return std::clamp(i, 0, x.n);
}

}  // namespace

double h1_norm(const DiscreteCurve& x, double a, double b) {
    if (b - a < 0.5 / x.n) throw EmptyInterval();
    int ia = grid_index(x, a, "h1_norm a"), ib = grid_index(x, b, "h1_norm b");
    double acc = std::max(x.nodes[ia].squaredNorm(), x.nodes[ib].squaredNorm());
    const double h = x.h();
    for (int i = ia; i < ib; ++i) acc += (x.nodes[i + 1] - x.nodes[i]).squaredNorm() / h;
    return std::sqrt(acc / 2.0);
}

double h1_dist(const DiscreteCurve& x, const DiscreteCurve& y, double a, double b) {
    if (x.n != y.n) throw Mismatch("grid mismatch");
    DiscreteCurve d;
    d.n = x.n;
    d.nodes.resize(x.n + 1);
    for (int i = 0; i <= x.n; ++i) d.nodes[i] = x.nodes[i] - y.nodes[i];
    return h1_norm(d, a, b);
}

double curve_integral_g(const MetricField& field, const DiscreteCurve& x, double a, double b) {
    int ia = grid_index(x, a, "energy a"), ib = grid_index(x, b, "energy b");
    if (ib <= ia) throw EmptyInterval();
    const double h = x.h();
    double acc = 0.0;
    for (int i = ia; i < ib; ++i) {
        Vec mid = 0.5 * (x.nodes[i] + x.nodes[i + 1]);
        Vec v = (x.nodes[i + 1] - x.nodes[i]) / h;
        acc += h * metric_inner(field, mid, v, v);
    }
    return acc;
}

double curve_energy(const MetricField& field, const DiscreteCurve& x, double a, double b) {
    return 0.5 * curve_integral_g(field, x, a, b);
}

std::vector<IntervalRecord> maximal_intervals(const DiscreteCurve& x, const DomainSpec& spec) {
    const double tol = spec.boundary_tol;
    std::vector<double> phi(x.n + 1);
    for (int i = 0; i <= x.n; ++i) phi[i] = spec.phi(x.nodes[i]);
    if (phi[0] < -10 * tol || phi[x.n] < -10 * tol)
        throw NotInM0("curve endpoints must satisfy phi >= -tol");
    std::vector<IntervalRecord> out;
    int i = 0;
    while (i <= x.n) {
        if (phi[i] > tol) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= x.n && phi[j + 1] <= tol) ++j;
        if (j > i) {
            IntervalRecord rec;
            rec.ia = i;
            rec.ib = j;
            rec.a = x.grid(i);
            rec.b = x.grid(j);
            rec.kind = IntervalRecord::Kind::Maximal;
            rec.boundary_flag_a = std::abs(phi[i]) <= tol;
            rec.boundary_flag_b = std::abs(phi[j]) <= tol;
            out.push_back(rec);
        }
        i = j + 1;
    }
    return out;
}

DiscreteCurve reverse_curve(const DiscreteCurve& x) {
    DiscreteCurve y;
    y.n = x.n;
    y.nodes.assign(x.nodes.rbegin(), x.nodes.rend());
    return y;
}

namespace {

bool lex_less(const Vec& a, const Vec& b) {
    for (int i = 0; i < a.size(); ++i) {
        if (a[i] < b[i] - 1e-14) return true;
        if (a[i] > b[i] + 1e-14) return false;
    }
    return false;
}

// Radial normalization homeomorphism of the chart: w in the closed unit
// disk <-> chart point center + w_hat |w| R(w_hat).
Vec from_disk(const DomainSpec& spec, const Vec& w) {
    double r = w.norm();
    if (r < 1e-14) return spec.chart_center;
    Vec dir = w / r;
    return spec.chart_center + r * spec.star_radius(dir) * dir;
}

Vec to_disk(const DomainSpec& spec, const Vec& p) {
    Vec d = p - spec.chart_center;
    double r = d.norm();
    if (r < 1e-14) return Vec(Vec::Zero(p.size()));
    Vec dir = d / r;
    return Vec((r / spec.star_radius(dir)) * dir);
}

}  // namespace

DiscreteCurve chord_generator(const DomainSpec& spec, const Vec& A, const Vec& B, int n,
                              double inj_bound) {
    const double tol = std::max(spec.boundary_tol, 1e-6);
    if (std::abs(spec.phi(A)) > tol || std::abs(spec.phi(B)) > tol) throw NotOnBoundary();
    if (!spec.star_radius) throw BadConfig("domain lacks a radial normalization");
    DiscreteCurve out;
    out.n = n;
    out.nodes.resize(n + 1);

    if ((A - B).norm() < 1e-12) {
        for (int i = 0; i <= n; ++i) out.nodes[i] = A;
        return out;
    }
    // Canonical orientation makes the generator exactly R-equivariant.
    if (lex_less(B, A)) return reverse_curve(chord_generator(spec, B, A, n, inj_bound));

    const Vec wA = to_disk(spec, A), wB = to_disk(spec, B);
    const double delta0 = spec.delta0 > 0 ? spec.delta0 : 0.0;

    for (int M = 8; M <= 512; M *= 2) {
        // Segment samples through the radial normalization.
        std::vector<Vec> pts(M + 1);
        for (int k = 0; k <= M; ++k) {
            double s = static_cast<double>(k) / M;
            pts[k] = from_disk(spec, (1.0 - s) * wA + s * wB);
        }
        // Piece sizing against the injectivity bound.
        double max_piece = 0.0;
        for (int k = 0; k < M; ++k) {
            Vec mid = 0.5 * (pts[k] + pts[k + 1]);
            max_piece = std::max(max_piece,
                                 metric_norm(*spec.field, mid, pts[k + 1] - pts[k]));
        }
        if (max_piece > 0.8 * inj_bound && M < 512) continue;

        // Broken geodesic through the samples, n/M nodes per piece.
        if (n % M != 0 && M > n) throw BadConfig("node count incompatible with subdivision");
        bool phi_ok = true;
        try {
            std::vector<Vec> nodes(n + 1);
            if (M >= n) {
                for (int i = 0; i <= n; ++i) nodes[i] = pts[i * M / n];
            } else {
                int per = n / M;
                for (int k = 0; k < M; ++k) {
                    GeodesicTrajectory piece =
                        minimal_geodesic(*spec.field, pts[k], pts[k + 1], 2.0 * inj_bound);
                    for (int j = 0; j < per; ++j) {
                        double t = static_cast<double>(j) / per;
                        // interpolate the dense trajectory
                        double tt = t * (piece.times.size() - 1);
                        int idx = std::min(static_cast<int>(tt),
                                           static_cast<int>(piece.times.size()) - 2);
                        double f = tt - idx;
                        nodes[k * per + j] =
                            (1.0 - f) * piece.points[idx] + f * piece.points[idx + 1];
                    }
                }
                nodes[n] = pts[M];
            }
            // margin check: stay below 0.9 delta0 outside the closed domain
            for (const Vec& p : nodes)
                if (delta0 > 0 && spec.phi(p) > 0.9 * delta0) {
                    phi_ok = false;
                    break;
                }
            if (!phi_ok && M < 512) continue;

            // Clamp into the closed domain via the inward gradient flow.
            for (Vec& p : nodes) {
                double f = spec.phi(p);
                if (f > 0) p = flow_eta(spec, p, f, -1);
            }
            // Interior push: eta^-(s(1-s) max(0, delta0/2 + phi)).
            if (delta0 > 0) {
                for (int i = 1; i < n; ++i) {
                    double s = static_cast<double>(i) / n;
                    double f = spec.phi(nodes[i]);
                    double tau = s * (1.0 - s) * std::max(0.0, 0.5 * delta0 + f);
                    if (tau > 1e-14) nodes[i] = flow_eta(spec, nodes[i], tau, -1);
                }
            }
            out.nodes = std::move(nodes);
            out.nodes[0] = A;
            out.nodes[n] = B;
            return out;
        } catch (const OgcError&) {
            if (M >= 512) throw;
            continue;
        }
    }
    throw NoConvergence("chord generator failed to build a broken geodesic");
}

std::vector<Vec> boundary_grid_points(const DomainSpec& spec, int resolution) {
    if (spec.field->dim != 2)
        throw BadConfig("boundary grids are implemented for two-dimensional charts");
    std::vector<Vec> out;
    out.reserve(resolution);
    for (int k = 0; k < resolution; ++k) {
        double ang = 2.0 * M_PI * k / resolution;
        Vec dir = vec2(std::cos(ang), std::sin(ang));
        out.push_back(spec.chart_center + spec.star_radius(dir) * dir);
    }
    return out;
}

PathFamily build_family(const DomainSpec& spec, int boundary_resolution, int n,
                        double inj_bound) {
    PathFamily fam;
    fam.boundary_grid = boundary_grid_points(spec, boundary_resolution);
    const int m = boundary_resolution;
    for (int i = 0; i < m; ++i) {
        for (int j = i; j < m; ++j) {
            DiscreteCurve c = chord_generator(spec, fam.boundary_grid[i], fam.boundary_grid[j],
                                              n, inj_bound);
            if (j > i) fam.curves[{j, i}] = reverse_curve(c);
            fam.curves[{i, j}] = std::move(c);
        }
    }
    return fam;
}

double compute_M0(PathFamily& family, const MetricField& field) {
    if (family.curves.empty()) throw EmptyFamily();
    double m0 = 0.0;
    for (const auto& [key, c] : family.curves) {
        if (c.is_constant()) continue;
        m0 = std::max(m0, curve_integral_g(field, c, 0.0, 1.0));
    }
    family.M0 = m0;
    return m0;
}

bool in_M(const DiscreteCurve& x, const PathFamily& family, const DomainSpec& spec) {
    for (const IntervalRecord& rec : maximal_intervals(x, spec)) {
        if (curve_energy(*spec.field, x, rec.a, rec.b) >= family.M0) return false;
    }
    return true;
}

Lemma21Result lemma2_1_check(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                             double delta, double K0_override) {
    int ia = grid_index(x, a, "lemma2_1 a"), ib = grid_index(x, b, "lemma2_1 b");
    if (std::abs(spec.phi(x.nodes[ia])) > std::max(spec.boundary_tol, 1e-6))
        throw PreconditionUnmet("x(a) not on the boundary");
    bool deep = false;
    for (int i = ia; i <= ib; ++i)
        if (spec.phi(x.nodes[i]) <= -delta) deep = true;
    if (!deep && delta > 0) throw PreconditionUnmet("no grid point at depth -delta");
    double K0 = K0_override > 0 ? K0_override : spec.K0;
    Lemma21Result res;
    res.lhs = b - a;
    double integral = curve_integral_g(*spec.field, x, a, b);
    res.rhs = integral > 0 ? delta * delta / (K0 * K0) / integral : 0.0;
    res.holds = res.lhs >= res.rhs - 1e-12;
    return res;
}

}  // namespace ogc
