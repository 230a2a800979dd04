#include "ogc/criticality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ogc {

namespace {

inline int grid_index(const DiscreteCurve& x, double s, const char* what) {
    double t = s * x.n;
    int i = static_cast<int>(std::lround(t));
    if (std::abs(t - i) > 1e-6 * x.n) throw BadInterval(std::string(what) + ": not grid aligned");
    return std::clamp(i, 0, x.n);
}

// Midpoint of the minimal geodesic between two nearby points; the defect
// x_i - midpoint(x_{i-1}, x_{i+1}) is a second-order discrete measure of the
// covariant acceleration that vanishes (to solver tolerance) on exactly
// sampled geodesics.
Vec geodesic_midpoint(const MetricField& field, const Vec& p, const Vec& q) {
    if ((p - q).norm() < 1e-13 * (1.0 + p.norm())) return p;
    GeodesicTrajectory traj = minimal_geodesic(field, p, q, 1e6);
    size_t steps = traj.points.size() - 1;
    if (steps % 2 == 0) return traj.points[steps / 2];
    return traj.points[(steps + 1) / 2];
}

}  // namespace

EnergyGradient energy_first_variation(const DiscreteCurve& x, const DomainSpec& spec,
                                      double a, double b, double contact_tol) {
    EnergyGradient eg;
    eg.ia = grid_index(x, a, "variation a");
    eg.ib = grid_index(x, b, "variation b");
    const int m = eg.ib - eg.ia;
    if (m < 2) throw BadInterval("interval too short for a first variation");
    bool constant = true;
    for (int k = 1; k <= m && constant; ++k)
        if ((x.nodes[eg.ia + k] - x.nodes[eg.ia]).norm() >
            1e-12 * (1.0 + x.nodes[eg.ia].norm()))
            constant = false;
    if (constant) throw BadInterval("constant portions are not critical portions");
    const MetricField& field = *spec.field;
    const double h = x.h();
    eg.grad.assign(m + 1, Vec::Zero(field.dim));
    eg.accel.assign(m + 1, Vec::Zero(field.dim));
    for (int k = 1; k < m; ++k) {
        int i = eg.ia + k;
        Vec mid = geodesic_midpoint(field, x.nodes[i - 1], x.nodes[i + 1]);
        Vec acc = (mid - x.nodes[i]) * (2.0 / (h * h));
        eg.accel[k] = acc;
        eg.grad[k] = -h * (field.g_eval(x.nodes[i]) * acc);
    }
    GeodesicTrajectory first =
        minimal_geodesic(field, x.nodes[eg.ia], x.nodes[eg.ia + 1], 1e6);
    GeodesicTrajectory last =
        minimal_geodesic(field, x.nodes[eg.ib - 1], x.nodes[eg.ib], 1e6);
    eg.v_start = first.velocities.front() / h;
    eg.v_end = last.velocities.back() / h;
    eg.grad[0] = -(field.g_eval(x.nodes[eg.ia]) * eg.v_start);
    eg.grad[m] = field.g_eval(x.nodes[eg.ib]) * eg.v_end;
    for (int k = 0; k <= m; ++k)
        if (std::abs(spec.phi(x.nodes[eg.ia + k])) <= contact_tol) eg.contacts.push_back(k);
    return eg;
}

namespace {

// Tridiagonal H1 inner-product matrix on the interval grid:
// <u,v> = 1/2 (u_a v_a + u_b v_b) + sum h (du/h)(dv/h).
struct H1Operator {
    int m = 0;
    double h = 0.0;
    std::vector<double> diag, off;

    H1Operator(int m_, double h_) : m(m_), h(h_) {
        diag.assign(m + 1, 0.0);
        off.assign(m, -1.0 / h_);
        for (int i = 0; i <= m; ++i) {
            double d = 0.0;
            if (i > 0) d += 1.0 / h_;
            if (i < m) d += 1.0 / h_;
            diag[i] = d;
        }
        diag[0] += 0.5;
        diag[m] += 0.5;
    }

    // Thomas solve K y = r (scalar); r untouched.
    std::vector<double> solve(const std::vector<double>& r) const {
        std::vector<double> c(m + 1), d(m + 1), y(m + 1);
        c[0] = off.empty() ? 0.0 : off[0] / diag[0];
        d[0] = r[0] / diag[0];
        for (int i = 1; i <= m; ++i) {
            double lower = off[i - 1];
            double denom = diag[i] - lower * c[i - 1];
            c[i] = (i < m) ? off[i] / denom : 0.0;
            d[i] = (r[i] - lower * d[i - 1]) / denom;
        }
        y[m] = d[m];
        for (int i = m - 1; i >= 0; --i) y[i] = d[i] - c[i] * y[i + 1];
        return y;
    }

    double quad(const std::vector<Vec>& u) const {
        double acc = 0.5 * (u[0].squaredNorm() + u[m].squaredNorm());
        for (int i = 0; i < m; ++i) acc += (u[i + 1] - u[i]).squaredNorm() / h;
        return acc;
    }
};

std::vector<Vec> precondition(const H1Operator& K, const std::vector<Vec>& rhs, int dim) {
    const int m = K.m;
    std::vector<Vec> out(m + 1, Vec::Zero(dim));
    std::vector<double> r(m + 1);
    for (int c = 0; c < dim; ++c) {
        for (int i = 0; i <= m; ++i) r[i] = rhs[i][c];
        std::vector<double> y = K.solve(r);
        for (int i = 0; i <= m; ++i) out[i][c] = y[i];
    }
    return out;
}

// Project onto the outward cone V+ = { V : g(V, grad phi) >= 0 at
// boundary-contact parameters } by removing inward normal components.
void project_cone(const DiscreteCurve& x, const DomainSpec& spec, const EnergyGradient& eg,
                  std::vector<Vec>& d) {
    for (int k : eg.contacts) {
        Vec q = x.nodes[eg.ia + k];
        Vec n = spec.grad_phi(q);
        double nn = metric_inner(*spec.field, q, n, n);
        if (nn < 1e-18) continue;
        double c = metric_inner(*spec.field, q, d[k], n);
        if (c < 0) d[k] -= (c / nn) * n;
    }
}

}  // namespace

double residual_vplus(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                      const CriticalityOptions& opts) {
    EnergyGradient eg = energy_first_variation(x, spec, a, b, opts.contact_tol);
    const int m = eg.ib - eg.ia;
    const int dim = spec.field->dim;
    H1Operator K(m, x.h());
    std::vector<Vec> neg(m + 1);
    for (int k = 0; k <= m; ++k) neg[k] = -eg.grad[k];
    std::vector<Vec> d = precondition(K, neg, dim);
    project_cone(x, spec, eg, d);
    double value = 0.0;
    for (int k = 0; k <= m; ++k) value += neg[k].dot(d[k]);
    if (value <= 0) return 0.0;
    double nd = std::sqrt(K.quad(d));
    if (nd < 1e-14) return 0.0;
    return value / nd;
}

double cusp_angle(const DiscreteCurve& x, const DomainSpec& spec, double t1, double t2,
                  double* tangential_defect) {
    int i1 = grid_index(x, t1, "cusp t1"), i2 = grid_index(x, t2, "cusp t2");
    if (i1 < 1 || i2 > x.n - 1 || i2 < i1) throw NotACusp("contact run touches the curve ends");
    const MetricField& field = *spec.field;
    const double h = x.h();
    Vec v1 = (x.nodes[i1] - x.nodes[i1 - 1]) / h;
    Vec v2 = (x.nodes[i2 + 1] - x.nodes[i2]) / h;
    Vec q = x.nodes[i1];
    double n1 = metric_norm(field, q, v1), n2 = metric_norm(field, q, v2);
    if (n1 < 1e-12 || n2 < 1e-12) throw NotACusp("vanishing one-sided velocity");
    double c = metric_inner(field, q, v1, v2) / (n1 * n2);
    double theta = std::acos(std::clamp(c, -1.0, 1.0));
    if (theta < 1e-3) throw NotACusp("velocity continuous across the contact");
    if (tangential_defect) {
        Vec n = spec.grad_phi(q);
        double nn = metric_inner(field, q, n, n);
        Vec p1 = v1, p2 = v2;
        if (nn > 1e-18) {
            p1 -= (metric_inner(field, q, v1, n) / nn) * n;
            p2 -= (metric_inner(field, q, v2, n) / nn) * n;
        }
        *tangential_defect = metric_norm(field, q, p1 - p2);
    }
    return theta;
}

CriticalityReport classify_portion(const DiscreteCurve& x, const DomainSpec& spec,
                                   double a, double b, const CriticalityOptions& opts) {
    CriticalityReport report;
    report.residual_vplus = residual_vplus(x, spec, a, b, opts);
    if (report.residual_vplus > opts.residual_threshold)
        throw NotCritical("residual above the criticality threshold");
    int ia = grid_index(x, a, "classify a"), ib = grid_index(x, b, "classify b");
    report.interval.a = a;
    report.interval.b = b;
    report.interval.ia = ia;
    report.interval.ib = ib;
    const double h = x.h();
    const double node_tol = 1e-8 * (1.0 + x.nodes[ia].norm());

    // Constant head/tail runs (second-type diagnostics).
    int k = ia;
    while (k + 1 <= ib && (x.nodes[k + 1] - x.nodes[ia]).norm() <= node_tol) ++k;
    report.ell_minus = (k - ia) * h;
    k = ib;
    while (k - 1 >= ia && (x.nodes[k - 1] - x.nodes[ib]).norm() <= node_tol) --k;
    report.ell_plus = (ib - k) * h;

    // Interior boundary-contact runs and their velocity jumps.
    int i = ia + 1;
    while (i <= ib - 1) {
        if (std::abs(spec.phi(x.nodes[i])) > opts.contact_tol) {
            ++i;
            continue;
        }
        int j = i;
        while (j + 1 <= ib - 1 && std::abs(spec.phi(x.nodes[j + 1])) <= opts.contact_tol) ++j;
        double t1 = x.grid(i), t2 = x.grid(j);
        try {
            CuspRecord cusp;
            cusp.t1 = t1;
            cusp.t2 = t2;
            cusp.theta = cusp_angle(x, spec, t1, t2, &cusp.tangential_defect);
            report.cusps.push_back(cusp);
        } catch (const NotACusp&) {
            // continuous velocity across this contact
        }
        i = j + 1;
    }

    if (report.ell_minus + report.ell_plus > 0)
        report.classification = Classification::IrregularSecondType;
    else if (!report.cusps.empty())
        report.classification = Classification::IrregularFirstType;
    else
        report.classification = Classification::NearRegularOgc;
    return report;
}

std::vector<IntervalRecord> delta_intervals(const DiscreteCurve& x, const DomainSpec& spec,
                                            double delta, double d_small, double depth_tol) {
    if (delta <= 0 || (spec.delta0 > 0 && delta > spec.delta0 + 1e-12) || d_small < 0 ||
        d_small >= delta)
        throw BadDepths();
    if (depth_tol < 0) depth_tol = 1e-6;
    std::vector<double> phi(x.n + 1);
    for (int i = 0; i <= x.n; ++i) phi[i] = spec.phi(x.nodes[i]);
    const double level = -d_small;
    auto near_level = [&](int i) { return std::abs(phi[i] - level) <= depth_tol; };

    // candidate endpoints: nodes at the -d_small level adjacent to a crossing
    std::vector<int> down, up;
    for (int i = 0; i <= x.n; ++i) {
        if (!near_level(i)) continue;
        if (i + 1 <= x.n && phi[i + 1] < phi[i]) down.push_back(i);
        if (i - 1 >= 0 && phi[i - 1] < phi[i]) up.push_back(i);
    }
    std::vector<IntervalRecord> out;
    for (int alpha : down) {
        for (int beta : up) {
            if (beta <= alpha) continue;
            double min_phi = 1e300;
            bool above = true;
            for (int i = alpha; i <= beta; ++i) {
                min_phi = std::min(min_phi, phi[i]);
                if (phi[i] < -delta - depth_tol) above = false;
            }
            if (!above) continue;
            if (min_phi > -delta + depth_tol) continue;  // never reaches depth -delta
            IntervalRecord rec;
            rec.ia = alpha;
            rec.ib = beta;
            rec.a = x.grid(alpha);
            rec.b = x.grid(beta);
            rec.kind = IntervalRecord::Kind::Sub;
            out.push_back(rec);
        }
    }
    // minimality flags
    for (auto& rec : out) {
        rec.minimal = true;
        for (const auto& other : out)
            if ((other.ia > rec.ia && other.ib <= rec.ib) ||
                (other.ia >= rec.ia && other.ib < rec.ib)) {
                rec.minimal = false;
                break;
            }
    }
    return out;
}

std::vector<IntervalRecord> delta_bar_close_intervals(const DiscreteCurve& x,
                                                      const DomainSpec& spec,
                                                      double delta_bar) {
    // Minimal [alpha, beta] with phi(alpha) = phi(beta) = -delta_bar,
    // phi >= -delta_bar inside and some interior value strictly above.
    std::vector<double> phi(x.n + 1);
    for (int i = 0; i <= x.n; ++i) phi[i] = spec.phi(x.nodes[i]);
    std::vector<IntervalRecord> out;
    const double lvl = -delta_bar;
    int i = 1;
    while (i < x.n) {
        // left crossing: phi rises through the level
        if (!(phi[i - 1] < lvl && phi[i] >= lvl)) {
            ++i;
            continue;
        }
        int alpha = i - 1;  // snap to the node at/below the level
        // walk to the matching right crossing
        int j = i;
        bool strictly_above = false;
        while (j <= x.n && phi[j] >= lvl) {
            if (phi[j] > lvl + 1e-12) strictly_above = true;
            ++j;
        }
        if (j > x.n) break;  // ran into the end without re-crossing
        int beta = j;  // node at/below the level on the right
        if (strictly_above) {
            IntervalRecord rec;
            rec.ia = alpha;
            rec.ib = beta;
            rec.a = x.grid(alpha);
            rec.b = x.grid(beta);
            rec.kind = IntervalRecord::Kind::Sub;
            rec.minimal = true;
            out.push_back(rec);
        }
        i = j + 1;
    }
    return out;
}

std::pair<double, double> bending_and_proximity(const DiscreteCurve& x, const DomainSpec& spec,
                                                double alpha, double beta, double delta_bar) {
    if (delta_bar <= 0) delta_bar = spec.delta0 / 4.0;
    int ia = grid_index(x, alpha, "bending alpha"), ib = grid_index(x, beta, "bending beta");
    const double tol = std::max(0.05 * delta_bar, 1e-6);
    if (std::abs(spec.phi(x.nodes[ia]) + delta_bar) > tol ||
        std::abs(spec.phi(x.nodes[ib]) + delta_bar) > tol)
        throw NotDeltaBarClose("interval endpoints are not at depth -delta_bar");
    double p = -1e300;
    for (int i = ia; i <= ib; ++i) {
        double f = spec.phi(x.nodes[i]);
        if (f < -delta_bar - tol) throw NotDeltaBarClose("interval dips below -delta_bar");
        p = std::max(p, f);
    }
    const Vec& xa = x.nodes[ia];
    const Vec& xb = x.nodes[ib];
    double b_const;
    if ((xa - xb).norm() < 1e-12) {
        b_const = std::numeric_limits<double>::infinity();
    } else {
        Vec pa = project_to_boundary(spec, xa);
        Vec pb = project_to_boundary(spec, xb);
        double den = (pa - pb).norm();
        b_const = den < 1e-14 ? std::numeric_limits<double>::infinity()
                              : std::max((xb - pa).norm(), (xa - pb).norm()) / den;
    }
    return {b_const, p};
}

std::vector<IntervalRecord> find_nonessential_intervals(const DiscreteCurve& x,
                                                        const DomainSpec& spec,
                                                        const CriticalityOptions& opts) {
    double delta_bar = opts.delta_bar > 0 ? opts.delta_bar : spec.delta0 / 4.0;
    std::vector<IntervalRecord> out;
    if (delta_bar <= 0) return out;
    for (const IntervalRecord& close : delta_bar_close_intervals(x, spec, delta_bar)) {
        try {
            auto [b_const, p] = bending_and_proximity(x, spec, close.a, close.b, delta_bar);
            if (p >= -opts.sigma1 && b_const >= 1.0 + 1.5 * opts.gamma_bar) out.push_back(close);
        } catch (const NotDeltaBarClose&) {
        }
    }
    return out;
}

OgcCheck is_ogc(const DiscreteCurve& x, const DomainSpec& spec, double a, double b,
                double geo_tol, double orth_tol) {
    OgcCheck check;
    EnergyGradient eg = energy_first_variation(x, spec, a, b, spec.boundary_tol);
    const int m = eg.ib - eg.ia;
    const MetricField& field = *spec.field;
    const double h = x.h();
    double worst = 0.0;
    for (int k = 1; k < m; ++k) {
        // raw midpoint defect in the g-norm
        double defect = metric_norm(field, x.nodes[eg.ia + k], eg.accel[k]) * h * h / 2.0;
        worst = std::max(worst, defect);
    }
    check.geodesic_residual = worst;

    bool endpoints_on_boundary = std::abs(spec.phi(x.nodes[eg.ia])) <= 1e-5 &&
                                 std::abs(spec.phi(x.nodes[eg.ib])) <= 1e-5;
    double orth = 0.0;
    for (int side = 0; side < 2; ++side) {
        const Vec& q = side == 0 ? x.nodes[eg.ia] : x.nodes[eg.ib];
        const Vec& v = side == 0 ? eg.v_start : eg.v_end;
        double vn = metric_norm(field, q, v);
        if (vn < 1e-14) {
            orth = 1.0;
            continue;
        }
        for (const Vec& w : boundary_tangent_basis(spec, q))
            orth = std::max(orth, std::abs(metric_inner(field, q, v, w)) / vn);
    }
    check.orthogonality_defect = orth;

    check.is_wogc = false;
    for (int k = 1; k < m; ++k)
        if (std::abs(spec.phi(x.nodes[eg.ia + k])) <= spec.boundary_tol) check.is_wogc = true;

    check.ok = endpoints_on_boundary && check.geodesic_residual < geo_tol &&
               check.orthogonality_defect < orth_tol;
    return check;
}

}  // namespace ogc
