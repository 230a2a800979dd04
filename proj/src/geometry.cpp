#include "ogc/geometry.hpp"

#include <Eigen/Cholesky>
#include <cmath>

namespace ogc {

ChartDomain ChartDomain::box(const Vec& lo, const Vec& hi) {
    ChartDomain d;
    d.kind = Kind::Box;
    d.lo = lo;
    d.hi = hi;
    return d;
}

ChartDomain ChartDomain::ball(const Vec& center, double radius) {
    ChartDomain d;
    d.kind = Kind::Ball;
    d.center = center;
    d.radius = radius;
    return d;
}

bool ChartDomain::contains(const Vec& q, double margin) const {
    if (kind == Kind::Box) {
        for (int i = 0; i < q.size(); ++i)
            if (q[i] < lo[i] + margin || q[i] > hi[i] - margin) return false;
        return true;
    }
    return (q - center).norm() < radius - margin;
}

int ChartDomain::dim() const { return kind == Kind::Box ? static_cast<int>(lo.size()) : static_cast<int>(center.size()); }

double GeodesicTrajectory::length(const MetricField& field) const {
    if (points.size() < 2) return 0.0;
    double speed = metric_norm(field, points.front(), velocities.front());
    return speed * (times.back() - times.front());
}

Mat metric_at(const MetricField& field, const Vec& q) {
    if (!field.chart_domain.contains(q)) throw OutOfChart();
    Mat g = field.g_eval(q);
    g = 0.5 * (g + g.transpose()).eval();
    Eigen::LLT<Mat> llt(g);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite();
    return g;
}

namespace {

// Symmetrized metric without the chart/SPD guards, for inner loops where the
// caller has already validated the point.
inline Mat raw_metric(const MetricField& field, const Vec& q) {
    Mat g = field.g_eval(q);
    return 0.5 * (g + g.transpose());
}

Tensor3 christoffel_fd(const MetricField& field, const Vec& q, double h) {
    const int N = field.dim;
    std::vector<Mat> dg(N);  // dg[k] = d g / d q_k
    Vec qp = q, qm = q;
    for (int k = 0; k < N; ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        dg[k] = (raw_metric(field, qp) - raw_metric(field, qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    Mat ginv = raw_metric(field, q).inverse();
    Tensor3 gamma(N, Mat::Zero(N, N));
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j <= i; ++j) {
                double s = 0.0;
                for (int m = 0; m < N; ++m)
                    s += ginv(k, m) * 0.5 * (dg[i](m, j) + dg[j](m, i) - dg[m](i, j));
                gamma[k](i, j) = s;
                gamma[k](j, i) = s;
            }
    return gamma;
}

}  // namespace

Tensor3 christoffel_at(const MetricField& field, const Vec& q) {
    if (!field.chart_domain.contains(q, field.derivative_step)) throw OutOfChart();
    if (field.analytic_christoffel) return field.analytic_christoffel(q);
    // Richardson extrapolation of the central-difference symbols.
    const double h = field.derivative_step;
    Tensor3 a = christoffel_fd(field, q, h);
    Tensor3 b = christoffel_fd(field, q, 2.0 * h);
    Tensor3 out(a.size());
    for (size_t k = 0; k < a.size(); ++k) out[k] = (4.0 * a[k] - b[k]) / 3.0;
    return out;
}

double metric_inner(const MetricField& field, const Vec& q, const Vec& u, const Vec& v) {
    return u.dot(raw_metric(field, q) * v);
}

double metric_norm(const MetricField& field, const Vec& q, const Vec& u) {
    return std::sqrt(std::max(0.0, metric_inner(field, q, u, u)));
}

namespace {

struct GeoState {
    Vec q, v;
};

inline GeoState geo_rhs(const MetricField& field, const GeoState& s) {
    Tensor3 gamma = field.analytic_christoffel ? field.analytic_christoffel(s.q)
                                               : christoffel_fd(field, s.q, field.derivative_step);
    const int N = field.dim;
    Vec acc(N);
    for (int k = 0; k < N; ++k) acc[k] = -s.v.dot(gamma[k] * s.v);
    return {s.v, acc};
}

inline GeoState geo_rk4(const MetricField& field, const GeoState& s, double h) {
    GeoState k1 = geo_rhs(field, s);
    GeoState k2 = geo_rhs(field, {s.q + 0.5 * h * k1.q, s.v + 0.5 * h * k1.v});
    GeoState k3 = geo_rhs(field, {s.q + 0.5 * h * k2.q, s.v + 0.5 * h * k2.v});
    GeoState k4 = geo_rhs(field, {s.q + h * k3.q, s.v + h * k3.v});
    return {s.q + h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
            s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

}  // namespace

GeodesicTrajectory integrate_geodesic(const MetricField& field, const Vec& q0, const Vec& v0,
                                      double T, double step) {
    if (step <= 0) throw StepTooLarge("nonpositive step");
    if (!field.chart_domain.contains(q0)) throw OutOfChart();
    GeodesicTrajectory traj;
    const int nsteps = std::max(1, static_cast<int>(std::ceil(T / step)));
    const double h = T / nsteps;
    GeoState s{q0, v0};
    traj.times.push_back(0.0);
    traj.points.push_back(s.q);
    traj.velocities.push_back(s.v);
    const double e0 = metric_inner(field, q0, v0, v0);
    for (int i = 0; i < nsteps; ++i) {
        s = geo_rk4(field, s, h);
        double t = (i + 1) * h;
        if (!field.chart_domain.contains(s.q)) throw LeftChart("left chart at t=" + std::to_string(t));
        traj.times.push_back(t);
        traj.points.push_back(s.q);
        traj.velocities.push_back(s.v);
    }
    if (e0 > 0) {
        double eT = metric_inner(field, s.q, s.v, s.v);
        if (std::abs(eT - e0) / e0 > 1e-6 * std::max(1.0, T)) throw StepTooLarge("energy drift");
    }
    return traj;
}

GeodesicTrajectory minimal_geodesic(const MetricField& field, const Vec& p, const Vec& q,
                                    double dist_bound) {
    const int N = field.dim;
    const double scale = 1.0 + p.norm() + q.norm();
    if ((p - q).norm() < 1e-14 * scale) {
        GeodesicTrajectory traj;
        traj.times = {0.0, 1.0};
        traj.points = {p, p};
        traj.velocities = {Vec::Zero(N), Vec::Zero(N)};
        return traj;
    }
    // Rough distance pre-check with the metric at the midpoint.
    double d_est = std::sqrt(metric_inner(field, 0.5 * (p + q), q - p, q - p));
    if (d_est > dist_bound) throw TooFarApart();

    auto shoot = [&](const Vec& v, int nsteps) {
        return integrate_geodesic(field, p, v, 1.0, 1.0 / nsteps);
    };
    int nsteps = std::max(48, std::min(192, static_cast<int>(48 * (1.0 + d_est))));
    nsteps += nsteps % 2;  // even count: the parameter midpoint is a sample
    Vec v = q - p;  // straight-line initial guess
    const double tol = 1e-10 * scale;
    Vec err;
    double err_norm = 0.0;
    bool ok = false;
    for (int it = 0; it < 50; ++it) {
        GeodesicTrajectory traj;
        try {
            traj = shoot(v, nsteps);
        } catch (const LeftChart&) {
            v *= 0.5;
            continue;
        }
        err = traj.end() - q;
        err_norm = err.norm();
        if (err_norm < tol) {
            ok = true;
            break;
        }
        // Finite-difference Jacobian of the endpoint w.r.t. v.
        Mat J(N, N);
        const double fh = 1e-7 * (1.0 + v.norm());
        for (int k = 0; k < N; ++k) {
            Vec vk = v;
            vk[k] += fh;
            GeodesicTrajectory tk = shoot(vk, nsteps);
            J.col(k) = (tk.end() - q - err) / fh;
        }
        Vec dv = J.fullPivLu().solve(err);
        double damp = err_norm > 1e-4 * scale ? 0.5 : 1.0;
        v -= damp * dv;
    }
    if (!ok) throw NoConvergence("shooting did not converge; endpoint error " + std::to_string(err_norm));
    return shoot(v, nsteps);
}

double injectivity_radius_lower_bound(const MetricField& field, const std::vector<Vec>& region,
                                      const InjectivityOptions& opts) {
    if (region.empty()) throw DegenerateRegion("empty region");
    const int N = field.dim;
    const double eps = 1e-4;
    double bound = opts.cap;
    for (const Vec& q : region) {
        if (!field.chart_domain.contains(q)) throw DegenerateRegion("sample outside chart");
        for (int d = 0; d < opts.directions; ++d) {
            double ang = 2.0 * M_PI * d / opts.directions + 0.39;
            Vec v = Vec::Zero(N);
            v[0] = std::cos(ang);
            v[std::min(1, N - 1)] = std::sin(ang);
            double nv = metric_norm(field, q, v);
            if (nv <= 0) continue;
            v /= nv;
            // Rotate within a g-orthonormal frame to get the perturbation.
            Vec w = Vec::Zero(N);
            w[0] = -std::sin(ang);
            w[std::min(1, N - 1)] = std::cos(ang);
            // g-orthonormalize w against v.
            double c = metric_inner(field, q, w, v);
            w -= c * v;
            double nw = metric_norm(field, q, w);
            if (nw <= 1e-12) continue;
            w /= nw;
            GeoState a{q, v}, b{q, v + eps * w};
            double sep_max = 0.0, t_max = 0.0;
            double conj = -1.0;
            const int nsteps = static_cast<int>(opts.cap / opts.step);
            for (int i = 0; i < nsteps; ++i) {
                try {
                    a = geo_rk4(field, a, opts.step);
                    b = geo_rk4(field, b, opts.step);
                } catch (...) {
                    break;
                }
                if (!field.chart_domain.contains(a.q) || !field.chart_domain.contains(b.q)) break;
                double t = (i + 1) * opts.step;
                double sep = (a.q - b.q).norm();
                if (sep > sep_max) {
                    sep_max = sep;
                    t_max = t;
                } else if (sep_max > 3.0 * eps && sep < 0.9 * sep_max) {
                    // Focusing: the Jacobi field peaked at t_max and is
                    // shrinking. Estimate the conjugate time as 2 t_max
                    // (exact in constant curvature).
                    conj = 2.0 * t_max;
                    break;
                }
            }
            if (conj > 0) bound = std::min(bound, 0.9 * conj);
        }
    }
    if (bound < opts.floor) throw DegenerateRegion("injectivity bound collapsed");
    return bound;
}

}  // namespace ogc
