#include "ogc/geometries.hpp"

#include <cmath>

namespace ogc {

namespace {

std::shared_ptr<MetricField> euclidean_field(const ChartDomain& dom) {
    auto field = std::make_shared<MetricField>();
    field->dim = dom.dim();
    field->chart_domain = dom;
    const int N = field->dim;
    field->g_eval = [N](const Vec&) { return Mat::Identity(N, N); };
    field->analytic_christoffel = [N](const Vec&) { return Tensor3(N, Mat::Zero(N, N)); };
    return field;
}

}  // namespace

DomainSpec make_half_plane(double half_width, double depth) {
    DomainSpec spec;
    spec.name = "half_plane";
    spec.field = euclidean_field(
        ChartDomain::box(vec2(-half_width, -depth), vec2(half_width, 1.0)));
    spec.phi = [](const Vec& q) { return q[1]; };
    spec.dphi = [](const Vec&) { return vec2(0.0, 1.0); };
    spec.chart_center = vec2(0.0, -depth / 2);
    // Flat boundary: not strongly concave (the gate reports that); the shell
    // depth below is only the band on which the eta flows are exercised.
    spec.delta0 = std::min(0.9, depth - 1e-3);
    spec.K0 = 1.05;
    return spec;
}

DomainSpec make_euclidean_disk() {
    DomainSpec spec;
    spec.name = "euclidean_disk";
    spec.field = euclidean_field(ChartDomain::box(vec2(-2.0, -2.0), vec2(2.0, 2.0)));
    spec.phi = [](const Vec& q) { return q.norm() - 1.0; };
    spec.dphi = [](const Vec& q) {
        double r = q.norm();
        return r < 1e-12 ? Vec(Vec::Zero(2)) : Vec(q / r);
    };
    spec.chart_center = vec2(0.0, 0.0);
    spec.star_radius = [](const Vec&) { return 1.0; };
    spec.delta0 = 0.5;
    spec.K0 = 1.05;
    return spec;
}

DomainSpec make_sphere_cap(double cap_radius) {
    if (cap_radius <= 0 || cap_radius >= M_PI)
        throw BadConfig("cap radius must be in (0, pi)");
    DomainSpec spec;
    spec.name = "sphere_cap";
    // Stereographic chart of the unit sphere, cap centered at the chart
    // origin; colatitude theta maps to chart radius tan(theta/2).
    double theta_max = cap_radius + 0.45 * (M_PI - cap_radius);
    double R = std::tan(0.5 * theta_max);
    auto field = std::make_shared<MetricField>();
    field->dim = 2;
    field->chart_domain = ChartDomain::ball(vec2(0.0, 0.0), R);
    field->g_eval = [](const Vec& u) {
        double lam = 4.0 / std::pow(1.0 + u.squaredNorm(), 2);
        return Mat(lam * Mat::Identity(2, 2));
    };
    field->analytic_christoffel = [](const Vec& u) {
        // Conformal metric e^{2f} I with f = log(2/(1+|u|^2)):
        // Gamma^k_{ij} = d_i f delta_{jk} + d_j f delta_{ik} - d_k f delta_{ij}
        double w = -2.0 / (1.0 + u.squaredNorm());
        Vec a = w * u;
        Tensor3 gamma(2, Mat::Zero(2, 2));
        for (int k = 0; k < 2; ++k)
            for (int i = 0; i < 2; ++i)
                for (int j = 0; j < 2; ++j) {
                    double s = 0.0;
                    if (j == k) s += a[i];
                    if (i == k) s += a[j];
                    if (i == j) s -= a[k];
                    gamma[k](i, j) = s;
                }
        return gamma;
    };
    spec.field = field;
    spec.phi = [cap_radius](const Vec& u) { return 2.0 * std::atan(u.norm()) - cap_radius; };
    spec.dphi = [](const Vec& u) {
        double r = u.norm();
        if (r < 1e-12) return Vec(Vec::Zero(2));
        return Vec((2.0 / ((1.0 + r * r) * r)) * u);
    };
    spec.chart_center = vec2(0.0, 0.0);
    double rb = std::tan(0.5 * cap_radius);
    spec.star_radius = [rb](const Vec&) { return rb; };
    return spec;
}

DomainSpec make_jacobi_well(const NaturalHamiltonian& ham, double rho) {
    if (rho <= 0) throw BadRho("rho must be positive");
    // Quick scan for inf V near the origin to validate rho < E - inf V.
    double v0 = ham.V(Vec::Zero(ham.dim));
    if (rho >= ham.E - v0) throw BadRho("rho must be below E - inf V");

    DomainSpec spec;
    spec.name = "jacobi_well";
    auto field = std::make_shared<MetricField>();
    field->dim = ham.dim;
    // Chart box sized from the turning manifold extents along the axes.
    Vec hi(ham.dim);
    for (int i = 0; i < ham.dim; ++i) {
        // bisect V(t e_i) = E along each axis
        double lo_t = 0.0, hi_t = 1.0;
        Vec e = Vec::Zero(ham.dim);
        e[i] = 1.0;
        while (ham.V(hi_t * e) < ham.E && hi_t < 1e6) hi_t *= 2.0;
        if (ham.V(hi_t * e) < ham.E)
            throw BadRho("potential never reaches the energy level along an axis");
        for (int it = 0; it < 60; ++it) {
            double mid = 0.5 * (lo_t + hi_t);
            (ham.V(mid * e) < ham.E ? lo_t : hi_t) = mid;
        }
        hi[i] = 1.15 * hi_t;
    }
    field->chart_domain = ChartDomain::box(-hi, hi);
    const double clamp_floor = rho / 100.0;
    const double E = ham.E;
    auto a_upper = ham.a_upper;
    auto Vfun = ham.V;
    field->g_eval = [E, clamp_floor, a_upper, Vfun](const Vec& q) {
        double w = std::max(E - Vfun(q), clamp_floor);
        Mat a_lower = a_upper(q).inverse();
        return Mat(w * a_lower);
    };
    if (ham.constant_kinetic && ham.dV) {
        // conformal factor over a constant kinetic form: closed-form symbols
        const Mat A_up = ham.a_upper(Vec::Zero(ham.dim));
        const Mat A_low = A_up.inverse();
        auto dV = ham.dV;
        const int N = ham.dim;
        field->analytic_christoffel = [E, clamp_floor, A_up, A_low, dV, Vfun,
                                       N](const Vec& q) {
            Tensor3 gamma(N, Mat::Zero(N, N));
            double w = E - Vfun(q);
            if (w <= clamp_floor) return gamma;  // clamped region: constant metric
            Vec dw = -dV(q);
            Vec dw_up = A_up * dw;
            for (int k = 0; k < N; ++k)
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        double s = 0.0;
                        if (k == j) s += dw[i];
                        if (k == i) s += dw[j];
                        s -= dw_up[k] * A_low(i, j);
                        gamma[k](i, j) = s / (2.0 * w);
                    }
            return gamma;
        };
    }
    spec.field = field;
    spec.phi = [Vfun, E, rho](const Vec& q) { return Vfun(q) - (E - rho); };
    if (ham.dV) {
        auto dV = ham.dV;
        spec.dphi = [dV](const Vec& q) { return dV(q); };
    }
    spec.chart_center = Vec::Zero(ham.dim);
    auto phi_fun = spec.phi;
    Vec center = spec.chart_center;
    spec.star_radius = [phi_fun, center, hi](const Vec& dir) {
        Vec d = dir / dir.norm();
        double lo_t = 0.0, hi_t = hi.minCoeff();
        while (phi_fun(center + hi_t * d) < 0 && hi_t < 1e6) hi_t *= 1.5;
        for (int it = 0; it < 80; ++it) {
            double mid = 0.5 * (lo_t + hi_t);
            (phi_fun(center + mid * d) < 0 ? lo_t : hi_t) = mid;
        }
        return 0.5 * (lo_t + hi_t);
    };
    return spec;
}

}  // namespace ogc
