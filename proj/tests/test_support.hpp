#pragma once

// Shared helpers for the test binaries: canned fields, curve builders, and
// small numerical utilities.

#include <cmath>
#include <functional>
#include <memory>
#include <stdexcept>
#include <vector>

#include "ogc/geometries.hpp"

namespace ogctest {

using namespace ogc;

inline std::shared_ptr<MetricField> euclidean_plane(double half = 10.0) {
    auto field = std::make_shared<MetricField>();
    field->dim = 2;
    field->chart_domain = ChartDomain::box(vec2(-half, -half), vec2(half, half));
    field->g_eval = [](const Vec&) { return Mat(Mat::Identity(2, 2)); };
    return field;
}

// Stereographic chart of the unit sphere without an analytic Christoffel
// override, to exercise the finite-difference path.
inline std::shared_ptr<MetricField> sphere_chart_fd(double radius = 4.0) {
    auto field = std::make_shared<MetricField>();
    field->dim = 2;
    field->chart_domain = ChartDomain::ball(vec2(0.0, 0.0), radius);
    field->g_eval = [](const Vec& u) {
        double lam = 4.0 / std::pow(1.0 + u.squaredNorm(), 2);
        return Mat(lam * Mat::Identity(2, 2));
    };
    return field;
}

inline std::shared_ptr<MetricField> sphere_chart(double radius = 4.0) {
    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    auto field = std::make_shared<MetricField>(*cap.field);
    field->chart_domain = ChartDomain::ball(vec2(0.0, 0.0), radius);
    return field;
}

// Sphere cap with the concavity gate already run and K0 measured, ready for
// the path-space and flow machinery.
inline DomainSpec prepared_cap(double cap_radius = 2.0 * M_PI / 3.0, unsigned long long seed = 5) {
    DomainSpec cap = make_sphere_cap(cap_radius);
    Rng rng(seed);
    ConcavityReport rep = check_strong_concavity(cap, 200, rng);
    if (!rep.is_strongly_concave) throw std::runtime_error("cap failed the concavity gate");
    cap.K0 = compute_K0(cap, 200, rng);
    return cap;
}

// Polyline through the given waypoints with piecewise-constant speed per leg
// (legs get node counts proportional to the given weights).
inline DiscreteCurve polyline(const std::vector<Vec>& pts, int n) {
    DiscreteCurve c;
    c.n = n;
    c.nodes.resize(n + 1);
    int legs = static_cast<int>(pts.size()) - 1;
    for (int i = 0; i <= n; ++i) {
        double s = static_cast<double>(i) / n * legs;
        int leg = std::min(static_cast<int>(s), legs - 1);
        double f = s - leg;
        c.nodes[i] = (1.0 - f) * pts[leg] + f * pts[leg + 1];
    }
    return c;
}

// Exact constant-speed meridian chord of the sphere cap (a chart diameter):
// colatitude runs linearly from -r to r along the direction of angle ang.
inline DiscreteCurve meridian_chord(double cap_radius, double ang, int n) {
    DiscreteCurve c;
    c.n = n;
    c.nodes.resize(n + 1);
    Vec dir = vec2(std::cos(ang), std::sin(ang));
    for (int i = 0; i <= n; ++i) {
        double s = static_cast<double>(i) / n;
        double colat = cap_radius * (2.0 * s - 1.0);
        c.nodes[i] = std::tan(0.5 * colat) * dir;
    }
    return c;
}

// Radial in-and-out curve on the sphere cap whose depth profile is
// prescribed: phi(x(s_i)) = depth(s_i) (depth <= 0, 0 at the ends).
inline DiscreteCurve radial_profile_curve(double cap_radius, double ang,
                                          const std::function<double(double)>& depth, int n) {
    DiscreteCurve c;
    c.n = n;
    c.nodes.resize(n + 1);
    Vec dir = vec2(std::cos(ang), std::sin(ang));
    for (int i = 0; i <= n; ++i) {
        double s = static_cast<double>(i) / n;
        double colat = cap_radius + depth(s);  // phi = colat - r
        c.nodes[i] = std::tan(0.5 * colat) * dir;
    }
    return c;
}

inline double max_node_dist(const DiscreteCurve& a, const DiscreteCurve& b) {
    double m = 0.0;
    for (int i = 0; i <= a.n; ++i) m = std::max(m, (a.nodes[i] - b.nodes[i]).norm());
    return m;
}

// Second derivative of f at 0 by a 5-point central stencil.
inline double second_derivative(const std::function<double(double)>& f, double h) {
    return (-f(-2 * h) + 16 * f(-h) - 30 * f(0.0) + 16 * f(h) - f(2 * h)) / (12.0 * h * h);
}

}  // namespace ogctest
