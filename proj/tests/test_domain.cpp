#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "test_support.hpp"

using namespace ogc;
using namespace ogctest;

TEST_CASE("second fundamental form: unit circle curvature") {
    // II = -H^phi; the convex disk boundary has H^phi = +1 on unit tangents,
    // so the form is negative (strong concavity asks for II > 0).
    DomainSpec disk = make_euclidean_disk();
    Vec q = vec2(1.0, 0.0);
    Vec v = vec2(0.0, 1.0);
    CHECK(second_fundamental_form(disk, q, v) == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(second_fundamental_form(disk, q, Vec(Vec::Zero(2))) == 0.0);
    CHECK_THROWS_AS(second_fundamental_form(disk, vec2(0.5, 0.0), v), NotOnBoundary);
    CHECK_THROWS_AS(second_fundamental_form(disk, q, vec2(1.0, 0.0)), NotTangent);
}

TEST_CASE("second fundamental form: sphere-cap boundary circle") {
    // The colatitude circle at 2 pi / 3 has geodesic curvature
    // cot(2 pi / 3) = -1/sqrt(3) w.r.t. the inward normal, which is the value
    // of H^phi on unit tangents; the form itself returns the sign-flipped II.
    const double r = 2.0 * M_PI / 3.0;
    DomainSpec cap = make_sphere_cap(r);
    Vec q = vec2(std::tan(0.5 * r), 0.0);
    Vec v = vec2(0.0, 1.0);
    double vn = metric_norm(*cap.field, q, v);
    v /= vn;
    double cot = std::cos(r) / std::sin(r);
    CHECK(cap.hess_phi(q, v, v) == doctest::Approx(cot).epsilon(1e-6));
    CHECK(second_fundamental_form(cap, q, v) == doctest::Approx(-cot).epsilon(1e-6));
}

TEST_CASE("strong concavity gate: sphere cap passes") {
    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    Rng rng(7);
    ConcavityReport rep = check_strong_concavity(cap, 200, rng);
    CHECK(rep.is_strongly_concave);
    CHECK(rep.delta0 > 0.0);
    CHECK(cap.delta0 == rep.delta0);
}

TEST_CASE("strong concavity gate: disk and half-plane rejected with witnesses") {
    Rng rng(7);
    DomainSpec disk = make_euclidean_disk();
    disk.delta0 = 0.0;
    ConcavityReport rep = check_strong_concavity(disk, 200, rng);
    CHECK_FALSE(rep.is_strongly_concave);
    REQUIRE_FALSE(rep.witnesses.empty());
    const ConcavityWitness& w = rep.witnesses.front();
    CHECK(w.reason == "hessian_not_negative");
    CHECK(w.value > 0.0);  // convex boundary: H^phi positive on tangents
    // the witness tangent really is g-orthogonal to the gradient
    CHECK(std::abs(disk.grad_phi(w.q).dot(w.v)) < 1e-6 * (1.0 + w.v.norm()));

    DomainSpec hp = make_half_plane();
    hp.delta0 = 0.0;
    ConcavityReport rep2 = check_strong_concavity(hp, 200, rng);
    CHECK_FALSE(rep2.is_strongly_concave);
    REQUIRE_FALSE(rep2.witnesses.empty());
    CHECK(rep2.witnesses.front().reason == "hessian_not_negative");
    CHECK(std::abs(rep2.witnesses.front().value) < 1e-6);  // flat boundary: H^phi = 0
}

TEST_CASE("compute_K0: half-plane, scaling, eikonal sphere cap") {
    Rng rng(3);
    DomainSpec hp = make_half_plane();
    CHECK(compute_K0(hp, 200, rng) == doctest::Approx(1.05).epsilon(1e-9));

    DomainSpec scaled = make_half_plane();
    scaled.phi = [](const Vec& q) { return 3.0 * q[1]; };
    scaled.dphi = [](const Vec&) { return vec2(0.0, 3.0); };
    CHECK(compute_K0(scaled, 200, rng) == doctest::Approx(3.15).epsilon(1e-9));

    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    ConcavityReport rep = check_strong_concavity(cap, 150, rng);
    REQUIRE(rep.is_strongly_concave);
    // phi is the geodesic signed distance, so the gradient is g-unit
    CHECK(compute_K0(cap, 200, rng) == doctest::Approx(1.05).epsilon(1e-6));
}

TEST_CASE("flow_eta: phi-linearity, explicit half-plane line, identity") {
    DomainSpec hp = make_half_plane();
    Vec y = flow_eta(hp, vec2(0.0, -0.3), 0.3, +1);
    CHECK((y - vec2(0.0, 0.0)).norm() < 1e-9);
    CHECK((flow_eta(hp, vec2(0.4, -0.2), 0.0, +1) - vec2(0.4, -0.2)).norm() == 0.0);
    CHECK_THROWS_AS(flow_eta(hp, vec2(0.0, -0.1), 0.1, 2), BadConfig);

    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    Rng rng(11);
    ConcavityReport rep = check_strong_concavity(cap, 150, rng);
    REQUIRE(rep.is_strongly_concave);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (const Vec& q : sample_phi_band(cap, -0.9 * cap.delta0, -0.1 * cap.delta0, 50, rng)) {
        double f = cap.phi(q);
        double tau_up = uni(rng) * (-f) * 0.95;
        CHECK(std::abs(cap.phi(flow_eta(cap, q, tau_up, +1)) - f - tau_up) < 1e-6);
        double tau_dn = uni(rng) * (cap.delta0 + f) * 0.95;
        CHECK(std::abs(cap.phi(flow_eta(cap, q, tau_dn, -1)) - f + tau_dn) < 1e-6);
    }
}

TEST_CASE("project_to_boundary: fixed points, verticals, idempotence") {
    DomainSpec hp = make_half_plane();
    CHECK((project_to_boundary(hp, vec2(1.7, -0.4)) - vec2(1.7, 0.0)).norm() < 1e-8);
    CHECK((project_to_boundary(hp, vec2(0.3, 0.0)) - vec2(0.3, 0.0)).norm() < 1e-10);
    CHECK_THROWS_AS(project_to_boundary(hp, vec2(0.0, -2.5)), OutOfShell);

    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    Rng rng(13);
    ConcavityReport rep = check_strong_concavity(cap, 150, rng);
    REQUIRE(rep.is_strongly_concave);
    for (const Vec& q : sample_phi_band(cap, -0.95 * cap.delta0, -0.05 * cap.delta0, 30, rng)) {
        Vec p = project_to_boundary(cap, q);
        CHECK(std::abs(cap.phi(p)) < 1e-8);
        CHECK((project_to_boundary(cap, p) - p).norm() < 1e-8);
    }
    // depth exactly -delta0 still projects
    Vec deep = flow_eta(cap, project_to_boundary(cap, sample_phi_band(cap, -0.5 * cap.delta0,
                                                                      -0.4 * cap.delta0, 1,
                                                                      rng)[0]),
                        cap.delta0 * 0.999, -1);
    CHECK(std::abs(cap.phi(project_to_boundary(cap, deep))) < 1e-8);
}

TEST_CASE("projection differential is the identity along boundary tangents") {
    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    Rng rng(17);
    ConcavityReport rep = check_strong_concavity(cap, 150, rng);
    REQUIRE(rep.is_strongly_concave);
    const double eps = 1e-4;
    for (const Vec& q : sample_phi_band(cap, -0.1 * cap.delta0, -0.01 * cap.delta0, 10, rng)) {
        Vec z = project_to_boundary(cap, q);
        for (const Vec& w : boundary_tangent_basis(cap, z)) {
            Vec moved = z + eps * w;
            double f = cap.phi(moved);
            if (f > 0.0) moved = flow_eta(cap, moved, f, -1);  // keep inside the shell
            Vec back = project_to_boundary(cap, moved);
            CHECK((back - moved).norm() / eps < 0.05);
        }
    }
}

TEST_CASE("boundary tangent basis is g-orthonormal and g-orthogonal to the gradient") {
    DomainSpec cap = make_sphere_cap(2.0 * M_PI / 3.0);
    Vec q = vec2(std::tan(M_PI / 3.0) * std::cos(0.7), std::tan(M_PI / 3.0) * std::sin(0.7));
    auto basis = boundary_tangent_basis(cap, q);
    REQUIRE(basis.size() == 1);
    CHECK(metric_norm(*cap.field, q, basis[0]) == doctest::Approx(1.0).epsilon(1e-10));
    Vec n = cap.grad_phi(q);
    CHECK(std::abs(metric_inner(*cap.field, q, basis[0], n)) < 1e-10);
}
