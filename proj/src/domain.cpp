#include "ogc/domain.hpp"

#include <cmath>

namespace ogc {

Vec DomainSpec::dphi_at(const Vec& q) const {
    if (dphi) return dphi(q);
    const int N = field->dim;
    const double h = 1e-6 * (1.0 + q.norm());
    Vec out(N), qp = q, qm = q;
    for (int k = 0; k < N; ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        out[k] = (phi(qp) - phi(qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return out;
}

Vec DomainSpec::grad_phi(const Vec& q) const {
    Vec d = dphi_at(q);
    if (d.norm() < 1e-14) return Vec::Zero(field->dim);
    Mat g = field->g_eval(q);
    return g.llt().solve(d);
}

double DomainSpec::grad_phi_norm(const Vec& q) const {
    Vec d = dphi_at(q);
    if (d.norm() < 1e-14) return 0.0;
    Mat g = field->g_eval(q);
    return std::sqrt(std::max(0.0, d.dot(g.llt().solve(d))));
}

double DomainSpec::hess_phi(const Vec& q, const Vec& v, const Vec& w) const {
    const int N = field->dim;
    const double h = 1e-5 * (1.0 + q.norm());
    Mat H(N, N);
    Vec qp = q, qm = q;
    for (int k = 0; k < N; ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        H.col(k) = (dphi_at(qp) - dphi_at(qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    H = 0.5 * (H + H.transpose()).eval();
    Tensor3 gamma = christoffel_at(*field, q);
    Vec d = dphi_at(q);
    double corr = 0.0;
    for (int k = 0; k < N; ++k) corr += d[k] * v.dot(gamma[k] * w);
    return v.dot(H * w) - corr;
}

double second_fundamental_form(const DomainSpec& spec, const Vec& x, const Vec& v) {
    if (v.norm() == 0.0) return 0.0;
    const double tol = std::max(spec.boundary_tol, 1e-6);
    if (std::abs(spec.phi(x)) > tol) throw NotOnBoundary();
    double gp = spec.grad_phi_norm(x);
    double vn = metric_norm(*spec.field, x, v);
    if (std::abs(metric_inner(*spec.field, x, spec.grad_phi(x), v)) > 1e-6 * gp * vn + 1e-12)
        throw NotTangent();
    return -spec.hess_phi(x, v, v);
}

std::vector<Vec> boundary_tangent_basis(const DomainSpec& spec, const Vec& q) {
    const int N = spec.field->dim;
    Vec n = spec.grad_phi(q);
    double nn = metric_norm(*spec.field, q, n);
    std::vector<Vec> basis;
    if (nn < 1e-14) return basis;
    n /= nn;
    for (int i = 0; i < N && static_cast<int>(basis.size()) < N - 1; ++i) {
        Vec u = Vec::Zero(N);
        u[i] = 1.0;
        u -= metric_inner(*spec.field, q, u, n) * n;
        for (const Vec& b : basis) u -= metric_inner(*spec.field, q, u, b) * b;
        double un = metric_norm(*spec.field, q, u);
        if (un > 1e-8) basis.push_back(u / un);
    }
    return basis;
}

namespace {

Vec random_chart_point(const ChartDomain& dom, Rng& rng, double margin) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const int N = dom.dim();
    Vec q(N);
    if (dom.kind == ChartDomain::Kind::Box) {
        for (int i = 0; i < N; ++i)
            q[i] = dom.lo[i] + margin + uni(rng) * (dom.hi[i] - dom.lo[i] - 2 * margin);
    } else {
        // uniform in the ball
        double r = (dom.radius - margin) * std::pow(uni(rng), 1.0 / N);
        Vec dir(N);
        std::normal_distribution<double> gauss;
        do {
            for (int i = 0; i < N; ++i) dir[i] = gauss(rng);
        } while (dir.norm() < 1e-12);
        q = dom.center + r * dir / dir.norm();
    }
    return q;
}

}  // namespace

std::vector<Vec> sample_phi_band(const DomainSpec& spec, double lo, double hi, int count,
                                 Rng& rng, double chart_margin) {
    std::vector<Vec> out;
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    const double margin = std::max(chart_margin, 4.0 * spec.field->derivative_step);
    const double band_tol = 1e-3 * (hi - lo) + 1e-12;
    int attempts = 0;
    const int max_attempts = 2000 * count + 10000;
    while (static_cast<int>(out.size()) < count && attempts++ < max_attempts) {
        Vec q = random_chart_point(spec.field->chart_domain, rng, margin);
        double target = lo + uni(rng) * (hi - lo);
        // Newton along the chart gradient toward the target level.
        bool ok = false;
        for (int it = 0; it < 12; ++it) {
            double f = spec.phi(q);
            if (std::abs(f - target) <= band_tol) {
                ok = true;
                break;
            }
            Vec d = spec.dphi_at(q);
            double dn2 = d.squaredNorm();
            if (dn2 < 1e-18) break;
            Vec qn = q - (f - target) / dn2 * d;
            if (!spec.field->chart_domain.contains(qn, margin)) break;
            q = qn;
        }
        if (ok && spec.phi(q) >= lo - band_tol && spec.phi(q) <= hi + band_tol) out.push_back(q);
    }
    if (static_cast<int>(out.size()) < count)
        throw DegenerateRegion("could not sample the requested phi band");
    return out;
}

namespace {

// Test negative-definiteness of H^phi on the g-orthogonal complement of
// grad phi over a sampled band of depth delta.
bool concavity_holds(const DomainSpec& spec, double delta, int samples, Rng& rng,
                     ConcavityWitness* witness) {
    std::vector<Vec> pts;
    try {
        pts = sample_phi_band(spec, -delta, delta, samples, rng);
    } catch (const DegenerateRegion&) {
        if (witness) witness->reason = "band_unsampleable";
        return false;
    }
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    for (const Vec& q : pts) {
        if (spec.grad_phi_norm(q) <= spec.grad_floor) {
            if (witness) {
                witness->q = q;
                witness->v = Vec::Zero(spec.field->dim);
                witness->value = spec.grad_phi_norm(q);
                witness->reason = "gradient_vanishes";
            }
            return false;
        }
        std::vector<Vec> basis = boundary_tangent_basis(spec, q);
        std::vector<Vec> dirs = basis;
        if (basis.size() > 1) {
            for (int extra = 0; extra < 2; ++extra) {
                Vec v = Vec::Zero(spec.field->dim);
                for (const Vec& b : basis) v += uni(rng) * b;
                double vn = metric_norm(*spec.field, q, v);
                if (vn > 1e-10) dirs.push_back(v / vn);
            }
        }
        for (const Vec& v : dirs) {
            double h = spec.hess_phi(q, v, v);
            if (h > -spec.concavity_floor) {
                if (witness) {
                    witness->q = q;
                    witness->v = v;
                    witness->value = h;
                    witness->reason = "hessian_not_negative";
                }
                return false;
            }
        }
    }
    return true;
}

}  // namespace

ConcavityReport check_strong_concavity(DomainSpec& spec, int samples, Rng& rng) {
    if (samples < 100) throw BadConfig("check_strong_concavity needs samples >= 100");
    ConcavityReport report;

    // Range of phi over the chart fixes the largest shell depth we can probe.
    double max_phi = -1e300, min_phi = 1e300;
    for (int i = 0; i < 2000; ++i) {
        Vec q = random_chart_point(spec.field->chart_domain, rng,
                                   4.0 * spec.field->derivative_step);
        double f = spec.phi(q);
        max_phi = std::max(max_phi, f);
        min_phi = std::min(min_phi, f);
    }
    double delta_max = 0.9 * std::min(max_phi, -min_phi);
    if (!(delta_max > 0)) {
        report.is_strongly_concave = false;
        ConcavityWitness w;
        w.reason = "no_boundary_in_chart";
        report.witnesses.push_back(w);
        return report;
    }

    const double delta_floor = std::min(1e-3, delta_max / 100.0);
    ConcavityWitness w;
    if (!concavity_holds(spec, delta_floor, samples, rng, &w)) {
        report.is_strongly_concave = false;
        report.witnesses.push_back(w);
        return report;
    }
    report.is_strongly_concave = true;

    double lo = delta_floor, hi = delta_max;
    if (concavity_holds(spec, hi, samples, rng, nullptr)) {
        lo = hi;
    } else {
        for (int it = 0; it < 25 && hi - lo > 1e-4 * delta_max; ++it) {
            double mid = 0.5 * (lo + hi);
            if (concavity_holds(spec, mid, samples, rng, nullptr))
                lo = mid;
            else
                hi = mid;
        }
    }
    report.delta0 = 0.9 * lo;  // safety deflation of the largest verified depth
    spec.delta0 = report.delta0;
    return report;
}

double compute_K0(DomainSpec& spec, int samples, Rng& rng) {
    if (spec.delta0 <= 0) throw BadConfig("delta0 must be set before compute_K0");
    double best = 0.0;
    int found = 0, attempts = 0;
    while (found < samples && attempts++ < 400 * samples) {
        Vec q = random_chart_point(spec.field->chart_domain, rng,
                                   4.0 * spec.field->derivative_step);
        if (spec.phi(q) > spec.delta0) continue;
        ++found;
        best = std::max(best, spec.grad_phi_norm(q));
    }
    // include the shell itself, where the sup is typically attained
    for (const Vec& q : sample_phi_band(spec, -spec.delta0, spec.delta0,
                                        std::max(100, samples / 4), rng))
        best = std::max(best, spec.grad_phi_norm(q));
    spec.K0 = 1.05 * best;
    return spec.K0;
}

Vec flow_eta(const DomainSpec& spec, const Vec& x, double tau, int direction) {
    if (direction != 1 && direction != -1) throw BadConfig("direction must be +1 or -1");
    const double shell = spec.delta0 > 0 ? spec.delta0 : 1e300;
    const double shell_tol = 1e-9 + 1e-9 * shell;
    if (std::abs(spec.phi(x)) > shell + std::max(1e-7, shell_tol)) throw LeftShell("start outside shell");
    if (tau == 0.0) return x;
    auto rhs = [&](const Vec& y) -> Vec {
        Vec d = spec.dphi_at(y);
        Mat g = spec.field->g_eval(y);
        Vec gd = g.llt().solve(d);
        double dn = d.dot(gd);
        if (dn < 1e-18) throw LeftShell("gradient vanished along eta flow");
        return static_cast<double>(direction) / dn * gd;
    };
    const int nsteps = std::max(16, std::min(1024, static_cast<int>(std::ceil(
                                     400.0 * std::abs(tau) / std::max(shell == 1e300 ? std::abs(tau) : spec.delta0, 1e-8)))));
    const double h = tau / nsteps;
    Vec y = x;
    for (int i = 0; i < nsteps; ++i) {
        Vec k1 = rhs(y);
        Vec k2 = rhs(y + 0.5 * h * k1);
        Vec k3 = rhs(y + 0.5 * h * k2);
        Vec k4 = rhs(y + h * k3);
        y += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        double f = spec.phi(y);
        if (std::abs(f) > shell + std::max(1e-6, 1e-6 * shell))
            throw LeftShell("left shell at tau=" + std::to_string((i + 1) * h));
    }
    return y;
}

Vec project_to_boundary(const DomainSpec& spec, const Vec& x) {
    double f = spec.phi(x);
    const double shell = spec.delta0 > 0 ? spec.delta0 : 1e300;
    if (f < -shell - 1e-9 || f > 1e-6) throw OutOfShell();
    Vec y = (std::abs(f) > 1e-12) ? flow_eta(spec, x, -f, +1) : x;
    // Newton polish along the gradient direction.
    for (int it = 0; it < 4; ++it) {
        double fy = spec.phi(y);
        if (std::abs(fy) < 1e-12) break;
        Vec d = spec.dphi_at(y);
        Mat g = spec.field->g_eval(y);
        Vec gd = g.llt().solve(d);
        double dn = d.dot(gd);
        if (dn < 1e-18) break;
        y -= fy / dn * gd;
    }
    return y;
}

}  // namespace ogc
