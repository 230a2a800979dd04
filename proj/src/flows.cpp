#include "ogc/flows.hpp"

#include <algorithm>
#include <cmath>

namespace ogc {

CriticalityOptions ConstantsLedger::criticality_options() const {
    CriticalityOptions opts;
    opts.delta_bar = delta_bar;
    opts.gamma_bar = gamma_bar;
    opts.sigma1 = sigma1;
    opts.d0 = d0;
    return opts;
}

namespace {

double bilinear_form_norm(const DomainSpec& spec, const Vec& q, Rng& rng) {
    // sup over g-unit vectors of |H^phi(v, v)|, sampled.
    const MetricField& field = *spec.field;
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double best = 0.0;
    std::vector<Vec> dirs = boundary_tangent_basis(spec, q);
    Vec n = spec.grad_phi(q);
    double nn = metric_norm(field, q, n);
    if (nn > 1e-12) dirs.push_back(n / nn);
    for (int extra = 0; extra < 4; ++extra) {
        Vec v(field.dim);
        for (int i = 0; i < field.dim; ++i) v[i] = unit(rng);
        double vn = metric_norm(field, q, v);
        if (vn > 1e-12) dirs.push_back(v / vn);
    }
    for (const Vec& v : dirs) best = std::max(best, std::abs(spec.hess_phi(q, v, v)));
    return best;
}

double metric_derivative_bound(const MetricField& field, const Vec& q) {
    const double h = 1e-5 * (1.0 + q.norm());
    double best = 0.0;
    Vec qp = q, qm = q;
    for (int k = 0; k < field.dim; ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        if (!field.chart_domain.contains(qp) || !field.chart_domain.contains(qm)) {
            qp[k] = q[k];
            qm[k] = q[k];
            continue;
        }
        Mat dg = (field.g_eval(qp) - field.g_eval(qm)) / (2.0 * h);
        best = std::max(best, dg.norm());
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return best;
}

}  // namespace

ConstantsLedger assemble_ledger(const DomainSpec& spec, double M0, Rng& rng, int samples) {
    if (spec.delta0 <= 0 || spec.K0 <= 0)
        throw BadConfig("domain lacks verified delta0 / K0 constants");
    ConstantsLedger led;
    led.delta0 = spec.delta0;
    led.K0 = spec.K0;
    led.M0 = M0;

    const MetricField& field = *spec.field;
    std::vector<Vec> shell = sample_phi_band(spec, -led.delta0, led.delta0, samples, rng);
    // interior coverage for the metric bounds
    std::vector<Vec> pts = shell;
    pts.push_back(spec.chart_center);
    for (const Vec& q : shell)
        for (double t : {0.25, 0.5, 0.75})
            pts.push_back(spec.chart_center + t * (q - spec.chart_center));

    double emin = 1e300, emax = 0.0, g0 = 0.0;
    for (const Vec& q : pts) {
        Eigen::SelfAdjointEigenSolver<Mat> es(field.g_eval(q));
        emin = std::min(emin, es.eigenvalues().minCoeff());
        emax = std::max(emax, es.eigenvalues().maxCoeff());
        g0 = std::max(g0, metric_derivative_bound(field, q));
    }
    led.ell0 = emin;
    led.L0 = emax;
    led.G0 = g0;

    double n0 = 0.0;
    for (const Vec& q : shell) n0 = std::max(n0, bilinear_form_norm(spec, q, rng));
    led.N0_hess = 1.2 * n0;

    led.lambda1 = std::min(std::sqrt(led.ell0) / (2.0 * led.K0),
                           std::sqrt(led.ell0) /
                               std::sqrt(2.0 * led.K0 * led.K0 +
                                         4.0 * led.M0 * led.N0_hess * led.N0_hess));
    led.lambda = 0.5 * led.lambda1;

    led.L1 = 2.0 * (1.0 + led.G0) * std::sqrt(1.0 + led.M0);

    led.delta_bar = led.delta0 / 4.0;
    led.gamma_bar = 0.1;
    led.rho0 = led.delta0 / 2.0;
    led.sigma0 = led.delta_bar / 4.0;
    led.eps0 = led.delta_bar / 4.0;
    led.theta0 = 0.5;
    led.mu0 = 0.1;
    led.sigma1 = std::min((2.0 / 7.0) * led.rho0 * led.theta0, 0.5 * led.sigma0);

    led.theta_r = led.theta0;
    led.mu_r = led.mu0;
    led.kappa_r = 0.5;
    led.rho_r = led.rho0;
    led.E_r = led.mu_r * led.mu_r / (32.0 * led.L1 * led.L1 * led.L0);

    led.c1_lower_bound = 0.5 * std::pow(3.0 * led.delta0 / (4.0 * led.K0), 2);
    return led;
}

double curve_F(const DiscreteCurve& x, const DomainSpec& spec) {
    double best = 0.0;
    for (const IntervalRecord& rec : maximal_intervals(x, spec)) {
        if (rec.ib - rec.ia < 1) continue;
        double integral = curve_integral_g(*spec.field, x, rec.a, rec.b);
        best = std::max(best, 0.5 * (rec.b - rec.a) * integral);
    }
    return best;
}

namespace {

// Tridiagonal H1 preconditioner on an interval grid (same inner product as
// the criticality residual): <u,v> = 1/2 (u_a v_a + u_b v_b) + int u' v'.
struct Tridiag {
    int m;
    std::vector<double> diag, off;

    Tridiag(int m_, double h) : m(m_), diag(m_ + 1, 0.0), off(m_, -1.0 / h) {
        for (int i = 0; i <= m; ++i) {
            if (i > 0) diag[i] += 1.0 / h;
            if (i < m) diag[i] += 1.0 / h;
        }
        diag[0] += 0.5;
        diag[m] += 0.5;
    }

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
};

double h1_field_norm(const std::vector<Vec>& v, int ia, int ib, double h) {
    double acc = 0.5 * std::max(v[ia].squaredNorm(), v[ib].squaredNorm());
    for (int i = ia; i < ib; ++i) acc += 0.5 * (v[i + 1] - v[i]).squaredNorm() / h;
    return std::sqrt(acc);
}

// Smoothstep cutoff in the depth -phi: 1 near the boundary, fading out to 0
// at depth 3 delta0 / 4.
double chi_cutoff(double phi, double delta0) {
    double d = -phi;
    if (d <= 0.5 * delta0) return 1.0;
    if (d >= 0.75 * delta0) return 0.0;
    double t = (d - 0.5 * delta0) / (0.25 * delta0);
    return 1.0 - t * t * (3.0 - 2.0 * t);
}

}  // namespace

DescentDirection descent_direction_vplus(const DiscreteCurve& x, const DomainSpec& spec,
                                         const ConstantsLedger& ledger, double a, double b,
                                         double r_band) {
    const MetricField& field = *spec.field;
    const int dim = field.dim;
    const double h = x.h();
    int ia = static_cast<int>(std::lround(a * x.n));
    int ib = static_cast<int>(std::lround(b * x.n));
    const int m = ib - ia;
    if (m < 2) throw ShortInterval();

    // Cheap discrete energy gradient: central-difference covariant
    // acceleration inside, one-sided velocities at the interval ends.
    std::vector<Vec> G(m + 1, Vec::Zero(dim));
    for (int k = 1; k < m; ++k) {
        int i = ia + k;
        Vec vbar = (x.nodes[i + 1] - x.nodes[i - 1]) / (2.0 * h);
        Vec acc = (x.nodes[i + 1] - 2.0 * x.nodes[i] + x.nodes[i - 1]) / (h * h);
        Tensor3 gamma = christoffel_at(field, x.nodes[i]);
        for (int c = 0; c < dim; ++c) acc[c] += vbar.dot(gamma[c] * vbar);
        G[k] = -h * (field.g_eval(x.nodes[i]) * acc);
    }
    Vec v_first = (x.nodes[ia + 1] - x.nodes[ia]) / h;
    Vec v_last = (x.nodes[ib] - x.nodes[ib - 1]) / h;
    G[0] = -(field.g_eval(x.nodes[ia]) * v_first);
    G[m] = field.g_eval(x.nodes[ib]) * v_last;

    double integral = curve_integral_g(field, x, a, b);
    double thresh = 0.25 * std::pow(3.0 * ledger.delta0 / (4.0 * ledger.K0), 2);
    if ((b - a) * integral < thresh) throw ShortInterval();

    Tridiag K(m, h);
    std::vector<Vec> d(m + 1, Vec::Zero(dim));
    {
        std::vector<double> r(m + 1);
        for (int c = 0; c < dim; ++c) {
            for (int k = 0; k <= m; ++k) r[k] = -G[k][c];
            std::vector<double> y = K.solve(r);
            for (int k = 0; k <= m; ++k) d[k][c] = y[k];
        }
    }

    // Project onto the outward cone V+: inward normal components are removed
    // at boundary-contact nodes (contact band includes the interval ends).
    DescentDirection out;
    out.theta_r = 1e300;
    for (int k = 0; k <= m; ++k) {
        double f = spec.phi(x.nodes[ia + k]);
        if (f < -r_band) continue;
        Vec q = x.nodes[ia + k];
        Vec nrm = spec.grad_phi(q);
        double nn = metric_inner(field, q, nrm, nrm);
        if (nn < 1e-18) continue;
        double c = metric_inner(field, q, d[k], nrm);
        if (c < 0) d[k] -= (c / nn) * nrm;
        double dn = metric_norm(field, q, d[k]);
        if (dn > 1e-12)
            out.theta_r = std::min(out.theta_r,
                                   metric_inner(field, q, d[k], nrm) / (dn * std::sqrt(nn)));
    }
    if (out.theta_r > 1e299) out.theta_r = 0.0;

    double nd = h1_field_norm(d, 0, m, h) * std::sqrt(2.0);
    if (nd < 1e-12) throw TooCloseToCritical();
    double descent = 0.0;
    for (int k = 0; k <= m; ++k) descent += -G[k].dot(d[k]);
    // projected-gradient residual in the same sense as the criticality check;
    // below the band the portion is treated as already critical
    if (descent / nd < r_band) throw TooCloseToCritical();
    // normalize to H1 norm 1/2
    double scale = 0.5 / nd;
    out.field.assign(x.n + 1, Vec::Zero(dim));
    for (int k = 0; k <= m; ++k) out.field[ia + k] = scale * d[k];
    out.mu_r = descent * scale;
    out.h1_norm = 0.5;
    (void)ledger;
    return out;
}

FlowStepResult type_A_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger, double tau) {
    FlowStepResult res;
    res.step_kind = StepKind::A;
    res.curve = x;
    res.F_before = curve_F(x, spec);
    std::vector<IntervalRecord> before = maximal_intervals(x, spec);

    const MetricField& field = *spec.field;
    const int dim = field.dim;
    std::vector<Vec> W(x.n + 1, Vec::Zero(dim));
    for (const IntervalRecord& rec : before) {
        if (rec.ib - rec.ia < 2) continue;
        try {
            DescentDirection dir =
                descent_direction_vplus(x, spec, ledger, rec.a, rec.b);
            for (int i = rec.ia; i <= rec.ib; ++i) W[i] += dir.field[i];
        } catch (const TooCloseToCritical&) {
        } catch (const ShortInterval&) {
        }
    }
    // Outward gradient push under the near-boundary cutoff.
    for (int i = 0; i <= x.n; ++i) {
        double f = spec.phi(x.nodes[i]);
        double c = chi_cutoff(f, ledger.delta0);
        if (c <= 0.0) {
            W[i].setZero();
            continue;
        }
        W[i] = c * (W[i] + ledger.lambda * spec.grad_phi(x.nodes[i]));
    }

    // Unit-speed bound: cap the combined field at H1 norm 1.
    double wn = h1_field_norm(W, 0, x.n, x.h()) * std::sqrt(2.0);
    if (wn > 1.0)
        for (Vec& w : W) w /= wn;

    double step = tau;
    for (int bt = 0; bt < 30; ++bt, step *= 0.5) {
        DiscreteCurve y = x;
        bool valid = true;
        for (int i = 0; i <= x.n; ++i) {
            y.nodes[i] = x.nodes[i] + step * W[i];
            if (!field.chart_domain.contains(y.nodes[i]) ||
                spec.phi(y.nodes[i]) > 0.9 * ledger.delta0) {
                valid = false;
                break;
            }
        }
        if (!valid) continue;
        double F_after;
        std::vector<IntervalRecord> after;
        try {
            after = maximal_intervals(y, spec);
            F_after = curve_F(y, spec);
        } catch (const OgcError&) {
            continue;
        }
        if (!(F_after < res.F_before)) continue;  // F never increases on accepted steps
        res.curve = std::move(y);
        res.F_after = F_after;
        res.accepted = true;
        res.displacement_h1 = h1_dist(x, res.curve, 0.0, 1.0);
        // associate intervals by midpoint containment
        for (size_t bi = 0; bi < before.size(); ++bi) {
            int match = -1;
            for (size_t ai = 0; ai < after.size(); ++ai) {
                double mid = 0.5 * (after[ai].a + after[ai].b);
                if (mid >= before[bi].a - x.h() && mid <= before[bi].b + x.h()) {
                    match = static_cast<int>(ai);
                    break;
                }
            }
            res.interval_map.push_back({static_cast<int>(bi), match});
        }
        return res;
    }
    res.F_after = res.F_before;
    res.accepted = false;
    return res;
}

DiscreteCurve reparam_phi(const DiscreteCurve& x, double a, double c, double b, double tau,
                          int sign) {
    if (!(a < c && c < b)) throw DegenerateSplit();
    double cc = c + sign * tau;
    if (!(a < cc && cc < b)) throw DegenerateSplit();
    DiscreteCurve y = x;
    for (int i = 0; i <= x.n; ++i) {
        double s = x.grid(i);
        if (s <= a || s >= b) continue;
        double t = s <= cc ? a + (s - a) * (c - a) / (cc - a)
                           : b - (b - s) * (b - c) / (b - cc);
        y.nodes[i] = x.at(t);
    }
    return y;
}

double reparam_energy_closed_form(double int_ac, double int_cb, double a, double c, double b,
                                  double tau) {
    return (c - a) / (2.0 * (c - a + tau)) * int_ac +
           (b - c) / (2.0 * (b - c - tau)) * int_cb;
}

double reparam_energy_derivative0(double int_ac, double int_cb, double a, double c, double b) {
    return -int_ac / (2.0 * (c - a)) + int_cb / (2.0 * (b - c));
}

FlowStepResult type_B_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger) {
    (void)ledger;
    FlowStepResult res;
    res.step_kind = StepKind::B;
    res.curve = x;
    res.F_before = curve_F(x, spec);

    DiscreteCurve cur = x;
    bool changed = false, found = false;
    for (const IntervalRecord& rec : maximal_intervals(x, spec)) {
        if (rec.ib - rec.ia < 4) continue;
        const double node_tol = 1e-8 * (1.0 + x.nodes[rec.ia].norm());
        int k = rec.ia;
        while (k + 1 <= rec.ib && (x.nodes[k + 1] - x.nodes[rec.ia]).norm() <= node_tol)
            ++k;
        int head = k - rec.ia;
        k = rec.ib;
        while (k - 1 >= rec.ia && (x.nodes[k - 1] - x.nodes[rec.ib]).norm() <= node_tol)
            --k;
        int tail = rec.ib - k;
        if (head == 0 && tail == 0) continue;
        found = true;
        if (rec.ib - rec.ia - head - tail < 2) continue;  // no moving part left
        // One piecewise-affine reparameterization shrinking both constant
        // runs to a quarter of their length; built symmetrically so the step
        // commutes with curve reversal.
        const double h = x.h();
        const double a = rec.a, b = rec.b;
        const double lm = head * h, lp = tail * h;
        const double s1 = a + 0.25 * lm, s2 = b - 0.25 * lp;  // new breakpoints
        const double t1 = a + lm, t2 = b - lp;                // old breakpoints
        for (int i = rec.ia + 1; i < rec.ib; ++i) {
            double s = x.grid(i);
            double t;
            if (lm > 0 && s <= s1)
                t = a + (s - a) * (t1 - a) / (s1 - a);
            else if (lp > 0 && s >= s2)
                t = b - (b - s) * (b - t2) / (b - s2);
            else
                t = t1 + (s - s1) * (t2 - t1) / (s2 - s1);
            cur.nodes[i] = x.at(t);
        }
        changed = true;
    }
    if (!found) throw NotSecondType();
    if (changed) {
        double F_after = curve_F(cur, spec);
        if (F_after < res.F_before) {
            res.displacement_h1 = h1_dist(x, cur, 0.0, 1.0);
            res.curve = std::move(cur);
            res.F_after = F_after;
            res.accepted = true;
            return res;
        }
    }
    res.F_after = res.F_before;
    res.accepted = false;
    return res;
}

FlowStepResult type_C_step(const DiscreteCurve& x, const DomainSpec& spec,
                           const ConstantsLedger& ledger) {
    FlowStepResult res;
    res.step_kind = StepKind::C;
    res.curve = x;
    res.F_before = curve_F(x, spec);

    CriticalityOptions opts = ledger.criticality_options();
    std::vector<IntervalRecord> targets = find_nonessential_intervals(x, spec, opts);
    if (targets.empty()) throw NoNonessential();

    const MetricField& field = *spec.field;
    const double delta_bar = ledger.delta_bar;
    const double eps0 = std::min(ledger.eps0, 0.9 * delta_bar);
    DiscreteCurve cur = x;
    double budget = 0.5 * ledger.rho0;  // total chart displacement cap per node

    for (int sweep = 0; sweep < 400; ++sweep) {
        // proximity over all target intervals
        double p = -1e300;
        for (const IntervalRecord& rec : targets)
            for (int i = rec.ia; i <= rec.ib; ++i)
                p = std::max(p, spec.phi(cur.nodes[i]));
        if (p <= -0.5 * ledger.sigma1) break;

        double dt = std::min(0.05 * delta_bar, p + 0.5 * ledger.sigma1 + 0.05 * delta_bar);
        bool moved = false;
        for (int bt = 0; bt < 20; ++bt, dt *= 0.5) {
            DiscreteCurve trial = cur;
            double max_move = 0.0;
            for (const IntervalRecord& rec : targets) {
                for (int i = std::max(1, rec.ia); i <= std::min(cur.n - 1, rec.ib); ++i) {
                    double f = spec.phi(trial.nodes[i]);
                    double w = (f + delta_bar - eps0) / (delta_bar - eps0);
                    w = std::clamp(w, 0.0, 1.0);
                    if (w <= 0) continue;
                    Vec q = trial.nodes[i];
                    Vec n = spec.grad_phi(q);
                    double nn = metric_inner(field, q, n, n);
                    if (nn < 1e-18) continue;
                    Vec step = -(dt * w / nn) * n;  // phi drops by about dt * w
                    trial.nodes[i] = q + step;
                    max_move = std::max(max_move, step.norm());
                }
            }
            if (max_move > budget) continue;
            double F_after;
            try {
                F_after = curve_F(trial, spec);
            } catch (const OgcError&) {
                continue;
            }
            if (F_after > curve_F(cur, spec) + 1e-9) continue;
            budget -= max_move;
            cur = std::move(trial);
            moved = true;
            break;
        }
        if (!moved) break;
    }

    double p_final = -1e300;
    for (const IntervalRecord& rec : targets)
        for (int i = rec.ia; i <= rec.ib; ++i)
            p_final = std::max(p_final, spec.phi(cur.nodes[i]));
    res.F_after = curve_F(cur, spec);
    res.displacement_h1 = h1_dist(x, cur, 0.0, 1.0);
    res.curve = std::move(cur);
    res.accepted = p_final <= -0.5 * ledger.sigma1;
    return res;
}

}  // namespace ogc
