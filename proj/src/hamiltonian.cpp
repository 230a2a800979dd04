#include "ogc/hamiltonian.hpp"

#include "ogc/geometries.hpp"

#include <algorithm>
#include <cmath>

namespace ogc {

double NaturalHamiltonian::hamiltonian(const Vec& q, const Vec& p) const {
    return 0.5 * p.dot(a_upper(q) * p) + V(q);
}

Vec NaturalHamiltonian::dV_at(const Vec& q) const {
    if (dV) return dV(q);
    const double h = 1e-6 * (1.0 + q.norm());
    Vec out(q.size());
    Vec qp = q, qm = q;
    for (int k = 0; k < q.size(); ++k) {
        qp[k] = q[k] + h;
        qm[k] = q[k] - h;
        out[k] = (V(qp) - V(qm)) / (2.0 * h);
        qp[k] = q[k];
        qm[k] = q[k];
    }
    return out;
}

HamTrajectory hamilton_flow(const NaturalHamiltonian& ham, const Vec& q0, const Vec& p0,
                            double T, double step) {
    if (step <= 0) throw StepTooLarge("nonpositive step");
    HamTrajectory traj;
    const int nsteps = std::max(1, static_cast<int>(std::ceil(T / step)));
    const double h = T / nsteps;
    Vec q = q0, p = p0;
    traj.times.push_back(0.0);
    traj.q.push_back(q);
    traj.p.push_back(p);
    const double H0 = ham.hamiltonian(q0, p0);
    if (ham.constant_kinetic) {
        const Mat a = ham.a_upper(q0);
        for (int i = 0; i < nsteps; ++i) {
            Vec ph = p - 0.5 * h * ham.dV_at(q);
            q += h * (a * ph);
            p = ph - 0.5 * h * ham.dV_at(q);
            traj.times.push_back((i + 1) * h);
            traj.q.push_back(q);
            traj.p.push_back(p);
        }
    } else {
        auto rhs = [&](const Vec& qq, const Vec& pp, Vec& dq, Vec& dp) {
            dq = ham.a_upper(qq) * pp;
            dp = -ham.dV_at(qq);
            const double fh = 1e-6 * (1.0 + qq.norm());
            Vec qp = qq, qm = qq;
            for (int k = 0; k < qq.size(); ++k) {
                qp[k] = qq[k] + fh;
                qm[k] = qq[k] - fh;
                Mat da = (ham.a_upper(qp) - ham.a_upper(qm)) / (2.0 * fh);
                dp[k] -= 0.5 * pp.dot(da * pp);
                qp[k] = qq[k];
                qm[k] = qq[k];
            }
        };
        Vec k1q, k1p, k2q, k2p, k3q, k3p, k4q, k4p;
        for (int i = 0; i < nsteps; ++i) {
            rhs(q, p, k1q, k1p);
            rhs(q + 0.5 * h * k1q, p + 0.5 * h * k1p, k2q, k2p);
            rhs(q + 0.5 * h * k2q, p + 0.5 * h * k2p, k3q, k3p);
            rhs(q + h * k3q, p + h * k3p, k4q, k4p);
            q += h / 6.0 * (k1q + 2 * k2q + 2 * k3q + k4q);
            p += h / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p);
            traj.times.push_back((i + 1) * h);
            traj.q.push_back(q);
            traj.p.push_back(p);
        }
    }
    double HT = ham.hamiltonian(q, p);
    double scale = std::max(1.0, std::abs(H0));
    if (std::abs(HT - H0) / scale > 1e-5 * std::max(1.0, T))
        throw EnergyDrift("hamiltonian drift " + std::to_string(std::abs(HT - H0)));
    return traj;
}

JacobiDomain jacobi_metric(const NaturalHamiltonian& ham, double rho) {
    JacobiDomain jd;
    jd.spec = make_jacobi_well(ham, rho);
    jd.field = std::const_pointer_cast<MetricField>(jd.spec.field);
    return jd;
}

namespace {

// Point on the turning manifold {V = E} along the chart direction of angle
// theta (ray bisection from the origin).
Vec turning_point(const NaturalHamiltonian& ham, double theta) {
    Vec d = vec2(std::cos(theta), std::sin(theta));
    double lo = 0.0, hi = 1.0;
    while (ham.V(hi * d) < ham.E && hi < 1e6) hi *= 2.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        (ham.V(mid * d) < ham.E ? lo : hi) = mid;
    }
    Vec q = 0.5 * (lo + hi) * d;
    // Newton polish along the potential gradient
    for (int it = 0; it < 6; ++it) {
        Vec g = ham.dV_at(q);
        double gg = g.squaredNorm();
        if (gg < 1e-18) break;
        q += ((ham.E - ham.V(q)) / gg) * g;
    }
    return q;
}

struct BrakeShot {
    bool hit = false;
    double defect = 0.0;  // signed tangential velocity at the brake event
    double T = 0.0;
    Vec qT, pT;
};

BrakeShot brake_shot(const NaturalHamiltonian& ham, const Vec& q0, double step, double T_cap) {
    BrakeShot res;
    const Mat a = ham.a_upper(q0);
    Vec q = q0, p = Vec::Zero(ham.dim);
    auto kinetic = [&](const Vec& pp) { return 0.5 * pp.dot(a * pp); };
    const int nsteps = static_cast<int>(T_cap / step);
    double k_prev2 = 0.0, k_prev = 0.0, k_peak = 0.0;
    Vec q_prev = q, p_prev = p, q_prev2 = q, p_prev2 = p;
    for (int i = 0; i < nsteps; ++i) {
        Vec ph = p - 0.5 * step * ham.dV_at(q);
        Vec qn = q + step * (a * ph);
        Vec pn = ph - 0.5 * step * ham.dV_at(qn);
        double k = kinetic(pn);
        k_peak = std::max(k_peak, k);
        if (i >= 2 && k_prev < k_prev2 && k_prev < k && k_prev < 0.25 * k_peak &&
            k_peak > 1e-6) {
            // parabola fit of the kinetic energy through the three samples
            double denom = k_prev2 - 2.0 * k_prev + k;
            double off = std::abs(denom) < 1e-300 ? 0.0
                                                  : 0.5 * (k_prev2 - k) / denom;  // in steps
            double t_star = (i + off) * step;
            // re-integrate to t_star for the brake state
            Vec qq = q0, pp = Vec::Zero(ham.dim);
            int full = static_cast<int>(t_star / step);
            double rem = t_star - full * step;
            for (int j = 0; j < full; ++j) {
                Vec phh = pp - 0.5 * step * ham.dV_at(qq);
                qq += step * (a * phh);
                pp = phh - 0.5 * step * ham.dV_at(qq);
            }
            if (rem > 1e-15) {
                Vec phh = pp - 0.5 * rem * ham.dV_at(qq);
                qq += rem * (a * phh);
                pp = phh - 0.5 * rem * ham.dV_at(qq);
            }
            res.hit = true;
            res.T = t_star;
            res.qT = qq;
            res.pT = pp;
            Vec g = ham.dV_at(qq);
            if (g.norm() > 1e-14) {
                Vec w = vec2(-g[1], g[0]) / g.norm();  // turning-manifold tangent
                res.defect = w.dot(a * pp);
            }
            return res;
        }
        k_prev2 = k_prev;
        k_prev = k;
        q_prev2 = q_prev;
        p_prev2 = p_prev;
        q_prev = q;
        p_prev = p;
        q = qn;
        p = pn;
    }
    return res;
}

}  // namespace

BrakeOrbit brake_orbit_from_chord(const NaturalHamiltonian& ham, const ChordResult& chord,
                                  double rho, double step) {
    if (ham.dim != 2) throw BadConfig("brake-orbit shooting is implemented in dimension two");
    (void)rho;
    Vec A = chord.boundary_a;
    // push the chord foot out to the turning manifold {V = E}
    for (int it = 0; it < 60; ++it) {
        Vec g = ham.dV_at(A);
        double gg = g.squaredNorm();
        if (gg < 1e-18) break;
        A += ((ham.E - ham.V(A)) / gg) * g;
        if (std::abs(ham.V(A) - ham.E) < 1e-13) break;
    }
    double theta = std::atan2(A[1], A[0]);
    const double T_cap = 50.0 * std::max(1.0, chord.length);

    BrakeShot cur = brake_shot(ham, turning_point(ham, theta), step, T_cap);
    if (!cur.hit) throw ShootingDiverged("no brake event along the seed direction");
    double th_prev = theta, f_prev = cur.defect;
    double th_cur = theta;
    if (std::abs(f_prev) > 1e-12) {
        th_cur = theta + 1e-4;
        for (int it = 0; it < 60; ++it) {
            cur = brake_shot(ham, turning_point(ham, th_cur), step, T_cap);
            if (!cur.hit) throw ShootingDiverged("brake event lost during the search");
            if (std::abs(cur.defect) <= 1e-12) break;
            double denom = cur.defect - f_prev;
            if (std::abs(denom) < 1e-18) break;
            double th_next = th_cur - cur.defect * (th_cur - th_prev) / denom;
            th_prev = th_cur;
            f_prev = cur.defect;
            th_cur = th_next;
        }
        if (std::abs(cur.defect) > 1e-9)
            throw ShootingDiverged("tangential momentum did not vanish at the brake event");
    }

    BrakeOrbit orbit;
    orbit.T = cur.T;
    Vec q0 = turning_point(ham, th_cur);
    HamTrajectory traj = hamilton_flow(ham, q0, Vec::Zero(ham.dim), cur.T, step);
    orbit.times = std::move(traj.times);
    orbit.q_traj = std::move(traj.q);
    orbit.p_traj = std::move(traj.p);
    orbit.residual_p0 = 0.0;
    orbit.residual_pT = cur.pT.norm();
    double amp = 0.0;
    for (const Vec& q : orbit.q_traj) amp = std::max(amp, q.norm());
    orbit.amplitude = amp;
    return orbit;
}

EllipsoidReference ellipsoid_reference(const std::vector<double>& lambdas, double E) {
    if (lambdas.empty()) throw BadConfig("need at least one frequency");
    EllipsoidReference ref;
    if (E <= 0) return ref;  // empty energy level: no orbits
    for (size_t i = 0; i < lambdas.size(); ++i) {
        if (lambdas[i] <= 0) throw ZeroLambda();
        AnalyticBrakeOrbit orb;
        orb.axis = static_cast<int>(i);
        orb.amplitude = std::sqrt(E) / lambdas[i];
        orb.half_period = M_PI / (std::sqrt(2.0) * lambdas[i]);
        ref.orbits.push_back(orb);
    }
    for (size_t i = 0; i < lambdas.size(); ++i)
        for (size_t j = i + 1; j < lambdas.size(); ++j) {
            double r = lambdas[i] / lambdas[j];
            for (int den = 1; den <= 20; ++den) {
                double num = r * den;
                if (std::abs(num - std::round(num)) < 1e-9 * den) {
                    ref.rational_ratio_flag = true;
                    break;
                }
            }
        }
    return ref;
}

NaturalHamiltonian ellipsoid_hamiltonian(const std::vector<double>& lambdas, double E) {
    for (double lam : lambdas)
        if (lam <= 0) throw ZeroLambda();
    NaturalHamiltonian ham;
    ham.dim = static_cast<int>(lambdas.size());
    ham.E = E;
    ham.constant_kinetic = true;
    const int N = ham.dim;
    ham.a_upper = [N](const Vec&) { return Mat::Identity(N, N); };
    std::vector<double> l2(lambdas.size());
    for (size_t i = 0; i < lambdas.size(); ++i) l2[i] = lambdas[i] * lambdas[i];
    ham.V = [l2](const Vec& q) {
        double acc = 0.0;
        for (size_t i = 0; i < l2.size(); ++i) acc += l2[i] * q[i] * q[i];
        return acc;
    };
    ham.dV = [l2](const Vec& q) {
        Vec out(q.size());
        for (size_t i = 0; i < l2.size(); ++i) out[i] = 2.0 * l2[i] * q[i];
        return out;
    };
    return ham;
}

}  // namespace ogc
