#include "ogc/minimax.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ogc {

HomotopyState HomotopyState::identity(const PathFamily& family) {
    HomotopyState state;
    state.seeds = &family;
    state.current = family.curves;
    return state;
}

double functional_F(const HomotopyState& state, const DomainSpec& spec) {
    double best = 0.0;
    for (const auto& [key, curve] : state.current) best = std::max(best, curve_F(curve, spec));
    return best;
}

namespace {

struct GeoState {
    Vec q, v;
};

GeoState rk4_step(const MetricField& field, const GeoState& s, double h) {
    auto rhs = [&](const GeoState& u) -> GeoState {
        Tensor3 gamma = field.analytic_christoffel ? field.analytic_christoffel(u.q)
                                                   : christoffel_at(field, u.q);
        Vec acc(field.dim);
        for (int k = 0; k < field.dim; ++k) acc[k] = -u.v.dot(gamma[k] * u.v);
        return {u.v, acc};
    };
    GeoState k1 = rhs(s);
    GeoState k2 = rhs({s.q + 0.5 * h * k1.q, s.v + 0.5 * h * k1.v});
    GeoState k3 = rhs({s.q + 0.5 * h * k2.q, s.v + 0.5 * h * k2.v});
    GeoState k4 = rhs({s.q + h * k3.q, s.v + h * k3.v});
    return {s.q + h / 6.0 * (k1.q + 2 * k2.q + 2 * k3.q + k4.q),
            s.v + h / 6.0 * (k1.v + 2 * k2.v + 2 * k3.v + k4.v)};
}

struct ShotResult {
    bool hit = false;
    double defect = 0.0;   // tangential component of the exit velocity
    double t_exit = 0.0;   // g-length of the chord (unit-speed shot)
    GeoState launch;       // unit-speed initial state on the boundary
};

// Shoot the inward-normal geodesic from the boundary point at chart angle
// ang; report the tangential defect where it exits the domain.
ShotResult normal_shot(const DomainSpec& spec, double ang, double T_cap, int nsteps) {
    const MetricField& field = *spec.field;
    ShotResult res;
    Vec dir = vec2(std::cos(ang), std::sin(ang));
    Vec P = spec.chart_center + spec.star_radius(dir) * dir;
    try {
        P = project_to_boundary(spec, P);
    } catch (const OgcError&) {
        return res;
    }
    Vec n = spec.grad_phi(P);
    double nn = metric_norm(field, P, n);
    if (nn < 1e-12) return res;
    GeoState s{P, Vec(-n / nn)};
    res.launch = s;

    const double h = T_cap / nsteps;
    const double deep = -std::min(0.25 * spec.delta0 > 0 ? 0.25 * spec.delta0 : 1e-3, 1e-2);
    bool went_deep = false;
    double phi_prev = spec.phi(s.q);
    GeoState prev = s;
    double t_prev = 0.0;
    for (int i = 0; i < nsteps; ++i) {
        GeoState next;
        try {
            next = rk4_step(field, s, h);
        } catch (const OgcError&) {
            return res;
        }
        if (!field.chart_domain.contains(next.q)) return res;
        double f = spec.phi(next.q);
        if (f < deep) went_deep = true;
        if (went_deep && phi_prev < 0 && f >= 0) {
            prev = s;
            t_prev = i * h;
            // bisect the exit time within the bracketing step
            double lo = 0.0, hi = h;
            GeoState exit = next;
            for (int it = 0; it < 80; ++it) {
                double mid = 0.5 * (lo + hi);
                GeoState cand = rk4_step(field, prev, mid);
                (spec.phi(cand.q) < 0 ? lo : hi) = mid;
                exit = cand;
            }
            res.t_exit = t_prev + 0.5 * (lo + hi);
            Vec Q;
            try {
                Q = project_to_boundary(spec, exit.q);
            } catch (const OgcError&) {
                return res;
            }
            double vnorm = metric_norm(field, Q, exit.v);
            if (vnorm < 1e-12) return res;
            // signed tangential component against a consistently oriented
            // boundary tangent (rotated chart gradient)
            Vec dphi = spec.dphi_at(Q);
            if (dphi.norm() < 1e-12) return res;
            Vec tang = vec2(-dphi[1], dphi[0]);
            double tn = metric_norm(field, Q, tang);
            if (tn < 1e-12) return res;
            res.defect = metric_inner(field, Q, exit.v, tang) / (vnorm * tn);
            res.hit = true;
            return res;
        }
        phi_prev = f;
        s = next;
    }
    return res;
}

}  // namespace

std::optional<ChordResult> refine_ogc(const DiscreteCurve& x, const DomainSpec& spec,
                                      double a, double b, int n) {
    if (spec.field->dim != 2) return std::nullopt;
    const MetricField& field = *spec.field;
    Vec A = x.at(a);
    try {
        A = project_to_boundary(spec, A);
    } catch (const OgcError&) {
        return std::nullopt;
    }
    Vec d = A - spec.chart_center;
    if (d.norm() < 1e-12) return std::nullopt;
    double ang = std::atan2(d[1], d[0]);

    double L_cand = std::sqrt(std::max(1e-6, curve_integral_g(field, x, a, b) * (b - a)));
    double T_cap = 3.0 * L_cand + 0.5;
    const int nsteps = 2500;

    ShotResult s0 = normal_shot(spec, ang, T_cap, nsteps);
    if (!s0.hit) return std::nullopt;
    double ang_prev = ang, f_prev = s0.defect;
    ShotResult cur = s0;
    if (std::abs(f_prev) > 1e-11) {
        double ang_cur = ang + 1e-3;
        for (int it = 0; it < 40; ++it) {
            cur = normal_shot(spec, ang_cur, T_cap, nsteps);
            if (!cur.hit) return std::nullopt;
            if (std::abs(cur.defect) <= 1e-11) break;
            double denom = cur.defect - f_prev;
            if (std::abs(denom) < 1e-16) return std::nullopt;
            double ang_next = ang_cur - cur.defect * (ang_cur - ang_prev) / denom;
            ang_prev = ang_cur;
            f_prev = cur.defect;
            ang_cur = ang_next;
            if (std::abs(ang_cur - ang) > 1.2) return std::nullopt;
        }
        if (std::abs(cur.defect) > 1e-11) return std::nullopt;
    }

    // Resample the converged geodesic on the curve grid (nodes fall exactly
    // on integrator samples) plus a half-step run for an error estimate. The
    // exit time is Newton-corrected on the resample grid so the far endpoint
    // lands on the boundary to integrator precision.
    double T = cur.t_exit;
    const int sub = 8;
    GeoState end_state;
    auto integrate_nodes = [&](int per, double TT) {
        std::vector<Vec> nodes(n + 1);
        GeoState s = cur.launch;
        nodes[0] = s.q;
        double h = TT / (n * per);
        for (int i = 1; i <= n * per; ++i) {
            s = rk4_step(field, s, h);
            if (i % per == 0) nodes[i / per] = s.q;
        }
        end_state = s;
        return nodes;
    };
    std::vector<Vec> nodes;
    for (int it = 0; it < 4; ++it) {
        nodes = integrate_nodes(sub, T);
        double f_end = spec.phi(end_state.q);
        double rate = spec.dphi_at(end_state.q).dot(end_state.v);
        if (std::abs(rate) < 1e-14) break;
        double dT = -f_end / rate;
        T += dT;
        if (std::abs(dT) < 1e-14 * std::max(1.0, T)) {
            nodes = integrate_nodes(sub, T);
            break;
        }
    }
    std::vector<Vec> nodes_fine = integrate_nodes(2 * sub, T);
    double int_err = 0.0;
    for (int i = 0; i <= n; ++i) int_err = std::max(int_err, (nodes[i] - nodes_fine[i]).norm());

    ChordResult chord;
    chord.curve.n = n;
    chord.curve.nodes = std::move(nodes_fine);
    chord.length = T;
    chord.energy = 0.5 * T * T;
    chord.geodesic_residual = std::max(int_err, 1e-12);
    chord.orthogonality_defect = std::max(std::abs(cur.defect), 1e-12);
    chord.boundary_a = chord.curve.nodes.front();
    chord.boundary_b = chord.curve.nodes.back();
    chord.is_wogc = false;
    for (int i = 1; i < n; ++i)
        if (std::abs(spec.phi(chord.curve.nodes[i])) <= spec.boundary_tol) chord.is_wogc = true;
    if (std::abs(spec.phi(chord.boundary_a)) > 1e-6 ||
        std::abs(spec.phi(chord.boundary_b)) > 1e-6)
        return std::nullopt;
    return chord;
}

std::vector<ChordResult> dedup_chords(std::vector<ChordResult> results, double energy_tol,
                                      double shape_tol) {
    std::vector<ChordResult> out;
    for (ChordResult& cand : results) {
        bool dup = false;
        for (ChordResult& kept : out) {
            double scale = std::max(1.0, kept.energy);
            if (std::abs(cand.energy - kept.energy) > energy_tol * scale) continue;
            if (cand.curve.n != kept.curve.n) continue;
            double fwd = 0.0, rev = 0.0;
            for (int i = 0; i <= cand.curve.n; ++i) {
                fwd = std::max(fwd, (cand.curve.nodes[i] - kept.curve.nodes[i]).norm());
                rev = std::max(rev,
                               (cand.curve.nodes[i] - kept.curve.nodes[cand.curve.n - i]).norm());
            }
            if (std::min(fwd, rev) <= shape_tol * std::max(1.0, cand.length)) {
                dup = true;
                if (cand.geodesic_residual < kept.geodesic_residual) kept = cand;
                break;
            }
        }
        if (!dup) out.push_back(std::move(cand));
    }
    return out;
}

DeformationOutcome first_deformation(HomotopyState& state, const DomainSpec& spec,
                                     const ConstantsLedger& ledger, double c, double eps,
                                     const SolveOptions& opts, SolveDiagnostics* diag,
                                     int* iter_budget) {
    DeformationOutcome outcome;
    outcome.reached_below = true;
    const double target = c - eps;

    // focus seed for the trace: the one attaining the current sup
    std::pair<int, int> focus{-1, -1};
    double focus_F = -1.0;
    for (const auto& [key, curve] : state.current) {
        if (key.first > key.second) continue;
        if (state.frozen.count(key)) continue;
        double F = curve_F(curve, spec);
        if (F > focus_F) {
            focus_F = F;
            focus = key;
        }
    }

    for (auto& [key, curve] : state.current) {
        if (key.first > key.second) continue;           // mirrored by the reversal
        if (state.frozen.count(key)) continue;
        if (curve.is_constant(1e-10)) continue;
        bool below = false, converged = false;
        int rejects = 0, polish_attempts = 0;
        const int per_curve_cap = 250;
        for (int it = 0; it < per_curve_cap && (iter_budget == nullptr || *iter_budget > 0);
             ++it) {
            if (iter_budget) --*iter_budget;
            double F = curve_F(curve, spec);
            if (F <= target) {
                below = true;
                break;
            }
            // polish attempt: immediately, periodically, and when stuck
            bool want_polish = (it == 0 || it % 25 == 0 || rejects >= 2);
            if (want_polish && polish_attempts >= 3) {
                if (rejects >= 2) break;  // stuck, polish budget spent
            } else if (want_polish) {
                ++polish_attempts;
                std::vector<IntervalRecord> recs = maximal_intervals(curve, spec);
                const IntervalRecord* top = nullptr;
                double topF = 0.0;
                for (const IntervalRecord& rec : recs) {
                    if (rec.ib - rec.ia < 2) continue;
                    double f = 0.5 * (rec.b - rec.a) *
                               curve_integral_g(*spec.field, curve, rec.a, rec.b);
                    if (f > topF) {
                        topF = f;
                        top = &rec;
                    }
                }
                if (top) {
                    std::optional<ChordResult> chord =
                        refine_ogc(curve, spec, top->a, top->b, curve.n);
                    if (chord) {
                        outcome.found.push_back(*chord);
                        state.frozen[key] = true;
                        state.frozen[{key.second, key.first}] = true;
                        if (diag && chord->is_wogc) diag->wogc_detected = true;
                        converged = true;
                        break;
                    }
                }
                if (rejects >= 2) break;  // stuck and unpolishable
            }
            // deformation sweep: C, then B, then A
            FlowStepResult step;
            bool applied = false;
            try {
                step = type_C_step(curve, spec, ledger);
                if (step.accepted) applied = true;
            } catch (const NoNonessential&) {
            }
            if (!applied) {
                try {
                    step = type_B_step(curve, spec, ledger);
                    if (step.accepted) applied = true;
                } catch (const NotSecondType&) {
                }
            }
            if (!applied) {
                step = type_A_step(curve, spec, ledger, ledger.T_eps);
                if (step.accepted) applied = true;
            }
            if (applied) {
                curve = step.curve;
                rejects = 0;
                char tag = step.step_kind == StepKind::A   ? 'A'
                           : step.step_kind == StepKind::B ? 'B'
                                                           : 'C';
                if (state.tag_log.empty() || state.tag_log.back() != tag)
                    state.tag_log.push_back(tag);
                if (diag && key == focus) {
                    TraceRow row;
                    row.iter = it;
                    row.step_kind = tag;
                    row.F = step.F_after;
                    row.displacement = step.displacement_h1;
                    diag->trace.push_back(row);
                }
            } else {
                ++rejects;
            }
        }
        if (!below && !converged) {
            outcome.reached_below = false;
            outcome.stalled = true;
        }
        if (below || converged) continue;
    }
    return outcome;
}

std::vector<ChordResult> solve_existence(const DomainSpec& spec_in, const SolveOptions& opts,
                                         SolveDiagnostics* diag) {
    auto t0 = std::chrono::steady_clock::now();
    DomainSpec spec = spec_in;
    Rng rng(opts.seed + 0x9e3779b97f4a7c15ULL);

    if (spec.delta0 <= 0) {
        ConcavityReport rep = check_strong_concavity(spec, 400, rng);
        if (!rep.is_strongly_concave)
            throw NotConcave("domain failed the strong-concavity gate");
    }
    if (spec.K0 <= 0) compute_K0(spec, 600, rng);

    // injectivity bound over a sampled shell + interior region
    std::vector<Vec> region = sample_phi_band(spec, -spec.delta0, 0.0, 8, rng);
    for (size_t i = 0, lim = region.size(); i < lim; ++i)
        region.push_back(spec.chart_center + 0.5 * (region[i] - spec.chart_center));
    region.push_back(spec.chart_center);
    double inj = injectivity_radius_lower_bound(*spec.field, region);

    PathFamily family = build_family(spec, opts.boundary_resolution, opts.n, inj);
    double M0 = compute_M0(family, *spec.field);
    ConstantsLedger ledger = assemble_ledger(spec, M0, rng);
    if (diag) diag->ledger = ledger;

    HomotopyState state = HomotopyState::identity(family);
    std::vector<ChordResult> found;
    int budget = opts.max_inner;
    double eps = opts.eps0_factor * M0;
    const double eps_floor = opts.eps_floor_factor * M0;
    const double target = 0.9 * ledger.c1_lower_bound;

    for (int outer = 0; outer < opts.max_outer; ++outer) {
        double elapsed =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (elapsed > opts.wall_clock_cap) {
            if (diag) {
                diag->stalled = true;
                diag->notes += "wall clock cap reached; ";
            }
            break;
        }
        DeformationOutcome out =
            first_deformation(state, spec, ledger, target + eps, eps, opts, diag, &budget);
        for (ChordResult& chord : out.found) found.push_back(std::move(chord));
        if (out.reached_below || budget <= 0) break;
        if (out.stalled) {
            if (eps <= eps_floor) {
                if (diag) diag->stalled = true;
                break;
            }
            eps *= 0.5;
        }
    }

    found = dedup_chords(std::move(found), opts.dedup_energy_tol, opts.dedup_shape_tol);
    // honest residuals for the reported representatives
    for (ChordResult& chord : found) {
        OgcCheck check = is_ogc(chord.curve, spec, 0.0, 1.0);
        chord.geodesic_residual = check.geodesic_residual;
        chord.orthogonality_defect = check.orthogonality_defect;
        chord.is_wogc = check.is_wogc;
    }
    if (!opts.collect_all_converged && found.size() > 1) {
        std::sort(found.begin(), found.end(),
                  [](const ChordResult& a, const ChordResult& b) { return a.energy < b.energy; });
        found.resize(1);
    }
    if (diag) {
        double lo = 1e300;
        for (const ChordResult& chord : found) lo = std::min(lo, chord.energy);
        diag->min_level = found.empty() ? 0.0 : lo;
        diag->c1_bound_ok = !found.empty() && diag->min_level + 1e-9 >= ledger.c1_lower_bound;
    }
    return found;
}

}  // namespace ogc
