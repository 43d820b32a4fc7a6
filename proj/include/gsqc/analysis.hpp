#pragma once
// Ground-state analysis: the computational ground state (null-space component
// reachable from the start configuration), final-row occupation statistics,
// conditional measurement distributions with sampling, amplification sweeps
// with power-law and effective-constant fits, and the three-stage
// preparation-schedule trace.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsqc/circuit.hpp"
#include "gsqc/common.hpp"
#include "gsqc/eigensolver.hpp"
#include "gsqc/hamiltonians.hpp"
#include "gsqc/hilbert.hpp"

namespace gsqc {

// ---------------------------------------------------------------------------
// Start configuration and the computational ground state
// ---------------------------------------------------------------------------

// |start>: every electron on row 0 of its column, in the state the boundary
// keeps.  Normalized by construction (boundary states are unit vectors).
inline std::vector<cplx> start_vector(const BasisSpace& space) {
    std::vector<cplx> v(space.dim(), cplx(0));
    std::vector<std::pair<std::uint64_t, cplx>> partial{{0, cplx(1)}};
    const auto& cols = space.columns();
    for (std::size_t q = 0; q < cols.size(); ++q) {
        const QubitColumn& c = cols[q];
        std::vector<std::pair<std::uint64_t, cplx>> next;
        next.reserve(partial.size() * 2);
        for (const auto& [idx, amp] : partial) {
            if (c.hard) {
                next.emplace_back(idx, amp);  // the single kept row-0 state
                continue;
            }
            for (int b = 0; b < 2; ++b) {
                const cplx a = amp * c.row0_state[b];
                if (std::abs(a) > 0)
                    next.emplace_back(idx + space.stride(q) * std::uint64_t(c.local_of(0, b)), a);
            }
        }
        partial.swap(next);
    }
    for (const auto& [idx, amp] : partial) v[idx] = amp;
    return v;
}

struct GroundStateInfo {
    std::vector<cplx> psi;     // normalized null-space component of |start>
    double start_overlap = 0;  // |<start|psi>| = weight of |start> inside the null space
    NullProjectStats projection;
};

// The state the computation prepares: the orthogonal projection of |start>
// onto the null space of the (PSD) circuit operator, normalized.  Degenerate
// parked branches of the null space are orthogonal to |start> and drop out of
// the projection exactly.
inline GroundStateInfo computational_ground_state(const SparseOperator& h,
                                                  const BasisSpace& space,
                                                  double target_ratio = 1e-11) {
    GroundStateInfo info;
    info.psi = start_vector(space);
    const std::vector<cplx> start = info.psi;
    info.projection = project_onto_null(h, info.psi, target_ratio);
    if (!info.projection.converged)
        throw convergence_error("null-space projection of the start vector stalled at ratio " +
                                detail::short_float(info.projection.residual_ratio));
    info.start_overlap = std::abs(vecops::dot(start, info.psi));
    return info;
}

// ---------------------------------------------------------------------------
// Final-row statistics
// ---------------------------------------------------------------------------

// Visits every configuration with all electrons on their final rows.  The
// callback receives the basis index and the per-column bit values (-1 for a
// hard single-row column whose row 0 carries no bit).
template <typename Fn>
inline void for_each_all_final(const BasisSpace& space, Fn&& fn) {
    const auto& cols = space.columns();
    const std::size_t nq = cols.size();
    std::vector<std::vector<std::pair<int, int>>> choices(nq);  // (local, bit)
    for (std::size_t q = 0; q < nq; ++q) {
        const QubitColumn& c = cols[q];
        const int f = c.rows - 1;
        if (c.hard && f == 0)
            choices[q] = {{0, -1}};
        else
            choices[q] = {{c.local_of(f, 0), 0}, {c.local_of(f, 1), 1}};
    }
    std::vector<std::size_t> pick(nq, 0);
    std::vector<int> bits(nq, 0);
    for (;;) {
        std::uint64_t idx = 0;
        for (std::size_t q = 0; q < nq; ++q) {
            idx += space.stride(q) * std::uint64_t(choices[q][pick[q]].first);
            bits[q] = choices[q][pick[q]].second;
        }
        fn(idx, bits);
        std::size_t q = 0;
        while (q < nq && ++pick[q] == choices[q].size()) pick[q++] = 0;
        if (q == nq) break;
    }
}

struct FinalRowStats {
    double p_all_final = 0;   // probability every electron sits on its final row
    double p_predicted = 0;   // (1 - 8/lambda^2)^Q with Q = number of columns
    std::vector<double> per_column_final;  // per-column final-row probability
};

inline FinalRowStats final_row_stats(const std::vector<cplx>& psi, const BasisSpace& space,
                                     const CircuitGraph& g) {
    if (psi.size() != space.dim())
        throw validation_error("state dimension does not match the basis space");
    FinalRowStats st;
    for_each_all_final(space, [&](std::uint64_t idx, const std::vector<int>&) {
        st.p_all_final += std::norm(psi[idx]);
    });

    const auto& cols = space.columns();
    st.per_column_final.assign(cols.size(), 0.0);
    std::vector<int> locals(cols.size());
    for (std::uint64_t idx = 0; idx < space.dim(); ++idx) {
        const double w = std::norm(psi[idx]);
        if (w == 0.0) continue;
        space.decode(idx, locals);
        for (std::size_t q = 0; q < cols.size(); ++q)
            if (cols[q].row_of(locals[q]) == cols[q].rows - 1) st.per_column_final[q] += w;
    }

    const double lam2 = g.options.lambda * g.options.lambda;
    st.p_predicted = std::pow(1.0 - 8.0 / lam2, static_cast<double>(g.columns.size()));
    return st;
}

// ---------------------------------------------------------------------------
// Conditional measurement distribution and sampling
// ---------------------------------------------------------------------------

struct ConditionalDistribution {
    // data bitstring (most significant character = bit N-1) -> probability,
    // conditioned on all electrons being at their final rows
    std::map<std::string, double> probability;
    double conditional_mass = 0;  // |psi|^2 weight of the all-final subspace
};

// Distribution of the problem bits read off the terminal carrier column of
// each data chain, conditioned on all electrons at final rows.  Ancilla and
// superseded-carrier bits are marginalized out.
inline ConditionalDistribution conditional_assignments(const std::vector<cplx>& psi,
                                                       const BasisSpace& space,
                                                       const CircuitGraph& g) {
    if (psi.size() != space.dim())
        throw validation_error("state dimension does not match the basis space");
    if (g.data_map.empty())
        throw validation_error("graph has no data columns to read out");
    const int n_bits = g.data_map.rbegin()->first + 1;
    std::vector<std::size_t> terminal;
    for (const auto& [bit, chain] : g.data_map) {
        if (bit != static_cast<int>(terminal.size()))
            throw validation_error("data map must cover bits 0..N-1 contiguously");
        terminal.push_back(chain.back());
    }

    ConditionalDistribution dist;
    for_each_all_final(space, [&](std::uint64_t idx, const std::vector<int>& bits) {
        const double w = std::norm(psi[idx]);
        dist.conditional_mass += w;
        if (w == 0.0) return;
        std::string key(static_cast<std::size_t>(n_bits), '0');
        for (int b = 0; b < n_bits; ++b) {
            const int v = bits[terminal[static_cast<std::size_t>(b)]];
            if (v < 0)
                throw validation_error("terminal data column carries no bit on its final row");
            key[static_cast<std::size_t>(n_bits - 1 - b)] = static_cast<char>('0' + v);
        }
        dist.probability[key] += w;
    });

    if (dist.conditional_mass < 1e-12)
        throw convergence_error(
            "conditioning is degenerate: all-final-row weight " +
            std::to_string(dist.conditional_mass) +
            " is below 1e-12 (state carries no final-row component)");
    for (auto& [key, p] : dist.probability) p /= dist.conditional_mass;
    return dist;
}

struct SampleResult {
    std::vector<std::string> samples;  // in draw order
    std::map<std::string, std::uint64_t> counts;
};

// I.i.d. draws from the conditional distribution (inverse-CDF over the sorted
// bitstrings), reproducible by seed.
inline SampleResult sample_measurements(const ConditionalDistribution& dist, std::size_t count,
                                        std::uint64_t seed) {
    std::vector<std::pair<double, const std::string*>> cdf;
    double acc = 0;
    for (const auto& [key, p] : dist.probability) {
        acc += p;
        cdf.emplace_back(acc, &key);
    }
    if (cdf.empty()) throw validation_error("cannot sample from an empty distribution");
    cdf.back().first = std::max(cdf.back().first, 1.0);  // guard rounding at the top

    SampleResult out;
    out.samples.reserve(count);
    Rng rng(seed);
    for (std::size_t i = 0; i < count; ++i) {
        const double u = rng.uniform();
        auto it = std::lower_bound(cdf.begin(), cdf.end(), u,
                                   [](const auto& e, double v) { return e.first < v; });
        if (it == cdf.end()) --it;
        out.samples.push_back(*it->second);
        ++out.counts[*it->second];
    }
    return out;
}

inline nlohmann::json distribution_to_json(const ConditionalDistribution& dist) {
    nlohmann::json j = nlohmann::json::object();
    for (const auto& [key, p] : dist.probability) j[key] = p;
    return j;
}

// ---------------------------------------------------------------------------
// Amplification sweeps and fits
// ---------------------------------------------------------------------------

// Log-spaced grid from a to b with n points (n >= 2; endpoints included).
inline std::vector<double> lambda_grid(double a, double b, int n) {
    if (!(a > 0) || !(b > 0) || !(b >= a))
        throw validation_error("grid needs 0 < a <= b");
    if (n < 1) throw validation_error("grid needs at least one point");
    std::vector<double> out;
    if (n == 1) {
        out.push_back(a);
        return out;
    }
    const double la = std::log(a), lb = std::log(b);
    for (int i = 0; i < n; ++i)
        out.push_back(std::exp(la + (lb - la) * static_cast<double>(i) / (n - 1)));
    return out;
}

struct PowerFit {
    double exponent = 0;          // slope of log y vs log x
    double intercept = 0;         // log-space intercept
    double exponent_stderr = 0;   // OLS standard error of the slope
    std::size_t points = 0;
};

// Ordinary least squares on (log x, log y); pairs with non-positive or
// non-finite y are skipped.
inline PowerFit fit_power_law(const std::vector<double>& xs, const std::vector<double>& ys) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < xs.size() && i < ys.size(); ++i) {
        if (xs[i] > 0 && ys[i] > 0 && std::isfinite(ys[i])) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(ys[i]));
        }
    }
    PowerFit fit;
    fit.points = lx.size();
    if (lx.size() < 2) throw validation_error("power-law fit needs at least two usable points");
    const double n = static_cast<double>(lx.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    if (sxx <= 0) throw validation_error("power-law fit needs distinct x values");
    fit.exponent = sxy / sxx;
    fit.intercept = my - fit.exponent * mx;
    if (lx.size() > 2) {
        double ssr = 0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const double r = ly[i] - (fit.intercept + fit.exponent * lx[i]);
            ssr += r * r;
        }
        fit.exponent_stderr = std::sqrt(ssr / (n - 2.0) / sxx);
    }
    return fit;
}

// Least-squares fit of C in p = (1 - C/lambda^2)^Q over a sweep, by golden
// section on the 1-D objective (sum of squared log residuals).
inline double fit_c_eff(const std::vector<double>& lambdas, const std::vector<double>& ps,
                        std::size_t q_columns) {
    if (q_columns == 0) throw validation_error("effective-constant fit needs Q >= 1 columns");
    std::vector<double> l2, lp;
    for (std::size_t i = 0; i < lambdas.size() && i < ps.size(); ++i) {
        if (ps[i] > 0 && ps[i] <= 1 && lambdas[i] > 0) {
            l2.push_back(lambdas[i] * lambdas[i]);
            lp.push_back(std::log(ps[i]));
        }
    }
    if (l2.size() < 2) throw validation_error("effective-constant fit needs two usable points");
    const double qd = static_cast<double>(q_columns);
    const double cmax = 0.999 * *std::min_element(l2.begin(), l2.end());
    auto objective = [&](double c) {
        double f = 0;
        for (std::size_t i = 0; i < l2.size(); ++i) {
            const double r = lp[i] - qd * std::log(1.0 - c / l2[i]);
            f += r * r;
        }
        return f;
    };
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = 0.0, hi = cmax;
    double x1 = hi - gr * (hi - lo), x2 = lo + gr * (hi - lo);
    double f1 = objective(x1), f2 = objective(x2);
    for (int it = 0; it < 200; ++it) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = objective(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = objective(x2);
        }
    }
    return 0.5 * (lo + hi);
}

struct SweepRow {
    double lambda = 0;
    double e0 = 0;
    double gap = 0;
    double p_all_final = 0;
    double p_predicted = 0;
    int multiplicity = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    PowerFit gap_fit;        // gap vs lambda on the log-log scale
    double c_eff = 0;        // fitted effective constant in (1 - C/lambda^2)^Q
    std::size_t q_columns = 0;
};

// Solves the circuit produced by `make` at every amplification in `lambdas`
// and fits the gap power law and the effective probability constant.
inline SweepResult lambda_sweep(const std::function<CircuitGraph(double)>& make,
                                const std::vector<double>& lambdas,
                                const SolveOptions& sopts = {}, double null_target = 1e-11) {
    if (lambdas.empty()) throw validation_error("sweep needs at least one amplification value");
    SweepResult res;
    for (double lam : lambdas) {
        const CircuitGraph g = make(lam);
        const BasisSpace space = make_space(g);
        const SparseOperator h = assemble_circuit(g, space);
        const GapInfo gi = circuit_gap(h, sopts);
        const GroundStateInfo gs = computational_ground_state(h, space, null_target);
        const FinalRowStats st = final_row_stats(gs.psi, space, g);
        res.rows.push_back(
            {lam, gi.e0, gi.gap, st.p_all_final, st.p_predicted, gi.multiplicity});
        res.q_columns = g.columns.size();
    }
    if (res.rows.size() >= 2) {
        std::vector<double> ls, gaps, ps;
        for (const auto& r : res.rows) {
            ls.push_back(r.lambda);
            gaps.push_back(r.gap);
            ps.push_back(r.p_all_final);
        }
        res.gap_fit = fit_power_law(ls, gaps);
        res.c_eff = fit_c_eff(ls, ps, res.q_columns);
    }
    return res;
}

// ---------------------------------------------------------------------------
// Three-stage preparation schedule
// ---------------------------------------------------------------------------

namespace detail {

// First-interval identity gates are the ones the preparation stage replaces
// with a row-0/row-1 opening coupling; a column whose first interval carries
// anything else is born open.
inline bool prep_eligible(const HamiltonianTerm& t) {
    return t.kind == TermKind::SingleQubit && t.j == 1 &&
           t.u.max_abs_diff(Mat2::identity()) <= 1e-12;
}

// Stages 1-2: opening couplings at strength s, all amplifications at 1.
inline std::vector<HamiltonianTerm> schedule_open_terms(const CircuitGraph& g, double s) {
    std::vector<HamiltonianTerm> out;
    out.reserve(g.terms.size());
    for (const auto& t : g.terms) {
        if (prep_eligible(t))
            out.push_back(make_prep_boost(t.q, s, t.eps));
        else if (t.kind == TermKind::Boost)
            out.push_back(make_boost(t.q, t.j, 1.0, t.eps));
        else if (t.kind == TermKind::Project)
            out.push_back(make_project(t.q, t.j, t.gamma, 1.0, t.eps));
        else
            out.push_back(t);
    }
    return out;
}

// Stage 3: amplifications ramp with 1/lambda moving linearly from 1 to
// 1/lambda_end; everything else is at full strength.
inline std::vector<HamiltonianTerm> schedule_boost_terms(const CircuitGraph& g, double x,
                                                         double lambda_end) {
    const double inv = 1.0 + x * (1.0 / lambda_end - 1.0);
    const double lam = 1.0 / inv;
    std::vector<HamiltonianTerm> out;
    out.reserve(g.terms.size());
    for (const auto& t : g.terms) {
        if (t.kind == TermKind::Boost)
            out.push_back(make_boost(t.q, t.j, lam, t.eps));
        else if (t.kind == TermKind::Project)
            out.push_back(make_project(t.q, t.j, t.gamma, lam, t.eps));
        else
            out.push_back(t);
    }
    return out;
}

inline double operator_max_diff(const SparseOperator& a, const SparseOperator& b) {
    double m = 0;
    a.for_each([&](std::uint64_t i, std::uint64_t j, const cplx& v) {
        m = std::max(m, std::abs(v - b.coeff(i, j)));
    });
    b.for_each([&](std::uint64_t i, std::uint64_t j, const cplx& v) {
        m = std::max(m, std::abs(v - a.coeff(i, j)));
    });
    return m;
}

}  // namespace detail

struct ScheduleRow {
    int stage = 1;   // 1 = pinned start, 2 = opening ramp, 3 = amplification ramp
    double s = 0;    // stage parameter in [0, 1]
    double e0 = 0;
    double gap = 0;
};

struct ScheduleResult {
    std::vector<ScheduleRow> rows;
    double lambda_end = 1;
    bool stage3_monotone = true;   // gap non-increasing along stage 3 within slack
    double max_gap_increase = 0;   // largest positive gap jump found in stage 3
    double endpoint_mismatch_23 = 0;  // |H_open(1) - H_boost(0)|_max
    double endpoint_mismatch_3s = 0;  // |H_boost(1) - H_static|_max
    double min_gap = std::numeric_limits<double>::infinity();
    double time_estimate = 0;      // adiabatic cost scale, 1/min_gap^2
};

// Traces the three-stage preparation of the circuit's static operator: stage
// 1 pins electrons behind zero-strength openings, stage 2 ramps the openings
// to full transfer strength at unit amplification, stage 3 ramps 1/lambda
// down to the target.  The final point is checked elementwise against the
// static operator.
inline ScheduleResult schedule_trace(const CircuitGraph& g, int stage2_points, int stage3_points,
                                     const SolveOptions& sopts = {},
                                     double monotone_slack = 1e-6) {
    if (stage2_points < 2 || stage3_points < 2)
        throw validation_error("schedule stages need at least two points each");
    const BasisSpace space = make_space(g);
    ScheduleResult res;
    res.lambda_end = g.options.lambda;

    auto solve_point = [&](const std::vector<HamiltonianTerm>& terms, int stage, double s) {
        const SparseOperator h = assemble(space, terms);
        const GapInfo gi = circuit_gap(h, sopts);
        res.rows.push_back({stage, s, gi.e0, gi.gap});
        res.min_gap = std::min(res.min_gap, gi.gap);
    };

    solve_point(detail::schedule_open_terms(g, 0.0), 1, 0.0);
    for (int i = 0; i < stage2_points; ++i) {
        const double s = static_cast<double>(i) / (stage2_points - 1);
        solve_point(detail::schedule_open_terms(g, s), 2, s);
    }
    std::vector<double> stage3_gaps;
    for (int i = 0; i < stage3_points; ++i) {
        const double s = static_cast<double>(i) / (stage3_points - 1);
        solve_point(detail::schedule_boost_terms(g, s, res.lambda_end), 3, s);
        stage3_gaps.push_back(res.rows.back().gap);
    }

    for (std::size_t i = 0; i + 1 < stage3_gaps.size(); ++i)
        res.max_gap_increase =
            std::max(res.max_gap_increase, stage3_gaps[i + 1] - stage3_gaps[i]);
    res.stage3_monotone = res.max_gap_increase <= monotone_slack;

    res.endpoint_mismatch_23 =
        detail::operator_max_diff(assemble(space, detail::schedule_open_terms(g, 1.0)),
                                  assemble(space, detail::schedule_boost_terms(g, 0.0, res.lambda_end)));
    res.endpoint_mismatch_3s = detail::operator_max_diff(
        assemble(space, detail::schedule_boost_terms(g, 1.0, res.lambda_end)),
        assemble_circuit(g, space));
    res.time_estimate = res.min_gap > 0 ? 1.0 / (res.min_gap * res.min_gap)
                                        : std::numeric_limits<double>::infinity();
    return res;
}

// ---------------------------------------------------------------------------
// CSV artifacts
// ---------------------------------------------------------------------------

// Config-echo lines go first as '#' comments; the header line is pinned.
inline void write_sweep_csv(std::ostream& out, const SweepResult& res,
                            const std::vector<std::string>& config_echo = {}) {
    for (const auto& line : config_echo) out << "# " << line << '\n';
    out << "lambda,e0,gap,p_all_final,p_predicted\n";
    out.precision(17);
    for (const auto& r : res.rows)
        out << r.lambda << ',' << r.e0 << ',' << r.gap << ',' << r.p_all_final << ','
            << r.p_predicted << '\n';
}

inline void write_schedule_csv(std::ostream& out, const ScheduleResult& res,
                               const std::vector<std::string>& config_echo = {}) {
    for (const auto& line : config_echo) out << "# " << line << '\n';
    out << "stage,s,e0,gap\n";
    out.precision(17);
    for (const auto& r : res.rows)
        out << r.stage << ',' << r.s << ',' << r.e0 << ',' << r.gap << '\n';
}

}  // namespace gsqc
