#pragma once
// Iterative lowest-eigenpair solver for large sparse Hermitian operators,
// matvec-only. Krylov subspace with full (selective second-pass) Gram-Schmidt
// reorthogonalization, thick restarts, and locking of converged pairs.
// Clustered near-zero eigenvalues are the design target: every circuit
// Hamiltonian here is PSD with a possibly degenerate zero space.
//
// The projected small eigenproblem is handed to a dense solver; everything at
// full dimension (matvec, orthogonalization, recombination) is done here with
// serial, deterministic arithmetic.

#include <Eigen/Dense>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "gsqc/common.hpp"
#include "gsqc/hilbert.hpp"

namespace gsqc {

namespace detail {
inline std::string short_float(double v) {
    std::ostringstream s;
    s.precision(6);
    s << v;
    return s.str();
}
}  // namespace detail

namespace vecops {

inline cplx dot(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    cplx s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
    return s;
}
inline double nrm2(const std::vector<cplx>& a) {
    double s = 0;
    for (const cplx& v : a) s += std::norm(v);
    return std::sqrt(s);
}
inline void axpy(cplx alpha, const std::vector<cplx>& x, std::vector<cplx>& y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}
inline void scal(cplx alpha, std::vector<cplx>& x) {
    for (cplx& v : x) v *= alpha;
}

}  // namespace vecops

struct SolveOptions {
    double tol = 1e-10;          // residual bound relative to max(1, |H|_inf)
    int max_basis = 64;          // Krylov basis size between restarts
    int max_restarts = 500;      // outer Rayleigh-Ritz cycles
    int thick_keep = 10;         // Ritz vectors carried across a restart
    std::uint64_t seed = 1;
    double degeneracy_tol = 1e-8;  // absolute clustering width at the bottom
    bool range_start = false;      // start vectors of the form H r: skips the
                                   // null space, converges to the lowest
                                   // nonzero eigenvalue of a PSD operator
    std::size_t memory_budget = std::size_t(1536) << 20;  // basis cap
};

struct GroundStateResult {
    std::vector<double> energies;            // ascending
    std::vector<std::vector<cplx>> vectors;  // matching order, orthonormal
    std::vector<double> residuals;           // |Hv - Ev| / |v| per pair
    int multiplicity = 0;                    // bottom cluster size among the k found
    double gap = std::numeric_limits<double>::quiet_NaN();
    bool gap_resolved = false;  // true when multiplicity < k
    int iterations = 0;         // restart cycles
    std::uint64_t matvecs = 0;
    bool converged = false;
};

namespace detail {

// Spot check hermiticity on a sample of rows; full scan only at small dim.
inline void check_hermitian_sampled(const SparseOperator& op, double scale, std::uint64_t seed) {
    const double tol = 1e-10 * scale;
    if (op.dim() <= 512) {
        if (!op.is_hermitian(tol)) throw validation_error("operator is not Hermitian");
        return;
    }
    Rng rng(seed ^ 0xda3e39cb94b95bdbULL);
    for (int s = 0; s < 64; ++s) {
        const std::uint64_t i = rng.bounded(op.dim());
        bool ok = true;
        op.for_each_in_row(i, [&](std::uint64_t j, cplx v) {
            if (std::abs(v - std::conj(op.coeff(j, i))) > tol) ok = false;
        });
        if (!ok) throw validation_error("operator is not Hermitian");
    }
}

class LanczosEngine {
  public:
    LanczosEngine(const SparseOperator& op, const SolveOptions& opts)
        : op_(op), o_(opts), n_(op.dim()), rng_(opts.seed) {
        scale_ = std::max(1.0, op_.norm_inf());
        check_hermitian_sampled(op_, scale_, o_.seed);
        // two full-length blocks (V and HV) plus locked vectors must fit
        const std::size_t per_vec = std::size_t(n_) * sizeof(cplx);
        const int cap = int(std::min<std::size_t>(
            std::size_t(o_.max_basis), std::max<std::size_t>(o_.memory_budget / (2 * per_vec), 6)));
        m_max_ = int(std::min<std::uint64_t>(std::uint64_t(std::max(cap, 6)), n_));
        S_ = Eigen::MatrixXcd::Zero(m_max_, m_max_);
    }

    GroundStateResult solve(int k) {
        if (k < 1) throw validation_error("need k >= 1 eigenpairs");
        if (std::uint64_t(k) > n_) throw validation_error("k exceeds operator dimension");
        GroundStateResult res;
        push_start_vector();
        for (int cycle = 0; cycle < o_.max_restarts; ++cycle) {
            res.iterations = cycle + 1;
            extend_basis();
            const int m = int(basis_.size());
            Eigen::MatrixXcd Sm = S_.topLeftCorner(m, m);
            Sm = ((Sm + Sm.adjoint()) * 0.5).eval();
            Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Sm);
            const Eigen::VectorXd theta = es.eigenvalues();
            const Eigen::MatrixXcd y = es.eigenvectors();

            // Lock converged pairs from the bottom up.
            int first_unconverged = -1;
            for (int c = 0; c < m && int(locked_.size()) < k; ++c) {
                std::vector<cplx> x = combine(basis_, y.col(c));
                std::vector<cplx> hx = combine(hbasis_, y.col(c));
                vecops::axpy(cplx(-theta[c]), x, hx);  // hx := Hx - theta x
                const double r = vecops::nrm2(hx) / std::max(1e-300, vecops::nrm2(x));
                if (r <= o_.tol * scale_) {
                    orthonormalize_against_locked(x);
                    locked_.push_back(std::move(x));
                    locked_vals_.push_back(theta[c]);
                    locked_res_.push_back(r);
                } else {
                    first_unconverged = c;
                    best_res_ = std::min(best_res_, r);
                    break;
                }
            }
            if (int(locked_.size()) >= k) {
                finish(res, k);
                return res;
            }
            restart(theta, y, first_unconverged < 0 ? 0 : first_unconverged);
        }
        throw convergence_error("eigensolver did not converge: " +
                                std::to_string(locked_.size()) + "/" + std::to_string(k) +
                                " pairs locked, best relative residual " +
                                detail::short_float(best_res_) + " vs tol " +
                                detail::short_float(o_.tol));
    }

  private:
    const SparseOperator& op_;
    SolveOptions o_;
    std::uint64_t n_;
    double scale_ = 1.0;
    Rng rng_;
    int m_max_ = 6;
    std::uint64_t matvecs_ = 0;
    double best_res_ = std::numeric_limits<double>::max();
    std::vector<std::vector<cplx>> basis_, hbasis_;
    std::vector<std::vector<cplx>> locked_;
    std::vector<double> locked_vals_, locked_res_;
    Eigen::MatrixXcd S_;  // projected operator on the current basis

    std::vector<cplx> random_vector() {
        std::vector<cplx> v(n_);
        for (auto& c : v) c = cplx(rng_.normal(), rng_.normal());
        return v;
    }

    // Fresh start direction; in range mode pass it through H once so the
    // Krylov space avoids the null space entirely.
    void push_start_vector() {
        for (int attempt = 0; attempt < 64; ++attempt) {
            std::vector<cplx> v = random_vector();
            if (o_.range_start) {
                std::vector<cplx> hv(n_);
                op_.matvec(v, hv);
                ++matvecs_;
                v = std::move(hv);
            }
            if (!orthonormalize(v)) continue;
            append_basis_vector(std::move(v));
            return;
        }
        throw convergence_error("could not generate an independent start vector");
    }

    // CGS2 against locked plus current basis; returns false on collapse.
    bool orthonormalize(std::vector<cplx>& w) {
        double before = vecops::nrm2(w);
        if (before <= 1e-300) return false;
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& u : locked_) vecops::axpy(-vecops::dot(u, w), u, w);
            for (const auto& u : basis_) vecops::axpy(-vecops::dot(u, w), u, w);
            const double after = vecops::nrm2(w);
            if (after <= 1e-14 * scale_ || after <= 1e-300) return false;
            const bool clean = after > 0.707 * before;
            before = after;
            if (clean) break;  // no significant cancellation: skip second pass
        }
        vecops::scal(cplx(1.0 / before), w);
        return true;
    }

    void orthonormalize_against_locked(std::vector<cplx>& x) {
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& u : locked_) vecops::axpy(-vecops::dot(u, x), u, x);
        const double nn = vecops::nrm2(x);
        if (nn > 1e-300) vecops::scal(cplx(1.0 / nn), x);
    }

    // Append v, compute H v, and fill the new row/column of the projected
    // matrix.
    void append_basis_vector(std::vector<cplx>&& v) {
        std::vector<cplx> hv(n_);
        op_.matvec(v, hv);
        ++matvecs_;
        basis_.push_back(std::move(v));
        hbasis_.push_back(std::move(hv));
        const int j = int(basis_.size()) - 1;
        for (int i = 0; i <= j; ++i) {
            S_(i, j) = vecops::dot(basis_[std::size_t(i)], hbasis_[std::size_t(j)]);
            S_(j, i) = std::conj(S_(i, j));
        }
    }

    // Grow the basis to m_max_ by Lanczos steps (reorthogonalized), injecting
    // fresh random directions when an invariant subspace is exhausted.
    void extend_basis() {
        while (int(basis_.size()) < m_max_ &&
               locked_.size() + basis_.size() < std::size_t(n_)) {
            std::vector<cplx> w = hbasis_.back();
            if (!orthonormalize(w)) {
                bool ok = false;
                for (int attempt = 0; attempt < 64 && !ok; ++attempt) {
                    w = random_vector();
                    if (o_.range_start) {
                        std::vector<cplx> hw(n_);
                        op_.matvec(w, hw);
                        ++matvecs_;
                        w = std::move(hw);
                    }
                    ok = orthonormalize(w);
                }
                if (!ok) return;  // space exhausted (e.g. range smaller than basis)
            }
            append_basis_vector(std::move(w));
        }
    }

    static std::vector<cplx> combine(const std::vector<std::vector<cplx>>& vs,
                                     const Eigen::VectorXcd& coeff) {
        std::vector<cplx> out(vs.front().size(), cplx(0));
        for (int i = 0; i < coeff.size(); ++i) vecops::axpy(coeff[i], vs[std::size_t(i)], out);
        return out;
    }

    // Thick restart: keep the lowest unconverged Ritz vectors plus the
    // residual direction of the best candidate. The kept block diagonalizes
    // the projected matrix, so S restarts as diag(theta).
    void restart(const Eigen::VectorXd& theta, const Eigen::MatrixXcd& y, int lowest) {
        const int m = int(basis_.size());
        const int keep =
            std::min({o_.thick_keep, m - lowest, int(n_ - locked_.size())});
        std::vector<std::vector<cplx>> nb, nhb;
        nb.reserve(std::size_t(keep));
        nhb.reserve(std::size_t(keep));
        for (int c = lowest; c < lowest + keep; ++c) {
            nb.push_back(combine(basis_, y.col(c)));
            nhb.push_back(combine(hbasis_, y.col(c)));
        }
        std::vector<cplx> r = nhb.front();
        vecops::axpy(cplx(-theta[lowest]), nb.front(), r);
        basis_ = std::move(nb);
        hbasis_ = std::move(nhb);
        S_.setZero();
        for (int c = 0; c < keep; ++c) S_(c, c) = theta[lowest + c];
        if (orthonormalize(r)) append_basis_vector(std::move(r));
    }

    void finish(GroundStateResult& res, int k) {
        std::vector<int> idx(locked_.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = int(i);
        std::stable_sort(idx.begin(), idx.end(),
                         [&](int a, int b) { return locked_vals_[a] < locked_vals_[b]; });
        for (int i = 0; i < k; ++i) {
            res.energies.push_back(locked_vals_[std::size_t(idx[std::size_t(i)])]);
            res.vectors.push_back(std::move(locked_[std::size_t(idx[std::size_t(i)])]));
            res.residuals.push_back(locked_res_[std::size_t(idx[std::size_t(i)])]);
        }
        res.multiplicity = 1;
        while (res.multiplicity < k &&
               res.energies[std::size_t(res.multiplicity)] - res.energies[0] <= o_.degeneracy_tol)
            ++res.multiplicity;
        if (res.multiplicity < k) {
            res.gap = res.energies[std::size_t(res.multiplicity)] - res.energies[0];
            res.gap_resolved = true;
        }
        res.matvecs = matvecs_;
        res.converged = true;
    }
};

}  // namespace detail

inline GroundStateResult lowest_eigenpairs(const SparseOperator& op, int k,
                                           const SolveOptions& opts = {}) {
    detail::LanczosEngine engine(op, opts);
    return engine.solve(k);
}

inline GroundStateResult lowest_eigenpairs(const SparseOperator& op, int k, double tol,
                                           std::uint64_t seed) {
    SolveOptions o;
    o.tol = tol;
    o.seed = seed;
    return lowest_eigenpairs(op, k, o);
}

struct GapInfo {
    double e0 = 0;
    double gap = std::numeric_limits<double>::quiet_NaN();
    int multiplicity = 1;
    bool multiplicity_is_lower_bound = false;
};

// Ground energy, gap, and ground multiplicity. k grows until the bottom
// cluster is resolved; a PSD zero cluster too wide to enumerate is handled by
// a range-started solve that targets the smallest nonzero eigenvalue directly.
inline GapInfo gap_of(const SparseOperator& op, const SolveOptions& base = {}, int k_cap = 12) {
    SolveOptions opts = base;
    int k = int(std::min<std::uint64_t>(4, op.dim()));
    for (;;) {
        const GroundStateResult r = lowest_eigenpairs(op, k, opts);
        if (r.gap_resolved) return {r.energies[0], r.gap, r.multiplicity, false};
        if (std::uint64_t(k) >= op.dim())
            return {r.energies[0], std::numeric_limits<double>::quiet_NaN(), r.multiplicity,
                    false};  // whole spectrum is one cluster
        if (k >= k_cap) {
            if (std::abs(r.energies[0]) <= opts.degeneracy_tol) {
                SolveOptions ro = base;
                ro.range_start = true;
                const GroundStateResult rr = lowest_eigenpairs(op, 1, ro);
                return {0.0, rr.energies[0], k, true};
            }
            throw convergence_error("ground multiplicity exceeds the adaptive cap of " +
                                    std::to_string(k_cap));
        }
        k = int(std::min<std::uint64_t>({std::uint64_t(2 * k), std::uint64_t(k_cap), op.dim()}));
    }
}

// Forward declaration; definition follows the CG section below.
inline double smallest_nonzero_eigenvalue(const SparseOperator& op, const SolveOptions& base = {},
                                          int max_rounds = 40, double tol = 1e-7);

// Gap of a PSD operator whose null space is known to be nonempty — true for
// every circuit assembly here, where the ground space always contains at
// least one kept or parked branch.  Below the cutoff this defers to gap_of
// (which also resolves the ground multiplicity); above it the multiplicity
// scan is unaffordable and restarted Lanczos cannot reach the smallest
// nonzero eigenvalue either (it would need ~sqrt(|H|/gap) Krylov directions
// in one basis, far past any restart budget at deep amplification), so the
// gap comes from a null-annihilating Chebyshev filter instead and the
// reported multiplicity 1 is only a lower bound.
inline GapInfo circuit_gap(const SparseOperator& op, const SolveOptions& base = {},
                           std::uint64_t scan_cutoff = 50000) {
    if (op.dim() <= scan_cutoff) return gap_of(op, base);
    return {0.0, smallest_nonzero_eigenvalue(op, base), 1, true};
}

// ---- conjugate gradient and null-space projection ------------------------

struct PcgStats {
    int iterations = 0;
    double relres = 1.0;
    bool converged = false;
};

// Plain CG for H x = b with PSD H, from x = 0. With b in range(H) the whole
// Krylov space stays in range(H), which is exactly what the null-space
// projection below needs; do NOT precondition here, a preconditioner would
// push the iterates out of the range.
inline PcgStats cg(const SparseOperator& op, const std::vector<cplx>& b, std::vector<cplx>& x,
                   double tol = 1e-12, int max_iter = 200000) {
    const std::uint64_t n = op.dim();
    x.assign(n, cplx(0));
    std::vector<cplx> r = b, p = b, hp(n);
    const double bnorm = vecops::nrm2(b);
    PcgStats st;
    if (bnorm <= 1e-300) {
        st.converged = true;
        st.relres = 0;
        return st;
    }
    double rr = bnorm * bnorm;
    for (int it = 0; it < max_iter; ++it) {
        op.matvec(p, hp);
        const double php = vecops::dot(p, hp).real();
        if (php <= 1e-300 * rr) break;
        const double alpha = rr / php;
        vecops::axpy(cplx(alpha), p, x);
        vecops::axpy(cplx(-alpha), hp, r);
        st.iterations = it + 1;
        const double rr_new = vecops::nrm2(r);
        st.relres = rr_new / bnorm;
        if (st.relres <= tol) {
            st.converged = true;
            return st;
        }
        const double beta = (rr_new * rr_new) / rr;
        rr = rr_new * rr_new;
        for (std::uint64_t i = 0; i < n; ++i) p[i] = r[i] + beta * p[i];
    }
    return st;
}

struct NullProjectStats {
    int passes = 0;
    double residual_ratio = 1.0;  // |H p| / (scale |p|) at exit
    std::uint64_t cg_iterations = 0;
    bool converged = false;
};

// Orthogonal projection of v onto the null space of a PSD operator:
// repeatedly subtract the range component x solving H x = H p with CG from 0
// (which keeps x in the range, so orthogonality to the null space is exact up
// to roundoff). Iterative refinement with renormalization reaches ratios
// ~1e-11 even when the null component is tiny compared with v.
inline NullProjectStats project_onto_null(const SparseOperator& op, std::vector<cplx>& v,
                                          double target_ratio = 1e-11, int max_passes = 8,
                                          double cg_tol = 0, int cg_max_iter = 200000) {
    // A relaxed projection target allows a matching relaxation of the inner
    // solves; one refinement pass recovers roughly an order of magnitude.
    if (cg_tol <= 0) cg_tol = std::min(1e-12, 0.1 * target_ratio);
    const double scale = std::max(1.0, op.norm_inf());
    NullProjectStats st;
    std::vector<cplx> hp(op.dim()), x;
    for (int pass = 0; pass < max_passes; ++pass) {
        const double pn = vecops::nrm2(v);
        if (pn <= 1e-300) return st;  // no null component at all
        op.matvec(v, hp);
        st.residual_ratio = vecops::nrm2(hp) / (scale * pn);
        if (st.residual_ratio <= target_ratio) {
            st.converged = true;
            return st;
        }
        const PcgStats it = cg(op, hp, x, cg_tol, cg_max_iter);
        st.cg_iterations += std::uint64_t(it.iterations);
        if (!it.converged && it.relres > 1e-6)
            throw convergence_error(
                "null-space projection: inner CG stalled at relative residual " +
                std::to_string(it.relres));
        vecops::axpy(cplx(-1.0), x, v);
        vecops::scal(cplx(1.0 / std::max(vecops::nrm2(v), 1e-300)), v);
        st.passes = pass + 1;
    }
    op.matvec(v, hp);
    st.residual_ratio = vecops::nrm2(hp) / (scale * std::max(vecops::nrm2(v), 1e-300));
    st.converged = st.residual_ratio <= target_ratio;
    return st;
}

// ---- smallest nonzero eigenvalue via filtered subspace iteration -----------
// Chebyshev-filtered subspace iteration on H itself, using the filter
// q(x) = x * p_d(x) with p_d the degree-d Chebyshev low-pass on [a, |H|].
// The leading x annihilates the null space exactly (one operator
// application per pass), so the block only ever spends its directions on
// nonzero modes no matter how wide the null cluster is, while the low-pass
// amplifies everything below the cutoff a against everything above it by
// ~exp(2*d*sqrt(a/|H|)) per pass. The cutoff adapts to the Ritz values of
// the previous round, so deep spectra sharpen the filter automatically.
// Matvec-only: no linear solves, hence no null-space leakage to manage and
// no preconditioning questions — the approach earlier designs needed for
// pseudo-inverse applies (and the contamination bookkeeping they forced)
// disappears entirely.
inline double smallest_nonzero_eigenvalue(const SparseOperator& op, const SolveOptions& base,
                                          int max_rounds, double tol) {
    const std::uint64_t n = op.dim();
    const double bup = op.norm_inf();  // Gershgorin bound on the spectrum
    if (!(bup > 0))
        throw convergence_error("filtered gap solve: the operator bound is zero");
    const double null_thresh = 1e-10 * bup;

    const int block = 12;
    Rng rng(base.seed ^ 0x1f2e3d4c5b6a7988ULL);
    std::vector<std::vector<cplx>> y(block), img(block);
    for (auto& col : y) {
        col.resize(n);
        for (auto& z : col) z = cplx(rng.normal(), rng.normal());
    }

    std::vector<cplx> s0(n), s1(n), s2(n);
    double a = 0.1 * bup;
    double prev_theta = -1;
    int stagnant = 0;
    for (int round = 0; round < max_rounds; ++round) {
        const double c = 0.5 * (a + bup), e = 0.5 * (bup - a);
        const int d = std::min(3000, int(std::ceil(9.5 * std::sqrt(bup / a))) + 10);
        for (auto& col : y) {
            // s0 = H*col kills the null component exactly; then the
            // three-term recurrence applies the low-pass to what remains.
            op.matvec(col, s0);
            op.matvec(s0, s1);
            for (std::size_t i = 0; i < n; ++i) s1[i] = (s1[i] - c * s0[i]) / e;
            for (int k = 1; k < d; ++k) {
                op.matvec(s1, s2);
                for (std::size_t i = 0; i < n; ++i)
                    s2[i] = (2.0 / e) * (s2[i] - c * s1[i]) - s0[i];
                s0.swap(s1);
                s1.swap(s2);
            }
            col.swap(s1);
            const double nn = vecops::nrm2(col);
            if (nn > 1e-300)
                vecops::scal(cplx(1.0 / nn), col);
            else  // filtered to nothing; reseed the direction
                for (auto& z : col) z = cplx(rng.normal(), rng.normal());
        }
        // Orthonormalize the block (two modified Gram-Schmidt sweeps).
        for (int i = 0; i < block; ++i) {
            for (int sweep = 0; sweep < 2; ++sweep)
                for (int j = 0; j < i; ++j)
                    vecops::axpy(-vecops::dot(y[std::size_t(j)], y[std::size_t(i)]),
                                 y[std::size_t(j)], y[std::size_t(i)]);
            const double nn = vecops::nrm2(y[std::size_t(i)]);
            if (nn > 1e-10) {
                vecops::scal(cplx(1.0 / nn), y[std::size_t(i)]);
            } else {  // degenerate direction; replace with fresh noise
                for (auto& z : y[std::size_t(i)]) z = cplx(rng.normal(), rng.normal());
                vecops::scal(cplx(1.0 / vecops::nrm2(y[std::size_t(i)])), y[std::size_t(i)]);
                for (int j = 0; j < i; ++j)
                    vecops::axpy(-vecops::dot(y[std::size_t(j)], y[std::size_t(i)]),
                                 y[std::size_t(j)], y[std::size_t(i)]);
                vecops::scal(cplx(1.0 / std::max(vecops::nrm2(y[std::size_t(i)]), 1e-300)),
                             y[std::size_t(i)]);
            }
        }
        // Rayleigh-Ritz with plain applications of H.
        for (int i = 0; i < block; ++i) {
            img[std::size_t(i)].resize(n);
            op.matvec(y[std::size_t(i)], img[std::size_t(i)]);
        }
        Eigen::MatrixXcd m(block, block);
        for (int i = 0; i < block; ++i)
            for (int j = 0; j < block; ++j)
                m(i, j) = vecops::dot(y[std::size_t(i)], img[std::size_t(j)]);
        const Eigen::MatrixXcd herm = 0.5 * (m + m.adjoint());
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(herm);
        const auto& theta = es.eigenvalues();
        const Eigen::MatrixXcd& s = es.eigenvectors();

        // Rotate the block onto the Ritz directions (images alongside).
        std::vector<std::vector<cplx>> ry(block), rimg(block);
        for (int i = 0; i < block; ++i) {
            ry[std::size_t(i)].assign(n, cplx(0));
            rimg[std::size_t(i)].assign(n, cplx(0));
            for (int j = 0; j < block; ++j) {
                vecops::axpy(s(j, i), y[std::size_t(j)], ry[std::size_t(i)]);
                vecops::axpy(s(j, i), img[std::size_t(j)], rimg[std::size_t(i)]);
            }
        }
        y.swap(ry);
        img.swap(rimg);

        int want = 0;
        while (want < block && theta(want) <= null_thresh) ++want;
        if (want == block)
            throw convergence_error("filtered gap solve: no nonzero mode in the block");
        const double tw = theta(want);
        std::vector<cplx> rv = img[std::size_t(want)];
        vecops::axpy(cplx(-tw), y[std::size_t(want)], rv);
        const double resid = vecops::nrm2(rv);
        if (resid <= tol * bup) return tw;
        // Backstop for clusters wider than the block, whose Ritz residual
        // floors at the cluster spread: a long-stagnant value with a
        // moderate residual is still correct to far better than we need.
        if (prev_theta > 0 && std::abs(tw - prev_theta) <= 1e-9 * prev_theta) {
            if (++stagnant >= 3 && resid <= 1e-3 * bup) return tw;
        } else {
            stagnant = 0;
        }
        prev_theta = tw;
        // Sharpen the cutoff: keep every captured mode amplified, suppress
        // past the top of the block.
        a = std::min(0.4 * bup, std::max(2.0 * tw, 0.5 * theta(block - 1)));
        a = std::max(a, 1e-12 * bup);
    }
    throw convergence_error("filtered gap solve: no convergence in " +
                            std::to_string(max_rounds) + " rounds");
}

// ---- binary eigenvector dump ----------------------------------------------
// Layout: 8-byte magic "GSQCVEC1", u64 dim, u64 count, then count*dim complex
// values as little-endian doubles (re, im interleaved).

inline void save_vectors(const std::string& path, std::uint64_t dim,
                         const std::vector<std::vector<cplx>>& vecs) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open '" + path + "' for writing");
    const char magic[8] = {'G', 'S', 'Q', 'C', 'V', 'E', 'C', '1'};
    f.write(magic, 8);
    const std::uint64_t count = vecs.size();
    f.write(reinterpret_cast<const char*>(&dim), 8);
    f.write(reinterpret_cast<const char*>(&count), 8);
    for (const auto& v : vecs) {
        if (v.size() != dim) throw validation_error("vector length mismatch in dump");
        f.write(reinterpret_cast<const char*>(v.data()), std::streamsize(dim * sizeof(cplx)));
    }
    if (!f) throw validation_error("short write to '" + path + "'");
}

inline std::pair<std::uint64_t, std::vector<std::vector<cplx>>> load_vectors(
    const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw validation_error("cannot open '" + path + "'");
    char magic[8];
    f.read(magic, 8);
    if (!f || std::memcmp(magic, "GSQCVEC1", 8) != 0)
        throw validation_error("'" + path + "' is not an eigenvector dump");
    std::uint64_t dim = 0, count = 0;
    f.read(reinterpret_cast<char*>(&dim), 8);
    f.read(reinterpret_cast<char*>(&count), 8);
    std::vector<std::vector<cplx>> vecs(count, std::vector<cplx>(dim));
    for (auto& v : vecs)
        f.read(reinterpret_cast<char*>(v.data()), std::streamsize(dim * sizeof(cplx)));
    if (!f) throw validation_error("truncated eigenvector dump '" + path + "'");
    return {dim, std::move(vecs)};
}

}  // namespace gsqc
