#pragma once
// Positive-semidefinite clock-register terms. Every term is eps * A^dagger A
// for some annihilating combination A, so the target history state sits at
// exactly zero energy and everything else is pushed up.
//
//   gate      h(U)  = eps [n_{j-1} + n_j - (C_j^+ U C_{j-1} + h.c.)]
//   boost     h(l)  = eps [n_{j-1} + n_j/l^2 - (C_j^+ C_{j-1} + h.c.)/l]
//   project   like boost but restricted to one bit component gamma; the
//             orthogonal component is left stranded on row j-1
//   cnot      four cross terms gating the target's step on the control bit
//   boundary  E (I + a.sigma) on row 0 picks the input state
//   prep      eps [s^2 n_0 + n_1 - s (C_1^+ C_0 + h.c.)], s in [0,1];
//             s=1 is an identity gate, s->0 pins the electron to row 0

#include <optional>
#include <string>
#include <vector>

#include "gsqc/common.hpp"
#include "gsqc/hilbert.hpp"

namespace gsqc {

enum class TermKind { SingleQubit, Boost, Project, Cnot, Boundary, PrepBoost };

inline const char* term_kind_name(TermKind k) {
    switch (k) {
        case TermKind::SingleQubit: return "gate";
        case TermKind::Boost: return "boost";
        case TermKind::Project: return "project";
        case TermKind::Cnot: return "cnot";
        case TermKind::Boundary: return "boundary";
        case TermKind::PrepBoost: return "prep";
    }
    return "?";
}

struct HamiltonianTerm {
    TermKind kind = TermKind::SingleQubit;
    std::size_t q = 0;   // primary column
    std::size_t q2 = 0;  // target column (cnot only)
    int j = 1;           // interval top row on q (gate/boost/project), control row (cnot)
    int j2 = 1;          // target row (cnot only)
    double eps = 1.0;
    Mat2 u = Mat2::identity();         // gate unitary
    double lambda = 1.0;               // boost / project weight
    Vec2 gamma = Vec2::basis(0);       // projected bit component
    std::array<double, 3> a{0, 0, 0};  // boundary Bloch vector
    double energy = 0.0;               // boundary scale E

    std::vector<ProductTerm> expand(const BasisSpace& space) const;
};

inline HamiltonianTerm make_gate(std::size_t q, int j, const Mat2& u, double eps = 1.0) {
    if (!u.is_unitary(1e-10)) throw validation_error("gate matrix is not unitary");
    if (j < 1) throw validation_error("gate interval needs row j >= 1");
    if (eps <= 0) throw validation_error("eps must be positive");
    HamiltonianTerm t;
    t.kind = TermKind::SingleQubit;
    t.q = q;
    t.j = j;
    t.u = u;
    t.eps = eps;
    return t;
}

inline HamiltonianTerm make_boost(std::size_t q, int j, double lambda, double eps = 1.0) {
    if (lambda < 1.0) throw validation_error("boost weight must satisfy lambda >= 1");
    if (j < 1) throw validation_error("boost interval needs row j >= 1");
    if (eps <= 0) throw validation_error("eps must be positive");
    HamiltonianTerm t;
    t.kind = TermKind::Boost;
    t.q = q;
    t.j = j;
    t.lambda = lambda;
    t.eps = eps;
    return t;
}

inline HamiltonianTerm make_project(std::size_t q, int j, const Vec2& gamma, double lambda,
                                    double eps = 1.0) {
    if (std::abs(gamma.norm() - 1.0) > 1e-12)
        throw validation_error("projection component must be a unit vector");
    if (lambda < 1.0) throw validation_error("projection weight must satisfy lambda >= 1");
    if (j < 1) throw validation_error("projection interval needs row j >= 1");
    if (eps <= 0) throw validation_error("eps must be positive");
    HamiltonianTerm t;
    t.kind = TermKind::Project;
    t.q = q;
    t.j = j;
    t.gamma = gamma;
    t.lambda = lambda;
    t.eps = eps;
    return t;
}

inline HamiltonianTerm make_cnot(std::size_t control, int j_control, std::size_t target,
                                 int j_target, double eps = 1.0) {
    if (control == target) throw validation_error("cnot needs two distinct columns");
    if (j_control < 1 || j_target < 1) throw validation_error("cnot intervals need rows >= 1");
    if (eps <= 0) throw validation_error("eps must be positive");
    HamiltonianTerm t;
    t.kind = TermKind::Cnot;
    t.q = control;
    t.q2 = target;
    t.j = j_control;
    t.j2 = j_target;
    t.eps = eps;
    return t;
}

inline HamiltonianTerm make_boundary(std::size_t q, const std::array<double, 3>& a, double energy,
                                     double eps = 1.0) {
    const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
    if (std::abs(n - 1.0) > 1e-12) throw validation_error("boundary Bloch vector must be unit");
    if (energy < 10.0 * eps)
        throw validation_error("boundary scale must dominate the gate scale (E >= 10 eps)");
    HamiltonianTerm t;
    t.kind = TermKind::Boundary;
    t.q = q;
    t.a = a;
    t.energy = energy;
    t.eps = eps;
    return t;
}

inline HamiltonianTerm make_prep_boost(std::size_t q, double s, double eps = 1.0) {
    if (s < 0.0 || s > 1.0) throw validation_error("prep weight must satisfy 0 <= s <= 1");
    if (eps <= 0) throw validation_error("eps must be positive");
    HamiltonianTerm t;
    t.kind = TermKind::PrepBoost;
    t.q = q;
    t.j = 1;
    t.lambda = s;  // stored in lambda; interpreted as s
    t.eps = eps;
    return t;
}

namespace detail {

// Local interval matrix on rows (j-1, j): diagonal weights (w0, w1) on the g
// component, hop -wx * g between them, where g is a 2x2 bit-space block.
inline void add_interval_block(LocalMatrix& m, int j, double w0, double w1, double wx,
                               const Mat2& g) {
    auto l = [](int row, int bit) { return 2 * row + bit; };
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            m.at(l(j - 1, x), l(j - 1, y)) += w0 * g(x, y);
            m.at(l(j, x), l(j, y)) += w1 * g(x, y);
            m.at(l(j, x), l(j - 1, y)) -= wx * g(x, y);
            m.at(l(j - 1, x), l(j, y)) -= wx * std::conj(g(y, x));
        }
}

// Gate propagation block: diag occupation, off-diagonal -u.
inline LocalMatrix gate_local(const QubitColumn& col, int j, const Mat2& u, double eps) {
    LocalMatrix m(2 * col.rows);
    auto l = [](int row, int bit) { return 2 * row + bit; };
    for (int b = 0; b < 2; ++b) {
        m.at(l(j - 1, b), l(j - 1, b)) += eps;
        m.at(l(j, b), l(j, b)) += eps;
    }
    for (int x = 0; x < 2; ++x)
        for (int y = 0; y < 2; ++y) {
            m.at(l(j, x), l(j - 1, y)) -= eps * u(x, y);
            m.at(l(j - 1, y), l(j, x)) -= eps * std::conj(u(x, y));
        }
    return m;
}

inline LocalMatrix number_local(const QubitColumn& col, int row, std::optional<int> bit,
                                double scale) {
    LocalMatrix m(2 * col.rows);
    for (int b = 0; b < 2; ++b)
        if (!bit || *bit == b) m.at(2 * row + b, 2 * row + b) = scale;
    return m;
}

inline void check_interval(const QubitColumn& col, int j) {
    if (j < 1 || j >= col.rows)
        throw validation_error("interval row " + std::to_string(j) + " out of range for column '" +
                               col.label + "' with " + std::to_string(col.rows) + " rows");
}

inline ProductTerm one_factor(const BasisSpace& space, std::size_t q, const LocalMatrix& full) {
    ProductTerm t;
    t.factors.emplace_back(q, restrict_local(space.column(q), full));
    return t;
}

inline ProductTerm two_factor(const BasisSpace& space, std::size_t qa, const LocalMatrix& fa,
                              std::size_t qb, const LocalMatrix& fb) {
    ProductTerm t;
    if (qa < qb) {
        t.factors.emplace_back(qa, restrict_local(space.column(qa), fa));
        t.factors.emplace_back(qb, restrict_local(space.column(qb), fb));
    } else {
        t.factors.emplace_back(qb, restrict_local(space.column(qb), fb));
        t.factors.emplace_back(qa, restrict_local(space.column(qa), fa));
    }
    return t;
}

}  // namespace detail

inline std::vector<ProductTerm> HamiltonianTerm::expand(const BasisSpace& space) const {
    detail::check_column(space, q);
    const QubitColumn& col = space.column(q);
    switch (kind) {
        case TermKind::SingleQubit: {
            detail::check_interval(col, j);
            return {detail::one_factor(space, q, detail::gate_local(col, j, u, eps))};
        }
        case TermKind::Boost: {
            detail::check_interval(col, j);
            LocalMatrix m(2 * col.rows);
            detail::add_interval_block(m, j, eps, eps / (lambda * lambda), eps / lambda,
                                       Mat2::identity());
            return {detail::one_factor(space, q, m)};
        }
        case TermKind::Project: {
            detail::check_interval(col, j);
            Mat2 g = Mat2::zero();
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) g(x, y) = gamma[x] * std::conj(gamma[y]);
            LocalMatrix m(2 * col.rows);
            detail::add_interval_block(m, j, eps, eps / (lambda * lambda), eps / lambda, g);
            return {detail::one_factor(space, q, m)};
        }
        case TermKind::Cnot: {
            detail::check_column(space, q2);
            const QubitColumn& tgt = space.column(q2);
            detail::check_interval(col, j);
            detail::check_interval(tgt, j2);
            std::vector<ProductTerm> out;
            // Control has moved on while the target lags: pure penalty.
            out.push_back(detail::two_factor(
                space, q, detail::number_local(col, j - 1, std::nullopt, eps), q2,
                detail::number_local(tgt, j2, std::nullopt, 1.0)));
            // Target lags: control may step with the identity.
            out.push_back(detail::two_factor(space, q, detail::gate_local(col, j, Mat2::identity(), eps),
                                             q2, detail::number_local(tgt, j2 - 1, std::nullopt, 1.0)));
            // Control arrived as 0 / 1: target steps with I / X.
            out.push_back(detail::two_factor(space, q, detail::number_local(col, j, 0, eps), q2,
                                             detail::gate_local(tgt, j2, Mat2::identity(), 1.0)));
            out.push_back(detail::two_factor(space, q, detail::number_local(col, j, 1, eps), q2,
                                             detail::gate_local(tgt, j2, Mat2::sigma_x(), 1.0)));
            return out;
        }
        case TermKind::Boundary: {
            const Mat2 b = pauli_affine(a);
            LocalMatrix m(2 * col.rows);
            for (int x = 0; x < 2; ++x)
                for (int y = 0; y < 2; ++y) m.at(x, y) = energy * b(x, y);
            return {detail::one_factor(space, q, m)};
        }
        case TermKind::PrepBoost: {
            detail::check_interval(col, 1);
            const double s = lambda;
            LocalMatrix m(2 * col.rows);
            detail::add_interval_block(m, 1, eps * s * s, eps, eps * s, Mat2::identity());
            return {detail::one_factor(space, q, m)};
        }
    }
    throw validation_error("unknown term kind");
}

// Sum of terms as one CSR operator, assembled row by row.
inline SparseOperator assemble(const BasisSpace& space,
                               const std::vector<HamiltonianTerm>& terms) {
    std::vector<ProductTerm> products;
    for (const auto& t : terms)
        for (auto& p : t.expand(space)) products.push_back(std::move(p));
    return SparseOperator::assemble_products(space, products);
}

}  // namespace gsqc
