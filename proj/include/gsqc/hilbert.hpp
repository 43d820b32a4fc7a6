#pragma once
// Product Hilbert space of qubit columns. One electron per column; local basis
// (row, bit) in lexicographic order. Mixed-radix codec with qubit 0 as the most
// significant digit. Sparse operators are CSR with row-wise deterministic
// assembly from products of per-column local matrices.

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <utility>

#include "gsqc/common.hpp"

namespace gsqc {

struct QubitColumn {
    std::string label;
    int rows = 1;
    // Hard-boundary columns drop the penalized row-0 state; the kept row-0
    // basis vector is row0_state and the local dimension shrinks by one.
    bool hard = false;
    Vec2 row0_state = Vec2::basis(0);

    int local_dim() const { return hard ? 2 * rows - 1 : 2 * rows; }

    // Local index of (row, bit). For hard columns row 0 has a single state.
    int local_of(int row, int bit) const {
        if (!hard) return 2 * row + bit;
        if (row == 0) return 0;
        return 2 * row - 1 + bit;
    }
    int row_of(int local) const { return hard ? (local + 1) / 2 : local / 2; }
    // Bit of a local index; -1 for the composite hard row-0 state.
    int bit_of(int local) const {
        if (!hard) return local % 2;
        return local == 0 ? -1 : (local + 1) % 2;
    }
};

class BasisSpace {
  public:
    BasisSpace() { dim_ = 1; }

    explicit BasisSpace(std::vector<QubitColumn> cols) : columns_(std::move(cols)) {
        for (std::size_t i = 0; i < columns_.size(); ++i) {
            if (columns_[i].rows < 1)
                throw validation_error("column '" + columns_[i].label + "' needs at least one row");
            for (std::size_t j = i + 1; j < columns_.size(); ++j)
                if (!columns_[i].label.empty() && columns_[i].label == columns_[j].label)
                    throw validation_error("duplicate column label '" + columns_[i].label + "'");
        }
        strides_.assign(columns_.size(), 1);
        std::uint64_t d = 1;
        for (std::size_t q = columns_.size(); q-- > 0;) {
            strides_[q] = d;
            const std::uint64_t ld = columns_[q].local_dim();
            if (d > std::numeric_limits<std::uint64_t>::max() / ld)
                throw capacity_error("basis dimension overflows 64-bit index");
            d *= ld;
        }
        if (d > (std::uint64_t(1) << 32))
            throw capacity_error("basis dimension " + std::to_string(d) +
                                 " exceeds the 2^32 index width");
        dim_ = d;
    }

    std::size_t num_columns() const { return columns_.size(); }
    const QubitColumn& column(std::size_t q) const { return columns_.at(q); }
    const std::vector<QubitColumn>& columns() const { return columns_; }
    std::uint64_t dim() const { return dim_; }
    std::uint64_t stride(std::size_t q) const { return strides_[q]; }

    std::uint64_t encode(std::span<const int> locals) const {
        if (locals.size() != columns_.size()) throw validation_error("encode: arity mismatch");
        std::uint64_t idx = 0;
        for (std::size_t q = 0; q < columns_.size(); ++q) {
            if (locals[q] < 0 || locals[q] >= columns_[q].local_dim())
                throw validation_error("encode: local index out of range");
            idx += std::uint64_t(locals[q]) * strides_[q];
        }
        return idx;
    }

    void decode(std::uint64_t idx, std::span<int> locals) const {
        for (std::size_t q = 0; q < columns_.size(); ++q) {
            locals[q] = static_cast<int>(idx / strides_[q]);
            idx %= strides_[q];
        }
    }

    int local_at(std::uint64_t idx, std::size_t q) const {
        return static_cast<int>((idx / strides_[q]) % columns_[q].local_dim());
    }

  private:
    std::vector<QubitColumn> columns_;
    std::vector<std::uint64_t> strides_;
    std::uint64_t dim_ = 1;
};

// Dense d x d matrix over one column's local space, with per-row nonzero lists
// precomputed for the assembly sweep.
struct LocalMatrix {
    int d = 0;
    std::vector<cplx> a;  // row major
    std::vector<std::vector<std::pair<int, cplx>>> rows_nz;

    explicit LocalMatrix(int dd = 0) : d(dd), a(std::size_t(dd) * dd, cplx(0)) {}

    cplx& at(int r, int c) { return a[std::size_t(r) * d + c]; }
    const cplx& at(int r, int c) const { return a[std::size_t(r) * d + c]; }

    void finalize() {
        rows_nz.assign(d, {});
        for (int r = 0; r < d; ++r)
            for (int c = 0; c < d; ++c)
                if (at(r, c) != cplx(0)) rows_nz[r].emplace_back(c, at(r, c));
    }
};

// Restrict a full (2L)^2 local matrix to a hard column's basis: identity on
// rows >= 1, the kept row-0 state on the single row-0 slot.
inline LocalMatrix restrict_local(const QubitColumn& col, const LocalMatrix& full) {
    if (!col.hard) {
        LocalMatrix m = full;
        m.finalize();
        return m;
    }
    const int dh = col.local_dim();
    const Vec2& g = col.row0_state;
    auto lift = [&](int hard_local, int which) -> std::pair<int, cplx> {
        // Component 'which' (0 or 1) of the lifted full-space vector.
        if (hard_local == 0) return {which, g[which]};
        return which == 0 ? std::pair<int, cplx>{hard_local + 1, cplx(1)}
                          : std::pair<int, cplx>{-1, cplx(0)};
    };
    LocalMatrix m(dh);
    for (int r = 0; r < dh; ++r)
        for (int c = 0; c < dh; ++c) {
            cplx v = 0;
            for (int i = 0; i < 2; ++i) {
                auto [fr, wr] = lift(r, i);
                if (fr < 0) continue;
                for (int j = 0; j < 2; ++j) {
                    auto [fc, wc] = lift(c, j);
                    if (fc < 0) continue;
                    v += std::conj(wr) * full.at(fr, fc) * wc;
                }
            }
            if (std::abs(v) > 1e-300) m.at(r, c) = v;
        }
    m.finalize();
    return m;
}

// One additive term: a product of local matrices on distinct columns
// (identity elsewhere). Factors stay sorted by column id.
struct ProductTerm {
    std::vector<std::pair<std::size_t, LocalMatrix>> factors;
};

namespace detail {
inline void check_column(const BasisSpace& space, std::size_t q) {
    if (q >= space.num_columns())
        throw validation_error("unknown column id " + std::to_string(q));
}
inline void check_row(const QubitColumn& col, int row) {
    if (row < 0 || row >= col.rows)
        throw validation_error("row " + std::to_string(row) + " out of range for column '" +
                               col.label + "'");
}
}  // namespace detail

class SparseOperator {
  public:
    SparseOperator() = default;

    std::uint64_t dim() const { return dim_; }
    std::uint64_t nnz() const { return cols_.size(); }

    void matvec(const cplx* x, cplx* y) const {
        for (std::uint64_t i = 0; i < dim_; ++i) {
            cplx acc = 0;
            for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                acc += vals_[k] * x[cols_[k]];
            y[i] = acc;
        }
    }
    void matvec(const std::vector<cplx>& x, std::vector<cplx>& y) const {
        y.resize(dim_);
        matvec(x.data(), y.data());
    }

    cplx coeff(std::uint64_t i, std::uint64_t j) const {
        const auto b = cols_.begin() + std::ptrdiff_t(row_ptr_[i]);
        const auto e = cols_.begin() + std::ptrdiff_t(row_ptr_[i + 1]);
        const auto it = std::lower_bound(b, e, std::uint32_t(j));
        if (it == e || *it != j) return 0;
        return vals_[std::size_t(it - cols_.begin())];
    }

    double max_asymmetry() const {
        double m = 0;
        for (std::uint64_t i = 0; i < dim_; ++i)
            for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                m = std::max(m, std::abs(vals_[k] - std::conj(coeff(cols_[k], i))));
        return m;
    }
    bool is_hermitian(double tol = 1e-12) const { return max_asymmetry() <= tol; }

    double norm_inf() const {
        double m = 0;
        for (std::uint64_t i = 0; i < dim_; ++i) {
            double s = 0;
            for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) s += std::abs(vals_[k]);
            m = std::max(m, s);
        }
        return m;
    }

    std::vector<cplx> to_dense() const {
        if (dim_ > 4096) throw capacity_error("to_dense limited to dim <= 4096");
        std::vector<cplx> d(dim_ * dim_, cplx(0));
        for (std::uint64_t i = 0; i < dim_; ++i)
            for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                d[i * dim_ + cols_[k]] += vals_[k];
        return d;
    }

    template <typename F>
    void for_each(F&& f) const {
        for (std::uint64_t i = 0; i < dim_; ++i)
            for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
                f(i, std::uint64_t(cols_[k]), vals_[k]);
    }

    template <typename F>
    void for_each_in_row(std::uint64_t i, F&& f) const {
        for (std::uint64_t k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k)
            f(std::uint64_t(cols_[k]), vals_[k]);
    }

    struct Triplet {
        std::uint64_t row, col;
        cplx value;
    };

    static SparseOperator from_triplets(std::uint64_t dim, std::vector<Triplet> entries) {
        if (dim > (std::uint64_t(1) << 32))
            throw capacity_error("dimension exceeds the 2^32 index width");
        for (const auto& t : entries)
            if (t.row >= dim || t.col >= dim)
                throw validation_error("triplet index out of range");
        std::stable_sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
            return a.row != b.row ? a.row < b.row : a.col < b.col;
        });
        SparseOperator op;
        op.dim_ = dim;
        op.row_ptr_.assign(dim + 1, 0);
        std::size_t k = 0;
        for (std::uint64_t i = 0; i < dim; ++i) {
            while (k < entries.size() && entries[k].row == i) {
                cplx v = entries[k].value;
                const std::uint64_t c = entries[k].col;
                ++k;
                while (k < entries.size() && entries[k].row == i && entries[k].col == c)
                    v += entries[k++].value;
                if (std::abs(v) > 1e-300) {
                    op.cols_.push_back(std::uint32_t(c));
                    op.vals_.push_back(v);
                }
            }
            op.row_ptr_[i + 1] = op.cols_.size();
        }
        return op;
    }

    // Row-wise assembly of sum_t (x) product of local matrices. Deterministic:
    // rows in order, scratch stably sorted by column, duplicates merged in
    // encounter order.
    static SparseOperator assemble_products(const BasisSpace& space,
                                            const std::vector<ProductTerm>& terms) {
        SparseOperator op;
        op.dim_ = space.dim();
        op.row_ptr_.assign(op.dim_ + 1, 0);
        std::vector<int> locals(space.num_columns());
        std::vector<std::pair<std::uint64_t, cplx>> scratch;
        for (const auto& t : terms) {
            if (t.factors.size() > 4)
                throw validation_error("product terms support at most four factors");
            for (std::size_t f = 0; f < t.factors.size(); ++f) {
                const auto& [q, m] = t.factors[f];
                detail::check_column(space, q);
                if (f > 0 && q <= t.factors[f - 1].first)
                    throw validation_error("product factors must be on distinct ascending columns");
                if (m.d != space.column(q).local_dim())
                    throw validation_error("local matrix dimension mismatch on column " +
                                           std::to_string(q));
            }
        }

        for (std::uint64_t i = 0; i < op.dim_; ++i) {
            space.decode(i, locals);
            scratch.clear();
            for (const auto& t : terms) {
                // Cartesian product over factors' nonzero entries in this row.
                struct Cursor {
                    const std::vector<std::pair<int, cplx>>* nz;
                    std::uint64_t stride;
                    int local_row;
                };
                std::array<Cursor, 4> cur;
                const std::size_t nf = t.factors.size();
                bool dead = false;
                for (std::size_t f = 0; f < nf; ++f) {
                    const auto& [q, m] = t.factors[f];
                    const int lr = locals[q];
                    if (m.rows_nz[lr].empty()) {
                        dead = true;
                        break;
                    }
                    cur[f] = {&m.rows_nz[lr], space.stride(q), lr};
                }
                if (dead || nf == 0) continue;
                std::array<std::size_t, 4> pos{};
                for (;;) {
                    cplx v = 1;
                    std::uint64_t col = i;
                    for (std::size_t f = 0; f < nf; ++f) {
                        const auto& [lc, lv] = (*cur[f].nz)[pos[f]];
                        v *= lv;
                        col += (std::uint64_t(lc) - std::uint64_t(cur[f].local_row)) *
                               cur[f].stride;
                    }
                    scratch.emplace_back(col, v);
                    std::size_t f = 0;
                    while (f < nf && ++pos[f] == cur[f].nz->size()) {
                        pos[f] = 0;
                        ++f;
                    }
                    if (f == nf) break;
                }
            }
            std::stable_sort(scratch.begin(), scratch.end(),
                             [](const auto& a, const auto& b) { return a.first < b.first; });
            for (std::size_t k = 0; k < scratch.size();) {
                cplx v = scratch[k].second;
                std::size_t k2 = k + 1;
                while (k2 < scratch.size() && scratch[k2].first == scratch[k].first)
                    v += scratch[k2++].second;
                if (std::abs(v) > 1e-300) {
                    op.cols_.push_back(std::uint32_t(scratch[k].first));
                    op.vals_.push_back(v);
                }
                k = k2;
            }
            op.row_ptr_[i + 1] = op.cols_.size();
        }
        return op;
    }

  private:
    std::uint64_t dim_ = 0;
    std::vector<std::uint64_t> row_ptr_;
    std::vector<std::uint32_t> cols_;
    std::vector<cplx> vals_;
};

// sum_{a,b} u_{a,b} c†_{row_to, a} c_{row_from, b} on one column.
inline SparseOperator embed_transfer(const BasisSpace& space, std::size_t q, int row_from,
                                     int row_to, const Mat2& u) {
    detail::check_column(space, q);
    const auto& col = space.column(q);
    detail::check_row(col, row_from);
    detail::check_row(col, row_to);
    LocalMatrix full(2 * col.rows);
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) full.at(2 * row_to + a, 2 * row_from + b) = u(a, b);
    ProductTerm t;
    t.factors.emplace_back(q, restrict_local(col, full));
    return SparseOperator::assemble_products(space, {t});
}

// Occupation projector for (row) or (row, bit) on one column.
inline SparseOperator embed_number(const BasisSpace& space, std::size_t q, int row,
                                   std::optional<int> bit = std::nullopt) {
    detail::check_column(space, q);
    const auto& col = space.column(q);
    detail::check_row(col, row);
    LocalMatrix full(2 * col.rows);
    for (int b = 0; b < 2; ++b)
        if (!bit || *bit == b) full.at(2 * row + b, 2 * row + b) = 1.0;
    ProductTerm t;
    t.factors.emplace_back(q, restrict_local(col, full));
    return SparseOperator::assemble_products(space, {t});
}

}  // namespace gsqc
