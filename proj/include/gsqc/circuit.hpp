#pragma once
// Circuit graphs for ground-state computation: per-qubit columns of time rows
// wired by gate, amplification, projection, and CNOT couplings, plus builders
// for the clause filter box, the teleportation box, and full exact-cover
// circuits.
//
// Layout policy (deterministic): a fresh column has one row (the boundary
// row); every appended operation adds exactly one row below the column and
// one coupling on the new interval.  When two columns meet at a CNOT, the
// shorter one is first padded with identity gates so the interaction joins
// equal row indices.  Amplifications and projections close a column: nothing
// may be appended below them.

#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsqc/common.hpp"
#include "gsqc/hamiltonians.hpp"
#include "gsqc/hilbert.hpp"
#include "gsqc/instances.hpp"

namespace gsqc {

inline constexpr const char* kMargolusOrderId = "margolus-v1";

struct BuildOptions {
    double lambda = 8.0;
    bool teleport = false;
    bool hard_boundary = false;
    double boundary_energy = 100.0;
    // Compilation id of the relative-phase Toffoli inside the clause box;
    // recorded in artifacts so layouts are reproducible.
    std::string margolus_order = kMargolusOrderId;

    void validate() const {
        if (!(lambda >= 1.0))
            throw validation_error("lambda must be >= 1, got " + std::to_string(lambda));
        if (!(boundary_energy >= 10.0))
            throw validation_error("boundary energy must be >= 10*eps, got " +
                                   std::to_string(boundary_energy));
        if (margolus_order != kMargolusOrderId)
            throw configuration_error("unsupported Toffoli compilation id '" + margolus_order +
                                      "' (supported: " + std::string(kMargolusOrderId) + ")");
    }
};

struct ColumnInfo {
    std::string label;
    int rows = 1;
    std::array<double, 3> boundary_a{0, 0, -1};
    Vec2 row0_state = Vec2::basis(0);  // state kept by the boundary term
    bool hard = false;
    bool closed = false;  // an amplification/projection sits at the bottom
    int cnot_count = 0;   // circuit-level CNOTs that touched this column
};

struct CircuitGraph {
    BuildOptions options;
    std::vector<ColumnInfo> columns;
    std::vector<HamiltonianTerm> terms;
    // problem bit -> chain of column ids (teleportation successors in order)
    std::map<int, std::vector<std::size_t>> data_map;
    // teleported column -> column that carries its state afterwards
    std::map<std::size_t, std::size_t> teleport_successor;
    std::size_t teleport_boxes = 0;

    explicit CircuitGraph(BuildOptions opts = {}) : options(std::move(opts)) {
        options.validate();
    }

    std::size_t n_columns() const { return columns.size(); }
    int final_row(std::size_t q) const { return columns.at(q).rows - 1; }

    std::map<std::string, int> final_rows() const {
        std::map<std::string, int> out;
        for (const auto& c : columns) out[c.label] = c.rows - 1;
        return out;
    }

    long double dimension() const {
        long double d = 1;
        for (const auto& c : columns) d *= (c.hard ? 2 * c.rows - 1 : 2 * c.rows);
        return d;
    }

    void require_column(std::size_t q) const {
        if (q >= columns.size())
            throw validation_error("column id " + std::to_string(q) + " does not exist");
    }

    void require_open(std::size_t q) const {
        require_column(q);
        if (columns[q].closed)
            throw configuration_error("column '" + columns[q].label +
                                      "' is closed by an amplification/projection and cannot "
                                      "take further operations");
    }

    std::size_t add_boundary_column(const std::string& label, const std::array<double, 3>& a) {
        ColumnInfo c;
        c.label = label;
        c.boundary_a = a;
        c.row0_state = pauli_null_vector(a);
        c.hard = options.hard_boundary;
        columns.push_back(c);
        const std::size_t q = columns.size() - 1;
        terms.push_back(make_boundary(q, a, options.boundary_energy));
        return q;
    }

    void append_gate(std::size_t q, const Mat2& u) {
        require_open(q);
        const int j = columns[q].rows;  // index of the new bottom row
        terms.push_back(make_gate(q, j, u));
        columns[q].rows = j + 1;
    }

    void pad_to(std::size_t q, int rows) {
        require_open(q);
        while (columns[q].rows < rows) append_gate(q, Mat2::identity());
    }

    // Aligns both columns with identity padding and couples their new bottom
    // rows.  box_level marks circuit-level control interactions (the ones
    // teleport insertion counts); the wiring inside a teleport box is not.
    void append_cnot(std::size_t control, std::size_t target, bool box_level = true) {
        require_open(control);
        require_open(target);
        if (control == target) throw validation_error("cnot needs two distinct columns");
        const int top = std::max(columns[control].rows, columns[target].rows);
        pad_to(control, top);
        pad_to(target, top);
        terms.push_back(make_cnot(control, top, target, top));
        columns[control].rows = top + 1;
        columns[target].rows = top + 1;
        if (box_level) {
            ++columns[control].cnot_count;
            ++columns[target].cnot_count;
        }
    }

    void append_boost(std::size_t q, double lambda) {
        require_open(q);
        const int j = columns[q].rows;
        terms.push_back(make_boost(q, j, lambda));
        columns[q].rows = j + 1;
        columns[q].closed = true;
    }

    void append_project(std::size_t q, const Vec2& gamma, double lambda) {
        require_open(q);
        const int j = columns[q].rows;
        terms.push_back(make_project(q, j, gamma, lambda));
        columns[q].rows = j + 1;
        columns[q].closed = true;
    }

    // Moves the logical state of `source` onto a fresh output column through a
    // Bell pair: H on the pair ancilla, CNOT(ancilla -> output), CNOT(source
    // -> ancilla), H on source, then |0> projections close source and
    // ancilla.  Conditioned on both projections the output carries the input
    // state with no correction.
    std::size_t add_teleport_box(std::size_t source) {
        require_open(source);
        ++teleport_boxes;
        const std::size_t bell =
            add_boundary_column("bell." + std::to_string(teleport_boxes), {0, 0, -1});
        const std::size_t out =
            add_boundary_column(columns[source].label + "'", {0, 0, -1});
        append_gate(bell, Mat2::hadamard());
        append_cnot(bell, out, /*box_level=*/false);
        append_cnot(source, bell, /*box_level=*/false);
        append_gate(source, Mat2::hadamard());
        append_project(source, Vec2::basis(0), options.lambda);
        append_project(bell, Vec2::basis(0), options.lambda);
        teleport_successor[source] = out;
        return out;
    }

    // Columns that carry a column's state after it (chain of teleport outputs).
    std::vector<std::size_t> successors_of(std::size_t q) const {
        std::vector<std::size_t> chain;
        auto it = teleport_successor.find(q);
        while (it != teleport_successor.end()) {
            chain.push_back(it->second);
            it = teleport_successor.find(it->second);
        }
        return chain;
    }
};

inline BasisSpace make_space(const CircuitGraph& g) {
    std::vector<QubitColumn> cols;
    cols.reserve(g.columns.size());
    for (const auto& c : g.columns) cols.push_back(QubitColumn{c.label, c.rows, c.hard, c.row0_state});
    return BasisSpace(std::move(cols));
}

inline SparseOperator assemble_circuit(const CircuitGraph& g, const BasisSpace& space) {
    return assemble(space, g.terms);
}

// ---------------------------------------------------------------------------
// Teleportation box (free-function form)
// ---------------------------------------------------------------------------

inline std::size_t build_teleport_box(CircuitGraph& g, std::size_t source) {
    return g.add_teleport_box(source);
}

// ---------------------------------------------------------------------------
// Clause filter box
// ---------------------------------------------------------------------------

struct FilterBoxResult {
    std::array<std::size_t, 3> data{};  // incarnations of (i, j, k) after the box
    std::size_t anc1 = 0;               // parity ancilla (kept state |1>)
    std::size_t anc2 = 0;               // Toffoli ancilla (kept state |0>)
};

// Adds the exactly-one-of-three filter on columns (qi, qj, qk): a parity
// triangle of CNOTs onto ancilla 1 (projected to |1>), a relative-phase
// Toffoli with controls (qj, qk) onto ancilla 2 (projected to |0>), and exit
// treatment of the data columns.  With teleportation enabled, a teleport box
// is inserted before every second-and-later circuit-level CNOT touching a
// column, and exits are left to the caller; otherwise each data column exits
// through an amplification when boost_exit is set (no later clause touches
// it) or an identity row when not.
inline FilterBoxResult build_filter_box(CircuitGraph& g, std::size_t qi, std::size_t qj,
                                        std::size_t qk,
                                        const std::array<bool, 3>& boost_exit = {true, true,
                                                                                 true}) {
    if (qi == qj || qi == qk || qj == qk)
        throw validation_error("filter box needs three distinct data columns");
    g.require_open(qi);
    g.require_open(qj);
    g.require_open(qk);

    FilterBoxResult res;
    res.anc1 = g.add_boundary_column("anc1." + std::to_string(g.n_columns()), {0, 0, -1});
    res.anc2 = g.add_boundary_column("anc2." + std::to_string(g.n_columns()), {0, 0, -1});

    auto cnot = [&g](std::size_t& control, std::size_t& target) {
        if (g.options.teleport) {
            if (g.columns[control].cnot_count >= 1) control = g.add_teleport_box(control);
            if (g.columns[target].cnot_count >= 1) target = g.add_teleport_box(target);
        }
        g.append_cnot(control, target, /*box_level=*/true);
    };

    // Parity triangle: anc1 accumulates i XOR j XOR k.
    cnot(qi, res.anc1);
    cnot(qj, res.anc1);
    cnot(qk, res.anc1);
    g.append_project(res.anc1, Vec2::basis(1), g.options.lambda);

    // Relative-phase Toffoli: anc2 flips exactly when j AND k.
    const double quarter = std::numbers::pi / 4.0;
    g.append_gate(res.anc2, Mat2::rot_y(quarter));
    cnot(qj, res.anc2);
    g.append_gate(res.anc2, Mat2::rot_y(quarter));
    cnot(qk, res.anc2);
    g.append_gate(res.anc2, Mat2::rot_y(-quarter));
    cnot(qj, res.anc2);
    g.append_gate(res.anc2, Mat2::rot_y(-quarter));
    g.append_project(res.anc2, Vec2::basis(0), g.options.lambda);

    if (!g.options.teleport) {
        const std::array<std::size_t, 3> participants{qi, qj, qk};
        for (std::size_t x = 0; x < 3; ++x) {
            if (boost_exit[x])
                g.append_boost(participants[x], g.options.lambda);
            else
                g.append_gate(participants[x], Mat2::identity());
        }
    }
    res.data = {qi, qj, qk};
    return res;
}

// ---------------------------------------------------------------------------
// Full exact-cover circuit
// ---------------------------------------------------------------------------

inline CircuitGraph build_sat_circuit(const ExactCoverInstance& inst, const BuildOptions& opts) {
    opts.validate();
    inst.validate();
    CircuitGraph g(opts);
    if (inst.n_bits == 0) return g;  // vacuous circuit, dimension 1

    std::vector<std::size_t> current(static_cast<std::size_t>(inst.n_bits));
    for (int b = 0; b < inst.n_bits; ++b) {
        current[static_cast<std::size_t>(b)] =
            g.add_boundary_column("b" + std::to_string(b), {-1, 0, 0});
        g.data_map[b] = {current[static_cast<std::size_t>(b)]};
    }

    auto refresh_chain = [&g, &current](int bit) {
        auto& chain = g.data_map[bit];
        for (std::size_t s : g.successors_of(chain.back())) chain.push_back(s);
        current[static_cast<std::size_t>(bit)] = chain.back();
    };

    for (std::size_t ci = 0; ci < inst.clauses.size(); ++ci) {
        const Clause& cl = inst.clauses[ci];
        std::array<bool, 3> final_use{true, true, true};
        for (std::size_t later = ci + 1; later < inst.clauses.size(); ++later)
            for (std::size_t x = 0; x < 3; ++x)
                for (int lb : inst.clauses[later])
                    if (lb == cl[x]) final_use[x] = false;

        build_filter_box(g, current[static_cast<std::size_t>(cl[0])],
                         current[static_cast<std::size_t>(cl[1])],
                         current[static_cast<std::size_t>(cl[2])], final_use);
        for (int bit : cl) refresh_chain(bit);
        if (opts.teleport) {
            for (int bit : cl) {
                g.add_teleport_box(current[static_cast<std::size_t>(bit)]);
                refresh_chain(bit);
            }
        }
    }

    // Terminal amplification on every still-open data carrier (idle bits and,
    // under teleportation, the final outputs of each chain).
    for (int b = 0; b < inst.n_bits; ++b) {
        const std::size_t q = current[static_cast<std::size_t>(b)];
        if (!g.columns[q].closed) g.append_boost(q, opts.lambda);
    }

    const std::size_t n = static_cast<std::size_t>(inst.n_bits);
    const std::size_t m = inst.clauses.size();
    if (opts.teleport) {
        // Per clause: 2 filter ancillas plus 10 teleport boxes of 2 columns.
        if (g.n_columns() != n + 22 * m || g.teleport_boxes != 10 * m)
            throw std::logic_error("teleported circuit column accounting broke: " +
                                   std::to_string(g.n_columns()) + " columns, " +
                                   std::to_string(g.teleport_boxes) + " boxes");
    } else {
        if (g.n_columns() != n + 2 * m)
            throw std::logic_error("circuit column accounting broke: " +
                                   std::to_string(g.n_columns()) + " columns");
    }
    return g;
}

// ---------------------------------------------------------------------------
// Layout validation and report
// ---------------------------------------------------------------------------

struct LayoutCheck {
    std::vector<std::string> violations;
    std::string report;
    bool ok() const { return violations.empty(); }
};

inline LayoutCheck validate_layout(const CircuitGraph& g) {
    LayoutCheck out;
    const std::size_t nq = g.columns.size();
    std::vector<std::map<int, int>> cover(nq);        // interval -> multiplicity
    std::vector<std::map<int, std::string>> what(nq);  // interval -> kind tag
    std::vector<int> boundaries(nq, 0);

    auto col_ok = [&](std::size_t q, std::size_t ti) {
        if (q < nq) return true;
        out.violations.push_back("term " + std::to_string(ti) + " references missing column " +
                                 std::to_string(q));
        return false;
    };
    auto mark = [&](std::size_t q, int j, const std::string& tag, std::size_t ti) {
        if (j < 1 || j >= g.columns[q].rows) {
            out.violations.push_back("term " + std::to_string(ti) + " (" + tag + ") on '" +
                                     g.columns[q].label + "' references row " +
                                     std::to_string(j) + " outside [1, " +
                                     std::to_string(g.columns[q].rows) + ")");
            return;
        }
        ++cover[q][j];
        auto& w = what[q][j];
        w = w.empty() ? tag : w + "+" + tag;
    };

    for (std::size_t ti = 0; ti < g.terms.size(); ++ti) {
        const HamiltonianTerm& t = g.terms[ti];
        switch (t.kind) {
            case TermKind::Boundary:
                if (col_ok(t.q, ti)) ++boundaries[t.q];
                break;
            case TermKind::Cnot:
                if (col_ok(t.q, ti) && col_ok(t.q2, ti)) {
                    if (t.j != t.j2)
                        out.violations.push_back(
                            "misaligned cnot rows between '" + g.columns[t.q].label + "' (" +
                            std::to_string(t.j) + ") and '" + g.columns[t.q2].label + "' (" +
                            std::to_string(t.j2) + ")");
                    mark(t.q, t.j, "cnot-c", ti);
                    mark(t.q2, t.j2, "cnot-t", ti);
                }
                break;
            default:
                if (col_ok(t.q, ti)) mark(t.q, t.j, term_kind_name(t.kind), ti);
                break;
        }
    }

    for (std::size_t q = 0; q < nq; ++q) {
        if (boundaries[q] != 1)
            out.violations.push_back("column '" + g.columns[q].label + "' has " +
                                     std::to_string(boundaries[q]) +
                                     " boundary terms (needs exactly 1)");
        for (int j = 1; j < g.columns[q].rows; ++j) {
            const auto it = cover[q].find(j);
            const int c = it == cover[q].end() ? 0 : it->second;
            if (c == 0)
                out.violations.push_back("uncoupled interval " + std::to_string(j) +
                                         " on column '" + g.columns[q].label + "'");
            else if (c > 1)
                out.violations.push_back("double-coupled interval " + std::to_string(j) +
                                         " on column '" + g.columns[q].label + "' (" +
                                         what[q][j] + ")");
        }
        if (g.options.teleport && g.columns[q].rows > 8)
            out.violations.push_back("length bound exceeded on column '" + g.columns[q].label +
                                     "': " + std::to_string(g.columns[q].rows) +
                                     " rows (teleported circuits stay at <= 8)");
    }

    std::ostringstream rep;
    rep << std::left << std::setw(4) << "id" << std::setw(14) << "label" << std::setw(6)
        << "rows" << std::setw(6) << "dim" << std::setw(8) << "closed"
        << "couplings\n";
    for (std::size_t q = 0; q < nq; ++q) {
        const auto& c = g.columns[q];
        rep << std::left << std::setw(4) << q << std::setw(14) << c.label << std::setw(6)
            << c.rows << std::setw(6) << (c.hard ? 2 * c.rows - 1 : 2 * c.rows) << std::setw(8)
            << (c.closed ? "yes" : "no");
        for (int j = 1; j < c.rows; ++j) {
            const auto it = what[q].find(j);
            rep << (j > 1 ? " " : "") << j << ":" << (it == what[q].end() ? "-" : it->second);
        }
        rep << '\n';
    }
    rep << "columns: " << nq << "  terms: " << g.terms.size()
        << "  teleport boxes: " << g.teleport_boxes << "  dimension: " << std::setprecision(15)
        << static_cast<double>(g.dimension()) << '\n';
    out.report = rep.str();
    return out;
}

// ---------------------------------------------------------------------------
// JSON serialization
// ---------------------------------------------------------------------------

namespace detail {
inline nlohmann::json complex_to_json(const cplx& z) {
    return nlohmann::json::array({z.real(), z.imag()});
}
}  // namespace detail

inline nlohmann::json graph_to_json(const CircuitGraph& g) {
    nlohmann::json j;
    j["options"] = {{"lambda", g.options.lambda},
                    {"teleport", g.options.teleport},
                    {"hard_boundary", g.options.hard_boundary},
                    {"boundary_energy", g.options.boundary_energy},
                    {"margolus_order", g.options.margolus_order}};
    j["columns"] = nlohmann::json::array();
    for (std::size_t q = 0; q < g.columns.size(); ++q) {
        const auto& c = g.columns[q];
        j["columns"].push_back({{"id", q},
                                {"label", c.label},
                                {"rows", c.rows},
                                {"local_dim", c.hard ? 2 * c.rows - 1 : 2 * c.rows},
                                {"hard", c.hard},
                                {"boundary_a", c.boundary_a},
                                {"closed", c.closed}});
    }
    j["terms"] = nlohmann::json::array();
    for (const auto& t : g.terms) {
        nlohmann::json tj;
        tj["kind"] = term_kind_name(t.kind);
        tj["q"] = t.q;
        switch (t.kind) {
            case TermKind::SingleQubit:
                tj["j"] = t.j;
                tj["u"] = {detail::complex_to_json(t.u(0, 0)), detail::complex_to_json(t.u(0, 1)),
                           detail::complex_to_json(t.u(1, 0)), detail::complex_to_json(t.u(1, 1))};
                break;
            case TermKind::Boost:
                tj["j"] = t.j;
                tj["lambda"] = t.lambda;
                break;
            case TermKind::Project:
                tj["j"] = t.j;
                tj["lambda"] = t.lambda;
                tj["gamma"] = {detail::complex_to_json(t.gamma[0]),
                               detail::complex_to_json(t.gamma[1])};
                break;
            case TermKind::Cnot:
                tj["j"] = t.j;
                tj["q2"] = t.q2;
                tj["j2"] = t.j2;
                break;
            case TermKind::Boundary:
                tj["a"] = t.a;
                tj["energy"] = t.energy;
                break;
            case TermKind::PrepBoost:
                tj["j"] = t.j;
                tj["s"] = t.lambda;
                break;
        }
        tj["eps"] = t.eps;
        j["terms"].push_back(tj);
    }
    j["final_rows"] = g.final_rows();
    j["data_map"] = nlohmann::json::object();
    for (const auto& [bit, chain] : g.data_map) j["data_map"][std::to_string(bit)] = chain;
    j["teleport_boxes"] = g.teleport_boxes;
    j["dimension"] = static_cast<double>(g.dimension());
    return j;
}

}  // namespace gsqc
