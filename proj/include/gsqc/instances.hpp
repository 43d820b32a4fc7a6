#pragma once
// 3-bit exact-cover instances: generation, parsing (JSON and a DIMACS-like
// text format), enumeration oracles, prefix solution-count diagnostics,
// greedy clause ordering, and amplification sizing.
//
// An assignment is packed into a std::uint32_t with bit i = value of problem
// bit i.  When rendered as a string, the most significant character is bit
// N-1 (so bit 0 is the rightmost character).  A clause (i, j, k) is satisfied
// when exactly one of the three bits is 1.

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsqc/common.hpp"

namespace gsqc {

using Clause = std::array<int, 3>;

struct ExactCoverInstance {
    int n_bits = 0;
    std::vector<Clause> clauses;  // order is the implementation order

    bool operator==(const ExactCoverInstance&) const = default;

    // Throws validation_error unless every clause holds three distinct bit
    // indices inside [0, n_bits).
    void validate() const {
        if (n_bits < 0)
            throw validation_error("bit count must be non-negative, got " +
                                   std::to_string(n_bits));
        for (std::size_t c = 0; c < clauses.size(); ++c) {
            const Clause& cl = clauses[c];
            for (int idx : cl) {
                if (idx < 0 || idx >= n_bits)
                    throw validation_error("clause " + std::to_string(c) +
                                           " references bit " + std::to_string(idx) +
                                           " outside [0, " + std::to_string(n_bits) + ")");
            }
            if (cl[0] == cl[1] || cl[0] == cl[2] || cl[1] == cl[2])
                throw validation_error("clause " + std::to_string(c) +
                                       " repeats a bit index; the three bits must be distinct");
        }
    }
};

// ---------------------------------------------------------------------------
// Random generation
// ---------------------------------------------------------------------------

// Draws `m` distinct 3-subsets of {0..n-1}, uniformly, reproducible by seed.
// Each clause is emitted in ascending index order; clause list order is the
// draw order.
inline ExactCoverInstance generate(int n, int m, std::uint64_t seed) {
    if (n < 3)
        throw validation_error("generation needs n >= 3 bits, got " + std::to_string(n));
    if (m < 0)
        throw validation_error("clause count must be non-negative, got " + std::to_string(m));
    const unsigned __int128 max_clauses =
        static_cast<unsigned __int128>(n) * static_cast<unsigned>(n - 1) *
        static_cast<unsigned>(n - 2) / 6;
    if (static_cast<unsigned __int128>(m) > max_clauses)
        throw capacity_error("requested " + std::to_string(m) + " distinct clauses but only " +
                             std::to_string(static_cast<std::uint64_t>(max_clauses)) +
                             " 3-subsets of " + std::to_string(n) + " bits exist");

    Rng rng(seed);
    ExactCoverInstance inst;
    inst.n_bits = n;
    std::set<Clause> seen;
    while (static_cast<int>(inst.clauses.size()) < m) {
        const int a = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
        int b = a;
        while (b == a) b = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
        int c = a;
        while (c == a || c == b) c = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(n)));
        Clause cl{a, b, c};
        std::sort(cl.begin(), cl.end());
        if (seen.insert(cl).second) inst.clauses.push_back(cl);
    }
    return inst;
}

// ---------------------------------------------------------------------------
// Enumeration oracles
// ---------------------------------------------------------------------------

inline bool clause_satisfied(std::uint32_t assignment, const Clause& cl) {
    const unsigned ones = ((assignment >> cl[0]) & 1u) + ((assignment >> cl[1]) & 1u) +
                          ((assignment >> cl[2]) & 1u);
    return ones == 1u;
}

inline bool satisfies_all(std::uint32_t assignment, const ExactCoverInstance& inst) {
    for (const Clause& cl : inst.clauses)
        if (!clause_satisfied(assignment, cl)) return false;
    return true;
}

namespace detail {
inline void check_enumerable(const ExactCoverInstance& inst) {
    inst.validate();
    if (inst.n_bits > 30)
        throw capacity_error("enumeration supports at most 30 bits, got " +
                             std::to_string(inst.n_bits));
}
}  // namespace detail

// Exhaustive scan over all 2^N assignments; returns the satisfying set in
// ascending numeric order.
inline std::vector<std::uint32_t> brute_force(const ExactCoverInstance& inst) {
    detail::check_enumerable(inst);
    std::vector<std::uint32_t> out;
    const std::uint64_t limit = std::uint64_t{1} << inst.n_bits;
    for (std::uint64_t a = 0; a < limit; ++a) {
        const auto packed = static_cast<std::uint32_t>(a);
        if (satisfies_all(packed, inst)) out.push_back(packed);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Prefix solution-count profile
// ---------------------------------------------------------------------------

struct RatioProfile {
    // counts[j] = number of assignments satisfying the first j clauses, so
    // counts.front() = 2^N and counts.back() = the full solution count.
    std::vector<std::uint64_t> counts;
    // ratios[j] = counts[j] / counts[j+1]; truncated at the first zero count.
    std::vector<double> ratios;
    bool hit_zero = false;    // some prefix already has no solutions
    std::size_t zero_at = 0;  // index into counts of the first zero (when hit_zero)

    bool monotone() const {
        for (std::size_t j = 0; j + 1 < counts.size(); ++j)
            if (counts[j] < counts[j + 1]) return false;
        return true;
    }
};

// Computes all prefix counts in one scan: each assignment contributes to every
// prefix up to (excluding) its first violated clause.  This is deliberately a
// different enumeration coding than brute_force so the two can cross-check.
inline RatioProfile ratio_profile(const ExactCoverInstance& inst) {
    detail::check_enumerable(inst);
    const std::size_t m = inst.clauses.size();
    std::vector<std::uint64_t> first_fail_hist(m + 1, 0);
    const std::uint64_t limit = std::uint64_t{1} << inst.n_bits;
    for (std::uint64_t a = 0; a < limit; ++a) {
        const auto packed = static_cast<std::uint32_t>(a);
        std::size_t fail = m;
        for (std::size_t j = 0; j < m; ++j) {
            if (!clause_satisfied(packed, inst.clauses[j])) {
                fail = j;
                break;
            }
        }
        ++first_fail_hist[fail];
    }

    RatioProfile prof;
    prof.counts.resize(m + 1);
    std::uint64_t suffix = 0;
    for (std::size_t j = m + 1; j-- > 0;) {
        suffix += first_fail_hist[j];
        prof.counts[j] = suffix;  // S_j = #assignments whose first failure is >= j
    }
    for (std::size_t j = 0; j < m; ++j) {
        if (prof.counts[j + 1] == 0) {
            prof.hit_zero = true;
            prof.zero_at = j + 1;
            break;
        }
        prof.ratios.push_back(static_cast<double>(prof.counts[j]) /
                              static_cast<double>(prof.counts[j + 1]));
    }
    return prof;
}

// ---------------------------------------------------------------------------
// Clause ordering
// ---------------------------------------------------------------------------

enum class OrderStrategy { given, greedy_min_ratio };

inline OrderStrategy order_strategy_from_string(const std::string& s) {
    if (s == "given") return OrderStrategy::given;
    if (s == "greedy" || s == "greedy-min-ratio") return OrderStrategy::greedy_min_ratio;
    throw validation_error("unknown clause-order strategy '" + s +
                           "' (expected 'given' or 'greedy-min-ratio')");
}

// Reorders the clause list.  The greedy strategy picks, at each step, the
// remaining clause that minimizes the survival ratio S_j/S_{j+1} (equivalently
// maximizes the surviving count); ties go to the lower original clause index.
// The solution set is invariant under any reordering and is re-verified here.
inline ExactCoverInstance order_clauses(const ExactCoverInstance& inst, OrderStrategy strategy) {
    inst.validate();
    if (strategy == OrderStrategy::given || inst.clauses.size() <= 1) return inst;
    detail::check_enumerable(inst);

    // Every valid single clause keeps exactly 3/8 of the cube (one hot bit out
    // of three, the remaining N-3 bits free), so the first greedy pick is
    // always the lowest-index clause and the full cube never needs to be
    // materialized.
    std::vector<std::size_t> remaining(inst.clauses.size());
    for (std::size_t j = 0; j < remaining.size(); ++j) remaining[j] = j;

    ExactCoverInstance out;
    out.n_bits = inst.n_bits;
    out.clauses.push_back(inst.clauses[0]);
    remaining.erase(remaining.begin());

    std::vector<std::uint32_t> current;
    const std::uint64_t limit = std::uint64_t{1} << inst.n_bits;
    for (std::uint64_t a = 0; a < limit; ++a) {
        const auto packed = static_cast<std::uint32_t>(a);
        if (clause_satisfied(packed, inst.clauses[0])) current.push_back(packed);
    }

    while (!remaining.empty()) {
        std::size_t best_pos = 0;
        std::uint64_t best_count = 0;
        for (std::size_t pos = 0; pos < remaining.size(); ++pos) {
            const Clause& cand = inst.clauses[remaining[pos]];
            std::uint64_t count = 0;
            for (std::uint32_t a : current)
                if (clause_satisfied(a, cand)) ++count;
            if (pos == 0 || count > best_count) {
                best_pos = pos;
                best_count = count;
            }
        }
        const Clause& chosen = inst.clauses[remaining[best_pos]];
        out.clauses.push_back(chosen);
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(best_pos));
        std::vector<std::uint32_t> next;
        next.reserve(best_count);
        for (std::uint32_t a : current)
            if (clause_satisfied(a, chosen)) next.push_back(a);
        current.swap(next);
    }

    if (brute_force(out) != brute_force(inst))
        throw std::logic_error("clause reordering changed the solution set");
    return out;
}

// ---------------------------------------------------------------------------
// Amplification sizing
// ---------------------------------------------------------------------------

struct LambdaRequirement {
    double ratio = 1;        // survival ratio S_j/S_{j+1} being compensated
    double base = 1;         // D*N budget factor
    double lambda_sq = 1;    // required amplification: lambda^2 = base * ratio
    double lambda = 1;
    double gap_penalty = 1;  // implied relative gap scale, lambda^-8
};

inline LambdaRequirement required_lambda(double ratio, double base) {
    if (!(ratio >= 1.0))
        throw validation_error("survival ratio must be >= 1, got " + std::to_string(ratio));
    if (!(base > 0.0))
        throw validation_error("base factor must be positive, got " + std::to_string(base));
    LambdaRequirement req;
    req.ratio = ratio;
    req.base = base;
    req.lambda_sq = base * ratio;
    req.lambda = std::sqrt(req.lambda_sq);
    req.gap_penalty = 1.0 / (req.lambda_sq * req.lambda_sq * req.lambda_sq * req.lambda_sq);
    return req;
}

// ---------------------------------------------------------------------------
// Backbone diagnostic
// ---------------------------------------------------------------------------

struct BackboneInfo {
    bool satisfiable = false;
    // Per bit: 0 or 1 when the bit takes that value in every solution, -1
    // when it varies (or when there are no solutions).
    std::vector<int> value;

    int fixed_count() const {
        int n = 0;
        for (int v : value) n += (v >= 0);
        return n;
    }
};

inline BackboneInfo backbone(const std::vector<std::uint32_t>& solutions, int n_bits) {
    if (n_bits < 0 || n_bits > 32)
        throw validation_error("backbone needs 0 <= n_bits <= 32, got " + std::to_string(n_bits));
    BackboneInfo info;
    info.value.assign(static_cast<std::size_t>(n_bits), -1);
    if (solutions.empty()) return info;
    info.satisfiable = true;
    std::uint64_t all_and = ~std::uint64_t{0};
    std::uint64_t all_or = 0;
    for (std::uint32_t s : solutions) {
        all_and &= s;
        all_or |= s;
    }
    for (int b = 0; b < n_bits; ++b) {
        const bool in_and = (all_and >> b) & 1u;
        const bool in_or = (all_or >> b) & 1u;
        if (in_and)
            info.value[static_cast<std::size_t>(b)] = 1;  // 1 in every solution
        else if (!in_or)
            info.value[static_cast<std::size_t>(b)] = 0;  // 0 in every solution
    }
    return info;
}

// ---------------------------------------------------------------------------
// Assignment <-> string (most significant character = bit n_bits-1)
// ---------------------------------------------------------------------------

inline std::string to_bitstring(std::uint32_t assignment, int n_bits) {
    if (n_bits < 1 || n_bits > 32)
        throw validation_error("bitstring needs 1 <= n_bits <= 32, got " + std::to_string(n_bits));
    std::string s(static_cast<std::size_t>(n_bits), '0');
    for (int b = 0; b < n_bits; ++b)
        if ((assignment >> b) & 1u) s[static_cast<std::size_t>(n_bits - 1 - b)] = '1';
    return s;
}

inline std::uint32_t from_bitstring(const std::string& s) {
    if (s.empty() || s.size() > 32)
        throw validation_error("bitstring must have 1..32 characters, got " +
                               std::to_string(s.size()));
    std::uint32_t a = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        const char c = s[i];
        if (c != '0' && c != '1')
            throw validation_error(std::string("bitstring may contain only '0'/'1', found '") +
                                   c + "'");
        if (c == '1') a |= std::uint32_t{1} << (s.size() - 1 - i);
    }
    return a;
}

// ---------------------------------------------------------------------------
// JSON serialization: {"n_bits": int, "clauses": [[i,j,k], ...]}
// ---------------------------------------------------------------------------

inline nlohmann::json instance_to_json(const ExactCoverInstance& inst) {
    nlohmann::json j;
    j["n_bits"] = inst.n_bits;
    j["clauses"] = nlohmann::json::array();
    for (const Clause& cl : inst.clauses) j["clauses"].push_back({cl[0], cl[1], cl[2]});
    return j;
}

inline ExactCoverInstance instance_from_json(const nlohmann::json& j) {
    ExactCoverInstance inst;
    try {
        if (!j.is_object() || !j.contains("n_bits") || !j.contains("clauses"))
            throw validation_error(
                "instance JSON must be an object with 'n_bits' and 'clauses' keys");
        inst.n_bits = j.at("n_bits").get<int>();
        for (const auto& item : j.at("clauses")) {
            if (!item.is_array() || item.size() != 3)
                throw validation_error("each clause must be an array of exactly three indices");
            inst.clauses.push_back(
                Clause{item[0].get<int>(), item[1].get<int>(), item[2].get<int>()});
        }
    } catch (const nlohmann::json::exception& e) {
        throw validation_error(std::string("malformed instance JSON: ") + e.what());
    }
    inst.validate();
    return inst;
}

// ---------------------------------------------------------------------------
// DIMACS-like text format:
//   c optional comments
//   p ec3 N M
//   i j k        (one clause per line; an optional trailing 0 is accepted)
// ---------------------------------------------------------------------------

inline ExactCoverInstance read_instance_text(std::istream& in) {
    std::string line;
    int n = -1, m = -1;
    ExactCoverInstance inst;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream ls(line);
        std::string first;
        if (!(ls >> first)) continue;  // blank line
        if (first == "c" || first[0] == 'c') continue;
        if (first == "p") {
            if (n >= 0)
                throw validation_error("line " + std::to_string(line_no) +
                                       ": duplicate 'p' header");
            std::string fmt;
            if (!(ls >> fmt >> n >> m) || fmt != "ec3" || n < 1 || m < 0)
                throw validation_error("line " + std::to_string(line_no) +
                                       ": expected header 'p ec3 N M'");
            inst.n_bits = n;
            continue;
        }
        if (n < 0)
            throw validation_error("line " + std::to_string(line_no) +
                                   ": clause before 'p ec3 N M' header");
        std::istringstream cs(line);
        int i, j, k;
        if (!(cs >> i >> j >> k))
            throw validation_error("line " + std::to_string(line_no) +
                                   ": expected three bit indices");
        int tail;
        if (cs >> tail) {
            std::string extra;
            if (tail != 0 || (cs >> extra))
                throw validation_error("line " + std::to_string(line_no) +
                                       ": trailing tokens after clause (only a terminating 0 is "
                                       "accepted)");
        }
        inst.clauses.push_back(Clause{i, j, k});
    }
    if (n < 0) throw validation_error("missing 'p ec3 N M' header");
    if (static_cast<int>(inst.clauses.size()) != m)
        throw validation_error("header declared " + std::to_string(m) + " clauses but " +
                               std::to_string(inst.clauses.size()) + " were given");
    inst.validate();
    return inst;
}

inline void write_instance_text(std::ostream& out, const ExactCoverInstance& inst) {
    out << "p ec3 " << inst.n_bits << ' ' << inst.clauses.size() << '\n';
    for (const Clause& cl : inst.clauses) out << cl[0] << ' ' << cl[1] << ' ' << cl[2] << '\n';
}

// Loads an instance file, sniffing JSON ('{' first) vs the text format.
inline ExactCoverInstance load_instance(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw validation_error("cannot open instance file: " + path);
    char c = 0;
    while (in.get(c) && std::isspace(static_cast<unsigned char>(c))) {
    }
    if (!in) throw validation_error("instance file is empty: " + path);
    in.unget();
    if (c == '{') {
        nlohmann::json j;
        try {
            in >> j;
        } catch (const nlohmann::json::exception& e) {
            throw validation_error("malformed instance JSON in " + path + ": " + e.what());
        }
        return instance_from_json(j);
    }
    return read_instance_text(in);
}

inline void save_instance_json(const std::string& path, const ExactCoverInstance& inst) {
    std::ofstream out(path);
    if (!out) throw validation_error("cannot write instance file: " + path);
    out << instance_to_json(inst).dump(2) << '\n';
}

}  // namespace gsqc
