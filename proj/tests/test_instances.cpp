// Exact-cover instance model: generation, enumeration oracles, prefix
// profiles, ordering, sizing, and the two serialization formats.
#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cstdint>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gsqc/common.hpp"
#include "gsqc/instances.hpp"

namespace {

// Independent enumeration coding for cross-checks: assignments held as
// explicit bit strings (index 0 = most significant = problem bit N-1) and
// filtered clause by clause, in contrast to the library's packed-integer
// single-pass scan.
std::vector<std::string> filter_coding_solutions(const gsqc::ExactCoverInstance& inst) {
    std::vector<std::string> pool;
    pool.emplace_back("");
    for (int b = 0; b < inst.n_bits; ++b) {
        std::vector<std::string> next;
        for (const std::string& s : pool) {
            next.push_back(s + '0');
            next.push_back(s + '1');
        }
        pool.swap(next);
    }
    for (const gsqc::Clause& cl : inst.clauses) {
        std::vector<std::string> keep;
        for (const std::string& s : pool) {
            int ones = 0;
            for (int idx : cl) ones += (s[static_cast<std::size_t>(inst.n_bits - 1 - idx)] == '1');
            if (ones == 1) keep.push_back(s);
        }
        pool.swap(keep);
    }
    std::sort(pool.begin(), pool.end());
    return pool;
}

std::vector<std::string> as_strings(const std::vector<std::uint32_t>& sols, int n_bits) {
    std::vector<std::string> out;
    for (std::uint32_t s : sols) out.push_back(gsqc::to_bitstring(s, n_bits));
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST_CASE("generation draws distinct sorted clauses deterministically", "[instances]") {
    SECTION("three bits admit exactly one clause") {
        const auto inst = gsqc::generate(3, 1, 42);
        REQUIRE(inst.n_bits == 3);
        REQUIRE(inst.clauses == std::vector<gsqc::Clause>{{0, 1, 2}});
    }
    SECTION("fixed seed reproduces the instance; clauses are distinct and sorted") {
        const auto a = gsqc::generate(9, 6, 1234);
        const auto b = gsqc::generate(9, 6, 1234);
        REQUIRE(a == b);
        REQUIRE(a.clauses.size() == 6);
        std::set<gsqc::Clause> uniq(a.clauses.begin(), a.clauses.end());
        REQUIRE(uniq.size() == 6);
        for (const auto& cl : a.clauses) {
            REQUIRE(cl[0] < cl[1]);
            REQUIRE(cl[1] < cl[2]);
            REQUIRE(cl[2] < 9);
            REQUIRE(cl[0] >= 0);
        }
    }
    SECTION("asking for more clauses than 3-subsets exist is a capacity error") {
        REQUIRE_THROWS_AS(gsqc::generate(5, 11, 7), gsqc::capacity_error);
        REQUIRE_NOTHROW(gsqc::generate(5, 10, 7));
    }
    SECTION("domain checks") {
        REQUIRE_THROWS_AS(gsqc::generate(2, 0, 7), gsqc::validation_error);
        REQUIRE_THROWS_AS(gsqc::generate(4, -1, 7), gsqc::validation_error);
        REQUIRE(gsqc::generate(4, 0, 7).clauses.empty());
    }
}

TEST_CASE("enumeration oracle on pinned instances", "[instances]") {
    SECTION("single clause on three bits: the three one-hot assignments") {
        gsqc::ExactCoverInstance inst{3, {{0, 1, 2}}};
        const auto sols = gsqc::brute_force(inst);
        REQUIRE(sols == std::vector<std::uint32_t>{1, 2, 4});
        REQUIRE(as_strings(sols, 3) == std::vector<std::string>{"001", "010", "100"});
    }
    SECTION("a free bit doubles the count") {
        gsqc::ExactCoverInstance inst{4, {{0, 1, 2}}};
        REQUIRE(gsqc::brute_force(inst).size() == 6);
    }
    SECTION("duplicate clauses are idempotent") {
        gsqc::ExactCoverInstance inst{3, {{0, 1, 2}, {0, 1, 2}}};
        REQUIRE(gsqc::brute_force(inst).size() == 3);
    }
    SECTION("enumeration bound and clause validation") {
        gsqc::ExactCoverInstance big{31, {{0, 1, 2}}};
        REQUIRE_THROWS_AS(gsqc::brute_force(big), gsqc::capacity_error);
        gsqc::ExactCoverInstance dup{4, {{1, 1, 2}}};
        REQUIRE_THROWS_AS(gsqc::brute_force(dup), gsqc::validation_error);
        gsqc::ExactCoverInstance oob{4, {{0, 1, 4}}};
        REQUIRE_THROWS_AS(gsqc::brute_force(oob), gsqc::validation_error);
    }
}

TEST_CASE("two enumeration codings agree on random instances", "[instances]") {
    gsqc::Rng rng(20260815);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 3 + static_cast<int>(rng.bounded(10));  // 3..12
        const long max_m = static_cast<long>(n) * (n - 1) * (n - 2) / 6;
        const int m = static_cast<int>(rng.bounded(static_cast<std::uint64_t>(
                          std::min<long>(max_m, 8)) + 1));
        const auto inst = gsqc::generate(n, m, rng.next_u64());
        const auto packed = gsqc::brute_force(inst);
        REQUIRE(as_strings(packed, n) == filter_coding_solutions(inst));
        const auto prof = gsqc::ratio_profile(inst);
        REQUIRE(prof.counts.front() == (std::uint64_t{1} << n));
        REQUIRE(prof.counts.back() == packed.size());
        REQUIRE(prof.monotone());
    }
}

TEST_CASE("prefix profile ratios", "[instances]") {
    SECTION("any single clause leaves exactly 3/8 of the cube") {
        for (int n = 3; n <= 12; ++n) {
            gsqc::ExactCoverInstance inst{n, {{0, n / 2, n - 1}}};
            const auto prof = gsqc::ratio_profile(inst);
            REQUIRE(prof.counts.size() == 2);
            REQUIRE(3 * prof.counts[0] == 8 * prof.counts[1]);  // exact in integers
            REQUIRE(prof.ratios[0] == 8.0 / 3.0);               // exact in doubles
        }
    }
    SECTION("disjoint clause pair multiplies the cuts") {
        gsqc::ExactCoverInstance inst{6, {{0, 1, 2}, {3, 4, 5}}};
        const auto prof = gsqc::ratio_profile(inst);
        REQUIRE(prof.counts == std::vector<std::uint64_t>{64, 24, 9});
        REQUIRE(prof.ratios == std::vector<double>{8.0 / 3.0, 8.0 / 3.0});
        REQUIRE_FALSE(prof.hit_zero);
    }
    SECTION("an unsatisfiable prefix truncates the ratio list") {
        // Bits 0,1 cannot both be 0 (clauses 1-3 would force bits 2,3,4 all
        // to 1, violating clause 4) nor both 1, and a single 1 among them
        // forces bits 2,3,4 all to 0, violating clause 4 as well.
        gsqc::ExactCoverInstance inst{5, {{0, 1, 2}, {0, 1, 3}, {0, 1, 4}, {2, 3, 4}}};
        REQUIRE(gsqc::brute_force(inst).empty());
        const auto prof = gsqc::ratio_profile(inst);
        REQUIRE(prof.hit_zero);
        REQUIRE(prof.counts[prof.zero_at] == 0);
        REQUIRE(prof.ratios.size() == prof.zero_at - 1);
        // Prefix counts agree with the independent full-scan oracle.
        for (std::size_t j = 0; j < prof.counts.size(); ++j) {
            gsqc::ExactCoverInstance prefix{inst.n_bits, {}};
            prefix.clauses.assign(inst.clauses.begin(),
                                  inst.clauses.begin() + static_cast<std::ptrdiff_t>(j));
            REQUIRE(prof.counts[j] == gsqc::brute_force(prefix).size());
        }
    }
}

TEST_CASE("clause ordering", "[instances]") {
    SECTION("'given' and single-clause inputs pass through unchanged") {
        const auto inst = gsqc::generate(9, 5, 77);
        REQUIRE(gsqc::order_clauses(inst, gsqc::OrderStrategy::given) == inst);
        const auto one = gsqc::generate(6, 1, 77);
        REQUIRE(gsqc::order_clauses(one, gsqc::OrderStrategy::greedy_min_ratio) == one);
    }
    SECTION("greedy is stepwise optimal and preserves the solution set") {
        gsqc::Rng rng(555);
        for (int trial = 0; trial < 100; ++trial) {
            const int n = 4 + static_cast<int>(rng.bounded(7));  // 4..10
            const long max_m = static_cast<long>(n) * (n - 1) * (n - 2) / 6;
            const int m = std::min<int>(static_cast<int>(max_m),
                                        2 + static_cast<int>(rng.bounded(4)));  // 2..5
            const auto inst = gsqc::generate(n, m, rng.next_u64());
            const auto ordered = gsqc::order_clauses(inst, gsqc::OrderStrategy::greedy_min_ratio);

            REQUIRE(gsqc::brute_force(ordered) == gsqc::brute_force(inst));
            std::multiset<gsqc::Clause> before(inst.clauses.begin(), inst.clauses.end());
            std::multiset<gsqc::Clause> after(ordered.clauses.begin(), ordered.clauses.end());
            REQUIRE(before == after);

            // Independent check of per-step optimality: at every step the
            // chosen clause maximizes the surviving count among the clauses
            // not yet placed, with ties to the earlier original index.
            std::vector<bool> used(inst.clauses.size(), false);
            gsqc::ExactCoverInstance prefix{inst.n_bits, {}};
            for (const auto& chosen : ordered.clauses) {
                std::uint64_t best = 0;
                std::size_t best_idx = inst.clauses.size();
                for (std::size_t c = 0; c < inst.clauses.size(); ++c) {
                    if (used[c]) continue;
                    gsqc::ExactCoverInstance trial_inst = prefix;
                    trial_inst.clauses.push_back(inst.clauses[c]);
                    const std::uint64_t cnt = gsqc::brute_force(trial_inst).size();
                    if (best_idx == inst.clauses.size() || cnt > best) {
                        best = cnt;
                        best_idx = c;
                    }
                }
                REQUIRE(inst.clauses[best_idx] == chosen);
                used[best_idx] = true;
                prefix.clauses.push_back(chosen);
            }
        }
    }
    SECTION("an already-optimal order is a no-op on the ratio sequence") {
        gsqc::ExactCoverInstance inst{6, {{0, 1, 2}, {3, 4, 5}}};
        const auto ordered = gsqc::order_clauses(inst, gsqc::OrderStrategy::greedy_min_ratio);
        REQUIRE(ordered == inst);
        REQUIRE(gsqc::ratio_profile(ordered).ratios == gsqc::ratio_profile(inst).ratios);
    }
    SECTION("strategy parsing") {
        REQUIRE(gsqc::order_strategy_from_string("given") == gsqc::OrderStrategy::given);
        REQUIRE(gsqc::order_strategy_from_string("greedy-min-ratio") ==
                gsqc::OrderStrategy::greedy_min_ratio);
        REQUIRE_THROWS_AS(gsqc::order_strategy_from_string("random"), gsqc::validation_error);
    }
}

TEST_CASE("amplification sizing", "[instances]") {
    SECTION("ratio 1 needs exactly the base budget") {
        const auto req = gsqc::required_lambda(1.0, 40.0);
        REQUIRE(req.lambda_sq == 40.0);
        REQUIRE(req.lambda == Catch::Approx(std::sqrt(40.0)).epsilon(1e-14));
    }
    SECTION("the 8/3 single-clause ratio at base 30 needs lambda^2 = 80") {
        const auto req = gsqc::required_lambda(8.0 / 3.0, 30.0);
        REQUIRE(req.lambda_sq == Catch::Approx(80.0).epsilon(1e-14));
        REQUIRE(req.gap_penalty == Catch::Approx(std::pow(80.0, -4.0)).epsilon(1e-12));
    }
    SECTION("a unique-solution cliff reproduces the 2^(N/2) amplification wall") {
        const int n = 20;
        const auto req = gsqc::required_lambda(std::pow(2.0, n), 1.0);
        REQUIRE(req.lambda == Catch::Approx(std::pow(2.0, n / 2.0)).epsilon(1e-12));
    }
    SECTION("domain checks") {
        REQUIRE_THROWS_AS(gsqc::required_lambda(0.5, 30.0), gsqc::validation_error);
        REQUIRE_THROWS_AS(gsqc::required_lambda(2.0, 0.0), gsqc::validation_error);
    }
}

TEST_CASE("backbone diagnostic", "[instances]") {
    SECTION("fully symmetric solutions have no backbone") {
        gsqc::ExactCoverInstance inst{3, {{0, 1, 2}}};
        const auto info = gsqc::backbone(gsqc::brute_force(inst), 3);
        REQUIRE(info.satisfiable);
        REQUIRE(info.fixed_count() == 0);
    }
    SECTION("shared bits across all solutions are detected") {
        const std::vector<std::uint32_t> sols{0b011, 0b111};
        const auto info = gsqc::backbone(sols, 3);
        REQUIRE(info.value == std::vector<int>{1, 1, -1});
        REQUIRE(info.fixed_count() == 2);
    }
    SECTION("no solutions") {
        const auto info = gsqc::backbone({}, 4);
        REQUIRE_FALSE(info.satisfiable);
        REQUIRE(info.fixed_count() == 0);
    }
}

TEST_CASE("bitstring conversions use most-significant-first order", "[instances]") {
    REQUIRE(gsqc::to_bitstring(0b100, 3) == "100");
    REQUIRE(gsqc::to_bitstring(1, 4) == "0001");
    REQUIRE(gsqc::from_bitstring("100") == 4);
    for (std::uint32_t a = 0; a < 32; ++a)
        REQUIRE(gsqc::from_bitstring(gsqc::to_bitstring(a, 5)) == a);
    REQUIRE_THROWS_AS(gsqc::from_bitstring("10x"), gsqc::validation_error);
    REQUIRE_THROWS_AS(gsqc::from_bitstring(""), gsqc::validation_error);
}

TEST_CASE("JSON serialization round-trips and validates", "[instances]") {
    const auto inst = gsqc::generate(9, 6, 99);
    const auto j = gsqc::instance_to_json(inst);
    REQUIRE(j.at("n_bits").get<int>() == 9);
    REQUIRE(j.at("clauses").size() == 6);
    REQUIRE(gsqc::instance_from_json(j) == inst);

    REQUIRE_THROWS_AS(gsqc::instance_from_json(nlohmann::json::parse(R"({"clauses": []})")),
                      gsqc::validation_error);
    REQUIRE_THROWS_AS(
        gsqc::instance_from_json(nlohmann::json::parse(R"({"n_bits": 4, "clauses": [[0,1]]})")),
        gsqc::validation_error);
    REQUIRE_THROWS_AS(
        gsqc::instance_from_json(nlohmann::json::parse(R"({"n_bits": 4, "clauses": [[0,1,4]]})")),
        gsqc::validation_error);
}

TEST_CASE("text format reader and writer", "[instances]") {
    SECTION("round-trip") {
        const auto inst = gsqc::generate(8, 4, 11);
        std::ostringstream out;
        gsqc::write_instance_text(out, inst);
        std::istringstream in(out.str());
        REQUIRE(gsqc::read_instance_text(in) == inst);
    }
    SECTION("comments, blank lines, and trailing zero terminators are accepted") {
        std::istringstream in(
            "c a comment line\n"
            "\n"
            "p ec3 4 2\n"
            "0 1 2 0\n"
            "c interleaved comment\n"
            "1 2 3\n");
        const auto inst = gsqc::read_instance_text(in);
        REQUIRE(inst.n_bits == 4);
        REQUIRE(inst.clauses == std::vector<gsqc::Clause>{{0, 1, 2}, {1, 2, 3}});
    }
    SECTION("malformed inputs are rejected") {
        std::istringstream no_header("0 1 2\n");
        REQUIRE_THROWS_AS(gsqc::read_instance_text(no_header), gsqc::validation_error);
        std::istringstream bad_header("p cnf 4 1\n0 1 2\n");
        REQUIRE_THROWS_AS(gsqc::read_instance_text(bad_header), gsqc::validation_error);
        std::istringstream wrong_count("p ec3 4 2\n0 1 2\n");
        REQUIRE_THROWS_AS(gsqc::read_instance_text(wrong_count), gsqc::validation_error);
        std::istringstream bad_index("p ec3 4 1\n0 1 9\n");
        REQUIRE_THROWS_AS(gsqc::read_instance_text(bad_index), gsqc::validation_error);
        std::istringstream junk_tail("p ec3 4 1\n0 1 2 7\n");
        REQUIRE_THROWS_AS(gsqc::read_instance_text(junk_tail), gsqc::validation_error);
    }
}
