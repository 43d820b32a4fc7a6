#pragma once
// Subcommand implementations for the command-line front end: build, solve,
// sweep, schedule, oracle, and verify.  Every command validates its inputs
// before heavy work, guards the state-space dimension against a configurable
// capacity, and writes deterministic artifacts that carry a config echo.

#include <CLI11.hpp>
#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "gsqc/analysis.hpp"
#include "gsqc/circuit.hpp"
#include "gsqc/eigensolver.hpp"
#include "gsqc/instances.hpp"

namespace gsqccli {

using nlohmann::json;

struct RunConfig {
    std::string command;
    std::string instance_path;
    std::string gen_spec;   // "N,M,SEED"
    double lambda = 0;      // 0 = derive from --bigd or default
    std::string grid_spec;  // "a:b:n", log-spaced
    double bigd = 0;        // lambda^2 = D * N when set
    std::string teleport = "off";
    std::string boundary = "penalty";
    double tol = 1e-10;
    std::uint64_t seed = 1;
    std::string out_dir = ".";
    double capacity = 2e6;
    bool dump_vector = false;
    int stage2_points = 9;
    int stage3_points = 9;
    std::uint64_t shots = 10000;
};

// ---------------------------------------------------------------------------
// Config resolution
// ---------------------------------------------------------------------------

inline gsqc::ExactCoverInstance resolve_instance(const RunConfig& cfg) {
    const bool has_path = !cfg.instance_path.empty();
    const bool has_gen = !cfg.gen_spec.empty();
    if (has_path == has_gen)
        throw gsqc::validation_error("give exactly one of --instance PATH or --gen N,M,SEED");
    if (has_path) return gsqc::load_instance(cfg.instance_path);

    int n = 0, m = 0;
    std::uint64_t s = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(cfg.gen_spec);
    if (!(in >> n >> c1 >> m >> c2 >> s) || c1 != ',' || c2 != ',' || !(in >> std::ws).eof())
        throw gsqc::validation_error("--gen expects N,M,SEED (got '" + cfg.gen_spec + "')");
    return gsqc::generate(n, m, s);
}

inline double resolve_lambda(const RunConfig& cfg, int n_bits) {
    if (cfg.lambda > 0 && cfg.bigd > 0)
        throw gsqc::validation_error("--lambda and --bigd are exclusive (bigd sets lambda^2 = D*N)");
    if (cfg.lambda > 0) return cfg.lambda;
    if (cfg.bigd > 0) {
        if (n_bits < 1)
            throw gsqc::validation_error("--bigd needs a nonempty instance to derive lambda");
        return std::sqrt(cfg.bigd * static_cast<double>(n_bits));
    }
    return 8.0;
}

inline std::vector<double> resolve_grid(const RunConfig& cfg, int n_bits) {
    if (!cfg.grid_spec.empty()) {
        if (cfg.lambda > 0 || cfg.bigd > 0)
            throw gsqc::validation_error("--lambda-grid is exclusive with --lambda/--bigd");
        double a = 0, b = 0;
        int n = 0;
        char c1 = 0, c2 = 0;
        std::istringstream in(cfg.grid_spec);
        if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || !(in >> std::ws).eof())
            throw gsqc::validation_error("--lambda-grid expects a:b:n (got '" + cfg.grid_spec +
                                         "')");
        return gsqc::lambda_grid(a, b, n);
    }
    if (cfg.lambda > 0 || cfg.bigd > 0) return {resolve_lambda(cfg, n_bits)};
    return gsqc::lambda_grid(4.0, 32.0, 7);
}

inline gsqc::BuildOptions make_build_options(const RunConfig& cfg, double lambda) {
    gsqc::BuildOptions opts;
    opts.lambda = lambda;
    opts.teleport = cfg.teleport == "on";
    opts.hard_boundary = cfg.boundary == "hard";
    opts.validate();
    return opts;
}

inline json config_echo(const RunConfig& cfg, const gsqc::ExactCoverInstance& inst,
                        double lambda) {
    json j;
    j["command"] = cfg.command;
    if (!cfg.instance_path.empty()) j["instance"] = cfg.instance_path;
    if (!cfg.gen_spec.empty()) j["gen"] = cfg.gen_spec;
    j["n_bits"] = inst.n_bits;
    j["m_clauses"] = inst.clauses.size();
    j["lambda"] = lambda;
    if (cfg.bigd > 0) j["bigd"] = cfg.bigd;
    j["teleport"] = cfg.teleport;
    j["boundary"] = cfg.boundary;
    j["tol"] = cfg.tol;
    j["seed"] = cfg.seed;
    j["capacity"] = cfg.capacity;
    return j;
}

inline std::vector<std::string> echo_lines(const json& echo) {
    std::vector<std::string> lines;
    for (const auto& [key, value] : echo.items())
        lines.push_back(key + "=" + (value.is_string() ? value.get<std::string>() : value.dump()));
    return lines;
}

inline std::filesystem::path artifact_path(const RunConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.out_dir);
    return std::filesystem::path(cfg.out_dir) / name;
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
    std::ofstream f(p);
    if (!f) throw gsqc::validation_error("cannot open '" + p.string() + "' for writing");
    f << text;
}

inline void write_json(const std::filesystem::path& p, const json& j) {
    write_text(p, j.dump(2) + "\n");
}

inline void guard_capacity(const gsqc::CircuitGraph& g, const RunConfig& cfg) {
    const long double dim = g.dimension();
    if (dim > static_cast<long double>(cfg.capacity)) {
        std::ostringstream msg;
        msg << "state-space dimension " << static_cast<double>(dim) << " exceeds the capacity "
            << cfg.capacity << "; try --teleport off, fewer clauses, or raise --capacity";
        throw gsqc::capacity_error(msg.str());
    }
}

inline gsqc::SolveOptions solver_options(const RunConfig& cfg) {
    gsqc::SolveOptions sopts;
    sopts.tol = cfg.tol;
    sopts.seed = cfg.seed;
    return sopts;
}

// ---------------------------------------------------------------------------
// build
// ---------------------------------------------------------------------------

inline int cmd_build(const RunConfig& cfg) {
    const gsqc::ExactCoverInstance inst = resolve_instance(cfg);
    const double lambda = resolve_lambda(cfg, inst.n_bits);
    const gsqc::CircuitGraph g = gsqc::build_sat_circuit(inst, make_build_options(cfg, lambda));
    const gsqc::LayoutCheck chk = gsqc::validate_layout(g);
    if (!chk.ok()) {
        for (const auto& v : chk.violations) std::cerr << "layout violation: " << v << "\n";
        throw std::logic_error("built circuit failed layout validation");
    }

    const json echo = config_echo(cfg, inst, lambda);
    json out;
    out["config"] = echo;
    out["graph"] = gsqc::graph_to_json(g);
    out["within_capacity"] = g.dimension() <= static_cast<long double>(cfg.capacity);
    write_json(artifact_path(cfg, "circuit.json"), out);
    write_text(artifact_path(cfg, "layout.txt"), chk.report);

    std::cout << "columns: " << g.n_columns() << "  terms: " << g.terms.size()
              << "  teleport boxes: " << g.teleport_boxes
              << "  dimension: " << static_cast<double>(g.dimension()) << "\n";
    if (!out["within_capacity"].get<bool>())
        std::cout << "note: dimension exceeds capacity " << cfg.capacity
                  << "; solve/sweep/schedule will refuse this circuit"
                  << " (try --teleport off, fewer clauses, or raise --capacity)\n";
    std::cout << "wrote circuit.json, layout.txt to " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// solve
// ---------------------------------------------------------------------------

inline int cmd_solve(const RunConfig& cfg) {
    const gsqc::ExactCoverInstance inst = resolve_instance(cfg);
    const double lambda = resolve_lambda(cfg, inst.n_bits);
    const json echo = config_echo(cfg, inst, lambda);

    if (inst.n_bits == 0) {
        json out;
        out["config"] = echo;
        out["dimension"] = 1;
        out["e0"] = 0.0;
        out["note"] = "vacuous circuit: empty instance";
        write_json(artifact_path(cfg, "solve.json"), out);
        std::cout << "vacuous circuit (dimension 1); wrote solve.json\n";
        return 0;
    }

    const gsqc::CircuitGraph g = gsqc::build_sat_circuit(inst, make_build_options(cfg, lambda));
    guard_capacity(g, cfg);
    const gsqc::BasisSpace space = gsqc::make_space(g);
    const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);

    const gsqc::GapInfo gi = gsqc::circuit_gap(h, solver_options(cfg));
    if (gi.e0 < -1e-6)
        throw gsqc::convergence_error(
            "assembled operator is not positive semidefinite: ground energy " +
            std::to_string(gi.e0));
    const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
    const gsqc::FinalRowStats st = gsqc::final_row_stats(gs.psi, space, g);
    const gsqc::ConditionalDistribution dist = gsqc::conditional_assignments(gs.psi, space, g);

    json out;
    out["config"] = echo;
    out["dimension"] = static_cast<double>(g.dimension());
    out["e0"] = gi.e0;
    out["gap"] = gi.gap;
    out["ground_multiplicity"] = gi.multiplicity;
    out["multiplicity_is_lower_bound"] = gi.multiplicity_is_lower_bound;
    out["p_all_final"] = st.p_all_final;
    out["p_predicted"] = st.p_predicted;
    out["per_column_final"] = st.per_column_final;
    out["start_overlap"] = gs.start_overlap;
    out["projection_residual_ratio"] = gs.projection.residual_ratio;
    out["cg_iterations"] = gs.projection.cg_iterations;
    out["conditional_mass"] = dist.conditional_mass;
    out["conditional"] = gsqc::distribution_to_json(dist);

    if (cfg.shots > 0) {
        const gsqc::SampleResult samples = gsqc::sample_measurements(dist, cfg.shots, cfg.seed);
        json counts = json::object();
        for (const auto& [key, c] : samples.counts) counts[key] = c;
        out["shots"] = cfg.shots;
        out["sample_counts"] = counts;
        std::uint64_t violations = 0;
        for (const auto& [key, c] : samples.counts)
            if (!gsqc::satisfies_all(gsqc::from_bitstring(key), inst)) violations += c;
        out["sample_violations"] = violations;
        out["solution_count"] = gsqc::brute_force(inst).size();
    }

    write_json(artifact_path(cfg, "solve.json"), out);
    if (cfg.dump_vector)
        gsqc::save_vectors(artifact_path(cfg, "ground_vector.bin").string(), space.dim(),
                           {gs.psi});

    std::cout << "dimension " << static_cast<double>(g.dimension()) << "  e0 " << gi.e0
              << "  gap " << gi.gap << "\n"
              << "p_all_final " << st.p_all_final << "  predicted " << st.p_predicted << "\n"
              << "conditional support size " << dist.probability.size() << " (mass "
              << dist.conditional_mass << ")\n"
              << "wrote solve.json" << (cfg.dump_vector ? ", ground_vector.bin" : "") << " to "
              << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// sweep
// ---------------------------------------------------------------------------

inline int cmd_sweep(const RunConfig& cfg) {
    const gsqc::ExactCoverInstance inst = resolve_instance(cfg);
    if (inst.n_bits == 0) throw gsqc::validation_error("sweep needs a nonempty instance");
    const std::vector<double> grid = resolve_grid(cfg, inst.n_bits);

    {
        // Topology (and so dimension) is amplification-independent.
        const gsqc::CircuitGraph probe =
            gsqc::build_sat_circuit(inst, make_build_options(cfg, grid.front()));
        guard_capacity(probe, cfg);
    }

    auto make = [&](double lam) {
        return gsqc::build_sat_circuit(inst, make_build_options(cfg, lam));
    };
    const gsqc::SweepResult res = gsqc::lambda_sweep(make, grid, solver_options(cfg));

    const json echo = config_echo(cfg, inst, grid.front());
    bool p_monotone = true;
    for (std::size_t i = 0; i + 1 < res.rows.size(); ++i)
        if (res.rows[i + 1].p_all_final < res.rows[i].p_all_final - 1e-12) p_monotone = false;

    std::ostringstream csv;
    write_sweep_csv(csv, res, echo_lines(echo));
    write_text(artifact_path(cfg, "sweep.csv"), csv.str());

    json out;
    out["config"] = echo;
    out["grid"] = grid;
    out["q_columns"] = res.q_columns;
    if (res.rows.size() >= 2) {
        out["gap_fit"] = {{"exponent", res.gap_fit.exponent},
                          {"stderr", res.gap_fit.exponent_stderr},
                          {"intercept", res.gap_fit.intercept},
                          {"points", res.gap_fit.points}};
        out["c_eff"] = res.c_eff;
    }
    out["p_all_final_monotone"] = p_monotone;
    json rows = json::array();
    for (const auto& r : res.rows)
        rows.push_back({{"lambda", r.lambda},
                        {"e0", r.e0},
                        {"gap", r.gap},
                        {"p_all_final", r.p_all_final},
                        {"p_predicted", r.p_predicted},
                        {"multiplicity", r.multiplicity}});
    out["rows"] = rows;
    write_json(artifact_path(cfg, "sweep.json"), out);

    std::cout << "swept " << res.rows.size() << " amplification values over " << res.q_columns
              << " columns\n";
    if (res.rows.size() >= 2)
        std::cout << "gap exponent " << res.gap_fit.exponent << " +- "
                  << res.gap_fit.exponent_stderr << "  effective constant " << res.c_eff << "\n";
    if (!p_monotone) std::cout << "warning: p_all_final is not monotone across the grid\n";
    std::cout << "wrote sweep.csv, sweep.json to " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// schedule
// ---------------------------------------------------------------------------

inline int cmd_schedule(const RunConfig& cfg) {
    const gsqc::ExactCoverInstance inst = resolve_instance(cfg);
    if (inst.n_bits == 0) throw gsqc::validation_error("schedule needs a nonempty instance");
    const double lambda = resolve_lambda(cfg, inst.n_bits);
    const gsqc::CircuitGraph g = gsqc::build_sat_circuit(inst, make_build_options(cfg, lambda));
    guard_capacity(g, cfg);

    const gsqc::ScheduleResult res =
        gsqc::schedule_trace(g, cfg.stage2_points, cfg.stage3_points, solver_options(cfg));

    const json echo = config_echo(cfg, inst, lambda);
    std::ostringstream csv;
    write_schedule_csv(csv, res, echo_lines(echo));
    write_text(artifact_path(cfg, "schedule.csv"), csv.str());

    json out;
    out["config"] = echo;
    out["lambda_end"] = res.lambda_end;
    out["min_gap"] = res.min_gap;
    out["time_estimate"] = res.time_estimate;
    out["stage3_monotone"] = res.stage3_monotone;
    out["max_gap_increase"] = res.max_gap_increase;
    out["endpoint_mismatch_23"] = res.endpoint_mismatch_23;
    out["endpoint_mismatch_3s"] = res.endpoint_mismatch_3s;
    write_json(artifact_path(cfg, "schedule.json"), out);

    std::cout << "traced " << res.rows.size() << " schedule points to lambda " << res.lambda_end
              << "\nmin gap " << res.min_gap << "  time estimate " << res.time_estimate << "\n";
    if (!res.stage3_monotone)
        std::cout << "anomaly: stage-3 gap increased by " << res.max_gap_increase
                  << " (beyond slack); recorded, not fatal\n";
    std::cout << "wrote schedule.csv, schedule.json to " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// oracle
// ---------------------------------------------------------------------------

inline int cmd_oracle(const RunConfig& cfg) {
    const gsqc::ExactCoverInstance inst = resolve_instance(cfg);
    const gsqc::RatioProfile prof = gsqc::ratio_profile(inst);
    const std::vector<std::uint32_t> sols = gsqc::brute_force(inst);
    const gsqc::BackboneInfo bb = gsqc::backbone(sols, inst.n_bits);

    const json echo = config_echo(cfg, inst, resolve_lambda(cfg, std::max(inst.n_bits, 1)));
    std::ostringstream csv;
    for (const auto& line : echo_lines(echo)) csv << "# " << line << '\n';
    csv << "index,count,ratio\n";
    csv.precision(17);
    for (std::size_t k = 0; k < prof.counts.size(); ++k) {
        csv << k << ',' << prof.counts[k] << ',';
        if (k < prof.ratios.size()) csv << prof.ratios[k];
        csv << '\n';
    }
    write_text(artifact_path(cfg, "oracle.csv"), csv.str());

    json out;
    out["config"] = echo;
    out["counts"] = prof.counts;
    out["ratios"] = prof.ratios;
    out["monotone"] = prof.monotone();
    out["satisfiable"] = !sols.empty();
    out["solution_count"] = sols.size();
    constexpr std::size_t kMaxListed = 1024;
    json listed = json::array();
    for (std::size_t i = 0; i < sols.size() && i < kMaxListed; ++i)
        listed.push_back(gsqc::to_bitstring(sols[i], inst.n_bits));
    out["solutions"] = listed;
    out["solutions_truncated"] = sols.size() > kMaxListed;
    if (!prof.ratios.empty() && !prof.hit_zero) {
        const double max_ratio = *std::max_element(prof.ratios.begin(), prof.ratios.end());
        const double base = cfg.bigd > 0 ? cfg.bigd * inst.n_bits : 1.0;
        const gsqc::LambdaRequirement req = gsqc::required_lambda(max_ratio, base);
        out["required_lambda"] = {{"max_ratio", req.ratio},
                                  {"base", req.base},
                                  {"lambda_sq", req.lambda_sq},
                                  {"lambda", req.lambda},
                                  {"gap_penalty", req.gap_penalty}};
    }
    out["backbone"] = {{"satisfiable", bb.satisfiable},
                       {"value", bb.value},
                       {"fixed_count", bb.fixed_count()}};
    write_json(artifact_path(cfg, "oracle.json"), out);

    std::cout << "solution counts:";
    for (std::uint64_t c : prof.counts) std::cout << ' ' << c;
    std::cout << "\nsatisfiable: " << (sols.empty() ? "no" : "yes") << " ("
              << sols.size() << " assignments)\n"
              << "wrote oracle.csv, oracle.json to " << cfg.out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// verify: named invariant fixtures over all modules
// ---------------------------------------------------------------------------

namespace fixtures {

inline void check(bool ok, const std::string& detail) {
    if (!ok) throw std::runtime_error(detail);
}

// Amplitudes over all-final-row configurations keyed by per-column bits.
inline std::map<std::vector<int>, gsqc::cplx> final_amps(const std::vector<gsqc::cplx>& psi,
                                                         const gsqc::BasisSpace& space) {
    std::map<std::vector<int>, gsqc::cplx> out;
    gsqc::for_each_all_final(
        space, [&](std::uint64_t idx, const std::vector<int>& bits) { out[bits] = psi[idx]; });
    return out;
}

inline void history_chain_flat() {
    for (const bool hadamard : {false, true}) {
        gsqc::CircuitGraph g({.lambda = 8.0});
        g.add_boundary_column("q", {0, 0, -1});
        for (int i = 0; i < 3; ++i)
            g.append_gate(0, hadamard ? gsqc::Mat2::hadamard() : gsqc::Mat2::identity());
        const gsqc::BasisSpace space = gsqc::make_space(g);
        const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);
        const gsqc::GapInfo gi = gsqc::gap_of(h);
        check(std::abs(gi.e0) <= 1e-9, "chain ground energy " + std::to_string(gi.e0));
        const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
        std::vector<double> row_mass(4, 0.0);
        std::vector<int> locals(1);
        for (std::uint64_t i = 0; i < space.dim(); ++i) {
            space.decode(i, locals);
            row_mass[static_cast<std::size_t>(space.columns()[0].row_of(locals[0]))] +=
                std::norm(gs.psi[i]);
        }
        for (double m : row_mass)
            check(std::abs(m - 0.25) <= 1e-10, "uneven history row mass " + std::to_string(m));
    }
}

inline void boost_amplification_law() {
    for (const double lam : {2.0, 10.0}) {
        gsqc::CircuitGraph g({.lambda = lam});
        g.add_boundary_column("q", {0, 0, -1});
        g.append_boost(0, lam);
        const gsqc::BasisSpace space = gsqc::make_space(g);
        const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);
        const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
        const auto& col = space.columns()[0];
        const gsqc::cplx a0 = gs.psi[col.local_of(0, 0)];
        const gsqc::cplx a1 = gs.psi[col.local_of(1, 0)];
        check(std::abs(a1 / a0 - lam) <= 1e-8, "amplification ratio off at lambda " +
                                                   std::to_string(lam));
        const gsqc::FinalRowStats st = gsqc::final_row_stats(gs.psi, space, g);
        const double want = lam * lam / (1.0 + lam * lam);
        check(std::abs(st.p_all_final - want) <= 1e-8, "final-row probability off");
    }
}

inline void cnot_truth_table() {
    for (int bc = 0; bc < 2; ++bc)
        for (int bt = 0; bt < 2; ++bt) {
            gsqc::CircuitGraph g({.lambda = 4.0});
            const std::size_t c =
                g.add_boundary_column("c", {0, 0, bc ? 1.0 : -1.0});
            const std::size_t t =
                g.add_boundary_column("t", {0, 0, bt ? 1.0 : -1.0});
            g.append_cnot(c, t);
            g.append_boost(c, 4.0);
            g.append_boost(t, 4.0);
            const gsqc::BasisSpace space = gsqc::make_space(g);
            const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);
            const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
            const auto amps = final_amps(gs.psi, space);
            double mass = 0;
            for (const auto& [bits, a] : amps) mass += std::norm(a);
            const double good = std::norm(amps.at({bc, bc ^ bt}));
            check(good / mass >= 1.0 - 1e-9, "cnot output wrong for input " +
                                                 std::to_string(bc) + std::to_string(bt));
        }
}

inline void pentagon_and_gate() {
    const double quarter = std::numbers::pi / 4.0;
    for (int bj = 0; bj < 2; ++bj)
        for (int bk = 0; bk < 2; ++bk) {
            gsqc::CircuitGraph g({.lambda = 2.0});
            const std::size_t qj = g.add_boundary_column("j", {0, 0, bj ? 1.0 : -1.0});
            const std::size_t qk = g.add_boundary_column("k", {0, 0, bk ? 1.0 : -1.0});
            const std::size_t anc = g.add_boundary_column("anc2", {0, 0, -1});
            g.append_gate(anc, gsqc::Mat2::rot_y(quarter));
            g.append_cnot(qj, anc);
            g.append_gate(anc, gsqc::Mat2::rot_y(quarter));
            g.append_cnot(qk, anc);
            g.append_gate(anc, gsqc::Mat2::rot_y(-quarter));
            g.append_cnot(qj, anc);
            g.append_gate(anc, gsqc::Mat2::rot_y(-quarter));
            g.append_boost(qj, 2.0);
            g.append_boost(qk, 2.0);
            g.append_boost(anc, 2.0);
            const gsqc::BasisSpace space = gsqc::make_space(g);
            const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);
            const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
            const auto amps = final_amps(gs.psi, space);
            double mass = 0;
            for (const auto& [bits, a] : amps) mass += std::norm(a);
            const double good = std::norm(amps.at({bj, bk, bj & bk}));
            check(good / mass >= 1.0 - 1e-9, "pentagon AND wrong for controls " +
                                                 std::to_string(bj) + std::to_string(bk));
        }
}

inline void teleport_fidelity() {
    const double theta = 0.7;
    gsqc::CircuitGraph g({.lambda = 8.0});
    const std::size_t src =
        g.add_boundary_column("s", {-std::sin(2 * theta), 0.0, -std::cos(2 * theta)});
    const std::size_t out = gsqc::build_teleport_box(g, src);
    g.append_boost(out, 8.0);
    const gsqc::BasisSpace space = gsqc::make_space(g);
    const gsqc::SparseOperator h = gsqc::assemble_circuit(g, space);
    const gsqc::GroundStateInfo gs = gsqc::computational_ground_state(h, space);
    const auto amps = final_amps(gs.psi, space);
    gsqc::cplx a0 = 0, a1 = 0;
    for (const auto& [bits, a] : amps)
        if (bits[0] == 0 && bits[1] == 0) (bits[2] == 0 ? a0 : a1) = a;
    const double fid = std::norm(std::cos(theta) * a0 + std::sin(theta) * a1) /
                       (std::norm(a0) + std::norm(a1));
    check(fid >= 1.0 - 1e-8, "teleport fidelity " + std::to_string(fid));
}

inline void filter_layout_accounting() {
    const gsqc::ExactCoverInstance inst{3, {{0, 1, 2}}};
    const gsqc::CircuitGraph off = gsqc::build_sat_circuit(inst, {.lambda = 8.0});
    check(off.n_columns() == 5, "plain box column count");
    check(off.dimension() == 302400.0L, "plain box dimension");
    check(gsqc::validate_layout(off).ok(), "plain box layout");

    const gsqc::CircuitGraph on =
        gsqc::build_sat_circuit(inst, {.lambda = 8.0, .teleport = true});
    check(on.n_columns() == 25, "teleported column count");
    check(on.teleport_boxes == 10, "teleport box count");
    int longest = 0;
    for (const auto& c : on.columns) longest = std::max(longest, c.rows);
    check(longest == 8, "teleported length bound");
    check(gsqc::validate_layout(on).ok(), "teleported layout");
}

inline void clause_solution_ratio() {
    const gsqc::ExactCoverInstance inst{5, {{0, 2, 4}}};
    const gsqc::RatioProfile prof = gsqc::ratio_profile(inst);
    check(prof.counts.size() == 2, "profile length");
    check(3 * prof.counts[0] == 8 * prof.counts[1], "single-clause ratio is not 8/3");
}

inline void ordering_preserves_solutions() {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        gsqc::Rng rng(seed);
        const int n = 4 + static_cast<int>(rng.bounded(5));
        const int cap = n * (n - 1) * (n - 2) / 6;
        const int m = std::min(cap, 2 + static_cast<int>(rng.bounded(3)));
        const gsqc::ExactCoverInstance inst = gsqc::generate(n, m, seed * 77 + 5);
        const gsqc::ExactCoverInstance ordered =
            gsqc::order_clauses(inst, gsqc::OrderStrategy::greedy_min_ratio);
        check(gsqc::brute_force(inst) == gsqc::brute_force(ordered),
              "ordering changed the solution set at seed " + std::to_string(seed));
    }
}

inline void schedule_endpoint_match() {
    gsqc::CircuitGraph g({.lambda = 4.0});
    g.add_boundary_column("q", {0, 0, -1});
    g.append_gate(0, gsqc::Mat2::identity());
    g.append_boost(0, 4.0);
    const gsqc::ScheduleResult res = gsqc::schedule_trace(g, 2, 2);
    check(res.endpoint_mismatch_23 <= 1e-12, "stage 2/3 endpoint mismatch");
    check(res.endpoint_mismatch_3s <= 1e-12, "stage 3/static endpoint mismatch");
}

inline void csv_headers_pinned() {
    gsqc::SweepResult sweep;
    sweep.rows = {{8, 0, 0.1, 0.9, 0.875, 1}};
    std::ostringstream s1;
    gsqc::write_sweep_csv(s1, sweep);
    check(s1.str().rfind("lambda,e0,gap,p_all_final,p_predicted\n", 0) == 0,
          "sweep header drifted");
    gsqc::ScheduleResult sched;
    sched.rows = {{1, 0, 0, 0.1}};
    std::ostringstream s2;
    gsqc::write_schedule_csv(s2, sched);
    check(s2.str().rfind("stage,s,e0,gap\n", 0) == 0, "schedule header drifted");
}

inline void vector_dump_roundtrip() {
    const auto path =
        (std::filesystem::temp_directory_path() / "gsqc_verify_vec.bin").string();
    gsqc::Rng rng(3);
    std::vector<gsqc::cplx> v(64);
    for (auto& x : v) x = gsqc::cplx(rng.normal(), rng.normal());
    gsqc::save_vectors(path, v.size(), {v});
    const auto [dim, vecs] = gsqc::load_vectors(path);
    std::filesystem::remove(path);
    check(dim == 64 && vecs.size() == 1, "dump shape");
    for (std::size_t i = 0; i < v.size(); ++i)
        check(v[i] == vecs[0][i], "dump value drifted at " + std::to_string(i));
}

}  // namespace fixtures

inline int cmd_verify(const RunConfig&) {
    const std::vector<std::pair<std::string, std::function<void()>>> suite = {
        {"history-chain-flat", fixtures::history_chain_flat},
        {"boost-amplification-law", fixtures::boost_amplification_law},
        {"cnot-truth-table", fixtures::cnot_truth_table},
        {"pentagon-and-gate", fixtures::pentagon_and_gate},
        {"teleport-fidelity", fixtures::teleport_fidelity},
        {"filter-layout-accounting", fixtures::filter_layout_accounting},
        {"clause-solution-ratio", fixtures::clause_solution_ratio},
        {"ordering-preserves-solutions", fixtures::ordering_preserves_solutions},
        {"schedule-endpoint-match", fixtures::schedule_endpoint_match},
        {"csv-headers-pinned", fixtures::csv_headers_pinned},
        {"vector-dump-roundtrip", fixtures::vector_dump_roundtrip},
    };
    int failures = 0;
    for (const auto& [name, fn] : suite) {
        try {
            fn();
            std::cout << "ok " << name << "\n";
        } catch (const std::exception& e) {
            ++failures;
            std::cout << "FAIL " << name << ": " << e.what() << "\n";
        }
    }
    if (failures == 0) {
        std::cout << "all invariants pass\n";
        return 0;
    }
    std::cout << failures << " invariant(s) failed\n";
    return 1;
}

// ---------------------------------------------------------------------------
// Entry point
// ---------------------------------------------------------------------------

inline int run(int argc, char** argv) {
    CLI::App app{"ground-state circuit simulator for 3-bit exact cover"};
    app.require_subcommand(1);
    RunConfig cfg;

    auto add_common = [&cfg](CLI::App* sub, bool wants_instance) {
        if (wants_instance) {
            sub->add_option("--instance", cfg.instance_path,
                            "instance file (JSON or 'p ec3' text)");
            sub->add_option("--gen", cfg.gen_spec, "generate an instance: N,M,SEED");
        }
        sub->add_option("--lambda", cfg.lambda, "amplification factor (default 8)");
        sub->add_option("--bigd", cfg.bigd, "sets lambda^2 = D * N");
        sub->add_option("--teleport", cfg.teleport, "teleport insertion: on|off")
            ->check(CLI::IsMember({"on", "off"}));
        sub->add_option("--boundary", cfg.boundary, "boundary mode: penalty|hard")
            ->check(CLI::IsMember({"penalty", "hard"}));
        sub->add_option("--tol", cfg.tol, "solver residual tolerance");
        sub->add_option("--seed", cfg.seed, "solver and sampling seed");
        sub->add_option("--out", cfg.out_dir, "artifact directory (default .)");
        sub->add_option("--capacity", cfg.capacity,
                        "state-space dimension cap (default 2e6)");
    };

    CLI::App* build = app.add_subcommand("build", "build a circuit and report its layout");
    add_common(build, true);
    CLI::App* solve = app.add_subcommand("solve", "solve a circuit's ground state");
    add_common(solve, true);
    solve->add_option("--shots", cfg.shots, "conditioned measurement samples (default 10000)");
    solve->add_flag("--dump-vector", cfg.dump_vector, "write the ground vector dump");
    CLI::App* sweep = app.add_subcommand("sweep", "solve across an amplification grid");
    add_common(sweep, true);
    sweep->add_option("--lambda-grid", cfg.grid_spec, "log-spaced grid a:b:n");
    CLI::App* schedule = app.add_subcommand("schedule", "trace the preparation schedule");
    add_common(schedule, true);
    schedule->add_option("--stage2-points", cfg.stage2_points, "grid size for stage 2");
    schedule->add_option("--stage3-points", cfg.stage3_points, "grid size for stage 3");
    CLI::App* oracle = app.add_subcommand("oracle", "enumerate solutions and clause ratios");
    add_common(oracle, true);
    CLI::App* verify = app.add_subcommand("verify", "run built-in invariant fixtures");
    (void)verify;

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    CLI::App* sub = app.get_subcommands().front();
    cfg.command = sub->get_name();
    if (cfg.command == "build") return cmd_build(cfg);
    if (cfg.command == "solve") return cmd_solve(cfg);
    if (cfg.command == "sweep") return cmd_sweep(cfg);
    if (cfg.command == "schedule") return cmd_schedule(cfg);
    if (cfg.command == "oracle") return cmd_oracle(cfg);
    return cmd_verify(cfg);
}

}  // namespace gsqccli
