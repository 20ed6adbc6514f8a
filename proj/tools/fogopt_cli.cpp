// fogopt command-line tool: generate benchmark instances, solve a single
// instance with one method, sweep a scenario, or cross-check the solvers
// against the brute-force oracle.

#include <cstdio>
#include <exception>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fogopt/bench.hpp"
#include "fogopt/instance_io.hpp"
#include "fogopt/oracle.hpp"
#include "fogopt/scenario.hpp"

namespace {

fogopt::ScenarioSpec make_spec(int scenario, uint64_t seed, int n, int m) {
    fogopt::ScenarioSpec spec = scenario == 2
                                    ? fogopt::ScenarioSpec::scenario2(seed)
                                    : fogopt::ScenarioSpec::scenario1(seed);
    if (n > 0) spec.num_tasks = n;
    if (m > 0) spec.num_real_fog = m;
    return spec;
}

std::vector<fogopt::Method> parse_method_list(const std::string& csv) {
    if (csv == "all") return fogopt::all_methods();
    if (csv == "exact")
        return {fogopt::Method::IbbaLfc, fogopt::Method::IbbaLcf,
                fogopt::Method::FfbdS, fogopt::Method::FfbdF};
    std::vector<fogopt::Method> out;
    std::string item;
    std::istringstream ss(csv);
    while (std::getline(ss, item, ',')) {
        auto m = fogopt::parse_method(item);
        if (!m) throw CLI::ValidationError("unknown method: " + item);
        out.push_back(*m);
    }
    return out;
}

int cmd_compare(int n, int m, int count, uint64_t seed) {
    using namespace fogopt;
    std::mt19937_64 seeder(seed);
    int mismatches = 0;
    for (int c = 0; c < count; ++c) {
        ScenarioSpec spec;
        spec.kind = ScenarioKind::Custom;
        spec.num_tasks = n;
        spec.num_real_fog = m;
        spec.seed = seeder();
        spec.alpha_hi = 4.0;
        spec.deadline_lo = 2.0;
        spec.deadline_hi = 10.0;
        SystemInstance in = generate_instance(spec, 0);

        OracleResult oracle = enumerate_optimum(in);
        struct Probe {
            const char* name;
            bool feasible;
            double energy;
        };
        IbbaResult lfc = ibba_solve(in, BranchOrder::lfc(in));
        IbbaResult lcf = ibba_solve(in, BranchOrder::lcf(in));
        FfbdResult fs = ffbd_run(in, SubproblemMode::Standard);
        FfbdResult ff = ffbd_run(in, SubproblemMode::Fast);
        std::vector<Probe> probes = {
            {"ibba-lfc", lfc.feasible, lfc.feasible ? lfc.solution.total_energy : 0},
            {"ibba-lcf", lcf.feasible, lcf.feasible ? lcf.solution.total_energy : 0},
            {"ffbd-s", fs.feasible, fs.feasible ? fs.solution.total_energy : 0},
            {"ffbd-f", ff.feasible, ff.feasible ? ff.solution.total_energy : 0},
        };
        bool ok = true;
        for (const Probe& p : probes) {
            if (p.feasible != oracle.feasible) ok = false;
            else if (p.feasible &&
                     std::abs(p.energy - oracle.solution.total_energy) >
                         1e-6 * (1.0 + oracle.solution.total_energy))
                ok = false;
        }
        std::printf("instance %2d (seed %llu): oracle %s%s\n", c,
                    static_cast<unsigned long long>(spec.seed),
                    oracle.feasible
                        ? ("E=" + std::to_string(oracle.solution.total_energy) + " J").c_str()
                        : "infeasible",
                    ok ? "" : "  <-- MISMATCH");
        if (!ok) ++mismatches;
    }
    if (mismatches) {
        std::fprintf(stderr, "%d of %d instances mismatched\n", mismatches, count);
        return 1;
    }
    std::printf("all %d instances agree with the oracle\n", count);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"fogopt: joint task-offloading and resource-allocation solvers"};
    app.require_subcommand(1);

    int scenario = 1, experiment = 0, n = 0, m = 0;
    uint64_t seed = 1;
    std::string out_path, in_path, method_str = "ffbd-f", format = "csv";
    std::string methods_csv = "all";
    int reps = 1, count = 30;

    auto* gen = app.add_subcommand("gen", "write a scenario instance file");
    gen->add_option("--scenario", scenario, "scenario family (1 or 2)");
    gen->add_option("--experiment", experiment, "experiment index in the sweep");
    gen->add_option("--seed", seed, "rng seed");
    gen->add_option("--n", n, "task count override");
    gen->add_option("--m", m, "real fog node count override");
    gen->add_option("--out", out_path, "output instance path")->required();

    auto* solve = app.add_subcommand("solve", "solve one instance with one method");
    solve->add_option("--in", in_path, "instance JSON path")->required();
    solve->add_option("--method", method_str, "method name");
    solve->add_option("--out", out_path, "optional solution JSON path");

    auto* bench = app.add_subcommand("bench", "run a scenario sweep");
    bench->add_option("--scenario", scenario, "scenario family (1 or 2)");
    bench->add_option("--seed", seed, "rng seed");
    bench->add_option("--n", n, "task count override");
    bench->add_option("--m", m, "real fog node count override");
    bench->add_option("--methods", methods_csv, "comma list, 'all', or 'exact'");
    bench->add_option("--reps", reps, "repetitions per experiment");
    bench->add_option("--out", out_path, "results path")->required();
    bench->add_option("--format", format, "csv or json");

    auto* compare = app.add_subcommand("compare", "cross-check against the oracle");
    compare->add_option("--n", n, "tasks per instance (default 3)");
    compare->add_option("--m", m, "real fog nodes per instance (default 2)");
    compare->add_option("--count", count, "number of random instances");
    compare->add_option("--seed", seed, "rng seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) {
            fogopt::ScenarioSpec spec = make_spec(scenario, seed, n, m);
            fogopt::SystemInstance in = fogopt::generate_instance(spec, experiment);
            fogopt::save_instance(in, out_path);
            std::printf("wrote %s (N=%d, M=%d)\n", out_path.c_str(),
                        in.num_tasks(), in.num_real_fog());
            return 0;
        }
        if (solve->parsed()) {
            fogopt::SystemInstance in = fogopt::load_instance(in_path);
            auto m_opt = fogopt::parse_method(method_str);
            if (!m_opt) throw std::runtime_error("unknown method " + method_str);
            fogopt::MethodOutcome oc = fogopt::run_method(*m_opt, in);
            if (!oc.feasible) {
                std::printf("%s: infeasible (%.1f ms)\n", method_str.c_str(),
                            oc.wall_time_ms);
                return 0;
            }
            fogopt::ResultRow row = fogopt::make_row(*m_opt, 0, in, oc);
            std::printf("%s: energy %.6f J (%.6f J/task), mean delay %.4f s, "
                        "offloaded %.0f%%, errors %.0f%%, %.1f ms\n",
                        method_str.c_str(), oc.solution.total_energy,
                        row.mean_energy, row.mean_delay,
                        100 * row.offload_fraction, 100 * row.error_rate,
                        oc.wall_time_ms);
            if (!out_path.empty()) {
                nlohmann::json j;
                j["method"] = method_str;
                j["total_energy_j"] = oc.solution.total_energy;
                j["per_task_delay_s"] = oc.solution.per_task_delay;
                auto& dec = j["placements"];
                for (int i = 0; i < in.num_tasks(); ++i) {
                    auto p = *oc.solution.decision.placement_of(i);
                    if (p.kind == fogopt::PlacementKind::Local)
                        dec.push_back("local");
                    else if (p.kind == fogopt::PlacementKind::Fog)
                        dec.push_back("fog:" + std::to_string(p.node + 1));
                    else
                        dec.push_back("cloud-via:" + std::to_string(p.node + 1));
                }
                std::ofstream f(out_path);
                f << j.dump(2) << '\n';
            }
            return 0;
        }
        if (bench->parsed()) {
            fogopt::ScenarioSpec spec = make_spec(scenario, seed, n, m);
            auto rows = fogopt::run_suite(spec, parse_method_list(methods_csv), reps);
            fogopt::emit_results(rows, out_path, format);
            std::printf("wrote %zu rows to %s\n", rows.size(), out_path.c_str());
            return 0;
        }
        if (compare->parsed())
            return cmd_compare(n > 0 ? n : 3, m > 0 ? m : 2, count, seed);
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
