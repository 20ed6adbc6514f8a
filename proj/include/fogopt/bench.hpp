// fogopt/bench.hpp - experiment orchestration: run the solver methods over a
// scenario sweep, cross-check the exact ones against each other, and emit
// plot-ready CSV/JSON tables.

#pragma once

#include <chrono>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fogopt/baselines.hpp"
#include "fogopt/ffbd.hpp"
#include "fogopt/ibba.hpp"
#include "fogopt/model.hpp"
#include "fogopt/scenario.hpp"

namespace fogopt {

// ─── Methods ────────────────────────────────────────────────────────────────

enum class Method : uint8_t {
    Wop,
    Aop,
    Rop,
    IbbaLfc,
    IbbaLcf,
    FfbdS,
    FfbdF,
    RopFfbdS,
    RopFfbdF,
};

inline const std::vector<Method>& all_methods() {
    static const std::vector<Method> m = {
        Method::Wop,     Method::Aop,      Method::Rop,
        Method::IbbaLfc, Method::IbbaLcf,  Method::FfbdS,
        Method::FfbdF,   Method::RopFfbdS, Method::RopFfbdF};
    return m;
}

inline std::string method_name(Method m) {
    switch (m) {
        case Method::Wop: return "wop";
        case Method::Aop: return "aop";
        case Method::Rop: return "rop";
        case Method::IbbaLfc: return "ibba-lfc";
        case Method::IbbaLcf: return "ibba-lcf";
        case Method::FfbdS: return "ffbd-s";
        case Method::FfbdF: return "ffbd-f";
        case Method::RopFfbdS: return "rop-ffbd-s";
        case Method::RopFfbdF: return "rop-ffbd-f";
    }
    return "?";
}

inline std::optional<Method> parse_method(const std::string& s) {
    for (Method m : all_methods())
        if (method_name(m) == s) return m;
    return std::nullopt;
}

inline bool is_exact(Method m) {
    return m == Method::IbbaLfc || m == Method::IbbaLcf || m == Method::FfbdS ||
           m == Method::FfbdF || m == Method::RopFfbdS || m == Method::RopFfbdF;
}

// ─── Result rows ────────────────────────────────────────────────────────────

struct ResultRow {
    std::string method;
    int experiment = 0;
    double offload_fraction = 0.0;
    double fog_fraction = 0.0;
    double cloud_fraction = 0.0;
    double error_rate = 0.0;
    double mean_energy = 0.0;   // J per task
    double mean_delay = 0.0;    // s
    double wall_time_ms = 0.0;
    double intermediate_problems = 0.0;
    double mp_iterations = 0.0;
    double fast_detection_fraction = 0.0;
    std::string status = "ok";  // ok | infeasible
};

inline const std::vector<std::string>& result_columns() {
    static const std::vector<std::string> cols = {
        "method",        "experiment",      "offload_fraction",
        "fog_fraction",  "cloud_fraction",  "error_rate",
        "mean_energy_j", "mean_delay_s",    "wall_time_ms",
        "intermediate_problems", "mp_iterations",
        "fast_detection_fraction", "status"};
    return cols;
}

// ─── Running one method ─────────────────────────────────────────────────────

struct MethodOutcome {
    bool feasible = false;
    Solution solution;
    double intermediate_problems = 0.0;
    double mp_iterations = 0.0;
    double fast_detection_fraction = 0.0;
    double wall_time_ms = 0.0;
};

inline MethodOutcome run_method(Method m, const SystemInstance& in,
                                const SolveOptions& solver = {}) {
    MethodOutcome out;
    auto t0 = std::chrono::steady_clock::now();
    switch (m) {
        case Method::Wop: {
            out.solution = wop(in);
            out.feasible = true;
            break;
        }
        case Method::Aop: {
            AopResult r = aop(in, solver);
            out.feasible = r.feasible;
            if (r.feasible) out.solution = std::move(r.solution);
            out.intermediate_problems = static_cast<double>(r.stats.relaxed_solves);
            break;
        }
        case Method::Rop: {
            RopResult r = rop(in, solver);
            out.feasible = r.feasible;
            if (r.feasible) out.solution = std::move(r.solution);
            out.intermediate_problems = 1.0;  // one relaxed solve
            break;
        }
        case Method::IbbaLfc:
        case Method::IbbaLcf: {
            BranchOrder order = m == Method::IbbaLfc ? BranchOrder::lfc(in)
                                                     : BranchOrder::lcf(in);
            IbbaOptions opt;
            opt.solver = solver;
            IbbaResult r = ibba_solve(in, order, opt);
            out.feasible = r.feasible;
            if (r.feasible) out.solution = std::move(r.solution);
            out.intermediate_problems = static_cast<double>(r.stats.relaxed_solves);
            break;
        }
        case Method::FfbdS:
        case Method::FfbdF:
        case Method::RopFfbdS:
        case Method::RopFfbdF: {
            FfbdOptions opt;
            opt.solver = solver;
            if (m == Method::RopFfbdS || m == Method::RopFfbdF) {
                RopResult warm = rop(in, solver);
                if (warm.feasible) opt.warm_start = std::move(warm.solution);
            }
            SubproblemMode mode = (m == Method::FfbdF || m == Method::RopFfbdF)
                                      ? SubproblemMode::Fast
                                      : SubproblemMode::Standard;
            FfbdResult r = ffbd_run(in, mode, opt);
            out.feasible = r.feasible;
            if (r.feasible) out.solution = std::move(r.solution);
            out.intermediate_problems =
                static_cast<double>(r.stats.standard_solver_calls);
            out.mp_iterations = static_cast<double>(r.stats.mp_iterations);
            out.fast_detection_fraction = r.stats.fast_detection_fraction();
            break;
        }
    }
    auto t1 = std::chrono::steady_clock::now();
    out.wall_time_ms =
        std::chrono::duration<double, std::milli>(t1 - t0).count();
    return out;
}

inline ResultRow make_row(Method m, int experiment, const SystemInstance& in,
                          const MethodOutcome& oc) {
    ResultRow row;
    row.method = method_name(m);
    row.experiment = experiment;
    row.wall_time_ms = oc.wall_time_ms;
    row.intermediate_problems = oc.intermediate_problems;
    row.mp_iterations = oc.mp_iterations;
    row.fast_detection_fraction = oc.fast_detection_fraction;
    if (!oc.feasible) {
        row.status = "infeasible";
        return row;
    }
    const int n = in.num_tasks();
    int local = 0, fog = 0, cloudish = 0;
    for (int i = 0; i < n; ++i) {
        Placement p = *oc.solution.decision.placement_of(i);
        if (p.kind == PlacementKind::Local) ++local;
        else if (p.kind == PlacementKind::Fog && p.node != in.virtual_node()) ++fog;
        else ++cloudish;  // forwarded, or executed directly on the cloud
    }
    row.offload_fraction = static_cast<double>(n - local) / n;
    row.fog_fraction = static_cast<double>(fog) / n;
    row.cloud_fraction = static_cast<double>(cloudish) / n;
    row.error_rate = error_rate(oc.solution, in);
    row.mean_energy = oc.solution.total_energy / n;
    double dsum = 0.0;
    for (double d : oc.solution.per_task_delay) dsum += d;
    row.mean_delay = dsum / n;
    return row;
}

// ─── Suite ──────────────────────────────────────────────────────────────────

/// Runs methods x experiments x repetitions. Repetitions re-solve the same
/// seeded instance (metrics are identical; wall time is averaged). Exact
/// methods are cross-checked: equal energies within 1e-6 relative, matching
/// feasibility verdicts, zero violations. Any mismatch throws.
inline std::vector<ResultRow> run_suite(const ScenarioSpec& spec,
                                        const std::vector<Method>& methods,
                                        int repetitions = 1,
                                        const SolveOptions& solver = {}) {
    std::vector<ResultRow> rows;
    for (int k = 0; k < spec.experiments(); ++k) {
        SystemInstance in = generate_instance(spec, k);
        std::optional<double> exact_energy;
        bool exact_infeasible = false;
        bool have_exact = false;
        for (Method m : methods) {
            MethodOutcome oc;
            double total_ms = 0.0;
            for (int rep = 0; rep < std::max(1, repetitions); ++rep) {
                oc = run_method(m, in, solver);
                total_ms += oc.wall_time_ms;
            }
            oc.wall_time_ms = total_ms / std::max(1, repetitions);
            ResultRow row = make_row(m, k, in, oc);

            if (is_exact(m)) {
                if (oc.feasible) {
                    if (!validate_solution(oc.solution, in).empty())
                        throw std::runtime_error(
                            "cross-check: exact method " + row.method +
                            " produced a violated solution at experiment " +
                            std::to_string(k));
                    double e = oc.solution.total_energy;
                    if (have_exact && (exact_infeasible ||
                                       std::abs(e - *exact_energy) >
                                           1e-6 * (1.0 + std::abs(*exact_energy))))
                        throw std::runtime_error(
                            "cross-check: exact methods disagree at experiment " +
                            std::to_string(k));
                    exact_energy = e;
                } else {
                    if (have_exact && !exact_infeasible)
                        throw std::runtime_error(
                            "cross-check: feasibility verdicts disagree at "
                            "experiment " + std::to_string(k));
                    exact_infeasible = true;
                }
                have_exact = true;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

// ─── Emission ───────────────────────────────────────────────────────────────

inline nlohmann::json results_to_json(const std::vector<ResultRow>& rows) {
    nlohmann::json j;
    j["columns"] = result_columns();
    j["rows"] = nlohmann::json::array();
    for (const ResultRow& r : rows)
        j["rows"].push_back({{"method", r.method},
                             {"experiment", r.experiment},
                             {"offload_fraction", r.offload_fraction},
                             {"fog_fraction", r.fog_fraction},
                             {"cloud_fraction", r.cloud_fraction},
                             {"error_rate", r.error_rate},
                             {"mean_energy_j", r.mean_energy},
                             {"mean_delay_s", r.mean_delay},
                             {"wall_time_ms", r.wall_time_ms},
                             {"intermediate_problems", r.intermediate_problems},
                             {"mp_iterations", r.mp_iterations},
                             {"fast_detection_fraction", r.fast_detection_fraction},
                             {"status", r.status}});
    return j;
}

inline std::vector<ResultRow> results_from_json(const nlohmann::json& j) {
    std::vector<ResultRow> rows;
    for (const auto& rj : j.at("rows")) {
        ResultRow r;
        r.method = rj.at("method").get<std::string>();
        r.experiment = rj.at("experiment").get<int>();
        r.offload_fraction = rj.at("offload_fraction").get<double>();
        r.fog_fraction = rj.at("fog_fraction").get<double>();
        r.cloud_fraction = rj.at("cloud_fraction").get<double>();
        r.error_rate = rj.at("error_rate").get<double>();
        r.mean_energy = rj.at("mean_energy_j").get<double>();
        r.mean_delay = rj.at("mean_delay_s").get<double>();
        r.wall_time_ms = rj.at("wall_time_ms").get<double>();
        r.intermediate_problems = rj.at("intermediate_problems").get<double>();
        r.mp_iterations = rj.at("mp_iterations").get<double>();
        r.fast_detection_fraction = rj.at("fast_detection_fraction").get<double>();
        r.status = rj.at("status").get<std::string>();
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string results_to_csv(const std::vector<ResultRow>& rows) {
    std::ostringstream out;
    out.precision(17);
    const auto& cols = result_columns();
    for (size_t i = 0; i < cols.size(); ++i)
        out << cols[i] << (i + 1 < cols.size() ? "," : "\n");
    for (const ResultRow& r : rows)
        out << r.method << ',' << r.experiment << ',' << r.offload_fraction
            << ',' << r.fog_fraction << ',' << r.cloud_fraction << ','
            << r.error_rate << ',' << r.mean_energy << ',' << r.mean_delay
            << ',' << r.wall_time_ms << ',' << r.intermediate_problems << ','
            << r.mp_iterations << ',' << r.fast_detection_fraction << ','
            << r.status << '\n';
    return out.str();
}

inline void emit_results(const std::vector<ResultRow>& rows,
                         const std::string& path, const std::string& format) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    if (format == "csv")
        f << results_to_csv(rows);
    else if (format == "json")
        f << results_to_json(rows).dump(2) << '\n';
    else
        throw std::invalid_argument("unknown format: " + format);
}

}  // namespace fogopt
