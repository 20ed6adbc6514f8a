// fogopt/baselines.hpp - the comparison policies: WOP (all local), AOP (all
// offloaded, minimum mean delay), and ROP (relax, round, repair).

#pragma once

#include <optional>
#include <vector>

#include "fogopt/bnb.hpp"
#include "fogopt/relaxation.hpp"
#include "fogopt/subproblem.hpp"

namespace fogopt {

// ─── WOP ────────────────────────────────────────────────────────────────────

/// Everything runs locally; deadline misses are reported through the error
/// accounting, never prevented.
inline Solution wop(const SystemInstance& in) {
    std::vector<Placement> ps(in.num_tasks(), Placement::local());
    return make_solution(in, ps,
                         ResourceAllocation(in.num_tasks(), in.num_nodes()));
}

// ─── AOP ────────────────────────────────────────────────────────────────────

struct AopResult {
    bool feasible = false;
    Solution solution;
    double mean_delay = 0.0;  // the minimized objective
    SearchStats stats;
};

/// All tasks offloaded, minimizing the average delay, via the same
/// branch-and-bound machinery with an epigraph delay objective.
inline AopResult aop(const SystemInstance& in, const SolveOptions& solver = {}) {
    BnbConfig cfg;
    cfg.order = BranchOrder::lfc(in);
    cfg.solver = solver;
    cfg.option_mask = [&in](int task, const Placement& p) {
        if (p.kind == PlacementKind::Local) return false;
        return placement_feasible_alone(in, task, p);
    };
    RelaxationOptions ropts;
    ropts.exclude_local = true;
    ropts.delay_objective = true;
    auto build = [&in, ropts](std::span<const int> fixed) {
        return build_relaxed_program(in, fixed, ropts);
    };
    BnbOutcome bo = branch_and_bound(in, build, cfg);

    AopResult out;
    out.stats = bo.stats;
    if (!bo.feasible) return out;
    out.feasible = true;
    out.mean_delay = bo.value;
    ResourceAllocation alloc =
        extract_allocation(in, bo.placements, bo.point, bo.vmap);
    out.solution = make_solution(in, bo.placements, std::move(alloc));
    return out;
}

// ─── ROP ────────────────────────────────────────────────────────────────────

struct RopResult {
    bool feasible = false;  // the fully-relaxed problem had a solution
    Solution solution;
    double error_rate = 0.0;
    double relaxed_energy = 0.0;  // objective of the fully-relaxed problem
};

/// Solves the fully-relaxed problem, rounds every task to its largest
/// decision component (ties in LFC order), then re-solves the per-node
/// resource allocations with the decisions fixed. The knowingly unreliable
/// baseline: constraint violations are reported, never repaired further.
inline RopResult rop(const SystemInstance& in, const SolveOptions& solver = {}) {
    RopResult out;
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();

    std::vector<int> all_free(n, kFreeTask);
    RelaxedBuild relaxed = build_relaxed_program(in, all_free);
    SolveResult res = solve_program(relaxed.program, solver);
    if (res.status != SolveStatus::Optimal) return out;
    out.relaxed_energy = res.objective_value;

    // Round to the largest component; the builder lays variables out in LFC
    // order, so keeping the first strict maximum breaks ties toward LFC.
    std::vector<Placement> ps(n);
    for (int i = 0; i < n; ++i) {
        double best = -1.0;
        for (const Placement& p : lfc_placements(nodes)) {
            int xv = relaxed.vmap.x_vars[i][placement_slot(p, nodes)];
            if (xv >= 0 && res.point[xv] > best) {
                best = res.point[xv];
                ps[i] = p;
            }
        }
    }

    // Fixed decisions; per-node SP2 re-solve for the allocations. Tasks on
    // nodes whose subproblem is infeasible keep the slack-optimal rates, so
    // the violation surfaces through validation.
    ResourceAllocation alloc(n, nodes);
    for (int j = 0; j < nodes; ++j) {
        Subproblem sub = make_subproblem(in, j, ps);
        if (!sub.cloud_residual_ok) {
            // Drop the impossible cloud tasks; their zero rates flag errors.
            Subproblem filtered;
            filtered.node = j;
            filtered.fog_tasks = sub.fog_tasks;
            filtered.fog_rel = sub.fog_rel;
            for (size_t k = 0; k < sub.cloud_tasks.size(); ++k) {
                auto rel = relative_size(in.tasks[sub.cloud_tasks[k]],
                                         ExecSite::Cloud, in.cloud);
                if (rel) {
                    filtered.cloud_tasks.push_back(sub.cloud_tasks[k]);
                    filtered.cloud_rel.push_back(*rel);
                }
            }
            sub = std::move(filtered);
        }
        if (sub.empty()) continue;
        Sp2Solve sp2 = solve_sp2(sub, in.fog_nodes[j], solver);
        if (sp2.result.status != SolveStatus::Optimal)
            throw std::runtime_error("rop: SP2 solver did not converge");
        for (const auto& [task, rt] : sp2.allocation) alloc.at(task, j) = rt;
    }

    out.feasible = true;
    out.solution = make_solution(in, ps, std::move(alloc));
    out.error_rate = error_rate(out.solution, in);
    return out;
}

}  // namespace fogopt
