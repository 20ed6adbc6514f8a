// fogopt/ibba.hpp - the improved branch-and-bound solver: task-placement
// branching with subproblem simplification and relaxation bounding, with the
// LFC/LCF optimal-solution-selection orders.

#pragma once

#include <cmath>
#include <functional>
#include <span>

#include "fogopt/bnb.hpp"
#include "fogopt/relaxation.hpp"
#include "fogopt/subproblem.hpp"

namespace fogopt {

namespace detail {

/// Greedy upper bound for seeding the search: tasks take their cheapest
/// option (processor order breaking energy ties) whose node still passes
/// the proportional fast-feasibility test. The assignment is provably
/// feasible, only its energy is kept.
inline double greedy_primal_bound(const SystemInstance& in,
                                  const BranchOrder& order) {
    const int nodes = in.num_nodes();
    std::vector<Subproblem> loads(nodes);
    for (int j = 0; j < nodes; ++j) loads[j].node = j;
    double energy = 0.0;
    for (int task : order.task_order) {
        const Task& t = in.tasks[task];
        std::vector<Placement> ranked;
        for (const Placement& p : order.processor_order)
            if (placement_allowed(p, nodes)) ranked.push_back(p);
        std::stable_sort(ranked.begin(), ranked.end(),
                         [&](const Placement& a, const Placement& b) {
                             return energy_of_placement(in, task, a) <
                                    energy_of_placement(in, task, b);
                         });
        bool placed = false;
        for (const Placement& p : ranked) {
            if (p.kind == PlacementKind::Local) {
                if (local_delay(t, in.profiles[task]) > t.deadline) continue;
                energy += local_energy(t, in.profiles[task]);
                placed = true;
                break;
            }
            auto rel = relative_size(
                t, p.kind == PlacementKind::Fog ? ExecSite::Fog : ExecSite::Cloud,
                in.cloud);
            if (!rel) continue;
            Subproblem& s = loads[p.node];
            if (p.kind == PlacementKind::Fog) {
                s.fog_tasks.push_back(task);
                s.fog_rel.push_back(*rel);
            } else {
                s.cloud_tasks.push_back(task);
                s.cloud_rel.push_back(*rel);
            }
            if (fast_feasible(s, in.fog_nodes[p.node])) {
                energy += energy_of_placement(in, task, p);
                placed = true;
                break;
            }
            if (p.kind == PlacementKind::Fog) {
                s.fog_tasks.pop_back();
                s.fog_rel.pop_back();
            } else {
                s.cloud_tasks.pop_back();
                s.cloud_rel.pop_back();
            }
        }
        if (!placed) return kInfinity;
    }
    return energy;
}

}  // namespace detail

struct IbbaOptions {
    SolveOptions solver;
    bool prefix_capacity_check = true;
    /// Skip branches whose newly fixed option cannot meet its deadline even
    /// with the whole node to itself (a sound integer-completion test).
    bool prune_impossible_options = true;
    double seed_incumbent = kInfinity;
    std::function<void(std::span<const int>)> visit_hook;
};

struct IbbaResult {
    bool feasible = false;
    Solution solution;
    SearchStats stats;
};

inline IbbaResult ibba_solve(const SystemInstance& in, const BranchOrder& order,
                             const IbbaOptions& options = {}) {
    BnbConfig cfg;
    cfg.order = order;
    cfg.solver = options.solver;
    cfg.prefix_capacity_check = options.prefix_capacity_check;
    cfg.seed_incumbent = options.seed_incumbent;
    double greedy = detail::greedy_primal_bound(in, order);
    if (std::isfinite(greedy))
        cfg.seed_incumbent = std::min(
            cfg.seed_incumbent, greedy + 1e-5 * (1.0 + std::abs(greedy)));
    cfg.node_class = node_equivalence_classes(in);
    cfg.visit_hook = options.visit_hook;
    if (options.prune_impossible_options)
        cfg.option_mask = [&in](int task, const Placement& p) {
            return placement_feasible_alone(in, task, p);
        };

    auto build = [&in](std::span<const int> fixed) {
        return build_relaxed_program(in, fixed);
    };
    BnbOutcome bo = branch_and_bound(in, build, cfg);

    IbbaResult out;
    out.stats = bo.stats;
    if (!bo.feasible) return out;
    out.feasible = true;
    ResourceAllocation alloc =
        extract_allocation(in, bo.placements, bo.point, bo.vmap);
    out.solution = make_solution(in, bo.placements, std::move(alloc));
    return out;
}

/// Worst-case intermediate-problem count of the placement tree,
/// (2(M+1)+1)^(N+1) / (2(M+1)).
inline double ibba_worst_case_nodes(int num_tasks, int num_real_fog) {
    double arity = 2.0 * (num_real_fog + 1) + 1.0;
    return std::pow(arity, num_tasks + 1) / (arity - 1.0);
}

}  // namespace fogopt
