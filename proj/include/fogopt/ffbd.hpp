// fogopt/ffbd.hpp - feasibility-finding Benders decomposition: a binary
// master problem minimizing energy under an accumulating cut set, and
// per-fog-node feasibility subproblems whose infeasibility produces new
// cuts. Terminates when every subproblem is feasible (optimal) or the
// master is infeasible (the original problem is infeasible).

#pragma once

#include <array>
#include <future>
#include <optional>
#include <stdexcept>
#include <thread>
#include <vector>

#include "fogopt/bnb.hpp"
#include "fogopt/model.hpp"
#include "fogopt/subproblem.hpp"

namespace fogopt {

// ─── Cut set ────────────────────────────────────────────────────────────────

struct CutSet {
    std::vector<Cut> cuts;
    std::array<long, 5> count_by_kind{};  // indexed by CutKind

    void add(Cut c) {
        ++count_by_kind[static_cast<size_t>(c.kind)];
        cuts.push_back(std::move(c));
    }
    long count(CutKind k) const {
        return count_by_kind[static_cast<size_t>(k)];
    }
};

// ─── Prefixed-decision predicates ───────────────────────────────────────────

/// Local execution beats every offload option in energy and meets the
/// deadline: the task can be pre-decided local.
inline bool prefix_forced_local(const SystemInstance& in, int i) {
    const Task& t = in.tasks[i];
    if (local_delay(t, in.profiles[i]) > t.deadline) return false;
    double el = local_energy(t, in.profiles[i]);
    for (int j = 0; j < in.num_nodes(); ++j)
        if (el >= fog_energy(t, in.profiles[i], j)) return false;
    return true;
}

/// The cloud path cannot meet the deadline at any rate.
inline bool prefix_no_cloud(const SystemInstance& in, int i) {
    return cloud_residual_deadline(in.tasks[i], in.cloud) <= 0.0;
}

/// Local execution misses the deadline outright: the task must offload.
inline bool prefix_must_offload(const SystemInstance& in, int i) {
    return local_delay(in.tasks[i], in.profiles[i]) > in.tasks[i].deadline;
}

/// Initial cut set: the 3(M+1) resource cutting-planes, plus prefixed
/// decision cuts fixing dominated-and-feasible tasks local, forbidding the
/// cloud path when the residual deadline is nonpositive, and forbidding
/// local execution when the local delay already misses the deadline.
inline CutSet init_cuts(const SystemInstance& in) {
    CutSet cs;
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();

    // Per-task relative sizes; the cloud variant only where the path exists.
    std::vector<RelativeSize> fog_rel(n);
    std::vector<std::optional<RelativeSize>> cloud_rel(n);
    for (int i = 0; i < n; ++i) {
        fog_rel[i] = *relative_size(in.tasks[i], ExecSite::Fog, in.cloud);
        cloud_rel[i] = relative_size(in.tasks[i], ExecSite::Cloud, in.cloud);
    }

    for (int j = 0; j < nodes; ++j) {
        const FogNode& node = in.fog_nodes[j];
        Cut up{CutKind::ResourceUp, {}, 1.0};
        Cut down{CutKind::ResourceDown, {}, 1.0};
        Cut cpu{CutKind::ResourceCpu, {}, 1.0};
        int fog_slot = placement_slot(Placement::fog(j), nodes);
        int cloud_slot = placement_slot(Placement::cloud(j), nodes);
        bool has_cloud = placement_allowed(Placement::cloud(j), nodes);
        for (int i = 0; i < n; ++i) {
            up.terms.emplace_back(i, fog_slot, fog_rel[i].input / node.uplink_cap);
            down.terms.emplace_back(i, fog_slot, fog_rel[i].output / node.downlink_cap);
            cpu.terms.emplace_back(i, fog_slot, fog_rel[i].cpu / node.cpu_cap);
            if (has_cloud && cloud_rel[i]) {
                up.terms.emplace_back(i, cloud_slot, cloud_rel[i]->input / node.uplink_cap);
                down.terms.emplace_back(i, cloud_slot, cloud_rel[i]->output / node.downlink_cap);
                // The cloud-side CPU coefficients are zero by Eq. (22).
            }
        }
        cs.add(std::move(up));
        cs.add(std::move(down));
        cs.add(std::move(cpu));
    }

    for (int i = 0; i < n; ++i) {
        if (prefix_forced_local(in, i)) {
            // Local dominates every offload option: force x_i^l = 1 by
            // forbidding all offload slots.
            Cut c{CutKind::Prefixed, {}, 0.0};
            for (int j = 0; j < nodes; ++j)
                c.terms.emplace_back(i, placement_slot(Placement::fog(j), nodes), 1.0);
            for (int j = 0; j + 1 < nodes; ++j)
                c.terms.emplace_back(i, placement_slot(Placement::cloud(j), nodes), 1.0);
            cs.add(std::move(c));
        }
        if (prefix_no_cloud(in, i)) {
            Cut c{CutKind::Prefixed, {}, 0.0};
            for (int j = 0; j + 1 < nodes; ++j)
                c.terms.emplace_back(i, placement_slot(Placement::cloud(j), nodes), 1.0);
            cs.add(std::move(c));
        }
        if (prefix_must_offload(in, i)) {
            // Local execution is ineligible; the task must offload.
            Cut c{CutKind::Prefixed, {}, -1.0};
            for (int j = 0; j < nodes; ++j)
                c.terms.emplace_back(i, placement_slot(Placement::fog(j), nodes), -1.0);
            for (int j = 0; j + 1 < nodes; ++j)
                c.terms.emplace_back(i, placement_slot(Placement::cloud(j), nodes), -1.0);
            cs.add(std::move(c));
        }
    }
    return cs;
}

// ─── Master problem ─────────────────────────────────────────────────────────

namespace detail {

/// LP node program of the master: decision variables of the free tasks in
/// [0,1], one-hot equality rows, and all cuts with fixed-task contributions
/// folded into the right-hand sides. Prefixed forcings are applied
/// structurally (the forced/forbidden variables are never created) so the
/// relaxation keeps a strict interior for the barrier.
inline RelaxedBuild build_master_program(const SystemInstance& in,
                                         const CutSet& cuts,
                                         std::span<const int> fixed) {
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();
    RelaxedBuild out;
    ConvexProgram& prog = out.program;
    VariableMap& vm = out.vmap;
    vm.num_tasks = n;
    vm.num_nodes = nodes;
    vm.x_vars.assign(n, std::vector<int>(option_length(nodes), -1));
    vm.r_vars.assign(static_cast<size_t>(n) * nodes, {});

    vm.forced_slot.assign(n, -1);
    std::vector<int> resolved(fixed.begin(), fixed.end());
    for (int i = 0; i < n; ++i) {
        if (resolved[i] == kFreeTask && prefix_forced_local(in, i)) {
            resolved[i] = placement_slot(Placement::local(), nodes);
            vm.forced_slot[i] = resolved[i];
        }
        if (resolved[i] != kFreeTask) {
            Placement p = slot_placement(resolved[i], nodes);
            if ((p.kind == PlacementKind::Local && prefix_must_offload(in, i)) ||
                (p.kind == PlacementKind::Cloud && prefix_no_cloud(in, i))) {
                out.infeasible_const = true;
                return out;
            }
            prog.objective_constant += energy_of_slot(in, i, resolved[i]);
            continue;
        }
        bool no_cloud = prefix_no_cloud(in, i);
        bool no_local = prefix_must_offload(in, i);
        ConstraintExpr onehot;
        onehot.rhs = 1.0;
        for (const Placement& p : lfc_placements(nodes)) {
            if (no_local && p.kind == PlacementKind::Local) continue;
            if (no_cloud && p.kind == PlacementKind::Cloud) continue;
            int xv = prog.add_variable(0.0, 1.0);
            int slot = placement_slot(p, nodes);
            vm.x_vars[i][slot] = xv;
            prog.objective[xv] = energy_of_slot(in, i, slot);
            onehot.linear.push_back({xv, 1.0});
        }
        prog.equalities.push_back(std::move(onehot));
    }

    for (const Cut& c : cuts.cuts) {
        // Prefixed cuts are enforced structurally above; their rows would sit
        // at zero slack and starve the barrier of an interior.
        if (c.kind == CutKind::Prefixed) continue;
        ConstraintExpr row;
        row.rhs = c.rhs;
        for (const auto& [task, slot, coef] : c.terms) {
            if (resolved[task] == kFreeTask) {
                int xv = vm.x_vars[task][slot];
                if (xv >= 0) row.linear.push_back({xv, coef});
            } else if (resolved[task] == slot) {
                row.rhs -= coef;
            }
        }
        if (row.linear.empty()) {
            // Fully substituted cut: decide it now instead of handing the
            // barrier a zero-slack row.
            if (row.rhs < -1e-12) {
                out.infeasible_const = true;
                return out;
            }
            continue;
        }
        prog.inequalities.push_back(std::move(row));
    }
    return out;
}

inline bool master_option_open(const SystemInstance& in, int task,
                               const Placement& p) {
    if (prefix_forced_local(in, task)) return p.kind == PlacementKind::Local;
    if (p.kind == PlacementKind::Local) return !prefix_must_offload(in, task);
    if (p.kind == PlacementKind::Cloud) return !prefix_no_cloud(in, task);
    return true;
}

/// Cheap cut-feasible assignment for seeding the master search: every task
/// takes its cheapest option (processor order breaking energy ties) that
/// keeps all nonnegative cuts satisfied. Returns the assignment energy, or
/// +inf when the greedy pass fails; the point itself is discarded, only the
/// bound is used.
inline double greedy_master_bound(const SystemInstance& in, const CutSet& cuts,
                                  const BranchOrder& order) {
    const int nodes = in.num_nodes();
    std::vector<double> lhs(cuts.cuts.size(), 0.0);
    OffloadDecision chosen(in.num_tasks(), nodes);

    for (int task : order.task_order) {
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
            if (!master_option_open(in, task, p)) continue;
            int slot = placement_slot(p, nodes);
            bool ok = true;
            for (size_t c = 0; c < cuts.cuts.size() && ok; ++c) {
                const Cut& cut = cuts.cuts[c];
                bool nonneg = true;
                double add = 0.0;
                for (const auto& [ct, cs, coef] : cut.terms) {
                    if (coef < 0.0) nonneg = false;
                    if (ct == task && cs == slot) add += coef;
                }
                if (nonneg && lhs[c] + add > cut.rhs + 1e-12) ok = false;
            }
            if (!ok) continue;
            for (size_t c = 0; c < cuts.cuts.size(); ++c)
                for (const auto& [ct, cs, coef] : cuts.cuts[c].terms)
                    if (ct == task && cs == slot) lhs[c] += coef;
            chosen.set(task, p);
            placed = true;
            break;
        }
        if (!placed) return kInfinity;
    }
    for (size_t c = 0; c < cuts.cuts.size(); ++c)
        if (lhs[c] > cuts.cuts[c].rhs + 1e-12) return kInfinity;
    return total_energy(chosen, in);
}

}  // namespace detail

/// Exact minimum-energy binary assignment under the cut set, via
/// branch-and-bound over LP relaxations with the shared DFS machinery.
/// `seed_incumbent` may carry a known upper bound (warm start); a greedy
/// cut-feasible bound seeds the search otherwise.
inline BnbOutcome solve_master(const SystemInstance& in, const CutSet& cuts,
                               const BranchOrder& order,
                               const SolveOptions& solver = {},
                               double seed_incumbent = kInfinity) {
    double greedy = detail::greedy_master_bound(in, cuts, order);
    if (std::isfinite(greedy))
        seed_incumbent =
            std::min(seed_incumbent, greedy + 1e-5 * (1.0 + std::abs(greedy)));

    BnbConfig cfg;
    cfg.order = order;
    cfg.solver = solver;
    cfg.seed_incumbent = seed_incumbent;
    // Subproblem cuts single out their node, so nodes they touch leave
    // their interchangeability class.
    cfg.node_class = node_equivalence_classes(in);
    std::vector<char> cut_touched(in.num_nodes(), 0);
    for (const Cut& c : cuts.cuts) {
        if (c.kind != CutKind::Subproblem) continue;
        for (const auto& [task, slot, coef] : c.terms) {
            Placement p = slot_placement(slot, in.num_nodes());
            if (p.kind != PlacementKind::Local) cut_touched[p.node] = 1;
        }
    }
    int next_cls = *std::max_element(cfg.node_class.begin(),
                                     cfg.node_class.end()) + 1;
    for (int j = 0; j < in.num_nodes(); ++j)
        if (cut_touched[j]) cfg.node_class[j] = next_cls++;
    // Mirror the prefixed eligibility cuts so branching never proposes them.
    cfg.option_mask = [&in](int task, const Placement& p) {
        return detail::master_option_open(in, task, p);
    };
    auto build = [&in, &cuts](std::span<const int> fixed) {
        return detail::build_master_program(in, cuts, fixed);
    };
    return branch_and_bound(in, build, cfg);
}

// ─── The decomposition loop ─────────────────────────────────────────────────

struct FfbdStats {
    int mp_iterations = 0;
    long standard_solver_calls = 0;  // SP2 solves
    long fast_detections = 0;        // subproblems settled without a solver
    long master_lp_solves = 0;       // LP relaxations inside the master B&B
    std::array<long, 5> cuts_by_kind{};
    double master_objective = 0.0;

    double fast_detection_fraction() const {
        long total = standard_solver_calls + fast_detections;
        return total > 0 ? static_cast<double>(fast_detections) / total : 0.0;
    }
};

struct FfbdOptions {
    SolveOptions solver;
    BranchOrder master_order;  // empty task_order -> LFC default
    std::optional<Solution> warm_start;
    bool parallel_subproblems = std::thread::hardware_concurrency() > 1;
    int max_iterations = 10000;
};

struct FfbdResult {
    bool feasible = false;
    Solution solution;
    FfbdStats stats;
};

inline FfbdResult ffbd_run(const SystemInstance& in, SubproblemMode mode,
                           const FfbdOptions& options = {}) {
    FfbdResult out;
    FfbdStats& st = out.stats;
    const int nodes = in.num_nodes();

    CutSet cuts = init_cuts(in);
    BranchOrder order = options.master_order.task_order.empty()
                            ? BranchOrder::lfc(in)
                            : options.master_order;

    // A validated warm solution bounds the master from above; seeded just
    // over its value so an equal master optimum is still adopted.
    double seed = kInfinity;
    if (options.warm_start &&
        validate_solution(*options.warm_start, in).empty()) {
        double e = options.warm_start->total_energy;
        seed = e + 1e-5 * (1.0 + std::abs(e));
    }

    double prev_master = -kInfinity;
    for (int k = 1; k <= options.max_iterations; ++k) {
        st.mp_iterations = k;
        BnbOutcome master = solve_master(in, cuts, order, options.solver, seed);
        st.master_lp_solves += master.stats.relaxed_solves;
        if (!master.feasible) {
            st.cuts_by_kind = cuts.count_by_kind;
            return out;  // original problem infeasible
        }
        // Cut sets only grow, so the master value cannot decrease.
        if (master.value < prev_master - 1e-6 * (1.0 + std::abs(prev_master)))
            throw std::logic_error("ffbd: master objective decreased");
        prev_master = master.value;
        st.master_objective = master.value;

        std::vector<Subproblem> subs;
        subs.reserve(nodes);
        for (int j = 0; j < nodes; ++j)
            subs.push_back(make_subproblem(in, j, master.placements));

        std::vector<SubproblemOutcome> outcomes(nodes);
        if (options.parallel_subproblems && nodes > 1) {
            std::vector<std::future<SubproblemOutcome>> futs;
            futs.reserve(nodes);
            for (int j = 0; j < nodes; ++j)
                futs.push_back(std::async(std::launch::async, [&, j] {
                    return solve_subproblem(in, subs[j], mode, options.solver);
                }));
            for (int j = 0; j < nodes; ++j) outcomes[j] = futs[j].get();
        } else {
            for (int j = 0; j < nodes; ++j)
                outcomes[j] = solve_subproblem(in, subs[j], mode, options.solver);
        }

        bool all_feasible = true;
        for (int j = 0; j < nodes; ++j) {  // cuts appended in node order
            const SubproblemOutcome& oc = outcomes[j];
            st.standard_solver_calls += oc.solver_calls;
            if (!subs[j].empty() && oc.solver_calls == 0) ++st.fast_detections;
            if (oc.status == SubproblemStatus::Infeasible) {
                all_feasible = false;
                cuts.add(*oc.cut);
            }
        }
        if (all_feasible) {
            ResourceAllocation alloc(in.num_tasks(), nodes);
            for (int j = 0; j < nodes; ++j)
                for (const auto& [task, rt] : outcomes[j].allocation)
                    alloc.at(task, j) = rt;
            out.feasible = true;
            out.solution = make_solution(in, master.placements, std::move(alloc));
            st.cuts_by_kind = cuts.count_by_kind;
            return out;
        }
    }
    throw std::logic_error("ffbd: iteration cap exceeded");
}

}  // namespace fogopt
