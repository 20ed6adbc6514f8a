// fogopt/bnb.hpp - depth-first branch-and-bound over whole-task placements:
// a (2(M+1)+1)-ary tree of height N traversed with an explicit stack.
// Children are pushed in reverse processor order so the stack pops them in
// processor order, which makes the first optimum found the leftmost one and
// realizes the LFC/LCF selection policies.

#pragma once

#include <functional>
#include <numeric>
#include <span>
#include <vector>

#include "fogopt/convex.hpp"
#include "fogopt/model.hpp"
#include "fogopt/relaxation.hpp"

namespace fogopt {

// ─── Branch orders ──────────────────────────────────────────────────────────

/// Task visiting order plus the per-task processor visit order.
struct BranchOrder {
    std::vector<int> task_order;              // permutation of 0..N-1
    std::vector<Placement> processor_order;   // child visit order

    static BranchOrder lfc(const SystemInstance& in) {
        BranchOrder o;
        o.task_order.resize(in.num_tasks());
        std::iota(o.task_order.begin(), o.task_order.end(), 0);
        o.processor_order = lfc_placements(in.num_nodes());
        return o;
    }
    static BranchOrder lcf(const SystemInstance& in) {
        BranchOrder o = lfc(in);
        o.processor_order = lcf_placements(in.num_nodes());
        return o;
    }
    /// Branch higher-demand tasks first (optional task priority).
    BranchOrder demand_descending(const SystemInstance& in) const {
        BranchOrder o = *this;
        std::stable_sort(o.task_order.begin(), o.task_order.end(),
                         [&](int a, int b) {
                             return in.tasks[a].cpu_cycles > in.tasks[b].cpu_cycles;
                         });
        return o;
    }
};

// ─── Single-placement feasibility ───────────────────────────────────────────

/// Necessary and (in isolation) sufficient test that a task could meet its
/// deadline at placement `p` with the whole node to itself.
inline bool placement_feasible_alone(const SystemInstance& in, int task,
                                     const Placement& p) {
    const Task& t = in.tasks[task];
    switch (p.kind) {
        case PlacementKind::Local:
            return local_delay(t, in.profiles[task]) <= t.deadline;
        case PlacementKind::Fog: {
            const FogNode& n = in.fog_nodes[p.node];
            double d = t.input_size / n.uplink_cap +
                       safe_ratio(t.output_size, n.downlink_cap) +
                       t.cpu_cycles / n.cpu_cap;
            return d <= t.deadline;
        }
        case PlacementKind::Cloud: {
            if (p.node == in.virtual_node()) return false;
            double residual = cloud_residual_deadline(t, in.cloud);
            if (residual <= 0.0) return false;
            const FogNode& n = in.fog_nodes[p.node];
            return t.input_size / n.uplink_cap +
                       safe_ratio(t.output_size, n.downlink_cap) <=
                   residual;
        }
    }
    return false;
}

// ─── Node interchangeability ────────────────────────────────────────────────

/// Groups nodes that are exact copies of each other: equal capacities and,
/// for every task, equal transmit/receive energies. Class ids are dense and
/// ordered by first appearance.
inline std::vector<int> node_equivalence_classes(const SystemInstance& in) {
    const int nodes = in.num_nodes();
    std::vector<int> cls(nodes, -1);
    int next = 0;
    for (int j = 0; j < nodes; ++j) {
        if (cls[j] >= 0) continue;
        cls[j] = next;
        for (int k = j + 1; k < nodes; ++k) {
            if (cls[k] >= 0) continue;
            const FogNode &a = in.fog_nodes[j], &b = in.fog_nodes[k];
            if (a.uplink_cap != b.uplink_cap || a.downlink_cap != b.downlink_cap ||
                a.cpu_cap != b.cpu_cap || a.is_virtual_cloud != b.is_virtual_cloud)
                continue;
            bool same = true;
            for (const MobileProfile& p : in.profiles)
                if (p.tx_energy[j] != p.tx_energy[k] ||
                    p.rx_energy[j] != p.rx_energy[k]) {
                    same = false;
                    break;
                }
            if (same) cls[k] = cls[j];
        }
        ++next;
    }
    return cls;
}

// ─── Branching ──────────────────────────────────────────────────────────────

/// Children of a node, one per placement of `task`, in visit order.
inline std::vector<std::vector<int>> branch_children(
    std::span<const int> fixed, int task,
    const std::vector<Placement>& processor_order, int num_nodes) {
    std::vector<std::vector<int>> children;
    children.reserve(processor_order.size());
    for (const Placement& p : processor_order) {
        if (!placement_allowed(p, num_nodes)) continue;
        std::vector<int> child(fixed.begin(), fixed.end());
        child[task] = placement_slot(p, num_nodes);
        children.push_back(std::move(child));
    }
    return children;
}

// ─── Driver ─────────────────────────────────────────────────────────────────

struct SearchStats {
    long relaxed_solves = 0;   // convex programs actually solved
    long nodes_visited = 0;
    long pruned_nodes = 0;
    long incumbent_updates = 0;
    long solver_failures = 0;  // IterationLimit outcomes (never silent)
    int max_stack_depth = 0;
};

struct BnbConfig {
    BranchOrder order;
    SolveOptions solver;
    /// Extra filter on branching options per task (beyond the structural
    /// cloud-via-virtual exclusion); empty means allow everything.
    std::function<bool(int task, const Placement&)> option_mask;
    /// Node interchangeability classes (same class id = identical capacity,
    /// energy and constraint footprint). Branching opens at most one fresh
    /// node per class; any completion permutes onto a visited one. Empty
    /// disables the reduction.
    std::vector<int> node_class;
    bool prefix_capacity_check = true;  // aggregate Theorem-4 test on fixed tasks
    double integrality_tol = 1e-6;
    double tie_tol_rel = 1e-7;
    double seed_incumbent = kInfinity;  // warm-start upper bound
    std::function<void(std::span<const int>)> visit_hook;
    long max_nodes = 100'000'000;
};

struct BnbOutcome {
    bool feasible = false;
    std::vector<Placement> placements;
    double value = kInfinity;
    Eigen::VectorXd point;   // solver point of the winning node
    VariableMap vmap;
    SearchStats stats;
};

namespace detail {

/// Theorem-4 aggregate check restricted to the fixed prefix: every fixed
/// task forces rates at least as large as its relative size, so exceeding a
/// capacity already certifies the node's relaxation infeasible.
inline bool prefix_capacity_violated(const SystemInstance& in,
                                     std::span<const int> fixed) {
    const int nodes = in.num_nodes();
    std::vector<double> su(nodes, 0.0), sd(nodes, 0.0), sf(nodes, 0.0);
    for (int i = 0; i < in.num_tasks(); ++i) {
        if (fixed[i] == kFreeTask) continue;
        Placement p = slot_placement(fixed[i], nodes);
        if (p.kind == PlacementKind::Local) continue;
        auto rel = relative_size(in.tasks[i],
                                 p.kind == PlacementKind::Fog ? ExecSite::Fog
                                                              : ExecSite::Cloud,
                                 in.cloud);
        if (!rel) return true;  // cloud residual nonpositive
        su[p.node] += rel->input;
        sd[p.node] += rel->output;
        sf[p.node] += rel->cpu;
    }
    for (int j = 0; j < nodes; ++j) {
        if (su[j] > in.fog_nodes[j].uplink_cap) return true;
        if (sd[j] > in.fog_nodes[j].downlink_cap) return true;
        if (sf[j] > in.fog_nodes[j].cpu_cap) return true;
    }
    return false;
}

inline bool point_is_integral(const Eigen::VectorXd& x, const VariableMap& vm,
                              std::span<const int> fixed, double tol) {
    for (int i = 0; i < vm.num_tasks; ++i) {
        if (fixed[i] != kFreeTask || vm.forced(i) >= 0) continue;
        int ones = 0;
        for (int v : vm.x_vars[i]) {
            if (v < 0) continue;
            double val = x[v];
            if (std::min(val, 1.0 - val) > tol) return false;
            if (val > 0.5) ++ones;
        }
        if (ones != 1) return false;
    }
    return true;
}

inline std::vector<Placement> placements_from_point(
    const Eigen::VectorXd& x, const VariableMap& vm,
    std::span<const int> fixed) {
    std::vector<Placement> out(vm.num_tasks);
    for (int i = 0; i < vm.num_tasks; ++i) {
        if (fixed[i] != kFreeTask) {
            out[i] = slot_placement(fixed[i], vm.num_nodes);
            continue;
        }
        if (vm.forced(i) >= 0) {
            out[i] = slot_placement(vm.forced(i), vm.num_nodes);
            continue;
        }
        for (int s = 0; s < static_cast<int>(vm.x_vars[i].size()); ++s) {
            int v = vm.x_vars[i][s];
            if (v >= 0 && x[v] > 0.5) {
                out[i] = slot_placement(s, vm.num_nodes);
                break;
            }
        }
    }
    return out;
}

}  // namespace detail

/// DFS branch-and-bound (Algorithm-1 discipline) over node programs supplied
/// by `build`. Prunes on bound or relaxation infeasibility, adopts integral
/// relaxed solutions, and keeps the first optimum found on value ties.
inline BnbOutcome branch_and_bound(
    const SystemInstance& in,
    const std::function<RelaxedBuild(std::span<const int>)>& build,
    const BnbConfig& cfg) {
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();
    BnbOutcome out;
    SearchStats& st = out.stats;

    auto option_open = [&](int task, const Placement& p) {
        if (!placement_allowed(p, nodes)) return false;
        return !cfg.option_mask || cfg.option_mask(task, p);
    };

    // A task with no admissible placement at all makes every completion
    // integer-infeasible.
    for (int i = 0; i < n; ++i) {
        bool any = false;
        for (const Placement& p : cfg.order.processor_order)
            if (option_open(i, p)) any = true;
        if (!any) return out;
    }

    auto tie_tol = [&](double incumbent) {
        return cfg.tie_tol_rel * (1.0 + std::abs(incumbent));
    };

    double best = cfg.seed_incumbent;
    std::vector<std::vector<int>> stack;
    stack.emplace_back(n, kFreeTask);

    while (!stack.empty() && st.nodes_visited < cfg.max_nodes) {
        std::vector<int> fixed = std::move(stack.back());
        stack.pop_back();
        ++st.nodes_visited;
        if (cfg.visit_hook) cfg.visit_hook(fixed);

        if (cfg.prefix_capacity_check &&
            detail::prefix_capacity_violated(in, fixed)) {
            ++st.pruned_nodes;
            continue;
        }

        RelaxedBuild node = build(fixed);
        if (node.infeasible_const) {
            ++st.pruned_nodes;
            continue;
        }
        SolveResult res;
        if (node.program.num_variables() > 0) {
            res = solve_program(node.program, cfg.solver);
            ++st.relaxed_solves;
        } else {
            res = solve_program(node.program, cfg.solver);  // constant check
        }
        if (res.status == SolveStatus::Infeasible) {
            ++st.pruned_nodes;
            continue;
        }
        if (res.status == SolveStatus::IterationLimit) {
            ++st.solver_failures;
            // No trustworthy bound; descend unless nothing is left to fix.
            bool leaf = std::none_of(fixed.begin(), fixed.end(),
                                     [](int s) { return s == kFreeTask; });
            if (leaf) {
                ++st.pruned_nodes;
                continue;
            }
            res.objective_value = -kInfinity;
        }

        // A node that cannot clearly improve on the incumbent is dropped;
        // value ties keep the first optimum found.
        double value = res.objective_value;
        if (std::isfinite(best) && value >= best - tie_tol(best)) {
            ++st.pruned_nodes;
            continue;
        }

        bool integral =
            res.status == SolveStatus::Optimal &&
            detail::point_is_integral(res.point, node.vmap, fixed,
                                      cfg.integrality_tol);
        if (integral) {
            best = value;
            out.feasible = true;
            out.value = value;
            out.placements =
                detail::placements_from_point(res.point, node.vmap, fixed);
            out.point = std::move(res.point);
            out.vmap = std::move(node.vmap);
            ++st.incumbent_updates;
            ++st.pruned_nodes;
            continue;
        }

        // Branch the next active task; push children in reverse visit order.
        int task = -1;
        for (int cand : cfg.order.task_order)
            if (fixed[cand] == kFreeTask) {
                task = cand;
                break;
            }
        if (task < 0) continue;  // fully fixed but fractional cannot happen

        // With interchangeable nodes, only the first untouched member of a
        // class is worth opening.
        std::vector<char> node_open(nodes, 1);
        if (!cfg.node_class.empty()) {
            std::vector<char> used(nodes, 0);
            for (int i = 0; i < n; ++i) {
                if (fixed[i] == kFreeTask) continue;
                Placement p = slot_placement(fixed[i], nodes);
                if (p.kind != PlacementKind::Local) used[p.node] = 1;
            }
            int max_cls = *std::max_element(cfg.node_class.begin(),
                                            cfg.node_class.end());
            std::vector<char> fresh_seen(max_cls + 1, 0);
            for (int j = 0; j < nodes; ++j) {
                if (used[j]) continue;
                int cls = cfg.node_class[j];
                if (fresh_seen[cls]) node_open[j] = 0;
                fresh_seen[cls] = 1;
            }
        }

        std::vector<std::vector<int>> children;
        for (const Placement& p : cfg.order.processor_order) {
            if (!option_open(task, p)) continue;
            if (p.kind != PlacementKind::Local && !node_open[p.node]) continue;
            std::vector<int> child = fixed;
            child[task] = placement_slot(p, nodes);
            children.push_back(std::move(child));
        }
        for (auto it = children.rbegin(); it != children.rend(); ++it)
            stack.push_back(std::move(*it));
        st.max_stack_depth =
            std::max(st.max_stack_depth, static_cast<int>(stack.size()));
    }
    return out;
}

}  // namespace fogopt
