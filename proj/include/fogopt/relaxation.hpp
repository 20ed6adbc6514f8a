// fogopt/relaxation.hpp - construction of the (partly-)relaxed convex
// programs: binary decisions relaxed to [0,1], with any fixed task placement
// eliminating that task's decision variables and the rate variables of all
// unselected (task, node) pairs.

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "fogopt/convex.hpp"
#include "fogopt/model.hpp"

namespace fogopt {

inline constexpr int kFreeTask = -1;  // slot value marking an unfixed task

/// Where each model quantity landed in a ConvexProgram's variable vector.
struct VariableMap {
    struct RVars {
        int up = -1, down = -1, cpu = -1;
    };
    int num_tasks = 0;
    int num_nodes = 0;
    std::vector<std::vector<int>> x_vars;  // [task][slot] -> var or -1
    std::vector<RVars> r_vars;             // [task * num_nodes + node]
    /// Slot a builder resolved structurally for a task the caller left free
    /// (presolved forcings); -1 otherwise. May be empty when unused.
    std::vector<int> forced_slot;

    RVars& r(int task, int node) { return r_vars[task * num_nodes + node]; }
    const RVars& r(int task, int node) const {
        return r_vars[task * num_nodes + node];
    }
    int forced(int task) const {
        return forced_slot.empty() ? -1 : forced_slot[task];
    }
};

struct RelaxedBuild {
    ConvexProgram program;
    VariableMap vmap;
    /// Set when a fixed placement is impossible outright (local past the
    /// deadline, or a cloud path with nonpositive residual deadline).
    bool infeasible_const = false;
};

struct RelaxationOptions {
    bool exclude_local = false;    // forbid local execution (the AOP variant)
    bool delay_objective = false;  // minimize mean delay via epigraph variables
};

/// Builds the partly-relaxed program for `fixed_slots` (kFreeTask = still
/// free, otherwise a placement slot). With no fixes this is the fully
/// relaxed problem; with all tasks fixed it is the pure resource-allocation
/// feasibility program.
inline RelaxedBuild build_relaxed_program(const SystemInstance& in,
                                          std::span<const int> fixed_slots,
                                          const RelaxationOptions& opt = {}) {
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();
    RelaxedBuild out;
    ConvexProgram& prog = out.program;
    VariableMap& vm = out.vmap;
    vm.num_tasks = n;
    vm.num_nodes = nodes;
    vm.x_vars.assign(n, std::vector<int>(option_length(nodes), -1));
    vm.r_vars.assign(static_cast<size_t>(n) * nodes, {});

    std::vector<int> tau(n, -1);

    for (int i = 0; i < n; ++i) {
        const Task& t = in.tasks[i];
        const int fixed = fixed_slots[i];
        const bool free_task = fixed == kFreeTask;

        if (opt.delay_objective) {
            tau[i] = prog.add_variable(0.0, t.deadline);
            prog.objective[tau[i]] = 1.0 / n;
        }

        // Decide which placements participate for this task.
        std::vector<Placement> active;
        if (free_task) {
            for (const Placement& p : lfc_placements(nodes))
                if (!(opt.exclude_local && p.kind == PlacementKind::Local))
                    active.push_back(p);
        } else {
            active.push_back(slot_placement(fixed, nodes));
        }

        // Rate variables for every (task, node) pair some active placement
        // touches.
        for (const Placement& p : active) {
            if (p.kind == PlacementKind::Local) continue;
            VariableMap::RVars& rv = vm.r(i, p.node);
            if (rv.up < 0) rv.up = prog.add_variable(kRateFloor, kInfinity);
            if (t.output_size > 0 && rv.down < 0)
                rv.down = prog.add_variable(kRateFloor, kInfinity);
            if (p.kind == PlacementKind::Fog && rv.cpu < 0)
                rv.cpu = prog.add_variable(kRateFloor, kInfinity);
        }

        // Delay row: sum of the active placements' contributions <= deadline
        // (or <= tau_i under the delay objective).
        ConstraintExpr delay;
        delay.rhs = t.deadline;
        if (opt.delay_objective) {
            delay.linear.push_back({tau[i], -1.0});
            delay.rhs = 0.0;
        }

        double energy_fixed = 0.0;
        for (const Placement& p : active) {
            int xv = -1;
            if (free_task) {
                xv = prog.add_variable(0.0, 1.0);
                vm.x_vars[i][placement_slot(p, nodes)] = xv;
                if (!opt.delay_objective)
                    prog.objective[xv] = energy_of_placement(in, i, p);
            } else {
                energy_fixed = energy_of_placement(in, i, p);
            }
            switch (p.kind) {
                case PlacementKind::Local: {
                    double tl = local_delay(t, in.profiles[i]);
                    if (free_task) {
                        delay.curves.push_back({tl, xv, -1});
                    } else {
                        if (tl > t.deadline) {
                            out.infeasible_const = true;
                            return out;
                        }
                        delay.rhs -= tl;
                    }
                    break;
                }
                case PlacementKind::Fog: {
                    const VariableMap::RVars& rv = vm.r(i, p.node);
                    delay.curves.push_back({t.input_size, xv, rv.up});
                    if (t.output_size > 0)
                        delay.curves.push_back({t.output_size, xv, rv.down});
                    delay.curves.push_back({t.cpu_cycles, xv, rv.cpu});
                    break;
                }
                case PlacementKind::Cloud: {
                    const VariableMap::RVars& rv = vm.r(i, p.node);
                    double fixed_part = (t.input_size + t.output_size) /
                                            in.cloud.backhaul_rate +
                                        t.cpu_cycles / in.cloud.cpu_rate_per_task;
                    if (free_task) {
                        delay.curves.push_back({t.input_size, xv, rv.up});
                        if (t.output_size > 0)
                            delay.curves.push_back({t.output_size, xv, rv.down});
                        delay.curves.push_back({fixed_part, xv, -1});
                    } else {
                        if (t.deadline - fixed_part <= 0.0) {
                            out.infeasible_const = true;
                            return out;
                        }
                        delay.curves.push_back({t.input_size, -1, rv.up});
                        if (t.output_size > 0)
                            delay.curves.push_back({t.output_size, -1, rv.down});
                        delay.rhs -= fixed_part;
                    }
                    break;
                }
            }
        }
        prog.objective_constant += energy_fixed;
        if (!delay.linear.empty() || !delay.curves.empty())
            prog.inequalities.push_back(std::move(delay));

        if (free_task) {
            ConstraintExpr onehot;
            onehot.rhs = 1.0;
            for (int s = 0; s < option_length(nodes); ++s)
                if (vm.x_vars[i][s] >= 0)
                    onehot.linear.push_back({vm.x_vars[i][s], 1.0});
            prog.equalities.push_back(std::move(onehot));
        }
    }

    // Per-node capacity rows over whichever rate variables exist.
    for (int j = 0; j < nodes; ++j) {
        ConstraintExpr up, down, cpu;
        up.rhs = in.fog_nodes[j].uplink_cap;
        down.rhs = in.fog_nodes[j].downlink_cap;
        cpu.rhs = in.fog_nodes[j].cpu_cap;
        for (int i = 0; i < n; ++i) {
            const VariableMap::RVars& rv = vm.r(i, j);
            if (rv.up >= 0) up.linear.push_back({rv.up, 1.0});
            if (rv.down >= 0) down.linear.push_back({rv.down, 1.0});
            if (rv.cpu >= 0) cpu.linear.push_back({rv.cpu, 1.0});
        }
        if (!up.linear.empty()) prog.inequalities.push_back(std::move(up));
        if (!down.linear.empty()) prog.inequalities.push_back(std::move(down));
        if (!cpu.linear.empty()) prog.inequalities.push_back(std::move(cpu));
    }

    if (opt.delay_objective) prog.objective_constant = 0.0;
    return out;
}

/// Reads the rate variables of each task's selected placement out of a
/// solver point. Unselected pairs stay zero.
inline ResourceAllocation extract_allocation(const SystemInstance& in,
                                             const std::vector<Placement>& ps,
                                             const Eigen::VectorXd& point,
                                             const VariableMap& vm) {
    ResourceAllocation alloc(in.num_tasks(), in.num_nodes());
    for (int i = 0; i < in.num_tasks(); ++i) {
        const Placement& p = ps[i];
        if (p.kind == PlacementKind::Local) continue;
        const VariableMap::RVars& rv = vm.r(i, p.node);
        RateTriple& r = alloc.at(i, p.node);
        if (rv.up >= 0) r.up = point[rv.up];
        if (rv.down >= 0) r.down = point[rv.down];
        if (p.kind == PlacementKind::Fog && rv.cpu >= 0) r.cpu = point[rv.cpu];
    }
    return alloc;
}

/// Assembles a Solution with the derived energy/delay vectors.
inline Solution make_solution(const SystemInstance& in,
                              const std::vector<Placement>& ps,
                              ResourceAllocation alloc) {
    Solution sol;
    sol.decision = OffloadDecision::from_placements(ps, in.num_nodes());
    sol.allocation = std::move(alloc);
    sol.total_energy = total_energy(sol.decision, in);
    sol.per_task_delay.resize(in.num_tasks());
    for (int i = 0; i < in.num_tasks(); ++i)
        sol.per_task_delay[i] = task_delay(in, i, ps[i], sol.allocation);
    return sol;
}

}  // namespace fogopt
