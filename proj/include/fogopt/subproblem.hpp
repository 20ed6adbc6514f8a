// fogopt/subproblem.hpp - per-fog-node resource-allocation feasibility: the
// closed-form fast checks (proportional allocation and aggregate-capacity
// contradiction) and the slack-variable program SP2 solved by the barrier
// engine when the fast paths are inconclusive.

#pragma once

#include <optional>
#include <stdexcept>
#include <tuple>
#include <utility>
#include <vector>

#include "fogopt/convex.hpp"
#include "fogopt/model.hpp"

namespace fogopt {

// ─── Cutting planes over the binary decision space ──────────────────────────

enum class CutKind : uint8_t {
    ResourceUp,
    ResourceDown,
    ResourceCpu,
    Subproblem,
    Prefixed,
};

/// A linear restriction sum coef * x_{task,slot} <= rhs on the master's
/// binary variables.
struct Cut {
    CutKind kind;
    std::vector<std::tuple<int, int, double>> terms;  // (task, slot, coef)
    double rhs = 0.0;
};

/// RHS-side evaluation of a cut on a concrete decision.
inline double cut_lhs(const Cut& c, const OffloadDecision& d) {
    double v = 0.0;
    for (const auto& [task, slot, coef] : c.terms)
        if (d.at(task, slot)) v += coef;
    return v;
}

// ─── Subproblems ────────────────────────────────────────────────────────────

/// The resource-allocation feasibility problem of one fog node under a
/// master assignment: tasks processed at the node and tasks forwarded to
/// the cloud by it, with their relative sizes.
struct Subproblem {
    int node = -1;
    std::vector<int> fog_tasks;            // N_j^t
    std::vector<int> cloud_tasks;          // N_j^s (empty for the virtual node)
    std::vector<RelativeSize> fog_rel;     // parallel to fog_tasks
    std::vector<RelativeSize> cloud_rel;   // parallel to cloud_tasks
    bool cloud_residual_ok = true;         // false: some cloud task can never fit

    bool empty() const { return fog_tasks.empty() && cloud_tasks.empty(); }
    int task_count() const {
        return static_cast<int>(fog_tasks.size() + cloud_tasks.size());
    }
};

inline Subproblem make_subproblem(const SystemInstance& in, int node,
                                  const std::vector<Placement>& ps) {
    Subproblem sub;
    sub.node = node;
    for (int i = 0; i < in.num_tasks(); ++i) {
        if (ps[i].kind == PlacementKind::Fog && ps[i].node == node) {
            sub.fog_tasks.push_back(i);
            sub.fog_rel.push_back(
                *relative_size(in.tasks[i], ExecSite::Fog, in.cloud));
        } else if (ps[i].kind == PlacementKind::Cloud && ps[i].node == node) {
            auto rel = relative_size(in.tasks[i], ExecSite::Cloud, in.cloud);
            sub.cloud_tasks.push_back(i);
            if (!rel) {
                sub.cloud_residual_ok = false;
                sub.cloud_rel.push_back({});
            } else {
                sub.cloud_rel.push_back(*rel);
            }
        }
    }
    return sub;
}

/// The subproblem cutting-plane excluding this exact assignment pattern
/// (and every superset of it): sum of the assigned variables <= t+s-1.
inline Cut subproblem_cut(const Subproblem& sub, int num_nodes) {
    Cut c;
    c.kind = CutKind::Subproblem;
    for (int i : sub.fog_tasks)
        c.terms.emplace_back(i, placement_slot(Placement::fog(sub.node), num_nodes), 1.0);
    for (int i : sub.cloud_tasks)
        c.terms.emplace_back(i, placement_slot(Placement::cloud(sub.node), num_nodes), 1.0);
    c.rhs = sub.task_count() - 1.0;
    return c;
}

// ─── Fast detection ─────────────────────────────────────────────────────────

enum class CapacityDim : uint8_t { Up, Down, Cpu };

/// Aggregate-demand contradiction: if the summed relative sizes exceed a
/// capacity, no allocation exists.
inline std::optional<CapacityDim> fast_infeasible(const Subproblem& sub,
                                                  const FogNode& node) {
    double su = 0, sd = 0, sf = 0;
    for (const RelativeSize& r : sub.fog_rel) {
        su += r.input;
        sd += r.output;
        sf += r.cpu;
    }
    for (const RelativeSize& r : sub.cloud_rel) {
        su += r.input;
        sd += r.output;
    }
    if (su > node.uplink_cap) return CapacityDim::Up;
    if (sd > node.downlink_cap) return CapacityDim::Down;
    if (sf > node.cpu_cap) return CapacityDim::Cpu;
    return std::nullopt;
}

/// Proportional closed-form allocation: CPU first across the node-processed
/// tasks, then uplink/downlink across everything scaled by the remaining
/// delay budget. Returns the allocation when the balanced loads prove
/// feasibility, nullopt when inconclusive.
inline std::optional<std::vector<std::pair<int, RateTriple>>> fast_feasible(
    const Subproblem& sub, const FogNode& node) {
    if (!sub.cloud_residual_ok) return std::nullopt;
    if (sub.empty()) return std::vector<std::pair<int, RateTriple>>{};

    double cpu_sum = 0.0;
    for (const RelativeSize& r : sub.fog_rel) cpu_sum += r.cpu;
    double beta_f = cpu_sum / node.cpu_cap;
    if (beta_f > 1.0) return std::nullopt;
    double budget = 1.0 - beta_f;  // transmission share left for fog tasks
    if (!sub.fog_tasks.empty() && budget <= 0.0) return std::nullopt;

    double up_sum = 0.0, down_sum = 0.0;
    for (const RelativeSize& r : sub.fog_rel) {
        up_sum += r.input / budget;
        down_sum += r.output / budget;
    }
    for (const RelativeSize& r : sub.cloud_rel) {
        up_sum += r.input;
        down_sum += r.output;
    }
    double gamma_u = up_sum / node.uplink_cap;
    double gamma_d = down_sum / node.downlink_cap;
    if (gamma_u + gamma_d > 1.0) return std::nullopt;

    std::vector<std::pair<int, RateTriple>> alloc;
    alloc.reserve(sub.task_count());
    for (size_t k = 0; k < sub.fog_tasks.size(); ++k) {
        const RelativeSize& r = sub.fog_rel[k];
        RateTriple rt;
        rt.cpu = r.cpu / beta_f;
        rt.up = (r.input / budget) / gamma_u;
        rt.down = gamma_d > 0.0 ? (r.output / budget) / gamma_d : 0.0;
        alloc.emplace_back(sub.fog_tasks[k], rt);
    }
    for (size_t k = 0; k < sub.cloud_tasks.size(); ++k) {
        const RelativeSize& r = sub.cloud_rel[k];
        RateTriple rt;
        rt.up = r.input / gamma_u;
        rt.down = gamma_d > 0.0 ? r.output / gamma_d : 0.0;
        alloc.emplace_back(sub.cloud_tasks[k], rt);
    }
    return alloc;
}

// ─── SP2: the always-feasible slack program ─────────────────────────────────

inline constexpr double kSp2ZeroTol = 1e-6;  // objective level certifying feasibility

struct Sp2Solve {
    SolveResult result;
    std::vector<std::pair<int, RateTriple>> allocation;
};

/// Solves min z1+z2+z3 with hard per-task satisfaction rows and slacked
/// capacity rows. Always has interior, so the barrier starts analytically.
inline Sp2Solve solve_sp2(const Subproblem& sub, const FogNode& node,
                          const SolveOptions& options = {}) {
    if (!sub.cloud_residual_ok)
        throw std::logic_error("solve_sp2: cloud task with nonpositive residual");

    ConvexProgram prog;
    struct Vars {
        int up = -1, down = -1, cpu = -1;
    };
    std::vector<Vars> vars(sub.task_count());
    std::vector<const RelativeSize*> rels(sub.task_count());
    std::vector<int> tasks(sub.task_count());
    ConstraintExpr cap_u, cap_d, cap_f;
    cap_u.rhs = node.uplink_cap;
    cap_d.rhs = node.downlink_cap;
    cap_f.rhs = node.cpu_cap;

    int idx = 0;
    auto add_task = [&](int task, const RelativeSize& rel, bool fog) {
        Vars v;
        ConstraintExpr row;
        row.rhs = 1.0;
        v.up = prog.add_variable(kRateFloor, kInfinity);
        row.curves.push_back({rel.input, -1, v.up});
        cap_u.linear.push_back({v.up, 1.0});
        if (rel.output > 0) {
            v.down = prog.add_variable(kRateFloor, kInfinity);
            row.curves.push_back({rel.output, -1, v.down});
            cap_d.linear.push_back({v.down, 1.0});
        }
        if (fog) {
            v.cpu = prog.add_variable(kRateFloor, kInfinity);
            row.curves.push_back({rel.cpu, -1, v.cpu});
            cap_f.linear.push_back({v.cpu, 1.0});
        }
        prog.inequalities.push_back(std::move(row));
        vars[idx] = v;
        rels[idx] = &rel;
        tasks[idx] = task;
        ++idx;
    };
    for (size_t k = 0; k < sub.fog_tasks.size(); ++k)
        add_task(sub.fog_tasks[k], sub.fog_rel[k], true);
    for (size_t k = 0; k < sub.cloud_tasks.size(); ++k)
        add_task(sub.cloud_tasks[k], sub.cloud_rel[k], false);

    int z1 = prog.add_variable(0.0, kInfinity);
    int z2 = prog.add_variable(0.0, kInfinity);
    int z3 = prog.add_variable(0.0, kInfinity);
    cap_f.linear.push_back({z1, -1.0});
    cap_u.linear.push_back({z2, -1.0});
    cap_d.linear.push_back({z3, -1.0});
    prog.objective[z1] = prog.objective[z2] = prog.objective[z3] = 1.0;
    prog.inequalities.push_back(std::move(cap_f));
    prog.inequalities.push_back(std::move(cap_u));
    prog.inequalities.push_back(std::move(cap_d));

    // Analytic strictly interior start: rates at 4x the relative demand put
    // every satisfaction row at 3/4; slacks cover any capacity overshoot.
    Eigen::VectorXd start = Eigen::VectorXd::Zero(prog.num_variables());
    double su = 0, sd = 0, sf = 0;
    for (int k = 0; k < idx; ++k) {
        const RelativeSize& r = *rels[k];
        start[vars[k].up] = std::max(4.0 * r.input, 1.0);
        su += start[vars[k].up];
        if (vars[k].down >= 0) {
            start[vars[k].down] = std::max(4.0 * r.output, 1.0);
            sd += start[vars[k].down];
        }
        if (vars[k].cpu >= 0) {
            start[vars[k].cpu] = std::max(4.0 * r.cpu, 1.0);
            sf += start[vars[k].cpu];
        }
    }
    start[z1] = std::max(0.0, sf - node.cpu_cap) + 1.0;
    start[z2] = std::max(0.0, su - node.uplink_cap) + 1.0;
    start[z3] = std::max(0.0, sd - node.downlink_cap) + 1.0;

    Sp2Solve out;
    out.result = solve_program(prog, options, start);
    if (out.result.status == SolveStatus::Optimal) {
        out.allocation.reserve(idx);
        for (int k = 0; k < idx; ++k) {
            RateTriple rt;
            rt.up = out.result.point[vars[k].up];
            if (vars[k].down >= 0) rt.down = out.result.point[vars[k].down];
            if (vars[k].cpu >= 0) rt.cpu = out.result.point[vars[k].cpu];
            out.allocation.emplace_back(tasks[k], rt);
        }
    }
    return out;
}

// ─── Combined subproblem solve ──────────────────────────────────────────────

enum class SubproblemMode : uint8_t { Standard, Fast };

enum class SubproblemStatus : uint8_t { FeasibleFast, FeasibleSolver, Infeasible };

struct SubproblemOutcome {
    SubproblemStatus status = SubproblemStatus::Infeasible;
    std::vector<std::pair<int, RateTriple>> allocation;  // when feasible
    std::optional<Cut> cut;                              // when infeasible
    int solver_calls = 0;
    double sp2_objective = 0.0;  // meaningful when the solver ran
};

/// Fast mode tries the aggregate contradiction, then the proportional
/// allocation, and falls back to SP2; standard mode always solves SP2.
/// A solver iteration limit is surfaced as an exception, never as a verdict.
inline SubproblemOutcome solve_subproblem(const SystemInstance& in,
                                          const Subproblem& sub,
                                          SubproblemMode mode,
                                          const SolveOptions& options = {}) {
    SubproblemOutcome out;
    const FogNode& node = in.fog_nodes[sub.node];
    if (!sub.cloud_residual_ok) {
        out.status = SubproblemStatus::Infeasible;
        out.cut = subproblem_cut(sub, in.num_nodes());
        return out;
    }
    if (sub.empty()) {
        out.status = SubproblemStatus::FeasibleFast;
        return out;
    }
    if (mode == SubproblemMode::Fast) {
        if (fast_infeasible(sub, node)) {
            out.status = SubproblemStatus::Infeasible;
            out.cut = subproblem_cut(sub, in.num_nodes());
            return out;
        }
        if (auto alloc = fast_feasible(sub, node)) {
            out.status = SubproblemStatus::FeasibleFast;
            out.allocation = std::move(*alloc);
            return out;
        }
    }
    Sp2Solve sp2 = solve_sp2(sub, node, options);
    out.solver_calls = 1;
    if (sp2.result.status != SolveStatus::Optimal)
        throw std::runtime_error("solve_subproblem: SP2 solver did not converge");
    out.sp2_objective = sp2.result.objective_value;
    if (sp2.result.objective_value <= kSp2ZeroTol) {
        out.status = SubproblemStatus::FeasibleSolver;
        out.allocation = std::move(sp2.allocation);
    } else {
        out.status = SubproblemStatus::Infeasible;
        out.cut = subproblem_cut(sub, in.num_nodes());
    }
    return out;
}

}  // namespace fogopt
