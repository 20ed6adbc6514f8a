// fogopt/oracle.hpp - brute-force ground truth for desk-size instances:
// enumerate every placement vector in LFC order, test per-node feasibility,
// and keep the first minimum-energy feasible assignment.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "fogopt/model.hpp"
#include "fogopt/relaxation.hpp"
#include "fogopt/subproblem.hpp"

namespace fogopt {

struct OracleResult {
    bool feasible = false;
    Solution solution;
    long assignments_checked = 0;
};

namespace detail {

/// Feasibility of a full assignment: local deadlines plus every node's
/// subproblem (fast tests first, SP2 as the tie-breaker). Fills the
/// allocation on success.
inline bool assignment_feasible(const SystemInstance& in,
                                const std::vector<Placement>& ps,
                                ResourceAllocation& alloc,
                                const SolveOptions& solver) {
    for (int i = 0; i < in.num_tasks(); ++i)
        if (ps[i].kind == PlacementKind::Local &&
            local_delay(in.tasks[i], in.profiles[i]) > in.tasks[i].deadline)
            return false;
    alloc = ResourceAllocation(in.num_tasks(), in.num_nodes());
    for (int j = 0; j < in.num_nodes(); ++j) {
        Subproblem sub = make_subproblem(in, j, ps);
        if (sub.empty()) continue;
        SubproblemOutcome oc =
            solve_subproblem(in, sub, SubproblemMode::Fast, solver);
        if (oc.status == SubproblemStatus::Infeasible) return false;
        for (const auto& [task, rt] : oc.allocation) alloc.at(task, j) = rt;
    }
    return true;
}

}  // namespace detail

/// Exact optimum by enumeration. Ties keep the earliest assignment in LFC
/// enumeration order. Throws std::length_error beyond ~10^6 assignments.
inline OracleResult enumerate_optimum(const SystemInstance& in,
                                      const SolveOptions& solver = {}) {
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();
    double tree = std::pow(2.0 * nodes + 1.0, n);
    if (tree > 1e6)
        throw std::length_error("enumerate_optimum: instance too large");

    const std::vector<Placement> options = lfc_placements(nodes);
    const int k = static_cast<int>(options.size());

    OracleResult out;
    double best = kInfinity;
    std::vector<int> digits(n, 0);
    std::vector<Placement> ps(n, Placement::local());
    ResourceAllocation alloc;
    while (true) {
        ++out.assignments_checked;
        for (int i = 0; i < n; ++i) ps[i] = options[digits[i]];
        double energy = 0.0;
        for (int i = 0; i < n; ++i) energy += energy_of_placement(in, i, ps[i]);
        // Strict improvement only: the first optimum found stays.
        if (energy < best && detail::assignment_feasible(in, ps, alloc, solver)) {
            best = energy;
            out.feasible = true;
            out.solution = make_solution(in, ps, std::move(alloc));
            alloc = ResourceAllocation();
        }
        // Odometer; task 0 is the most significant digit so the scan order
        // matches the DFS of the search tree.
        int pos = n - 1;
        while (pos >= 0 && digits[pos] == k - 1) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
    }
    return out;
}

/// Every feasible assignment whose energy matches the optimum within a
/// relative tolerance. For tie-break inspection on tiny instances.
inline std::vector<std::vector<Placement>> enumerate_all_optima(
    const SystemInstance& in, double rel_tol = 1e-9,
    const SolveOptions& solver = {}) {
    OracleResult opt = enumerate_optimum(in, solver);
    std::vector<std::vector<Placement>> out;
    if (!opt.feasible) return out;
    double limit = opt.solution.total_energy +
                   rel_tol * (1.0 + std::abs(opt.solution.total_energy));

    const int n = in.num_tasks();
    const std::vector<Placement> options = lfc_placements(in.num_nodes());
    const int k = static_cast<int>(options.size());
    std::vector<int> digits(n, 0);
    std::vector<Placement> ps(n, Placement::local());
    ResourceAllocation alloc;
    while (true) {
        for (int i = 0; i < n; ++i) ps[i] = options[digits[i]];
        double energy = 0.0;
        for (int i = 0; i < n; ++i) energy += energy_of_placement(in, i, ps[i]);
        if (energy <= limit && detail::assignment_feasible(in, ps, alloc, solver))
            out.push_back(ps);
        int pos = n - 1;
        while (pos >= 0 && digits[pos] == k - 1) digits[pos--] = 0;
        if (pos < 0) break;
        ++digits[pos];
    }
    return out;
}

}  // namespace fogopt
