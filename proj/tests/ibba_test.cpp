#include "fogopt/ibba.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <vector>

#include "fogopt/oracle.hpp"
#include "test_util.hpp"

using namespace fogopt;
using testutil::instance_with;
using testutil::task_mb;

namespace {

// Two local-feasible tasks (t = 12 s) that both benefit from offloading,
// on a fog node whose CPU holds only one of them; the cloud path via node 0
// stays open. Multiple equal-energy optima: {F,C}, {C,F}, {C,C}.
SystemInstance contended_pair() {
    return instance_with({task_mb(1, 5.5, 0.55, 1.0, 12.0),
                          task_mb(2, 5.5, 0.55, 1.0, 12.0)},
                         /*num_real_fog=*/1, /*node_cpu=*/0.55);
}

}  // namespace

TEST(Ibba, SingleTaskBelowThresholdStaysLocal) {
    SystemInstance in = instance_with({task_mb(1, 5.5, 0.55, 0.5, 10.0)}, 4);
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in));
    ASSERT_TRUE(r.feasible);
    EXPECT_EQ(*r.solution.decision.placement_of(0), Placement::local());
    EXPECT_NEAR(r.solution.total_energy,
                local_energy(in.tasks[0], in.profiles[0]), 1e-8);
}

TEST(Ibba, SingleTaskAboveThresholdOffloads) {
    // alpha = 2 makes local both energy-losing and deadline-infeasible.
    SystemInstance in = instance_with({task_mb(1, 5.5, 0.55, 2.0, 10.0)}, 4);
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in));
    ASSERT_TRUE(r.feasible);
    Placement p = *r.solution.decision.placement_of(0);
    EXPECT_EQ(p.kind, PlacementKind::Fog);
    EXPECT_EQ(p.node, 0);  // LFC picks the first fog node
    EXPECT_NEAR(r.solution.total_energy, 6.8728, 1e-8);
}

TEST(Ibba, ContendedPairMatchesOracle) {
    SystemInstance in = contended_pair();
    OracleResult oracle = enumerate_optimum(in);
    ASSERT_TRUE(oracle.feasible);
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in));
    ASSERT_TRUE(r.feasible);
    EXPECT_NEAR(r.solution.total_energy, oracle.solution.total_energy,
                1e-6 * (1.0 + oracle.solution.total_energy));
    EXPECT_NEAR(r.solution.total_energy, 2 * 6.8728, 1e-6);
    // LFC keeps one task on the fog node.
    EXPECT_EQ(*r.solution.decision.placement_of(0), Placement::fog(0));
    EXPECT_EQ(*r.solution.decision.placement_of(1), Placement::cloud(0));
}

TEST(Ibba, LfcLcfTieBreak) {
    SystemInstance in = contended_pair();
    IbbaResult lfc = ibba_solve(in, BranchOrder::lfc(in));
    IbbaResult lcf = ibba_solve(in, BranchOrder::lcf(in));
    ASSERT_TRUE(lfc.feasible && lcf.feasible);
    EXPECT_NEAR(lfc.solution.total_energy, lcf.solution.total_energy, 1e-7);

    auto cloudish = [&](const Solution& s) {
        int c = 0;
        for (int i = 0; i < in.num_tasks(); ++i) {
            Placement p = *s.decision.placement_of(i);
            if (p.kind == PlacementKind::Cloud ||
                (p.kind == PlacementKind::Fog && p.node == in.virtual_node()))
                ++c;
        }
        return c;
    };
    auto locals = [&](const std::vector<Placement>& ps) {
        int c = 0;
        for (const Placement& p : ps)
            if (p.kind == PlacementKind::Local) ++c;
        return c;
    };
    EXPECT_LE(cloudish(lfc.solution), cloudish(lcf.solution));
    EXPECT_EQ(cloudish(lcf.solution), 2);  // LCF forwards both

    // LFC's local count is maximal among all enumerated optima.
    int lfc_locals = locals(lfc.solution.decision.to_placements());
    int max_locals = 0;
    for (const auto& ps : enumerate_all_optima(in))
        max_locals = std::max(max_locals, locals(ps));
    EXPECT_EQ(lfc_locals, max_locals);
}

TEST(Ibba, BranchChildrenCounts) {
    // M = 4: ten children (the cloud slot of the virtual node never exists).
    const int nodes = 5;
    std::vector<int> root(3, kFreeTask);
    auto children = branch_children(root, 0, lfc_placements(nodes), nodes);
    EXPECT_EQ(children.size(), 10u);
    for (const auto& c : children) EXPECT_NE(c[0], kFreeTask);

    // Branching the last task yields fully fixed leaves.
    std::vector<int> deep = {1, 2, kFreeTask};
    auto leaves = branch_children(deep, 2, lfc_placements(nodes), nodes);
    for (const auto& c : leaves)
        EXPECT_TRUE(std::none_of(c.begin(), c.end(),
                                 [](int s) { return s == kFreeTask; }));
}

TEST(Ibba, StackDisciplineVisitsLocalChildFirst) {
    SystemInstance in = instance_with({task_mb(1, 2.0, 0.2, 0.3, 10.0),
                                       task_mb(2, 2.0, 0.2, 0.3, 10.0)}, 1);
    std::vector<std::vector<int>> visits;
    IbbaOptions opt;
    opt.visit_hook = [&](std::span<const int> fixed) {
        visits.emplace_back(fixed.begin(), fixed.end());
    };
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in), opt);
    ASSERT_TRUE(r.feasible);
    // Cheap local tasks: the optimum is all-local.
    for (int i = 0; i < 2; ++i)
        EXPECT_EQ(*r.solution.decision.placement_of(i), Placement::local());
    // Root first; if branching happened, the first child pops as task0=Local.
    ASSERT_FALSE(visits.empty());
    EXPECT_EQ(visits[0], (std::vector<int>{kFreeTask, kFreeTask}));
    if (visits.size() > 1) {
        const int local_slot = placement_slot(Placement::local(), 2);
        EXPECT_EQ(visits[1][0], local_slot);
        EXPECT_EQ(visits[1][1], kFreeTask);
    }
}

TEST(Ibba, NodeCountWithinWorstCaseBound) {
    SystemInstance in = testutil::random_small_instance(3, 2, 77);
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in));
    EXPECT_LE(static_cast<double>(r.stats.relaxed_solves),
              ibba_worst_case_nodes(3, 2));
}

TEST(Ibba, InfeasibleInstanceReported) {
    // 0.05 s deadline: no placement can carry 44 Mb or 5.5 Gc in time.
    SystemInstance in = instance_with({task_mb(1, 5.5, 0.55, 1.0, 0.05)}, 2);
    IbbaResult r = ibba_solve(in, BranchOrder::lfc(in));
    EXPECT_FALSE(r.feasible);
}

TEST(Ibba, DemandDescendingOrderOption) {
    SystemInstance in = instance_with({task_mb(1, 2.0, 0.2, 0.5, 10.0),
                                       task_mb(2, 8.0, 0.8, 2.0, 10.0),
                                       task_mb(3, 4.0, 0.4, 1.0, 10.0)}, 1);
    BranchOrder order = BranchOrder::lfc(in).demand_descending(in);
    EXPECT_EQ(order.task_order, (std::vector<int>{1, 2, 0}));
    IbbaResult a = ibba_solve(in, BranchOrder::lfc(in));
    IbbaResult b = ibba_solve(in, order);
    ASSERT_TRUE(a.feasible && b.feasible);
    EXPECT_NEAR(a.solution.total_energy, b.solution.total_energy, 1e-7);
}

TEST(Ibba, AgreesWithOracleOnRandomInstances) {
    for (uint64_t seed : {101ull, 102ull, 103ull, 104ull}) {
        SystemInstance in = testutil::random_small_instance(3, 2, seed);
        OracleResult oracle = enumerate_optimum(in);
        IbbaResult lfc = ibba_solve(in, BranchOrder::lfc(in));
        IbbaResult lcf = ibba_solve(in, BranchOrder::lcf(in));
        EXPECT_EQ(lfc.feasible, oracle.feasible) << "seed " << seed;
        EXPECT_EQ(lcf.feasible, oracle.feasible) << "seed " << seed;
        if (oracle.feasible && lfc.feasible && lcf.feasible) {
            double ref = oracle.solution.total_energy;
            EXPECT_NEAR(lfc.solution.total_energy, ref, 1e-6 * (1 + ref));
            EXPECT_NEAR(lcf.solution.total_energy, ref, 1e-6 * (1 + ref));
            EXPECT_TRUE(validate_solution(lfc.solution, in).empty());
        }
    }
}
