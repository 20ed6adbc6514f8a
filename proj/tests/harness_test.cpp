#include "fogopt/bench.hpp"

#include <gtest/gtest.h>

#include "fogopt/scenario.hpp"
#include "test_util.hpp"

using namespace fogopt;

namespace {

double alpha_of(const SystemInstance& in, int i) {
    return in.tasks[i].cpu_cycles / megabits_to_mb(in.tasks[i].input_size);
}

}  // namespace

TEST(Harness, Scenario1ComplexityWindows) {
    ScenarioSpec spec = ScenarioSpec::scenario1(7);
    SystemInstance first = generate_instance(spec, 0);
    for (int i = 0; i < first.num_tasks(); ++i) {
        EXPECT_GE(alpha_of(first, i), 0.1 - 1e-12);
        EXPECT_LE(alpha_of(first, i), 1.0 + 1e-12);
        EXPECT_DOUBLE_EQ(first.tasks[i].deadline, 10.0);
        EXPECT_GE(megabits_to_mb(first.tasks[i].input_size), 1.0);
        EXPECT_LE(megabits_to_mb(first.tasks[i].input_size), 10.0);
        EXPECT_GE(megabits_to_mb(first.tasks[i].output_size), 0.1);
        EXPECT_LE(megabits_to_mb(first.tasks[i].output_size), 1.0);
    }
    SystemInstance last = generate_instance(spec, 9);
    for (int i = 0; i < last.num_tasks(); ++i) {
        EXPECT_GE(alpha_of(last, i), 1.0 - 1e-12);
        EXPECT_LE(alpha_of(last, i), 1.9 + 1e-12);
        // Same base draw, shifted complexity only.
        EXPECT_DOUBLE_EQ(last.tasks[i].input_size, first.tasks[i].input_size);
        EXPECT_NEAR(alpha_of(last, i), alpha_of(first, i) + 0.9, 1e-9);
    }
}

TEST(Harness, Scenario2DeadlineSweep) {
    ScenarioSpec spec = ScenarioSpec::scenario2(7);
    EXPECT_EQ(spec.experiments(), 9);
    SystemInstance t2 = generate_instance(spec, 0);
    SystemInstance t10 = generate_instance(spec, 8);
    for (int i = 0; i < t2.num_tasks(); ++i) {
        EXPECT_DOUBLE_EQ(t2.tasks[i].deadline, 2.0);
        EXPECT_DOUBLE_EQ(t10.tasks[i].deadline, 10.0);
        EXPECT_GE(alpha_of(t2, i), 0.1 - 1e-12);
        EXPECT_LE(alpha_of(t2, i), 6.0 + 1e-12);
        EXPECT_DOUBLE_EQ(t2.tasks[i].cpu_cycles, t10.tasks[i].cpu_cycles);
    }
}

TEST(Harness, SeedDeterminesInstances) {
    ScenarioSpec spec = ScenarioSpec::scenario1(12345);
    SystemInstance a = generate_instance(spec, 3);
    SystemInstance b = generate_instance(spec, 3);
    for (int i = 0; i < a.num_tasks(); ++i) {
        EXPECT_DOUBLE_EQ(a.tasks[i].input_size, b.tasks[i].input_size);
        EXPECT_DOUBLE_EQ(a.tasks[i].cpu_cycles, b.tasks[i].cpu_cycles);
    }
    spec.seed = 54321;
    SystemInstance c = generate_instance(spec, 3);
    bool differs = false;
    for (int i = 0; i < a.num_tasks(); ++i)
        if (a.tasks[i].input_size != c.tasks[i].input_size) differs = true;
    EXPECT_TRUE(differs);
}

TEST(Harness, WopRowsNeverOffload) {
    ScenarioSpec spec = ScenarioSpec::scenario1(5);
    spec.num_tasks = 3;
    spec.num_real_fog = 2;
    auto rows = run_suite(spec, {Method::Wop});
    ASSERT_EQ(rows.size(), 10u);
    for (const ResultRow& r : rows) {
        EXPECT_DOUBLE_EQ(r.offload_fraction, 0.0);
        EXPECT_EQ(r.status, "ok");
    }
}

TEST(Harness, RowCountIsMethodsTimesExperiments) {
    ScenarioSpec spec = ScenarioSpec::scenario1(5);
    spec.num_tasks = 2;
    spec.num_real_fog = 1;
    auto rows = run_suite(spec, {Method::Wop, Method::Rop});
    EXPECT_EQ(rows.size(), 20u);
}

TEST(Harness, EmitEmptyTableIsHeaderOnly) {
    std::string csv = results_to_csv({});
    EXPECT_EQ(csv.find('\n'), csv.size() - 1);  // single header line
    EXPECT_NE(csv.find("method,experiment,offload_fraction"), std::string::npos);
    EXPECT_NE(csv.find("fast_detection_fraction"), std::string::npos);
}

TEST(Harness, JsonRoundTripsToIdenticalTable) {
    ScenarioSpec spec = ScenarioSpec::scenario1(5);
    spec.num_tasks = 2;
    spec.num_real_fog = 1;
    auto rows = run_suite(spec, {Method::Wop, Method::Rop});
    auto back = results_from_json(results_to_json(rows));
    ASSERT_EQ(back.size(), rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(back[i].method, rows[i].method);
        EXPECT_EQ(back[i].experiment, rows[i].experiment);
        EXPECT_DOUBLE_EQ(back[i].mean_energy, rows[i].mean_energy);
        EXPECT_DOUBLE_EQ(back[i].error_rate, rows[i].error_rate);
        EXPECT_DOUBLE_EQ(back[i].wall_time_ms, rows[i].wall_time_ms);
        EXPECT_EQ(back[i].status, rows[i].status);
    }
}

TEST(Harness, ExactMethodsDeterministicAcrossRuns) {
    ScenarioSpec spec = ScenarioSpec::scenario1(5);
    spec.num_tasks = 3;
    spec.num_real_fog = 1;
    auto rows1 = run_suite(spec, {Method::FfbdF});
    auto rows2 = run_suite(spec, {Method::FfbdF});
    ASSERT_EQ(rows1.size(), rows2.size());
    for (size_t i = 0; i < rows1.size(); ++i) {
        EXPECT_DOUBLE_EQ(rows1[i].mean_energy, rows2[i].mean_energy);
        EXPECT_EQ(rows1[i].status, rows2[i].status);
    }
}

TEST(Harness, MethodNamesRoundTrip) {
    for (Method m : all_methods()) {
        auto parsed = parse_method(method_name(m));
        ASSERT_TRUE(parsed.has_value());
        EXPECT_EQ(*parsed, m);
    }
    EXPECT_FALSE(parse_method("nope").has_value());
}
