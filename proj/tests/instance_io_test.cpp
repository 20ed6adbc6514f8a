#include "fogopt/instance_io.hpp"

#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"

using namespace fogopt;

TEST(InstanceIo, RoundTripExact) {
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 20; ++trial) {
        SystemInstance in = testutil::random_small_instance(
            2 + static_cast<int>(rng() % 4), 1 + static_cast<int>(rng() % 3),
            rng());
        SystemInstance back = instance_from_json(instance_to_json(in));
        ASSERT_EQ(back.num_tasks(), in.num_tasks());
        ASSERT_EQ(back.num_nodes(), in.num_nodes());
        for (int i = 0; i < in.num_tasks(); ++i) {
            EXPECT_DOUBLE_EQ(back.tasks[i].input_size, in.tasks[i].input_size);
            EXPECT_DOUBLE_EQ(back.tasks[i].output_size, in.tasks[i].output_size);
            EXPECT_DOUBLE_EQ(back.tasks[i].cpu_cycles, in.tasks[i].cpu_cycles);
            EXPECT_DOUBLE_EQ(back.tasks[i].deadline, in.tasks[i].deadline);
            EXPECT_EQ(back.profiles[i].tx_energy, in.profiles[i].tx_energy);
        }
        for (int j = 0; j < in.num_nodes(); ++j) {
            EXPECT_DOUBLE_EQ(back.fog_nodes[j].cpu_cap, in.fog_nodes[j].cpu_cap);
            EXPECT_EQ(back.fog_nodes[j].is_virtual_cloud,
                      in.fog_nodes[j].is_virtual_cloud);
        }
        EXPECT_DOUBLE_EQ(back.cloud.backhaul_rate, in.cloud.backhaul_rate);
    }
}

TEST(InstanceIo, SizesStoredInMb) {
    SystemInstance in = testutil::instance_with(
        {testutil::task_mb(1, 5.5, 0.55, 1.0, 10.0)}, 1);
    nlohmann::json j = instance_to_json(in);
    EXPECT_DOUBLE_EQ(j["tasks"][0]["input_mb"].get<double>(), 5.5);
    EXPECT_DOUBLE_EQ(j["tasks"][0]["output_mb"].get<double>(), 0.55);
    // Internal representation is megabits.
    EXPECT_DOUBLE_EQ(in.tasks[0].input_size, 44.0);
}

TEST(InstanceIo, SchemaVersionRequired) {
    SystemInstance in = testutil::instance_with(
        {testutil::task_mb(1, 5.5, 0.55, 1.0, 10.0)}, 1);
    nlohmann::json j = instance_to_json(in);
    j.erase("version");
    EXPECT_THROW(instance_from_json(j), std::invalid_argument);
    j["version"] = 99;
    EXPECT_THROW(instance_from_json(j), std::invalid_argument);
}

TEST(InstanceIo, PerTaskProfileOverride) {
    SystemInstance in = testutil::instance_with(
        {testutil::task_mb(1, 5.5, 0.55, 1.0, 10.0),
         testutil::task_mb(2, 2.0, 0.2, 1.0, 10.0)}, 1);
    in.profiles[1].cpu_rate = 1.25;
    nlohmann::json j = instance_to_json(in);
    EXPECT_FALSE(j["tasks"][0].contains("energy"));
    EXPECT_TRUE(j["tasks"][1].contains("energy"));
    SystemInstance back = instance_from_json(j);
    EXPECT_DOUBLE_EQ(back.profiles[1].cpu_rate, 1.25);
    EXPECT_DOUBLE_EQ(back.profiles[0].cpu_rate, 0.5);
}

TEST(InstanceIo, LoadRejectsInvalidInstance) {
    SystemInstance in = testutil::instance_with(
        {testutil::task_mb(1, 5.5, 0.55, 1.0, 10.0)}, 1);
    nlohmann::json j = instance_to_json(in);
    j["fog_nodes"][0]["cpu_gcps"] = -1.0;
    EXPECT_THROW(instance_from_json(j), std::invalid_argument);
}
