// fogopt/scenario.hpp - seeded experiment generators: the two benchmark
// scenarios (task-complexity sweep, deadline sweep) plus free-form custom
// draws. Identical (spec, seed) pairs generate identical instances.

#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "fogopt/model.hpp"

namespace fogopt {

enum class ScenarioKind : uint8_t { Scenario1, Scenario2, Custom };

/// Experiment family description. Device/node constants default to the
/// benchmark parameter table (Nokia-class device, 72 Mbps links, 10 Gc/s
/// nodes, 5 Mbps backhaul).
struct ScenarioSpec {
    ScenarioKind kind = ScenarioKind::Scenario1;
    int num_tasks = 10;
    int num_real_fog = 4;
    uint64_t seed = 1;

    // Task draws (MB, Gc/MB, s).
    double input_mb_lo = 1.0, input_mb_hi = 10.0;
    double output_mb_lo = 0.1, output_mb_hi = 1.0;
    double alpha_lo = 0.1, alpha_hi = 1.0;  // scenario 2 widens to 6.0
    double alpha_step = 0.1;                // scenario-1 per-experiment shift
    double deadline = 10.0;                 // scenario 1: fixed
    double deadline_start = 2.0;            // scenario 2: 2s..10s sweep
    double deadline_step = 1.0;
    double deadline_lo = 0.0, deadline_hi = 0.0;  // custom: per-task draw

    // Device profile.
    double local_cpu_rate = 0.5;            // Gc/s
    double energy_per_gigacycle = 1000.0 / 730.0;
    double fog_tx = 0.142, fog_rx = 0.142;  // J/Mb toward real fog nodes
    double cloud_tx = 0.658, cloud_rx = 0.278;  // J/Mb on the direct link

    // Node and cloud capacities.
    double node_uplink = 72.0, node_downlink = 72.0, node_cpu = 10.0;
    double backhaul = 5.0, cloud_cpu_per_task = 10.0;

    int experiments() const {
        switch (kind) {
            case ScenarioKind::Scenario1: return 10;  // U(0.1,1.0)..U(1.0,1.9)
            case ScenarioKind::Scenario2: return 9;   // t = 2s..10s
            case ScenarioKind::Custom: return 1;
        }
        return 1;
    }

    static ScenarioSpec scenario1(uint64_t seed) {
        ScenarioSpec s;
        s.kind = ScenarioKind::Scenario1;
        s.seed = seed;
        return s;
    }
    static ScenarioSpec scenario2(uint64_t seed) {
        ScenarioSpec s;
        s.kind = ScenarioKind::Scenario2;
        s.seed = seed;
        s.alpha_hi = 6.0;
        return s;
    }
};

namespace detail {

/// Portable uniform draw on [lo, hi) from the top 53 bits of the generator,
/// so instances do not depend on the standard library's distribution code.
inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    return lo + u * (hi - lo);
}

}  // namespace detail

/// Instance of experiment `index` of the family. The base draws depend only
/// on the seed; the index shifts every task's complexity (scenario 1) or
/// the common deadline (scenario 2).
inline SystemInstance generate_instance(const ScenarioSpec& spec, int index) {
    std::mt19937_64 rng(spec.seed);
    const int nodes = spec.num_real_fog + 1;

    MobileProfile profile;
    profile.cpu_rate = spec.local_cpu_rate;
    profile.energy_per_gigacycle = spec.energy_per_gigacycle;
    profile.tx_energy.assign(nodes, spec.fog_tx);
    profile.rx_energy.assign(nodes, spec.fog_rx);
    profile.tx_energy.back() = spec.cloud_tx;
    profile.rx_energy.back() = spec.cloud_rx;

    SystemInstance in;
    for (int i = 0; i < spec.num_tasks; ++i) {
        double d_mb = detail::uniform(rng, spec.input_mb_lo, spec.input_mb_hi);
        double o_mb = detail::uniform(rng, spec.output_mb_lo, spec.output_mb_hi);
        double alpha = detail::uniform(rng, spec.alpha_lo, spec.alpha_hi);
        double deadline = spec.deadline;
        switch (spec.kind) {
            case ScenarioKind::Scenario1:
                alpha += spec.alpha_step * index;
                break;
            case ScenarioKind::Scenario2:
                deadline = spec.deadline_start + spec.deadline_step * index;
                break;
            case ScenarioKind::Custom:
                if (spec.deadline_hi > spec.deadline_lo)
                    deadline = detail::uniform(rng, spec.deadline_lo, spec.deadline_hi);
                alpha += spec.alpha_step * index;
                break;
        }
        Task t;
        t.id = i + 1;
        t.input_size = mb_to_megabits(d_mb);
        t.output_size = mb_to_megabits(o_mb);
        t.cpu_cycles = alpha * d_mb;  // alpha is Gc per MB
        t.deadline = deadline;
        in.tasks.push_back(t);
        in.profiles.push_back(profile);
    }
    for (int j = 0; j < nodes; ++j) {
        FogNode node;
        node.id = j + 1;
        node.uplink_cap = spec.node_uplink;
        node.downlink_cap = spec.node_downlink;
        node.cpu_cap = spec.node_cpu;
        node.is_virtual_cloud = (j == nodes - 1);
        in.fog_nodes.push_back(node);
    }
    in.cloud.backhaul_rate = spec.backhaul;
    in.cloud.cpu_rate_per_task = spec.cloud_cpu_per_task;
    in.validate();
    return in;
}

}  // namespace fogopt
