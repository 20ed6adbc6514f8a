// fogopt/instance_io.hpp - JSON instance files.
//
// Schema (version 1): top-level keys `version`, `tasks`, `fog_nodes`,
// `cloud`, `energy`. Data sizes are written in MB and converted to megabits
// on load. The `energy` block holds the device profile shared by all tasks;
// a task may override it with its own `energy` object.

#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "fogopt/model.hpp"

namespace fogopt {

inline constexpr int kInstanceSchemaVersion = 1;

namespace detail {

inline nlohmann::json profile_json(const MobileProfile& p) {
    return {{"local_cpu_gcps", p.cpu_rate},
            {"joules_per_gigacycle", p.energy_per_gigacycle},
            {"tx_joules_per_mb", p.tx_energy},
            {"rx_joules_per_mb", p.rx_energy}};
}

inline MobileProfile profile_from_json(const nlohmann::json& j) {
    MobileProfile p;
    p.cpu_rate = j.at("local_cpu_gcps").get<double>();
    p.energy_per_gigacycle = j.at("joules_per_gigacycle").get<double>();
    p.tx_energy = j.at("tx_joules_per_mb").get<std::vector<double>>();
    p.rx_energy = j.at("rx_joules_per_mb").get<std::vector<double>>();
    return p;
}

inline bool same_profile(const MobileProfile& a, const MobileProfile& b) {
    return a.cpu_rate == b.cpu_rate &&
           a.energy_per_gigacycle == b.energy_per_gigacycle &&
           a.tx_energy == b.tx_energy && a.rx_energy == b.rx_energy;
}

}  // namespace detail

inline nlohmann::json instance_to_json(const SystemInstance& in) {
    nlohmann::json j;
    j["version"] = kInstanceSchemaVersion;
    const MobileProfile& shared = in.profiles.front();
    j["energy"] = detail::profile_json(shared);
    j["tasks"] = nlohmann::json::array();
    for (int i = 0; i < in.num_tasks(); ++i) {
        const Task& t = in.tasks[i];
        nlohmann::json tj = {{"id", t.id},
                             {"input_mb", megabits_to_mb(t.input_size)},
                             {"output_mb", megabits_to_mb(t.output_size)},
                             {"cpu_gigacycles", t.cpu_cycles},
                             {"deadline_s", t.deadline}};
        if (!detail::same_profile(in.profiles[i], shared))
            tj["energy"] = detail::profile_json(in.profiles[i]);
        j["tasks"].push_back(std::move(tj));
    }
    j["fog_nodes"] = nlohmann::json::array();
    for (const FogNode& n : in.fog_nodes)
        j["fog_nodes"].push_back({{"id", n.id},
                                  {"uplink_mbps", n.uplink_cap},
                                  {"downlink_mbps", n.downlink_cap},
                                  {"cpu_gcps", n.cpu_cap},
                                  {"virtual_cloud", n.is_virtual_cloud}});
    j["cloud"] = {{"backhaul_mbps", in.cloud.backhaul_rate},
                  {"cpu_gcps_per_task", in.cloud.cpu_rate_per_task}};
    return j;
}

inline SystemInstance instance_from_json(const nlohmann::json& j) {
    if (!j.contains("version"))
        throw std::invalid_argument("instance file: missing schema version");
    if (j.at("version").get<int>() != kInstanceSchemaVersion)
        throw std::invalid_argument("instance file: unsupported schema version");

    SystemInstance in;
    MobileProfile shared = detail::profile_from_json(j.at("energy"));
    for (const auto& tj : j.at("tasks")) {
        Task t;
        t.id = tj.at("id").get<int>();
        t.input_size = mb_to_megabits(tj.at("input_mb").get<double>());
        t.output_size = mb_to_megabits(tj.at("output_mb").get<double>());
        t.cpu_cycles = tj.at("cpu_gigacycles").get<double>();
        t.deadline = tj.at("deadline_s").get<double>();
        in.tasks.push_back(t);
        in.profiles.push_back(tj.contains("energy")
                                  ? detail::profile_from_json(tj.at("energy"))
                                  : shared);
    }
    for (const auto& nj : j.at("fog_nodes")) {
        FogNode n;
        n.id = nj.at("id").get<int>();
        n.uplink_cap = nj.at("uplink_mbps").get<double>();
        n.downlink_cap = nj.at("downlink_mbps").get<double>();
        n.cpu_cap = nj.at("cpu_gcps").get<double>();
        n.is_virtual_cloud = nj.at("virtual_cloud").get<bool>();
        in.fog_nodes.push_back(n);
    }
    in.cloud.backhaul_rate = j.at("cloud").at("backhaul_mbps").get<double>();
    in.cloud.cpu_rate_per_task = j.at("cloud").at("cpu_gcps_per_task").get<double>();
    in.validate();
    return in;
}

inline void save_instance(const SystemInstance& in, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << instance_to_json(in).dump(2) << '\n';
}

inline SystemInstance load_instance(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    f >> j;
    return instance_from_json(j);
}

}  // namespace fogopt
