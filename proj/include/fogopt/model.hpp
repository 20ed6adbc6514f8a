// fogopt/model.hpp - domain types and closed-form energy/delay formulas for
// the three-tier mobile/fog/cloud offloading model.
//
// Unit conventions (canonical, used everywhere in the library):
//   data          megabits (Mb)
//   rates         Mbps
//   compute       gigacycles (Gc)
//   processing    Gc/s
//   time          seconds
//   energy        joules
// Instance files carry data sizes in MB; ingestion converts MB -> Mb (x8).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fogopt {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// MB -> Mb.
inline constexpr double mb_to_megabits(double mb) { return 8.0 * mb; }
/// Mb -> MB.
inline constexpr double megabits_to_mb(double mbit) { return mbit / 8.0; }

// ─── Domain types ────────────────────────────────────────────────────────────

/// One offloading request: input/output sizes (Mb), CPU demand (Gc),
/// deadline (s).
struct Task {
    int id = 0;
    double input_size = 0.0;   // Mb
    double output_size = 0.0;  // Mb
    double cpu_cycles = 0.0;   // Gc
    double deadline = 0.0;     // s
};

/// Energy/compute profile of the mobile device holding a task. The tx/rx
/// vectors have one entry per node (index M = the direct-cloud link).
struct MobileProfile {
    double cpu_rate = 0.0;              // Gc/s
    double energy_per_gigacycle = 0.0;  // J/Gc
    std::vector<double> tx_energy;      // J/Mb, size M+1
    std::vector<double> rx_energy;      // J/Mb, size M+1
};

/// A fog node's aggregate capacities. The last node of an instance is the
/// "virtual" node modelling the device-to-cloud direct link.
struct FogNode {
    int id = 0;
    double uplink_cap = 0.0;    // Mbps
    double downlink_cap = 0.0;  // Mbps
    double cpu_cap = 0.0;       // Gc/s
    bool is_virtual_cloud = false;
};

/// Backhaul between fog nodes and the cloud server, and the per-task cloud
/// processing rate.
struct CloudLink {
    double backhaul_rate = 0.0;       // Mbps (w^c)
    double cpu_rate_per_task = 0.0;   // Gc/s (f^c)
};

/// A full problem instance: N tasks with their device profiles, M+1 fog
/// nodes (last one the virtual cloud node), and the cloud link.
struct SystemInstance {
    std::vector<Task> tasks;
    std::vector<MobileProfile> profiles;  // parallel to tasks
    std::vector<FogNode> fog_nodes;       // size M+1, last is virtual
    CloudLink cloud;

    int num_tasks() const { return static_cast<int>(tasks.size()); }
    int num_nodes() const { return static_cast<int>(fog_nodes.size()); }  // M+1
    int num_real_fog() const { return num_nodes() - 1; }                  // M
    int virtual_node() const { return num_nodes() - 1; }

    /// Throws std::invalid_argument if any type invariant is broken.
    void validate() const;
};

// ─── Placements and decisions ───────────────────────────────────────────────

enum class PlacementKind : uint8_t { Local, Fog, Cloud };

/// Where one task executes: locally, at fog node `node`, or at the cloud
/// forwarded by fog node `node` (0-based node indices; node M = virtual).
struct Placement {
    PlacementKind kind = PlacementKind::Local;
    int node = -1;

    static Placement local() { return {PlacementKind::Local, -1}; }
    static Placement fog(int j) { return {PlacementKind::Fog, j}; }
    static Placement cloud(int j) { return {PlacementKind::Cloud, j}; }

    bool operator==(const Placement&) const = default;
};

/// Number of one-hot slots per task, 2(M+1)+1. The last slot (cloud via the
/// virtual node) is structurally excluded and always zero.
inline int option_length(int num_nodes) { return 2 * num_nodes + 1; }

/// Slot layout: 0 = local, 1..M+1 = fog node (slot-1),
/// M+2..2M+2 = cloud via node (slot-M-2).
inline int placement_slot(const Placement& p, int num_nodes) {
    switch (p.kind) {
        case PlacementKind::Local: return 0;
        case PlacementKind::Fog: return 1 + p.node;
        case PlacementKind::Cloud: return 1 + num_nodes + p.node;
    }
    return -1;
}

inline Placement slot_placement(int slot, int num_nodes) {
    if (slot == 0) return Placement::local();
    if (slot <= num_nodes) return Placement::fog(slot - 1);
    return Placement::cloud(slot - 1 - num_nodes);
}

/// True unless the placement is the structurally excluded cloud path via the
/// virtual node.
inline bool placement_allowed(const Placement& p, int num_nodes) {
    return !(p.kind == PlacementKind::Cloud && p.node == num_nodes - 1);
}

/// All valid placements in LFC visit order: L, F_1..F_{M+1}, C_1..C_M.
std::vector<Placement> lfc_placements(int num_nodes);
/// All valid placements in LCF visit order: L, C_1..C_M, F_1..F_{M+1}.
std::vector<Placement> lcf_placements(int num_nodes);

/// Per-task one-hot offloading decision vectors (the binary x). Stored as an
/// N x (2(M+1)+1) bit matrix so that invalid states (for validation tests)
/// are representable.
class OffloadDecision {
public:
    OffloadDecision() = default;
    OffloadDecision(int num_tasks, int num_nodes)
        : num_tasks_(num_tasks),
          num_nodes_(num_nodes),
          bits_(static_cast<size_t>(num_tasks) * option_length(num_nodes), 0) {}

    static OffloadDecision from_placements(const std::vector<Placement>& ps,
                                           int num_nodes) {
        OffloadDecision d(static_cast<int>(ps.size()), num_nodes);
        for (size_t i = 0; i < ps.size(); ++i)
            d.set(static_cast<int>(i), ps[i]);
        return d;
    }

    int num_tasks() const { return num_tasks_; }
    int num_nodes() const { return num_nodes_; }
    int slots() const { return option_length(num_nodes_); }

    uint8_t at(int task, int slot) const {
        return bits_[static_cast<size_t>(task) * slots() + slot];
    }
    void set_bit(int task, int slot, uint8_t v) {
        bits_[static_cast<size_t>(task) * slots() + slot] = v;
    }
    /// Clears task's row and sets the slot for `p`.
    void set(int task, const Placement& p) {
        for (int s = 0; s < slots(); ++s) set_bit(task, s, 0);
        set_bit(task, placement_slot(p, num_nodes_), 1);
    }

    /// The placement selected for a task, or nullopt if the row is not
    /// one-hot.
    std::optional<Placement> placement_of(int task) const {
        int found = -1;
        for (int s = 0; s < slots(); ++s) {
            if (at(task, s)) {
                if (found >= 0) return std::nullopt;
                found = s;
            }
        }
        if (found < 0) return std::nullopt;
        return slot_placement(found, num_nodes_);
    }

    std::vector<Placement> to_placements() const {
        std::vector<Placement> out;
        out.reserve(num_tasks_);
        for (int i = 0; i < num_tasks_; ++i) {
            auto p = placement_of(i);
            if (!p) throw std::logic_error("decision row is not one-hot");
            out.push_back(*p);
        }
        return out;
    }

private:
    int num_tasks_ = 0;
    int num_nodes_ = 0;
    std::vector<uint8_t> bits_;
};

/// Per (task, node) allocated rates. Entries are zero for pairs the decision
/// does not select; cpu is zero for cloud-forwarded tasks.
struct RateTriple {
    double up = 0.0;    // Mbps
    double down = 0.0;  // Mbps
    double cpu = 0.0;   // Gc/s
};

class ResourceAllocation {
public:
    ResourceAllocation() = default;
    ResourceAllocation(int num_tasks, int num_nodes)
        : num_tasks_(num_tasks),
          num_nodes_(num_nodes),
          rates_(static_cast<size_t>(num_tasks) * num_nodes) {}

    int num_tasks() const { return num_tasks_; }
    int num_nodes() const { return num_nodes_; }

    RateTriple& at(int task, int node) {
        return rates_[static_cast<size_t>(task) * num_nodes_ + node];
    }
    const RateTriple& at(int task, int node) const {
        return rates_[static_cast<size_t>(task) * num_nodes_ + node];
    }

private:
    int num_tasks_ = 0;
    int num_nodes_ = 0;
    std::vector<RateTriple> rates_;
};

/// A complete solution: decisions, allocations, and the derived totals.
struct Solution {
    OffloadDecision decision;
    ResourceAllocation allocation;
    double total_energy = 0.0;           // J, Eq.-(10) value of the decision
    std::vector<double> per_task_delay;  // s, realized delays
};

// ─── Delay and energy formulas ──────────────────────────────────────────────

/// 0 when the numerator is 0 (an absent demand needs no rate), +inf when a
/// positive demand meets a nonpositive rate.
inline double safe_ratio(double num, double den) {
    if (num == 0.0) return 0.0;
    if (den <= 0.0) return kInfinity;
    return num / den;
}

/// Local execution time C_i / f_i^l.
inline double local_delay(const Task& t, const MobileProfile& p) {
    return t.cpu_cycles / p.cpu_rate;
}

/// Local execution energy v_i * C_i.
inline double local_energy(const Task& t, const MobileProfile& p) {
    return p.energy_per_gigacycle * t.cpu_cycles;
}

/// Fog execution time D^i/r^u + D^o/r^d + C/r^f. Throws std::domain_error
/// when a positive demand is paired with a nonpositive rate.
inline double fog_delay(const Task& t, const RateTriple& r) {
    if ((t.input_size > 0.0 && r.up <= 0.0) ||
        (t.output_size > 0.0 && r.down <= 0.0) ||
        (t.cpu_cycles > 0.0 && r.cpu <= 0.0))
        throw std::domain_error("fog_delay: zero rate for positive demand");
    return safe_ratio(t.input_size, r.up) + safe_ratio(t.output_size, r.down) +
           safe_ratio(t.cpu_cycles, r.cpu);
}

/// Device transmit+receive energy toward node `node`:
/// e^u_j D^i + e^d_j D^o.
inline double fog_energy(const Task& t, const MobileProfile& p, int node) {
    return p.tx_energy.at(node) * t.input_size +
           p.rx_energy.at(node) * t.output_size;
}

/// Cloud-forwarded execution time via a real fog node:
/// D^i/r^u + D^o/r^d + (D^i+D^o)/w^c + C/f^c. Returns +inf for the virtual
/// cloud node (its own forwarding path does not exist).
inline double cloud_delay(const Task& t, const RateTriple& r,
                          const CloudLink& c, int node, int num_nodes) {
    if (node == num_nodes - 1) return kInfinity;
    if ((t.input_size > 0.0 && r.up <= 0.0) ||
        (t.output_size > 0.0 && r.down <= 0.0))
        throw std::domain_error("cloud_delay: zero rate for positive demand");
    return safe_ratio(t.input_size, r.up) + safe_ratio(t.output_size, r.down) +
           (t.input_size + t.output_size) / c.backhaul_rate +
           t.cpu_cycles / c.cpu_rate_per_task;
}

/// Device-side energy of cloud forwarding equals the fog value (Eq. (6)).
inline double cloud_energy(const Task& t, const MobileProfile& p, int node) {
    return fog_energy(t, p, node);
}

/// Device-side energy of the option occupying `slot` for task i. The
/// excluded cloud-via-virtual slot nominally carries the virtual node's fog
/// energy; the option itself is never selectable.
inline double energy_of_slot(const SystemInstance& in, int task, int slot) {
    const Task& t = in.tasks[task];
    const MobileProfile& p = in.profiles[task];
    if (slot == 0) return local_energy(t, p);
    Placement pl = slot_placement(slot, in.num_nodes());
    return fog_energy(t, p, pl.node);
}

inline double energy_of_placement(const SystemInstance& in, int task,
                                  const Placement& p) {
    return energy_of_slot(in, task, placement_slot(p, in.num_nodes()));
}

/// Realized delay of one task under a one-hot decision row and its
/// allocation (Eq. (8) restricted to binary x: dispatch on the selected
/// option). Never throws; impossible configurations yield +inf.
inline double task_delay(const SystemInstance& in, int task,
                         const Placement& p, const ResourceAllocation& alloc) {
    const Task& t = in.tasks[task];
    switch (p.kind) {
        case PlacementKind::Local:
            return local_delay(t, in.profiles[task]);
        case PlacementKind::Fog: {
            const RateTriple& r = alloc.at(task, p.node);
            return safe_ratio(t.input_size, r.up) +
                   safe_ratio(t.output_size, r.down) +
                   safe_ratio(t.cpu_cycles, r.cpu);
        }
        case PlacementKind::Cloud: {
            if (p.node == in.virtual_node()) return kInfinity;
            const RateTriple& r = alloc.at(task, p.node);
            return safe_ratio(t.input_size, r.up) +
                   safe_ratio(t.output_size, r.down) +
                   (t.input_size + t.output_size) / in.cloud.backhaul_rate +
                   t.cpu_cycles / in.cloud.cpu_rate_per_task;
        }
    }
    return kInfinity;
}

/// Total device energy of a decision set, e^T x (Eq. (10)). Depends only on
/// the decisions, never on allocations.
inline double total_energy(const OffloadDecision& d, const SystemInstance& in) {
    double e = 0.0;
    for (int i = 0; i < d.num_tasks(); ++i)
        for (int s = 0; s < d.slots(); ++s)
            if (d.at(i, s)) e += energy_of_slot(in, i, s);
    return e;
}

// ─── Solution validation ────────────────────────────────────────────────────

struct Violation {
    enum class Kind { Delay, CpuCap, UplinkCap, DownlinkCap, OneHot };
    Kind kind;
    int task = -1;   // Delay / OneHot
    int node = -1;   // capacity kinds
    double amount = 0.0;  // overshoot beyond the tolerated bound
};

/// Checks C1 (delays), C2-C4 (per-node capacity sums), and C5 (one-hot rows,
/// excluded slot zero) with relative tolerance `tol`. Violations are
/// reported, never thrown.
std::vector<Violation> validate_solution(const Solution& sol,
                                         const SystemInstance& in,
                                         double tol = 1e-6);

/// Per-task error flags: a task errs when its realized delay exceeds its
/// deadline or when any capacity constraint of its assigned node is violated.
std::vector<bool> task_error_flags(const Solution& sol,
                                   const SystemInstance& in,
                                   double tol = 1e-6);

/// Fraction of tasks flagged by task_error_flags.
double error_rate(const Solution& sol, const SystemInstance& in,
                  double tol = 1e-6);

// ─── Offloading analysis ────────────────────────────────────────────────────

/// Complexity threshold alpha* above which offloading toward node `node`
/// saves energy: (e^u D^i + e^d D^o)/(v D^i), reported in Gc per MB
/// (internal Mb units give Gc/Mb; the MB convention multiplies by 8).
inline double offload_benefit_threshold(const Task& t, const MobileProfile& p,
                                        int node = 0) {
    double per_mbit = (p.tx_energy.at(node) * t.input_size +
                       p.rx_energy.at(node) * t.output_size) /
                      (p.energy_per_gigacycle * t.input_size);
    return 8.0 * per_mbit;
}

/// Task demands normalized by the (residual) deadline, Eq. (22). With these,
/// beta_i <= 1 is exactly the delay constraint.
struct RelativeSize {
    double input = 0.0;   // D^i' (Mbps-equivalent demand)
    double output = 0.0;  // D^o'
    double cpu = 0.0;     // C' (Gc/s-equivalent; 0 for cloud placement)
};

enum class ExecSite : uint8_t { Fog, Cloud };

/// Deadline budget left for transmission when a task is cloud-forwarded:
/// t^r - (D^i+D^o)/w^c - C/f^c.
inline double cloud_residual_deadline(const Task& t, const CloudLink& c) {
    return t.deadline -
           (t.input_size + t.output_size) / c.backhaul_rate -
           t.cpu_cycles / c.cpu_rate_per_task;
}

/// Relative size of a task for fog or cloud execution. Returns nullopt when
/// the cloud residual deadline is nonpositive (the cloud path cannot meet
/// the deadline at any rate).
inline std::optional<RelativeSize> relative_size(const Task& t, ExecSite site,
                                                 const CloudLink& c) {
    if (site == ExecSite::Fog)
        return RelativeSize{t.input_size / t.deadline,
                            t.output_size / t.deadline,
                            t.cpu_cycles / t.deadline};
    double residual = cloud_residual_deadline(t, c);
    if (residual <= 0.0) return std::nullopt;
    return RelativeSize{t.input_size / residual, t.output_size / residual, 0.0};
}

/// Satisfaction rate beta_i (Eq. (23)); the task's delay constraint holds
/// iff the value is <= 1.
inline double satisfaction_rate(const RelativeSize& rel, const RateTriple& r) {
    return safe_ratio(rel.input, r.up) + safe_ratio(rel.output, r.down) +
           safe_ratio(rel.cpu, r.cpu);
}

// ─── Inline definitions ─────────────────────────────────────────────────────

inline std::vector<Placement> lfc_placements(int num_nodes) {
    std::vector<Placement> out;
    out.push_back(Placement::local());
    for (int j = 0; j < num_nodes; ++j) out.push_back(Placement::fog(j));
    for (int j = 0; j + 1 < num_nodes; ++j) out.push_back(Placement::cloud(j));
    return out;
}

inline std::vector<Placement> lcf_placements(int num_nodes) {
    std::vector<Placement> out;
    out.push_back(Placement::local());
    for (int j = 0; j + 1 < num_nodes; ++j) out.push_back(Placement::cloud(j));
    for (int j = 0; j < num_nodes; ++j) out.push_back(Placement::fog(j));
    return out;
}

inline void SystemInstance::validate() const {
    auto fail = [](const std::string& msg) {
        throw std::invalid_argument("SystemInstance: " + msg);
    };
    if (tasks.empty()) fail("no tasks");
    if (profiles.size() != tasks.size()) fail("profiles/tasks size mismatch");
    if (fog_nodes.size() < 2) fail("need at least one real fog node plus the virtual node");
    int virtuals = 0;
    for (size_t j = 0; j < fog_nodes.size(); ++j) {
        const FogNode& n = fog_nodes[j];
        if (n.uplink_cap <= 0 || n.downlink_cap <= 0 || n.cpu_cap <= 0)
            fail("node " + std::to_string(j) + " has nonpositive capacity");
        if (n.is_virtual_cloud) ++virtuals;
    }
    if (virtuals != 1 || !fog_nodes.back().is_virtual_cloud)
        fail("exactly the last node must be the virtual cloud node");
    if (cloud.backhaul_rate <= 0 || cloud.cpu_rate_per_task <= 0)
        fail("cloud link rates must be positive");
    for (size_t i = 0; i < tasks.size(); ++i) {
        const Task& t = tasks[i];
        const MobileProfile& p = profiles[i];
        if (t.input_size <= 0) fail("task " + std::to_string(i) + ": input_size <= 0");
        if (t.output_size < 0) fail("task " + std::to_string(i) + ": output_size < 0");
        if (t.cpu_cycles <= 0) fail("task " + std::to_string(i) + ": cpu_cycles <= 0");
        if (t.deadline <= 0) fail("task " + std::to_string(i) + ": deadline <= 0");
        if (p.cpu_rate <= 0 || p.energy_per_gigacycle <= 0)
            fail("task " + std::to_string(i) + ": nonpositive profile rates");
        if (p.tx_energy.size() != fog_nodes.size() ||
            p.rx_energy.size() != fog_nodes.size())
            fail("task " + std::to_string(i) + ": tx/rx vectors must have M+1 entries");
        for (double e : p.tx_energy)
            if (e <= 0) fail("task " + std::to_string(i) + ": nonpositive tx energy");
        for (double e : p.rx_energy)
            if (e <= 0) fail("task " + std::to_string(i) + ": nonpositive rx energy");
    }
}

inline std::vector<Violation> validate_solution(const Solution& sol,
                                                const SystemInstance& in,
                                                double tol) {
    std::vector<Violation> out;
    const int n = in.num_tasks();
    const int nodes = in.num_nodes();
    auto margin = [&](double ref) { return tol * std::max(1.0, std::abs(ref)); };

    // C5: rows one-hot, entries binary, excluded slot zero.
    for (int i = 0; i < n; ++i) {
        int ones = 0;
        bool bad = false;
        for (int s = 0; s < sol.decision.slots(); ++s) {
            uint8_t b = sol.decision.at(i, s);
            if (b != 0 && b != 1) bad = true;
            ones += (b != 0);
        }
        if (sol.decision.at(i, sol.decision.slots() - 1)) bad = true;
        if (bad || ones != 1)
            out.push_back({Violation::Kind::OneHot, i, -1,
                           static_cast<double>(ones) - 1.0});
    }

    // C1: realized delay per task.
    for (int i = 0; i < n; ++i) {
        auto p = sol.decision.placement_of(i);
        if (!p) continue;  // already reported as OneHot
        double d = task_delay(in, i, *p, sol.allocation);
        double limit = in.tasks[i].deadline;
        if (d > limit + margin(limit))
            out.push_back({Violation::Kind::Delay, i, -1, d - limit});
    }

    // C2-C4: per-node capacity sums.
    for (int j = 0; j < nodes; ++j) {
        double su = 0, sd = 0, sf = 0;
        for (int i = 0; i < n; ++i) {
            const RateTriple& r = sol.allocation.at(i, j);
            su += r.up;
            sd += r.down;
            sf += r.cpu;
        }
        const FogNode& node = in.fog_nodes[j];
        if (sf > node.cpu_cap + margin(node.cpu_cap))
            out.push_back({Violation::Kind::CpuCap, -1, j, sf - node.cpu_cap});
        if (su > node.uplink_cap + margin(node.uplink_cap))
            out.push_back({Violation::Kind::UplinkCap, -1, j, su - node.uplink_cap});
        if (sd > node.downlink_cap + margin(node.downlink_cap))
            out.push_back({Violation::Kind::DownlinkCap, -1, j, sd - node.downlink_cap});
    }
    return out;
}

inline std::vector<bool> task_error_flags(const Solution& sol,
                                          const SystemInstance& in,
                                          double tol) {
    auto violations = validate_solution(sol, in, tol);
    std::vector<bool> flags(in.num_tasks(), false);
    std::vector<bool> node_bad(in.num_nodes(), false);
    for (const Violation& v : violations) {
        if (v.kind == Violation::Kind::Delay) flags[v.task] = true;
        else if (v.node >= 0) node_bad[v.node] = true;
    }
    for (int i = 0; i < in.num_tasks(); ++i) {
        auto p = sol.decision.placement_of(i);
        if (p && p->kind != PlacementKind::Local && node_bad[p->node])
            flags[i] = true;
    }
    return flags;
}

inline double error_rate(const Solution& sol, const SystemInstance& in,
                         double tol) {
    auto flags = task_error_flags(sol, in, tol);
    double bad = static_cast<double>(std::count(flags.begin(), flags.end(), true));
    return bad / static_cast<double>(flags.size());
}

}  // namespace fogopt
