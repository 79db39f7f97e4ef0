#pragma once

#include <cstdint>
#include <numeric>
#include <sstream>
#include <utility>
#include <vector>

#include <hybridgd/hybrid.hpp>
#include <hybridgd/objective.hpp>

namespace hybridgd {

// One agent of the distributed system. It owns exactly one block of the
// decision variable, keeps its own replica of the memory state, and holds
// the block gradient sampled at the last communication event.
struct Agent {
    Index id = 0;
    Index offset = 0;
    Index size = 0;
    Vector x;              // this agent's block
    Vector eta;            // local replica of the memory state (full length)
    Vector held_gradient;  // block i of grad L(eta), sampled at the last jump
};

// Synchronous lossless broadcast: every agent contributes exactly one block
// per round, then the assembled vector is delivered to all replicas at once.
class BroadcastBus {
public:
    explicit BroadcastBus(const BlockPartition& partition)
        : partition_(partition), assembled_(partition.total),
          published_(static_cast<std::size_t>(partition.agents()), false) {}

    void publish(Index agent, const Vector& block) {
        if (agent < 0 || agent >= partition_.agents())
            throw config_error("BroadcastBus: agent id out of range");
        if (published_[static_cast<std::size_t>(agent)])
            throw error("BroadcastBus: agent published twice in one round");
        if (block.size() != partition_.size(agent))
            throw dimension_error("BroadcastBus: block size mismatch");
        assembled_.segment(partition_.offset(agent), partition_.size(agent)) = block;
        published_[static_cast<std::size_t>(agent)] = true;
        ++count_;
    }

    bool round_complete() const { return count_ == partition_.agents(); }

    // Replaces every agent's memory replica with the assembled vector and
    // opens the next round.
    void deliver(std::vector<Agent>& agents) {
        if (!round_complete())
            throw error("BroadcastBus: deliver before all agents published");
        for (Agent& a : agents) a.eta = assembled_;
        std::fill(published_.begin(), published_.end(), false);
        count_ = 0;
    }

    const Vector& assembled() const { return assembled_; }

private:
    BlockPartition partition_;
    Vector assembled_;
    std::vector<bool> published_;
    Index count_ = 0;
};

// A recorded write of one agent into the shared decision variable.
struct WriteRange {
    Index agent = 0;
    Index offset = 0;
    Index size = 0;
};
using WriteTrace = std::vector<WriteRange>;

// True iff every index of the decision variable was written by exactly one
// agent id throughout the run (disjoint blocks covering all of [0, n)).
inline bool check_write_disjointness(const WriteTrace& trace, Index n) {
    std::vector<Index> writer(static_cast<std::size_t>(n), -1);
    for (const WriteRange& w : trace) {
        if (w.offset < 0 || w.size <= 0 || w.offset + w.size > n) return false;
        for (Index i = w.offset; i < w.offset + w.size; ++i) {
            auto& owner = writer[static_cast<std::size_t>(i)];
            if (owner == -1)
                owner = w.agent;
            else if (owner != w.agent)
                return false;
        }
    }
    for (Index owner : writer)
        if (owner == -1) return false;
    return true;
}

struct DistributedOptions {
    // Processing order of agents inside flow commits and broadcast rounds.
    // Must be a permutation of [0, N); empty means identity. The output is
    // order-independent because blocks are disjoint and the memory update
    // replaces the whole replica.
    std::vector<Index> agent_order;
    WriteTrace* write_trace = nullptr;
};

namespace detail {

inline std::vector<Index> resolve_order(const std::vector<Index>& requested, Index agents) {
    std::vector<Index> order;
    if (requested.empty()) {
        order.resize(static_cast<std::size_t>(agents));
        std::iota(order.begin(), order.end(), Index{0});
        return order;
    }
    if (static_cast<Index>(requested.size()) != agents)
        throw config_error("run_distributed: agent_order is not a permutation");
    std::vector<bool> seen(static_cast<std::size_t>(agents), false);
    for (Index id : requested) {
        if (id < 0 || id >= agents || seen[static_cast<std::size_t>(id)])
            throw config_error("run_distributed: agent_order is not a permutation");
        seen[static_cast<std::size_t>(id)] = true;
    }
    return requested;
}

inline void assert_replicas_coherent(const std::vector<Agent>& agents) {
    for (std::size_t i = 1; i < agents.size(); ++i)
        if ((agents[i].eta.array() != agents[0].eta.array()).any())
            throw error("run_distributed: agent memory replicas diverged (bus bug)");
}

} // namespace detail

// Distributed realization of the same hybrid system: N agents each
// integrate only their own block against their memory replica, a shared
// timer synchronizes the jumps, and the bus replaces every replica at once.
// Emits the identical Trajectory format as `simulate`, and for the same
// config and seed the same arc.
template <ObjectiveFunction Objective>
Trajectory run_distributed(const Objective& obj, const BlockPartition& partition,
                           const HybridState& init, const TimerConfig& timer,
                           const StopRule& stop, double sample_interval,
                           const DistributedOptions& options = {}) {
    validate_config(obj, timer);
    const Index n = obj.dimension();
    if (partition.total != n)
        throw dimension_error("run_distributed: partition does not cover the objective");
    if (init.z1.size() != n || init.z2.size() != n)
        throw dimension_error("run_distributed: init state does not match objective dimension");
    if (!(init.tau >= 0.0) || !(init.tau <= timer.tau_max))
        throw config_error("run_distributed: init tau must lie in [0, tau_max]");
    if (!(sample_interval > 0.0))
        throw config_error("run_distributed: sample_interval must be positive");
    if (!init.finite()) detail::throw_nonfinite(0.0, 0);

    const Index N = partition.agents();
    const std::vector<Index> order = detail::resolve_order(options.agent_order, N);
    const Vector x_star = obj.minimizer();

    std::vector<Agent> agents(static_cast<std::size_t>(N));
    for (Index i = 0; i < N; ++i) {
        Agent& a = agents[static_cast<std::size_t>(i)];
        a.id = i;
        a.offset = partition.offset(i);
        a.size = partition.size(i);
        a.x = init.z1.segment(a.offset, a.size);
        a.eta = init.z2;
        a.held_gradient = block_gradient(obj, a.eta, partition, i);
    }

    BroadcastBus bus(partition);
    ResetStream resets(timer);
    Trajectory traj;

    double t = 0.0;
    std::int64_t j = 0;
    double tau = init.tau;

    const auto gather = [&](double elapsed) {
        detail::assert_replicas_coherent(agents);
        HybridState s;
        s.z1.resize(n);
        for (Index id : order) {
            const Agent& a = agents[static_cast<std::size_t>(id)];
            if (elapsed == 0.0)
                s.z1.segment(a.offset, a.size) = a.x;
            else
                s.z1.segment(a.offset, a.size) = a.x - elapsed * a.held_gradient;
        }
        s.z2 = agents[0].eta;
        s.tau = std::max(tau - elapsed, 0.0);
        return s;
    };
    const auto hit_tolerance = [&](const HybridState& s) {
        return stop.kind == StopRule::Kind::tolerance &&
               distance_to_convergence_set(s, x_star) <= stop.tol;
    };
    const auto record = [&](double at, std::int64_t jj, const HybridState& s) {
        if (!s.finite()) detail::throw_nonfinite(at, jj);
        traj.samples.push_back(Sample{at, jj, s});
    };

    {
        HybridState s0 = gather(0.0);
        s0.tau = tau;
        record(t, j, s0);
        if (hit_tolerance(s0)) {
            traj.status = StopStatus::reached_tolerance;
            return traj;
        }
    }

    for (;;) {
        if (stop.kind == StopRule::Kind::max_jumps && j >= stop.jumps) {
            traj.status = StopStatus::reached_max_jumps;
            return traj;
        }
        if (stop.kind == StopRule::Kind::max_time && t >= stop.time) {
            traj.status = StopStatus::reached_max_time;
            return traj;
        }

        if (tau > 0.0) {
            const double interval = tau;
            bool truncated = false;
            double duration = interval;
            if (stop.kind == StopRule::Kind::max_time && t + interval > stop.time) {
                duration = stop.time - t;
                truncated = true;
            }
            const double t_end = t + duration;

            std::int64_t k = static_cast<std::int64_t>(std::floor(t / sample_interval)) + 1;
            for (;; ++k) {
                const double ts = static_cast<double>(k) * sample_interval;
                if (!(ts > t)) continue;
                if (!(ts < t_end)) break;
                const HybridState mid = gather(ts - t);
                record(ts, j, mid);
                if (hit_tolerance(mid)) {
                    traj.status = StopStatus::reached_tolerance;
                    return traj;
                }
            }

            // commit: each agent advances only its own block
            for (Index id : order) {
                Agent& a = agents[static_cast<std::size_t>(id)];
                a.x -= duration * a.held_gradient;
                if (options.write_trace)
                    options.write_trace->push_back(WriteRange{a.id, a.offset, a.size});
            }
            tau = tau - duration;  // exactly 0 when not truncated
            t = t_end;
            const HybridState s_end = gather(0.0);
            record(t, j, s_end);
            if (hit_tolerance(s_end)) {
                traj.status = StopStatus::reached_tolerance;
                return traj;
            }
            if (truncated) {
                traj.status = StopStatus::reached_max_time;
                return traj;
            }
        }

        if (stop.kind == StopRule::Kind::max_time && t >= stop.time) {
            traj.status = StopStatus::reached_max_time;
            return traj;
        }

        // Jump: all agents broadcast, replicas are replaced at once, the
        // shared timer resets, and every agent resamples its block gradient.
        JumpRecord rec;
        rec.t = t;
        rec.j_pre = j;
        rec.pre = gather(0.0);
        rec.pre.tau = tau;

        for (Index id : order) {
            const Agent& a = agents[static_cast<std::size_t>(id)];
            bus.publish(a.id, a.x);
        }
        bus.deliver(agents);
        detail::assert_replicas_coherent(agents);
        for (Index id : order) {
            Agent& a = agents[static_cast<std::size_t>(id)];
            a.held_gradient = block_gradient(obj, a.eta, partition, a.id);
        }
        tau = resets.next();
        j += 1;

        HybridState post = gather(0.0);
        rec.post = post;
        rec.reset_value = tau;
        traj.jumps.push_back(std::move(rec));
        record(t, j, post);
        if (hit_tolerance(post)) {
            traj.status = StopStatus::reached_tolerance;
            return traj;
        }
        if (stop.kind == StopRule::Kind::max_jumps && j >= stop.jumps) {
            traj.status = StopStatus::reached_max_jumps;
            return traj;
        }
        if (j > detail::kJumpHardCap)
            throw numerical_error("run_distributed: jump cap exceeded before the stop rule was met");
    }
}

} // namespace hybridgd
