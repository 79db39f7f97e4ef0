#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <sstream>
#include <utility>
#include <variant>
#include <vector>

#include <hybridgd/certificate.hpp>
#include <hybridgd/errors.hpp>
#include <hybridgd/objective.hpp>

namespace hybridgd {

// State of the combined system: z1 the concatenated agent states, z2 the
// memory state held between communications, tau the countdown timer.
struct HybridState {
    Vector z1;
    Vector z2;
    double tau = 0.0;

    bool finite() const {
        return z1.allFinite() && z2.allFinite() && std::isfinite(tau);
    }
};

// Euclidean distance of (z1, z2) from (x*, x*); the timer component is free.
inline double distance_to_convergence_set(const HybridState& state, const Vector& x_star) {
    if (state.z1.size() != x_star.size() || state.z2.size() != x_star.size())
        throw dimension_error("distance_to_convergence_set: state/minimizer size mismatch");
    return std::sqrt((state.z1 - x_star).squaredNorm() + (state.z2 - x_star).squaredNorm());
}

// How the timer is reseeded when it hits zero. Every value produced must lie
// in [tau_min, tau_max].
struct ResetPolicy {
    enum class Kind { fixed, uniform, sequence };
    Kind kind = Kind::fixed;
    double value = 0.0;                // fixed
    std::uint64_t seed = 0;            // uniform
    std::vector<double> values;        // sequence, cycled

    static ResetPolicy fixed_value(double v) {
        ResetPolicy p;
        p.kind = Kind::fixed;
        p.value = v;
        return p;
    }
    static ResetPolicy uniform(std::uint64_t seed) {
        ResetPolicy p;
        p.kind = Kind::uniform;
        p.seed = seed;
        return p;
    }
    static ResetPolicy sequence(std::vector<double> vals) {
        ResetPolicy p;
        p.kind = Kind::sequence;
        p.values = std::move(vals);
        return p;
    }
};

struct TimerConfig {
    double tau_min = 0.0;
    double tau_max = 0.0;
    ResetPolicy reset;

    void validate() const {
        if (!(tau_min > 0.0) || !(tau_min <= tau_max))
            throw config_error("TimerConfig: need 0 < tau_min <= tau_max");
        switch (reset.kind) {
            case ResetPolicy::Kind::fixed:
                if (reset.value < tau_min || reset.value > tau_max)
                    throw config_error("TimerConfig: fixed reset value outside [tau_min, tau_max]");
                break;
            case ResetPolicy::Kind::uniform:
                break;
            case ResetPolicy::Kind::sequence:
                if (reset.values.empty())
                    throw config_error("TimerConfig: sequence reset policy needs values");
                for (double v : reset.values)
                    if (v < tau_min || v > tau_max)
                        throw config_error("TimerConfig: sequence reset value outside [tau_min, tau_max]");
                break;
        }
    }

    // The paper's experimental choice: tau_max = beta^2/(3 K^3 + 1), which
    // sits strictly inside the certified window, and tau_min = tau_max / 2.
    // Default reset: fixed at tau_max (worst case for the analysis).
    static TimerConfig auto_paper(double beta, double lipschitz) {
        TimerConfig cfg;
        cfg.tau_max = beta * beta / (3.0 * lipschitz * lipschitz * lipschitz + 1.0);
        cfg.tau_min = cfg.tau_max / 2.0;
        cfg.reset = ResetPolicy::fixed_value(cfg.tau_max);
        return cfg;
    }
};

// Draws the successive reset values for one run. Deterministic per seed.
class ResetStream {
public:
    explicit ResetStream(const TimerConfig& cfg)
        : cfg_(cfg), rng_(cfg.reset.seed) {}

    double next() {
        switch (cfg_.reset.kind) {
            case ResetPolicy::Kind::fixed:
                return cfg_.reset.value;
            case ResetPolicy::Kind::uniform: {
                std::uniform_real_distribution<double> dist(cfg_.tau_min, cfg_.tau_max);
                return std::clamp(dist(rng_), cfg_.tau_min, cfg_.tau_max);
            }
            case ResetPolicy::Kind::sequence: {
                const double v = cfg_.reset.values[pos_ % cfg_.reset.values.size()];
                ++pos_;
                return v;
            }
        }
        throw error("ResetStream: unreachable");
    }

private:
    TimerConfig cfg_;
    std::mt19937_64 rng_;
    std::size_t pos_ = 0;
};

struct HybridTime {
    double t = 0.0;
    std::int64_t j = 0;
};

struct Sample {
    double t = 0.0;
    std::int64_t j = 0;
    HybridState state;
};

struct JumpRecord {
    double t = 0.0;            // jump instant, t_{j+1} = t_j + duration of interval j
    std::int64_t j_pre = 0;    // jump takes j_pre -> j_pre + 1
    HybridState pre;
    HybridState post;
    double reset_value = 0.0;  // tau after the jump; also the scheduled
                               // duration of the next flow interval
};

enum class StopStatus { reached_max_time, reached_max_jumps, reached_tolerance };

struct StopRule {
    enum class Kind { max_time, max_jumps, tolerance };
    Kind kind = Kind::max_jumps;
    double time = 0.0;
    std::int64_t jumps = 0;
    double tol = 0.0;

    static StopRule max_time(double T) {
        if (!(T >= 0.0)) throw config_error("StopRule: max_time must be nonnegative");
        StopRule r;
        r.kind = Kind::max_time;
        r.time = T;
        return r;
    }
    static StopRule max_jumps(std::int64_t J) {
        if (J < 0) throw config_error("StopRule: max_jumps must be nonnegative");
        StopRule r;
        r.kind = Kind::max_jumps;
        r.jumps = J;
        return r;
    }
    static StopRule tolerance(double eps) {
        if (!(eps > 0.0)) throw config_error("StopRule: tolerance must be positive");
        StopRule r;
        r.kind = Kind::tolerance;
        r.tol = eps;
        return r;
    }
};

// One hybrid arc: samples indexed by hybrid time plus the jump log. Within
// one flow interval z2 is bit-constant and tau decays with slope -1; jump
// instants contribute two samples sharing t (pre with j, post with j+1).
struct Trajectory {
    std::vector<Sample> samples;
    std::vector<JumpRecord> jumps;
    StopStatus status = StopStatus::reached_max_jumps;

    // Start time t_j of flow interval j.
    double interval_start(std::int64_t j) const {
        if (j <= 0) return 0.0;
        const auto k = static_cast<std::size_t>(j - 1);
        if (k >= jumps.size()) throw error("Trajectory: interval index out of range");
        return jumps[k].t;
    }

    std::int64_t jump_count() const { return static_cast<std::int64_t>(jumps.size()); }

    const Sample& initial() const {
        if (samples.empty()) throw error("Trajectory: empty");
        return samples.front();
    }
    const Sample& final_sample() const {
        if (samples.empty()) throw error("Trajectory: empty");
        return samples.back();
    }
};

// Certifies the objective/timer pairing and derives the convergence
// constants. Rejects tau_max >= beta^2/(3 K^3) and malformed windows.
template <ObjectiveFunction Objective>
ConvergenceCertificate validate_config(const Objective& obj, const TimerConfig& timer) {
    timer.validate();
    return make_certificate(obj.beta(), obj.lipschitz(), timer.tau_min, timer.tau_max);
}

// Advances the state along the flow map for `duration` seconds. The held
// gradient makes the flow affine, so this is the exact solution, not an
// integration: z1 <- z1 - duration * grad L(z2), tau <- tau - duration.
template <ObjectiveFunction Objective>
HybridState flow(const HybridState& state, double duration, const Objective& obj) {
    if (state.z1.size() != obj.dimension() || state.z2.size() != obj.dimension())
        throw dimension_error("flow: state does not match objective dimension");
    if (!(duration >= 0.0))
        throw flow_past_jump_error("flow: duration must be nonnegative");
    if (duration > state.tau) {
        std::ostringstream msg;
        msg << "flow: duration " << duration << " exceeds remaining timer " << state.tau;
        throw flow_past_jump_error(msg.str());
    }
    if (duration == 0.0) return state;
    HybridState out = state;
    out.z1 -= duration * obj.gradient(state.z2);
    out.tau = state.tau - duration;
    return out;
}

// Applies the jump map: z2 <- z1, tau <- reset drawn from the policy.
// Only defined on the jump set tau = 0 (the simulator schedules jumps
// analytically, so exact zero is reachable).
inline HybridState jump(const HybridState& state, ResetStream& resets) {
    if (state.tau != 0.0)
        throw not_in_jump_set_error("jump: state has tau != 0");
    HybridState out = state;
    out.z2 = state.z1;
    out.tau = resets.next();
    return out;
}

namespace detail {

inline void throw_nonfinite(double t, std::int64_t j) {
    std::ostringstream msg;
    msg << "simulate: non-finite state at hybrid time (t=" << t << ", j=" << j << ")";
    throw numerical_error(msg.str());
}

// Guard against a tolerance stop that can never be met.
inline constexpr std::int64_t kJumpHardCap = 20'000'000;

} // namespace detail

// Runs the combined hybrid system from `init`: exact flow segments of
// length tau alternating with timer resets. Samples are recorded at global
// multiples of sample_interval inside each flow interval plus both
// endpoints of every jump. Deterministic for a fixed config and seed.
template <ObjectiveFunction Objective>
Trajectory simulate(const Objective& obj, const BlockPartition& partition,
                    const HybridState& init, const TimerConfig& timer,
                    const StopRule& stop, double sample_interval) {
    const ConvergenceCertificate cert = validate_config(obj, timer);
    const Index n = obj.dimension();
    if (partition.total != n)
        throw dimension_error("simulate: partition does not cover the objective");
    if (init.z1.size() != n || init.z2.size() != n)
        throw dimension_error("simulate: init state does not match objective dimension");
    if (!(init.tau >= 0.0) || !(init.tau <= timer.tau_max))
        throw config_error("simulate: init tau must lie in [0, tau_max]");
    if (!(sample_interval > 0.0))
        throw config_error("simulate: sample_interval must be positive");
    if (!init.finite()) detail::throw_nonfinite(0.0, 0);

    const Vector x_star = obj.minimizer();
    Trajectory traj;
    ResetStream resets(timer);

    double t = 0.0;
    std::int64_t j = 0;
    HybridState state = init;

    const auto hit_tolerance = [&](const HybridState& s) {
        return stop.kind == StopRule::Kind::tolerance &&
               distance_to_convergence_set(s, x_star) <= stop.tol;
    };
    const auto record = [&](double at, std::int64_t jj, const HybridState& s) {
        if (!s.finite()) detail::throw_nonfinite(at, jj);
        traj.samples.push_back(Sample{at, jj, s});
    };

    record(t, j, state);
    if (hit_tolerance(state)) {
        traj.status = StopStatus::reached_tolerance;
        return traj;
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

        if (state.tau > 0.0) {
            const double interval = state.tau;
            bool truncated = false;
            double duration = interval;
            if (stop.kind == StopRule::Kind::max_time && t + interval > stop.time) {
                duration = stop.time - t;
                truncated = true;
            }

            const Vector held = obj.gradient(state.z2);
            const double t_end = t + duration;

            // interior samples at global multiples of sample_interval
            std::int64_t k = static_cast<std::int64_t>(std::floor(t / sample_interval)) + 1;
            for (;; ++k) {
                const double ts = static_cast<double>(k) * sample_interval;
                if (!(ts > t)) continue;
                if (!(ts < t_end)) break;
                const double elapsed = ts - t;
                HybridState mid;
                mid.z1 = state.z1 - elapsed * held;
                mid.z2 = state.z2;
                // elapsed can land within one ulp of the interval length
                mid.tau = std::max(state.tau - elapsed, 0.0);
                record(ts, j, mid);
                if (hit_tolerance(mid)) {
                    traj.status = StopStatus::reached_tolerance;
                    return traj;
                }
            }

            state.z1 -= duration * held;
            state.tau = state.tau - duration;  // exactly 0 when not truncated
            t = t_end;
            record(t, j, state);
            if (hit_tolerance(state)) {
                traj.status = StopStatus::reached_tolerance;
                return traj;
            }
            if (truncated) {
                traj.status = StopStatus::reached_max_time;
                return traj;
            }
        }

        // At the jump set. A jump scheduled exactly at the time horizon is
        // not taken; the arc ends in the flow interval.
        if (stop.kind == StopRule::Kind::max_time && t >= stop.time) {
            traj.status = StopStatus::reached_max_time;
            return traj;
        }

        JumpRecord rec;
        rec.t = t;
        rec.j_pre = j;
        rec.pre = state;
        state = jump(state, resets);
        rec.post = state;
        rec.reset_value = state.tau;
        traj.jumps.push_back(std::move(rec));
        j += 1;
        record(t, j, state);
        if (hit_tolerance(state)) {
            traj.status = StopStatus::reached_tolerance;
            return traj;
        }
        if (stop.kind == StopRule::Kind::max_jumps && j >= stop.jumps) {
            traj.status = StopStatus::reached_max_jumps;
            return traj;
        }
        if (j > detail::kJumpHardCap)
            throw numerical_error("simulate: jump cap exceeded before the stop rule was met");
    }
}

} // namespace hybridgd
