#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <hybridgd/certificate.hpp>
#include <hybridgd/hybrid.hpp>
#include <hybridgd/objective.hpp>

namespace hybridgd {

// Distance of a state from the convergence set {x*} x {x*} x [0, tau_max].
inline double distance_to_A(const HybridState& state, const Vector& x_star) {
    return distance_to_convergence_set(state, x_star);
}

// V(xi) = (L(z1) - L(x*))^2 + (L(z2) - L(x*))^2. Zero exactly on the
// convergence set; strong convexity makes the minimizer unique.
template <ObjectiveFunction Objective>
double lyapunov(const Objective& obj, const HybridState& state) {
    const double l_star = obj.value(obj.minimizer());
    const double d1 = obj.value(state.z1) - l_star;
    const double d2 = obj.value(state.z2) - l_star;
    return d1 * d1 + d2 * d2;
}

// Certified envelope for arbitrary initialization, valid at samples with
// j >= 1: (8/3) 2^(1/4) sqrt(K/beta) e^(-rate t) d0.
inline double theorem_bound(const ConvergenceCertificate& cert, double t,
                            double initial_distance) {
    if (!(t >= 0.0)) throw config_error("theorem_bound: t must be nonnegative");
    return cert.thm_prefactor * std::exp(-cert.rate * t) * initial_distance;
}

// Tighter envelope under equal initialization (z1(0,0) = z2(0,0)), valid at
// every sample: sqrt(K/beta) 8^(1/4) e^(-rate t) d0.
inline double proposition_bound(const ConvergenceCertificate& cert, double t,
                                double initial_distance) {
    if (!(t >= 0.0)) throw config_error("proposition_bound: t must be nonnegative");
    return cert.prop_prefactor * std::exp(-cert.rate * t) * initial_distance;
}

// One inequality tracked across a trajectory. Margins are (rhs - lhs)
// normalized by max(1, |rhs|); the inequality is exact in reals, so the
// tolerance only absorbs floating-point accumulation.
struct InequalityResult {
    std::string name;
    double worst_margin = std::numeric_limits<double>::infinity();
    HybridTime at{0.0, 0};
    std::int64_t points = 0;
    bool pass = true;
};

struct CheckReport {
    std::string check;
    double tolerance = 0.0;
    std::vector<InequalityResult> inequalities;

    bool pass() const {
        for (const auto& q : inequalities)
            if (!q.pass) return false;
        return true;
    }
    const InequalityResult& find(const std::string& name) const {
        for (const auto& q : inequalities)
            if (q.name == name) return q;
        throw error("CheckReport: no inequality named " + name);
    }
};

namespace detail {

constexpr double kCheckTolerance = 1e-9;

inline double normalized_margin(double lhs, double rhs) {
    return (rhs - lhs) / std::max(1.0, std::abs(rhs));
}

struct MarginTracker {
    InequalityResult result;
    explicit MarginTracker(std::string name) { result.name = std::move(name); }
    void observe(double margin, double t, std::int64_t j) {
        ++result.points;
        if (margin < result.worst_margin) {
            result.worst_margin = margin;
            result.at = HybridTime{t, j};
        }
    }
    InequalityResult finish(double tolerance) {
        result.pass = result.points == 0 || result.worst_margin >= -tolerance;
        return result;
    }
};

inline void require_equal_init(const Trajectory& traj, const char* who) {
    const Sample& s0 = traj.initial();
    if (s0.t != 0.0 || s0.j != 0 ||
        (s0.state.z1.array() != s0.state.z2.array()).any())
        throw hypothesis_error(std::string(who) +
                               ": trajectory does not satisfy z1(0,0) = z2(0,0)");
}

// True when the sample sits strictly inside its flow interval (not a jump
// endpoint and not the initial point of the interval).
inline bool interior_sample(const Trajectory& traj, const Sample& s, double elapsed) {
    if (!(elapsed > 0.0)) return false;
    const auto k = static_cast<std::size_t>(s.j);
    if (k < traj.jumps.size() && !(s.t < traj.jumps[k].t)) return false;
    return true;
}

} // namespace detail

// Verifies the flow-interval contraction facts along an equal-init arc:
//   contraction      ||z1 - x*||^2 <= q(t,t_j) ||z2(t_j) - x*||^2
//   hold_deviation   ||z1 - z2||   <= tau_max ||grad L(z2(t_j))||
//   lower            ||z1 - x*||^2 >= B ||z2(t_j) - x*||^2
//   q_in_unit_interval   q(t,t_j) in (0,1) strictly, whenever t > t_j
// with q(t,t_j) = 1 - 2(t-t_j) beta + (t-t_j)^2 K^2.
template <ObjectiveFunction Objective>
CheckReport check_lemma3(const Trajectory& traj, const Objective& obj,
                         const ConvergenceCertificate& cert) {
    detail::require_equal_init(traj, "check_lemma3");
    const Vector x_star = obj.minimizer();
    const double beta = cert.beta, K = cert.lipschitz;

    detail::MarginTracker contraction("contraction");
    detail::MarginTracker hold_deviation("hold_deviation");
    detail::MarginTracker lower("lower");
    detail::MarginTracker q_range("q_in_unit_interval");

    for (const Sample& s : traj.samples) {
        const double t_j = traj.interval_start(s.j);
        const double dt = s.t - t_j;
        const double q = 1.0 - 2.0 * dt * beta + dt * dt * K * K;
        const double z1_sq = (s.state.z1 - x_star).squaredNorm();
        const double z2_sq = (s.state.z2 - x_star).squaredNorm();

        contraction.observe(detail::normalized_margin(z1_sq, q * z2_sq), s.t, s.j);
        const double grad_norm = obj.gradient(s.state.z2).norm();
        hold_deviation.observe(
            detail::normalized_margin((s.state.z1 - s.state.z2).norm(),
                                      cert.tau_max * grad_norm),
            s.t, s.j);
        lower.observe(detail::normalized_margin(cert.B * z2_sq, z1_sq), s.t, s.j);
        if (dt > 0.0) q_range.observe(std::min(q, 1.0 - q), s.t, s.j);
    }

    CheckReport report;
    report.check = "lemma3";
    report.tolerance = detail::kCheckTolerance;
    report.inequalities.push_back(contraction.finish(report.tolerance));
    report.inequalities.push_back(hold_deviation.finish(report.tolerance));
    report.inequalities.push_back(lower.finish(report.tolerance));
    report.inequalities.push_back(q_range.finish(0.0));  // strict membership
    // strictness: q must be inside the open interval
    for (auto& q : report.inequalities)
        if (q.name == "q_in_unit_interval") q.pass = q.points == 0 || q.worst_margin > 0.0;
    return report;
}

// Gradient alignment at interior flow samples of an equal-init arc:
//   grad L(z1)' grad L(z2) >= A ||z2(t_j) - x*||^2.
template <ObjectiveFunction Objective>
CheckReport check_lemma4(const Trajectory& traj, const Objective& obj,
                         const ConvergenceCertificate& cert) {
    detail::require_equal_init(traj, "check_lemma4");
    const Vector x_star = obj.minimizer();

    detail::MarginTracker alignment("gradient_alignment");
    for (const Sample& s : traj.samples) {
        const double t_j = traj.interval_start(s.j);
        if (!detail::interior_sample(traj, s, s.t - t_j)) continue;
        const double lhs = cert.A_const * (s.state.z2 - x_star).squaredNorm();
        const double rhs = obj.gradient(s.state.z1).dot(obj.gradient(s.state.z2));
        alignment.observe(detail::normalized_margin(lhs, rhs), s.t, s.j);
    }

    CheckReport report;
    report.check = "lemma4";
    report.tolerance = detail::kCheckTolerance;
    report.inequalities.push_back(alignment.finish(report.tolerance));
    return report;
}

// V never increases across a jump on equal-init arcs. Absolute tolerance:
// the two V evaluations differ only by rounding when the state is at rest.
template <ObjectiveFunction Objective>
CheckReport check_jump_descent(const Trajectory& traj, const Objective& obj) {
    detail::require_equal_init(traj, "check_jump_descent");

    detail::MarginTracker descent("jump_descent");
    for (const JumpRecord& rec : traj.jumps) {
        const double v_pre = lyapunov(obj, rec.pre);
        const double v_post = lyapunov(obj, rec.post);
        descent.observe(v_pre - v_post, rec.t, rec.j_pre + 1);
    }

    CheckReport report;
    report.check = "jump_descent";
    report.tolerance = 1e-10;
    report.inequalities.push_back(descent.finish(report.tolerance));
    return report;
}

enum class EnvelopeMode { proposition, theorem };

// Distance envelope along the arc. Theorem mode covers samples with j >= 1
// under any initialization; proposition mode covers every sample but
// requires equal initialization.
inline CheckReport check_convergence_envelope(const Trajectory& traj,
                                              const ConvergenceCertificate& cert,
                                              EnvelopeMode mode, const Vector& x_star) {
    if (mode == EnvelopeMode::proposition)
        detail::require_equal_init(traj, "check_convergence_envelope[proposition]");
    const double d0 = distance_to_A(traj.initial().state, x_star);

    detail::MarginTracker envelope(mode == EnvelopeMode::proposition
                                       ? "proposition_envelope"
                                       : "theorem_envelope");
    for (const Sample& s : traj.samples) {
        if (mode == EnvelopeMode::theorem && s.j < 1) continue;
        const double lhs = distance_to_A(s.state, x_star);
        const double rhs = mode == EnvelopeMode::proposition
                               ? proposition_bound(cert, s.t, d0)
                               : theorem_bound(cert, s.t, d0);
        envelope.observe(detail::normalized_margin(lhs, rhs), s.t, s.j);
    }

    CheckReport report;
    report.check = mode == EnvelopeMode::proposition ? "envelope_proposition"
                                                     : "envelope_theorem";
    report.tolerance = detail::kCheckTolerance;
    report.inequalities.push_back(envelope.finish(report.tolerance));
    return report;
}

// No finite escape: V at every sample stays below the growth constant
// 8192 K^2/(81 beta^2) times V at the initial point, any initialization.
template <ObjectiveFunction Objective>
CheckReport check_escape_growth(const Trajectory& traj, const Objective& obj,
                                const ConvergenceCertificate& cert) {
    const double v0 = lyapunov(obj, traj.initial().state);
    const double cap = cert.escape_growth * v0;

    detail::MarginTracker growth("escape_growth");
    for (const Sample& s : traj.samples)
        growth.observe(detail::normalized_margin(lyapunov(obj, s.state), cap), s.t, s.j);

    CheckReport report;
    report.check = "escape_growth";
    report.tolerance = detail::kCheckTolerance;
    report.inequalities.push_back(growth.finish(report.tolerance));
    return report;
}

// Timer discipline along a finished arc:
//   window      every reset lies in [tau_min, tau_max] (exact, by policy)
//   scheduling  t_{k+1} equals t_k + reset_k bit-for-bit (jumps are
//               scheduled analytically, never detected)
//   non_zeno    jump count over [0, T] is at most ceil(T/tau_min) + 1
//   tau_range   0 <= tau <= tau_max at every recorded sample
inline CheckReport check_timer_discipline(const Trajectory& traj, const TimerConfig& timer) {
    detail::MarginTracker window("reset_window");
    detail::MarginTracker scheduling("gap_scheduling");
    detail::MarginTracker non_zeno("non_zeno_count");
    detail::MarginTracker tau_range("tau_range");

    for (std::size_t k = 0; k < traj.jumps.size(); ++k) {
        const JumpRecord& rec = traj.jumps[k];
        window.observe(std::min(rec.reset_value - timer.tau_min,
                                timer.tau_max - rec.reset_value),
                       rec.t, rec.j_pre + 1);
        if (k >= 1) {
            const JumpRecord& prev = traj.jumps[k - 1];
            const bool exact = rec.t == prev.t + prev.reset_value;
            scheduling.observe(exact ? 0.0 : -std::abs(rec.t - (prev.t + prev.reset_value)),
                               rec.t, rec.j_pre + 1);
        }
    }

    const double horizon = traj.final_sample().t;
    const double cap = std::ceil(horizon / timer.tau_min) + 1.0;
    non_zeno.observe(cap - static_cast<double>(traj.jump_count()), horizon,
                     traj.final_sample().j);

    for (const Sample& s : traj.samples)
        tau_range.observe(std::min(s.state.tau, timer.tau_max - s.state.tau), s.t, s.j);

    CheckReport report;
    report.check = "timer_discipline";
    report.tolerance = 0.0;
    report.inequalities.push_back(window.finish(report.tolerance));
    report.inequalities.push_back(scheduling.finish(report.tolerance));
    report.inequalities.push_back(non_zeno.finish(report.tolerance));
    report.inequalities.push_back(tau_range.finish(report.tolerance));
    return report;
}

// Least-squares slope of log distance vs ordinary time over samples with
// j >= 1, skipping distances at or below 1e-12 (log of noise).
inline double fit_decay_rate(const Trajectory& traj, const Vector& x_star) {
    std::vector<double> ts, logs;
    for (const Sample& s : traj.samples) {
        if (s.j < 1) continue;
        const double d = distance_to_A(s.state, x_star);
        if (d <= 1e-12) continue;
        ts.push_back(s.t);
        logs.push_back(std::log(d));
    }
    if (ts.size() < 10)
        throw insufficient_data_error("fit_decay_rate: fewer than 10 usable samples");

    const double n = static_cast<double>(ts.size());
    double mean_t = 0.0, mean_y = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        mean_t += ts[i];
        mean_y += logs[i];
    }
    mean_t /= n;
    mean_y /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) {
        sxx += (ts[i] - mean_t) * (ts[i] - mean_t);
        sxy += (ts[i] - mean_t) * (logs[i] - mean_y);
    }
    if (!(sxx > 0.0))
        throw insufficient_data_error("fit_decay_rate: samples do not span a time window");
    return sxy / sxx;
}

} // namespace hybridgd
