#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include <hybridgd/agents.hpp>
#include <hybridgd/analysis.hpp>
#include <hybridgd/hybrid.hpp>
#include <hybridgd/objective.hpp>

namespace hybridgd {

using json = nlohmann::json;

// ---------------------------------------------------------------------------
// Experiment configuration (mirrors the on-disk JSON schema)
// ---------------------------------------------------------------------------

struct ObjectiveConfig {
    Index n = 0;
    std::vector<double> eigenvalues;     // explicit spectrum; empty -> beta/K
    double beta = 0.0;
    double lipschitz = 0.0;              // with linear interior spacing
    enum class BMode { random_1_5, zero, explicit_values };
    BMode b_mode = BMode::random_1_5;
    std::vector<double> b;
};

struct PartitionConfig {
    Index agents = 0;                    // 0 -> one scalar block per coordinate
    std::vector<Index> sizes;            // empty -> contiguous auto split
};

struct ResetPolicyConfig {
    ResetPolicy::Kind kind = ResetPolicy::Kind::fixed;
    bool has_value = false;
    double value = 0.0;
    bool has_seed = false;
    std::uint64_t seed = 0;
    std::vector<double> values;
};

struct TimerConfigSpec {
    bool auto_paper = false;             // tau_max = beta^2/(3K^3+1), tau_min = tau_max/2
    double tau_min = 0.0;
    double tau_max = 0.0;
    ResetPolicyConfig reset;
};

struct InitConfig {
    enum class Mode { all_twos, at_minimizer, explicit_values };
    Mode z1_mode = Mode::all_twos;
    Mode z2_mode = Mode::all_twos;
    std::vector<double> z1;
    std::vector<double> z2;
    bool has_tau0 = false;
    double tau0 = 0.0;                   // default: tau_max
};

struct ExperimentConfig {
    ObjectiveConfig objective;
    PartitionConfig partition;
    TimerConfigSpec timer;
    InitConfig init;
    StopRule stop = StopRule::max_jumps(20);
    double sample_interval = 0.0;        // 0 -> tau_min / 10
    std::uint64_t seed = 0;
    std::vector<std::string> checks{"all"};
    std::string output_dir;
};

// ---------------------------------------------------------------------------
// Strict JSON parsing: unknown keys are rejected with the offending name.
// ---------------------------------------------------------------------------

namespace detail {

inline void reject_unknown_keys(const json& obj, const char* where,
                                std::initializer_list<const char*> allowed) {
    for (const auto& item : obj.items()) {
        bool known = false;
        for (const char* key : allowed)
            if (item.key() == key) {
                known = true;
                break;
            }
        if (!known)
            throw config_error(std::string("config: unknown key \"") + item.key() +
                               "\" in " + where);
    }
}

template <class T>
T field(const json& obj, const char* where, const char* key) {
    if (!obj.contains(key))
        throw config_error(std::string("config: missing key \"") + key + "\" in " + where);
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config: bad value for \"") + key + "\" in " + where);
    }
}

template <class T>
std::optional<T> optional_field(const json& obj, const char* where, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw config_error(std::string("config: bad value for \"") + key + "\" in " + where);
    }
}

} // namespace detail

inline ObjectiveConfig parse_objective_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"objective\" must be an object");
    detail::reject_unknown_keys(j, "objective",
                                {"n", "eigenvalues", "beta", "K", "spacing", "b_mode", "b"});
    ObjectiveConfig cfg;
    cfg.n = detail::field<Index>(j, "objective", "n");
    const bool has_eigs = j.contains("eigenvalues");
    const bool has_bk = j.contains("beta") || j.contains("K");
    if (has_eigs == has_bk)
        throw config_error("config: objective needs either \"eigenvalues\" or \"beta\"+\"K\"");
    if (has_eigs) {
        cfg.eigenvalues = detail::field<std::vector<double>>(j, "objective", "eigenvalues");
    } else {
        cfg.beta = detail::field<double>(j, "objective", "beta");
        cfg.lipschitz = detail::field<double>(j, "objective", "K");
        if (auto spacing = detail::optional_field<std::string>(j, "objective", "spacing"))
            if (*spacing != "linear")
                throw config_error("config: objective.spacing supports only \"linear\"");
    }
    if (auto mode = detail::optional_field<std::string>(j, "objective", "b_mode")) {
        if (*mode == "random_1_5")
            cfg.b_mode = ObjectiveConfig::BMode::random_1_5;
        else if (*mode == "zero")
            cfg.b_mode = ObjectiveConfig::BMode::zero;
        else if (*mode == "explicit")
            cfg.b_mode = ObjectiveConfig::BMode::explicit_values;
        else
            throw config_error("config: objective.b_mode must be random_1_5, zero or explicit");
    }
    if (cfg.b_mode == ObjectiveConfig::BMode::explicit_values)
        cfg.b = detail::field<std::vector<double>>(j, "objective", "b");
    else if (j.contains("b"))
        throw config_error("config: objective.b only allowed with b_mode \"explicit\"");
    return cfg;
}

inline PartitionConfig parse_partition_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"partition\" must be an object");
    detail::reject_unknown_keys(j, "partition", {"N", "sizes"});
    PartitionConfig cfg;
    cfg.agents = detail::field<Index>(j, "partition", "N");
    if (auto sizes = detail::optional_field<std::vector<Index>>(j, "partition", "sizes"))
        cfg.sizes = std::move(*sizes);
    return cfg;
}

inline ResetPolicyConfig parse_reset_policy_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"reset_policy\" must be an object");
    detail::reject_unknown_keys(j, "reset_policy", {"type", "value", "seed", "values"});
    ResetPolicyConfig cfg;
    const auto type = detail::field<std::string>(j, "reset_policy", "type");
    if (type == "fixed") {
        cfg.kind = ResetPolicy::Kind::fixed;
        if (auto v = detail::optional_field<double>(j, "reset_policy", "value")) {
            cfg.has_value = true;
            cfg.value = *v;
        }
    } else if (type == "uniform") {
        cfg.kind = ResetPolicy::Kind::uniform;
        if (auto s = detail::optional_field<std::uint64_t>(j, "reset_policy", "seed")) {
            cfg.has_seed = true;
            cfg.seed = *s;
        }
    } else if (type == "sequence") {
        cfg.kind = ResetPolicy::Kind::sequence;
        cfg.values = detail::field<std::vector<double>>(j, "reset_policy", "values");
    } else {
        throw config_error("config: reset_policy.type must be fixed, uniform or sequence");
    }
    return cfg;
}

inline TimerConfigSpec parse_timer_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"timer\" must be an object");
    detail::reject_unknown_keys(j, "timer", {"auto_paper", "tau_min", "tau_max", "reset_policy"});
    TimerConfigSpec cfg;
    if (auto ap = detail::optional_field<bool>(j, "timer", "auto_paper")) cfg.auto_paper = *ap;
    if (cfg.auto_paper) {
        if (j.contains("tau_min") || j.contains("tau_max"))
            throw config_error("config: timer.auto_paper excludes explicit tau_min/tau_max");
    } else {
        cfg.tau_min = detail::field<double>(j, "timer", "tau_min");
        cfg.tau_max = detail::field<double>(j, "timer", "tau_max");
    }
    if (j.contains("reset_policy"))
        cfg.reset = parse_reset_policy_config(j.at("reset_policy"));
    return cfg;
}

inline InitConfig parse_init_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"init\" must be an object");
    detail::reject_unknown_keys(j, "init", {"z1", "z2", "tau0"});
    InitConfig cfg;
    const auto parse_side = [&](const char* key, InitConfig::Mode& mode,
                                std::vector<double>& values) {
        if (!j.contains(key)) return;  // default all_twos
        const json& side = j.at(key);
        if (side.is_string()) {
            const auto s = side.get<std::string>();
            if (s == "all_twos")
                mode = InitConfig::Mode::all_twos;
            else if (s == "at_minimizer")
                mode = InitConfig::Mode::at_minimizer;
            else
                throw config_error(std::string("config: init.") + key +
                                   " must be all_twos, at_minimizer or an array");
        } else if (side.is_array()) {
            mode = InitConfig::Mode::explicit_values;
            values = side.get<std::vector<double>>();
        } else {
            throw config_error(std::string("config: init.") + key +
                               " must be all_twos, at_minimizer or an array");
        }
    };
    parse_side("z1", cfg.z1_mode, cfg.z1);
    parse_side("z2", cfg.z2_mode, cfg.z2);
    if (auto tau0 = detail::optional_field<double>(j, "init", "tau0")) {
        cfg.has_tau0 = true;
        cfg.tau0 = *tau0;
    }
    return cfg;
}

inline StopRule parse_stop_config(const json& j) {
    if (!j.is_object()) throw config_error("config: \"stop\" must be an object");
    detail::reject_unknown_keys(j, "stop", {"max_time", "max_jumps", "tolerance"});
    if (j.size() != 1)
        throw config_error("config: stop needs exactly one of max_time, max_jumps, tolerance");
    if (j.contains("max_time")) return StopRule::max_time(detail::field<double>(j, "stop", "max_time"));
    if (j.contains("max_jumps"))
        return StopRule::max_jumps(detail::field<std::int64_t>(j, "stop", "max_jumps"));
    return StopRule::tolerance(detail::field<double>(j, "stop", "tolerance"));
}

inline ExperimentConfig parse_experiment_config(const json& j) {
    if (!j.is_object()) throw config_error("config: top level must be an object");
    detail::reject_unknown_keys(j, "config", {"objective", "partition", "timer", "init", "stop",
                                              "sample_interval", "seed", "checks", "output_dir"});
    ExperimentConfig cfg;
    if (!j.contains("objective")) throw config_error("config: missing key \"objective\"");
    cfg.objective = parse_objective_config(j.at("objective"));
    if (j.contains("partition")) cfg.partition = parse_partition_config(j.at("partition"));
    if (j.contains("timer"))
        cfg.timer = parse_timer_config(j.at("timer"));
    else
        cfg.timer.auto_paper = true;
    if (j.contains("init")) cfg.init = parse_init_config(j.at("init"));
    if (!j.contains("stop")) throw config_error("config: missing key \"stop\"");
    cfg.stop = parse_stop_config(j.at("stop"));
    if (auto h = detail::optional_field<double>(j, "config", "sample_interval")) {
        if (!(*h > 0.0)) throw config_error("config: sample_interval must be positive");
        cfg.sample_interval = *h;
    }
    if (auto s = detail::optional_field<std::uint64_t>(j, "config", "seed")) cfg.seed = *s;
    if (auto c = detail::optional_field<std::vector<std::string>>(j, "config", "checks"))
        cfg.checks = std::move(*c);
    if (auto out = detail::optional_field<std::string>(j, "config", "output_dir"))
        cfg.output_dir = std::move(*out);
    return cfg;
}

inline ExperimentConfig parse_experiment_config(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw config_error(std::string("config: not valid JSON: ") + e.what());
    }
    return parse_experiment_config(j);
}

inline json to_json(const ExperimentConfig& cfg) {
    json j;
    json obj;
    obj["n"] = cfg.objective.n;
    if (!cfg.objective.eigenvalues.empty()) {
        obj["eigenvalues"] = cfg.objective.eigenvalues;
    } else {
        obj["beta"] = cfg.objective.beta;
        obj["K"] = cfg.objective.lipschitz;
    }
    switch (cfg.objective.b_mode) {
        case ObjectiveConfig::BMode::random_1_5: obj["b_mode"] = "random_1_5"; break;
        case ObjectiveConfig::BMode::zero: obj["b_mode"] = "zero"; break;
        case ObjectiveConfig::BMode::explicit_values:
            obj["b_mode"] = "explicit";
            obj["b"] = cfg.objective.b;
            break;
    }
    j["objective"] = std::move(obj);

    if (cfg.partition.agents != 0 || !cfg.partition.sizes.empty()) {
        json part;
        part["N"] = cfg.partition.agents;
        if (!cfg.partition.sizes.empty()) part["sizes"] = cfg.partition.sizes;
        j["partition"] = std::move(part);
    }

    json timer;
    if (cfg.timer.auto_paper) {
        timer["auto_paper"] = true;
    } else {
        timer["tau_min"] = cfg.timer.tau_min;
        timer["tau_max"] = cfg.timer.tau_max;
    }
    {
        json reset;
        switch (cfg.timer.reset.kind) {
            case ResetPolicy::Kind::fixed:
                reset["type"] = "fixed";
                if (cfg.timer.reset.has_value) reset["value"] = cfg.timer.reset.value;
                break;
            case ResetPolicy::Kind::uniform:
                reset["type"] = "uniform";
                if (cfg.timer.reset.has_seed) reset["seed"] = cfg.timer.reset.seed;
                break;
            case ResetPolicy::Kind::sequence:
                reset["type"] = "sequence";
                reset["values"] = cfg.timer.reset.values;
                break;
        }
        timer["reset_policy"] = std::move(reset);
    }
    j["timer"] = std::move(timer);

    json init;
    const auto side_json = [](InitConfig::Mode mode, const std::vector<double>& values) -> json {
        switch (mode) {
            case InitConfig::Mode::all_twos: return "all_twos";
            case InitConfig::Mode::at_minimizer: return "at_minimizer";
            case InitConfig::Mode::explicit_values: return values;
        }
        return nullptr;
    };
    init["z1"] = side_json(cfg.init.z1_mode, cfg.init.z1);
    init["z2"] = side_json(cfg.init.z2_mode, cfg.init.z2);
    if (cfg.init.has_tau0) init["tau0"] = cfg.init.tau0;
    j["init"] = std::move(init);

    json stop;
    switch (cfg.stop.kind) {
        case StopRule::Kind::max_time: stop["max_time"] = cfg.stop.time; break;
        case StopRule::Kind::max_jumps: stop["max_jumps"] = cfg.stop.jumps; break;
        case StopRule::Kind::tolerance: stop["tolerance"] = cfg.stop.tol; break;
    }
    j["stop"] = std::move(stop);

    if (cfg.sample_interval > 0.0) j["sample_interval"] = cfg.sample_interval;
    j["seed"] = cfg.seed;
    j["checks"] = cfg.checks;
    if (!cfg.output_dir.empty()) j["output_dir"] = cfg.output_dir;
    return j;
}

// ---------------------------------------------------------------------------
// Materialization: config -> runnable experiment
// ---------------------------------------------------------------------------

struct Experiment {
    QuadraticObjective objective;
    BlockPartition partition;
    TimerConfig timer;
    ConvergenceCertificate certificate;
    HybridState init;
    StopRule stop;
    double sample_interval = 0.0;
    std::vector<std::string> checks;
    bool equal_init = false;
};

namespace detail {

inline constexpr std::uint64_t kResetSeedSalt = 0x517cc1b727220a95ULL;

inline const std::vector<std::string>& known_checks() {
    static const std::vector<std::string> names = {
        "lemma3",          "lemma4",           "jump_descent", "envelope_proposition",
        "envelope_theorem", "escape_growth",   "timer_discipline"};
    return names;
}

inline std::vector<std::string> resolve_checks(const std::vector<std::string>& requested,
                                               bool equal_init) {
    std::vector<std::string> resolved;
    for (const std::string& name : requested) {
        if (name == "none") continue;
        if (name == "all") {
            if (equal_init) {
                resolved = known_checks();
            } else {
                resolved = {"envelope_theorem", "escape_growth", "timer_discipline"};
            }
            return resolved;
        }
        if (std::find(known_checks().begin(), known_checks().end(), name) ==
            known_checks().end())
            throw config_error("config: unknown check \"" + name + "\"");
        resolved.push_back(name);
    }
    return resolved;
}

} // namespace detail

inline Experiment materialize(const ExperimentConfig& cfg) {
    const Index n = cfg.objective.n;
    SpectrumSpec spec;
    if (!cfg.objective.eigenvalues.empty()) {
        spec.n = n;
        spec.eigenvalues = cfg.objective.eigenvalues;
        spec.seed = cfg.seed;
        std::sort(spec.eigenvalues.begin(), spec.eigenvalues.end());
    } else {
        spec = SpectrumSpec::linear(n, cfg.objective.beta, cfg.objective.lipschitz, cfg.seed);
    }

    std::optional<Vector> b_override;
    switch (cfg.objective.b_mode) {
        case ObjectiveConfig::BMode::random_1_5: break;
        case ObjectiveConfig::BMode::zero: b_override = Vector::Zero(n); break;
        case ObjectiveConfig::BMode::explicit_values:
            b_override = Eigen::Map<const Vector>(cfg.objective.b.data(),
                                                  static_cast<Index>(cfg.objective.b.size()));
            break;
    }
    QuadraticObjective objective = build_quadratic(spec, std::move(b_override));

    BlockPartition partition =
        !cfg.partition.sizes.empty()
            ? BlockPartition::from_sizes(cfg.partition.sizes)
            : BlockPartition::contiguous(n, cfg.partition.agents == 0 ? n : cfg.partition.agents);
    if (partition.total != n)
        throw config_error("config: partition sizes do not sum to n");
    if (cfg.partition.agents != 0 && partition.agents() != cfg.partition.agents)
        throw config_error("config: partition.N disagrees with sizes");

    TimerConfig timer;
    if (cfg.timer.auto_paper) {
        timer = TimerConfig::auto_paper(objective.beta(), objective.lipschitz());
    } else {
        timer.tau_min = cfg.timer.tau_min;
        timer.tau_max = cfg.timer.tau_max;
    }
    switch (cfg.timer.reset.kind) {
        case ResetPolicy::Kind::fixed:
            timer.reset = ResetPolicy::fixed_value(
                cfg.timer.reset.has_value ? cfg.timer.reset.value : timer.tau_max);
            break;
        case ResetPolicy::Kind::uniform:
            timer.reset = ResetPolicy::uniform(cfg.timer.reset.has_seed
                                                   ? cfg.timer.reset.seed
                                                   : (cfg.seed ^ detail::kResetSeedSalt));
            break;
        case ResetPolicy::Kind::sequence:
            timer.reset = ResetPolicy::sequence(cfg.timer.reset.values);
            break;
    }
    const ConvergenceCertificate certificate = validate_config(objective, timer);

    const auto resolve_side = [&](InitConfig::Mode mode,
                                  const std::vector<double>& values) -> Vector {
        switch (mode) {
            case InitConfig::Mode::all_twos: return Vector::Constant(n, 2.0);
            case InitConfig::Mode::at_minimizer: return objective.minimizer();
            case InitConfig::Mode::explicit_values: {
                if (static_cast<Index>(values.size()) != n)
                    throw config_error("config: init vector length does not match n");
                return Eigen::Map<const Vector>(values.data(), n);
            }
        }
        throw config_error("config: bad init mode");
    };
    HybridState init;
    init.z1 = resolve_side(cfg.init.z1_mode, cfg.init.z1);
    init.z2 = resolve_side(cfg.init.z2_mode, cfg.init.z2);
    init.tau = cfg.init.has_tau0 ? cfg.init.tau0 : timer.tau_max;

    const bool equal_init = (init.z1.array() == init.z2.array()).all();

    Experiment ex{std::move(objective),
                  std::move(partition),
                  timer,
                  certificate,
                  std::move(init),
                  cfg.stop,
                  cfg.sample_interval > 0.0 ? cfg.sample_interval : timer.tau_min / 10.0,
                  detail::resolve_checks(cfg.checks, equal_init),
                  equal_init};
    return ex;
}

// ---------------------------------------------------------------------------
// Running + artifacts
// ---------------------------------------------------------------------------

struct CheckSummaryEntry {
    std::string name;
    bool pass = false;
    double worst_margin = 0.0;
    double at_t = 0.0;
    std::int64_t at_j = 0;
};

struct RunSummary {
    ConvergenceCertificate certificate;
    double final_t = 0.0;
    std::int64_t final_j = 0;
    double final_dist = 0.0;
    StopStatus status = StopStatus::reached_max_jumps;
    std::vector<CheckSummaryEntry> checks;
    std::uint64_t seed = 0;
    std::string preset;
    double wall_seconds = 0.0;  // diagnostic; never serialized

    bool all_checks_pass() const {
        for (const auto& c : checks)
            if (!c.pass) return false;
        return true;
    }
};

namespace detail {

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline void append_report(std::vector<CheckSummaryEntry>& out, const CheckReport& report) {
    for (const InequalityResult& q : report.inequalities) {
        CheckSummaryEntry entry;
        entry.name = report.inequalities.size() == 1 ? report.check
                                                     : report.check + "." + q.name;
        entry.pass = q.pass;
        entry.worst_margin = q.worst_margin;
        entry.at_t = q.at.t;
        entry.at_j = q.at.j;
        out.push_back(std::move(entry));
    }
}

inline std::vector<CheckSummaryEntry> run_checks(const std::vector<std::string>& names,
                                                 const Trajectory& traj,
                                                 const QuadraticObjective& obj,
                                                 const ConvergenceCertificate& cert,
                                                 const TimerConfig& timer) {
    std::vector<CheckSummaryEntry> out;
    for (const std::string& name : names) {
        if (name == "lemma3")
            append_report(out, check_lemma3(traj, obj, cert));
        else if (name == "lemma4")
            append_report(out, check_lemma4(traj, obj, cert));
        else if (name == "jump_descent")
            append_report(out, check_jump_descent(traj, obj));
        else if (name == "envelope_proposition")
            append_report(out, check_convergence_envelope(traj, cert, EnvelopeMode::proposition,
                                                          obj.minimizer()));
        else if (name == "envelope_theorem")
            append_report(out, check_convergence_envelope(traj, cert, EnvelopeMode::theorem,
                                                          obj.minimizer()));
        else if (name == "escape_growth")
            append_report(out, check_escape_growth(traj, obj, cert));
        else if (name == "timer_discipline")
            append_report(out, check_timer_discipline(traj, timer));
        else
            throw config_error("config: unknown check \"" + name + "\"");
    }
    return out;
}

} // namespace detail

// CSV columns: t, j, tau, z1_1..z1_n, z2_1..z2_n, dist_A, dist_z1, V,
// bound_theorem. 17 significant digits; jump instants occupy two adjacent
// rows sharing t with j and j+1.
inline void write_trajectory_csv(std::ostream& os, const Trajectory& traj,
                                 const QuadraticObjective& obj,
                                 const ConvergenceCertificate& cert) {
    const Index n = obj.dimension();
    const Vector& x_star = obj.minimizer();
    const double d0 = distance_to_A(traj.initial().state, x_star);

    os << "t,j,tau";
    for (Index i = 1; i <= n; ++i) os << ",z1_" << i;
    for (Index i = 1; i <= n; ++i) os << ",z2_" << i;
    os << ",dist_A,dist_z1,V,bound_theorem\n";

    for (const Sample& s : traj.samples) {
        os << detail::fmt17(s.t) << ',' << s.j << ',' << detail::fmt17(s.state.tau);
        for (Index i = 0; i < n; ++i) os << ',' << detail::fmt17(s.state.z1(i));
        for (Index i = 0; i < n; ++i) os << ',' << detail::fmt17(s.state.z2(i));
        os << ',' << detail::fmt17(distance_to_A(s.state, x_star));
        os << ',' << detail::fmt17((s.state.z1 - x_star).norm());
        os << ',' << detail::fmt17(lyapunov(obj, s.state));
        os << ',' << detail::fmt17(theorem_bound(cert, s.t, d0));
        os << '\n';
    }
}

inline json summary_to_json(const RunSummary& summary) {
    json j;
    j["certificate"] = {{"beta", summary.certificate.beta},
                        {"K", summary.certificate.lipschitz},
                        {"tau_min", summary.certificate.tau_min},
                        {"tau_max", summary.certificate.tau_max},
                        {"A", summary.certificate.A_const},
                        {"B", summary.certificate.B},
                        {"rate", summary.certificate.rate},
                        {"prefactors",
                         {{"proposition", summary.certificate.prop_prefactor},
                          {"theorem", summary.certificate.thm_prefactor}}},
                        {"escape_growth", summary.certificate.escape_growth}};
    j["final"] = {{"t", summary.final_t}, {"j", summary.final_j}, {"dist", summary.final_dist}};
    json checks = json::array();
    for (const CheckSummaryEntry& c : summary.checks)
        checks.push_back({{"name", c.name},
                          {"pass", c.pass},
                          {"worst_margin", c.worst_margin},
                          {"at_t", c.at_t},
                          {"at_j", c.at_j}});
    j["checks"] = std::move(checks);
    j["seed"] = summary.seed;
    j["preset"] = summary.preset;
    return j;
}

namespace detail {

inline RunSummary summarize(const Experiment& ex, const Trajectory& traj,
                            std::uint64_t seed, const std::string& preset) {
    RunSummary summary;
    summary.certificate = ex.certificate;
    const Sample& last = traj.final_sample();
    summary.final_t = last.t;
    summary.final_j = last.j;
    summary.final_dist = distance_to_A(last.state, ex.objective.minimizer());
    summary.status = traj.status;
    summary.checks = run_checks(ex.checks, traj, ex.objective, ex.certificate, ex.timer);
    summary.seed = seed;
    summary.preset = preset;
    return summary;
}

} // namespace detail

// Runs one configured experiment; writes trajectory.csv and summary.json
// into output_dir when it is set. Byte-identical outputs for identical
// config + seed.
inline RunSummary run(const ExperimentConfig& config, const std::string& preset_name = "") {
    const auto started = std::chrono::steady_clock::now();
    Experiment ex = materialize(config);
    Trajectory traj = simulate(ex.objective, ex.partition, ex.init, ex.timer, ex.stop,
                               ex.sample_interval);
    RunSummary summary = detail::summarize(ex, traj, config.seed, preset_name);

    if (!config.output_dir.empty()) {
        namespace fs = std::filesystem;
        const fs::path dir(config.output_dir);
        std::error_code ec;
        fs::create_directories(dir, ec);
        if (ec) throw error("run: cannot create output directory " + dir.string());

        std::ofstream csv(dir / "trajectory.csv", std::ios::binary);
        if (!csv) throw error("run: cannot open trajectory.csv for writing");
        write_trajectory_csv(csv, traj, ex.objective, ex.certificate);

        std::ofstream js(dir / "summary.json", std::ios::binary);
        if (!js) throw error("run: cannot open summary.json for writing");
        js << summary_to_json(summary).dump(2) << '\n';
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    return summary;
}

// ---------------------------------------------------------------------------
// Centralized vs distributed comparison
// ---------------------------------------------------------------------------

struct ModeComparison {
    RunSummary centralized;
    RunSummary distributed;
    double max_deviation = 0.0;
    bool deviation_pass = false;
    bool write_disjoint = false;
};

inline double trajectory_deviation(const Trajectory& a, const Trajectory& b) {
    if (a.samples.size() != b.samples.size() || a.jumps.size() != b.jumps.size())
        return std::numeric_limits<double>::infinity();
    double worst = 0.0;
    for (std::size_t i = 0; i < a.samples.size(); ++i) {
        const Sample& sa = a.samples[i];
        const Sample& sb = b.samples[i];
        if (sa.j != sb.j) return std::numeric_limits<double>::infinity();
        worst = std::max(worst, std::abs(sa.t - sb.t));
        worst = std::max(worst, std::abs(sa.state.tau - sb.state.tau));
        worst = std::max(worst, (sa.state.z1 - sb.state.z1).cwiseAbs().maxCoeff());
        worst = std::max(worst, (sa.state.z2 - sb.state.z2).cwiseAbs().maxCoeff());
    }
    return worst;
}

// Runs the monolithic and the per-agent simulators on the same experiment
// and reports the worst componentwise deviation (pass iff <= 1e-12, expected
// to be exactly zero) plus write disjointness of the distributed run.
inline ModeComparison compare_modes(const ExperimentConfig& config,
                                    const std::vector<Index>& agent_order = {},
                                    const std::string& preset_name = "") {
    Experiment ex = materialize(config);
    Trajectory central = simulate(ex.objective, ex.partition, ex.init, ex.timer, ex.stop,
                                  ex.sample_interval);

    WriteTrace trace;
    DistributedOptions options;
    options.agent_order = agent_order;
    options.write_trace = &trace;
    Trajectory distributed = run_distributed(ex.objective, ex.partition, ex.init, ex.timer,
                                             ex.stop, ex.sample_interval, options);

    ModeComparison cmp;
    cmp.centralized = detail::summarize(ex, central, config.seed, preset_name);
    cmp.distributed = detail::summarize(ex, distributed, config.seed, preset_name);
    cmp.max_deviation = trajectory_deviation(central, distributed);
    cmp.deviation_pass = cmp.max_deviation <= 1e-12;
    cmp.write_disjoint = check_write_disjointness(trace, ex.objective.dimension());
    return cmp;
}

// ---------------------------------------------------------------------------
// Presets
// ---------------------------------------------------------------------------

struct PresetMember {
    std::string tag;
    ExperimentConfig config;
    bool long_running = false;  // only run when explicitly requested
};

struct Preset {
    std::string name;
    std::string description;
    std::vector<PresetMember> members;
};

namespace detail {

inline ExperimentConfig scaling_member(Index n, std::uint64_t seed) {
    ExperimentConfig cfg;
    cfg.objective.n = n;
    cfg.objective.beta = 2.0;
    cfg.objective.lipschitz = 4.0;
    cfg.partition.agents = n;
    cfg.timer.auto_paper = true;
    cfg.init.z1_mode = InitConfig::Mode::all_twos;
    cfg.init.z2_mode = InitConfig::Mode::all_twos;
    cfg.stop = StopRule::tolerance(1e-6);
    // coarse sampling: one interior point per flow interval is enough for
    // the envelope checks on long runs
    cfg.sample_interval = 4.0 / (3.0 * 64.0 + 1.0) / 2.0;  // tau_min for beta=2, K=4
    cfg.seed = seed;
    cfg.checks = {"envelope_theorem", "envelope_proposition", "jump_descent",
                  "escape_growth", "timer_discipline"};
    return cfg;
}

} // namespace detail

inline const std::vector<Preset>& presets() {
    static const std::vector<Preset> list = [] {
        std::vector<Preset> out;

        {
            Preset p;
            p.name = "trial1";
            p.description =
                "5 agents, beta=K=5, equal init z1=z2=(2,...,2), paper timer window; "
                "20 jumps with the full check suite";
            ExperimentConfig cfg;
            cfg.objective.n = 5;
            cfg.objective.eigenvalues = {5.0, 5.0, 5.0, 5.0, 5.0};
            cfg.partition.agents = 5;
            cfg.timer.auto_paper = true;
            cfg.stop = StopRule::max_jumps(20);
            cfg.seed = 1;
            cfg.checks = {"all"};
            p.members.push_back({"trial1", std::move(cfg), false});
            out.push_back(std::move(p));
        }
        {
            Preset p;
            p.name = "trial2";
            p.description =
                "worst-case init: z1=(2,...,2) but z2 starts at the minimizer, so the "
                "first jump increases the distance by sqrt(2); theorem envelope still holds";
            ExperimentConfig cfg;
            cfg.objective.n = 5;
            cfg.objective.eigenvalues = {5.0, 5.0, 5.0, 5.0, 5.0};
            cfg.partition.agents = 5;
            cfg.timer.auto_paper = true;
            cfg.init.z1_mode = InitConfig::Mode::all_twos;
            cfg.init.z2_mode = InitConfig::Mode::at_minimizer;
            cfg.stop = StopRule::max_jumps(20);
            cfg.seed = 1;
            cfg.checks = {"envelope_theorem", "escape_growth", "timer_discipline"};
            p.members.push_back({"trial2", std::move(cfg), false});
            out.push_back(std::move(p));
        }
        {
            Preset p;
            p.name = "scaling";
            p.description =
                "network-size study, beta=2 K=4, tolerance 1e-6: n in {5,100,500,1000}; "
                "n=5000 is available behind the long-running flag";
            p.members.push_back({"n5", detail::scaling_member(5, 11), false});
            p.members.push_back({"n100", detail::scaling_member(100, 12), false});
            p.members.push_back({"n500", detail::scaling_member(500, 13), false});
            p.members.push_back({"n1000", detail::scaling_member(1000, 14), false});
            p.members.push_back({"n5000", detail::scaling_member(5000, 15), true});
            out.push_back(std::move(p));
        }
        {
            Preset p;
            p.name = "lemma_sweep";
            p.description =
                "contraction/alignment verification sweep: n in {1,2,5,20}, fixed and "
                "uniform reset policies, 25 jumps each, all checks";
            std::uint64_t seed = 100;
            for (Index n : {Index{1}, Index{2}, Index{5}, Index{20}}) {
                for (int policy = 0; policy < 2; ++policy) {
                    ExperimentConfig cfg;
                    cfg.objective.n = n;
                    if (n == 1) {
                        cfg.objective.eigenvalues = {2.0};
                    } else {
                        cfg.objective.beta = 1.0;
                        cfg.objective.lipschitz = 3.0;
                    }
                    cfg.partition.agents = n;
                    cfg.timer.auto_paper = true;
                    if (policy == 1) cfg.timer.reset.kind = ResetPolicy::Kind::uniform;
                    cfg.stop = StopRule::max_jumps(25);
                    cfg.seed = seed++;
                    cfg.checks = {"all"};
                    std::ostringstream tag;
                    tag << "n" << n << (policy == 0 ? "_fixed" : "_uniform");
                    p.members.push_back({tag.str(), std::move(cfg), false});
                }
            }
            out.push_back(std::move(p));
        }
        return out;
    }();
    return list;
}

inline const Preset& find_preset(const std::string& name) {
    for (const Preset& p : presets())
        if (p.name == name) return p;
    throw config_error("unknown preset \"" + name + "\"");
}

} // namespace hybridgd
