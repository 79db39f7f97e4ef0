// Experiment runner for the hybrid distributed gradient descent simulator.
//
// Subcommands:
//   run            one configured run or a preset (possibly several runs)
//   list-presets   stable list of built-in presets
//   compare-modes  centralized vs distributed execution of one config
//
// Exit codes: 0 all requested checks pass, 1 check failure, 2 config error,
// 3 numerical failure.

#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <hybridgd/hybridgd.hpp>

namespace {

constexpr int kExitPass = 0;
constexpr int kExitCheckFailure = 1;
constexpr int kExitConfigError = 2;
constexpr int kExitNumericalError = 3;

hybridgd::ExperimentConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw hybridgd::config_error("cannot open config file " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    return hybridgd::parse_experiment_config(buffer.str());
}

std::vector<std::string> parse_checks_flag(const std::string& flag) {
    if (flag == "all") return {"all"};
    if (flag == "none") return {"none"};
    std::vector<std::string> names;
    std::stringstream ss(flag);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) names.push_back(item);
    if (names.empty()) throw hybridgd::config_error("--checks: empty check list");
    return names;
}

void print_summary_line(const std::string& label, const hybridgd::RunSummary& summary) {
    std::size_t passed = 0;
    for (const auto& c : summary.checks) passed += c.pass ? 1 : 0;
    std::cout << label << ": final (t=" << summary.final_t << ", j=" << summary.final_j
              << "), dist " << summary.final_dist << ", checks " << passed << "/"
              << summary.checks.size() << (summary.all_checks_pass() ? " pass" : " FAIL")
              << " [" << summary.wall_seconds << " s]\n";
    for (const auto& c : summary.checks)
        if (!c.pass)
            std::cout << "    FAIL " << c.name << " worst margin " << c.worst_margin
                      << " at (t=" << c.at_t << ", j=" << c.at_j << ")\n";
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hybrid distributed gradient descent: simulate and verify"};
    app.require_subcommand(1);

    // run
    auto* run_cmd = app.add_subcommand("run", "run a config file or a named preset");
    std::string config_path, preset_name, out_dir, checks_flag;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool include_long = false;
    auto* config_opt = run_cmd->add_option("--config", config_path, "experiment config (JSON)");
    auto* preset_opt = run_cmd->add_option("--preset", preset_name, "built-in preset name");
    config_opt->excludes(preset_opt);
    run_cmd->add_option("--seed", seed, "override the config seed")
        ->each([&](const std::string&) { seed_set = true; });
    run_cmd->add_option("--out", out_dir, "override the output directory");
    run_cmd->add_option("--checks", checks_flag, "all | none | comma-separated names");
    run_cmd->add_flag("--long-running", include_long,
                      "include long-running preset members (e.g. the n=5000 scaling run)");

    // list-presets
    auto* list_cmd = app.add_subcommand("list-presets", "list built-in presets");

    // compare-modes
    auto* cmp_cmd =
        app.add_subcommand("compare-modes", "centralized vs distributed on one config");
    std::string cmp_config_path;
    std::uint64_t shuffle_seed = 0;
    bool shuffle_set = false;
    cmp_cmd->add_option("--config", cmp_config_path, "experiment config (JSON)")->required();
    cmp_cmd->add_option("--shuffle-agents", shuffle_seed,
                        "randomize the agent processing order with this seed")
        ->each([&](const std::string&) { shuffle_set = true; });

    CLI11_PARSE(app, argc, argv);

    try {
        if (list_cmd->parsed()) {
            for (const auto& p : hybridgd::presets()) {
                std::cout << p.name << " (" << p.members.size() << " run"
                          << (p.members.size() == 1 ? "" : "s") << "): " << p.description
                          << "\n";
            }
            return kExitPass;
        }

        if (run_cmd->parsed()) {
            std::vector<hybridgd::PresetMember> members;
            if (!preset_name.empty()) {
                const auto& preset = hybridgd::find_preset(preset_name);
                for (const auto& m : preset.members) {
                    if (m.long_running && !include_long) continue;
                    members.push_back(m);
                }
            } else if (!config_path.empty()) {
                members.push_back({"run", load_config_file(config_path), false});
            } else {
                throw hybridgd::config_error("run: need --config or --preset");
            }

            bool all_pass = true;
            for (auto& member : members) {
                hybridgd::ExperimentConfig cfg = member.config;
                if (seed_set) cfg.seed = seed;
                if (!checks_flag.empty()) cfg.checks = parse_checks_flag(checks_flag);
                if (!out_dir.empty()) {
                    cfg.output_dir = members.size() == 1 ? out_dir : out_dir + "/" + member.tag;
                } else if (cfg.output_dir.empty()) {
                    std::string base = preset_name.empty() ? std::string("out/run")
                                                           : "out/" + preset_name;
                    cfg.output_dir = members.size() == 1 ? base : base + "/" + member.tag;
                }
                const auto summary = hybridgd::run(cfg, preset_name);
                print_summary_line(member.tag, summary);
                std::cout << "    artifacts: " << cfg.output_dir << "/trajectory.csv, "
                          << cfg.output_dir << "/summary.json\n";
                all_pass = all_pass && summary.all_checks_pass();
            }
            return all_pass ? kExitPass : kExitCheckFailure;
        }

        if (cmp_cmd->parsed()) {
            hybridgd::ExperimentConfig cfg = load_config_file(cmp_config_path);
            std::vector<hybridgd::Index> order;
            if (shuffle_set) {
                const auto ex_n = cfg.partition.agents == 0 ? cfg.objective.n
                                                            : cfg.partition.agents;
                order.resize(static_cast<std::size_t>(ex_n));
                std::iota(order.begin(), order.end(), hybridgd::Index{0});
                std::mt19937_64 rng(shuffle_seed);
                std::shuffle(order.begin(), order.end(), rng);
            }
            const auto cmp = hybridgd::compare_modes(cfg, order);
            print_summary_line("centralized", cmp.centralized);
            print_summary_line("distributed", cmp.distributed);
            std::cout << "max componentwise deviation: " << cmp.max_deviation
                      << (cmp.deviation_pass ? " (pass, <= 1e-12)" : " (FAIL, > 1e-12)")
                      << "\nwrite disjointness: " << (cmp.write_disjoint ? "pass" : "FAIL")
                      << "\n";
            const bool ok = cmp.deviation_pass && cmp.write_disjoint &&
                            cmp.centralized.all_checks_pass() &&
                            cmp.distributed.all_checks_pass();
            return ok ? kExitPass : kExitCheckFailure;
        }
    } catch (const hybridgd::numerical_error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumericalError;
    } catch (const hybridgd::config_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const hybridgd::dimension_error& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfigError;
    } catch (const hybridgd::error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitConfigError;
    }
    return kExitConfigError;
}
