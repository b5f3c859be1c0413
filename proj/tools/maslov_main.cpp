// maslov: crossing-based and angular Maslov indices of Lagrangian paths
// transported by conformally symplectic flows.
//
// Subcommands: index, asymptotic, scan, twist, selftest.
// Exit codes: 0 ok, 1 selftest/invariant failure, 2 config error,
// 3 numerical error.

#include <CLI11.hpp>
#include <cstdio>
#include <string>
#include <vector>

#include "maslov/io.hpp"
#include "maslov/selftest.hpp"

namespace {

int run_config_command(const std::string& config_path,
                       const std::vector<std::string>& overrides,
                       void (*command)(const maslov::Json&)) {
    try {
        maslov::Json config = maslov::load_config(config_path);
        for (const auto& assignment : overrides) {
            maslov::apply_override(config, assignment);
        }
        command(config);
        return 0;
    } catch (const maslov::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return 3;
    }
}

int run_selftest_command(bool flipped_sign, bool quick) {
    maslov::SelftestOptions opts;
    opts.crossing_orientation = flipped_sign ? -1 : +1;
    opts.quick = quick;
    opts.threads = maslov::thread_budget();
    const auto results = maslov::run_selftest(opts);
    std::size_t width = 0;
    for (const auto& r : results) width = std::max(width, r.name.size());
    for (const auto& r : results) {
        std::printf("%s %-*s %8.2fs  %s\n", r.pass ? "PASS" : "FAIL",
                    static_cast<int>(width), r.name.c_str(), r.seconds,
                    r.detail.c_str());
    }
    const bool ok = maslov::all_passed(results);
    std::printf("%s\n", ok ? "selftest: all invariants hold"
                           : "selftest: FAILURES above");
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Maslov indices of conformally symplectic flows"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> overrides;
    bool flipped_sign = false;
    bool quick = false;

    auto add_config_cmd = [&](const char* name, const char* desc) {
        CLI::App* cmd = app.add_subcommand(name, desc);
        cmd->add_option("config", config_path, "JSON run configuration")
            ->required();
        cmd->add_option("--set", overrides,
                        "override config entries, key.path=value");
        return cmd;
    };

    CLI::App* c_index =
        add_config_cmd("index", "index of a flow-transported frame (CSV)");
    CLI::App* c_asym =
        add_config_cmd("asymptotic", "asymptotic index estimate (JSON)");
    CLI::App* c_scan =
        add_config_cmd("scan", "graph scan for bounded-index points (CSV)");
    CLI::App* c_twist = add_config_cmd("twist", "twist certificate (JSON)");

    CLI::App* c_self = app.add_subcommand("selftest", "run the invariant suite");
    c_self->add_flag("--with-flipped-crossing-sign", flipped_sign,
                     "mutation hook: negate the crossing coorientation");
    c_self->add_flag("--quick", quick, "reduced corpora");

    CLI11_PARSE(app, argc, argv);

    if (c_index->parsed()) {
        return run_config_command(config_path, overrides, maslov::cmd_index);
    }
    if (c_asym->parsed()) {
        return run_config_command(config_path, overrides, maslov::cmd_asymptotic);
    }
    if (c_scan->parsed()) {
        return run_config_command(config_path, overrides, maslov::cmd_scan);
    }
    if (c_twist->parsed()) {
        return run_config_command(config_path, overrides, maslov::cmd_twist);
    }
    if (c_self->parsed()) {
        return run_selftest_command(flipped_sign, quick);
    }
    return 2;
}
