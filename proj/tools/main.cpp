#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "monodromy/monodromy.hpp"

namespace {

using namespace monodromy;

struct CliOverrides {
    std::optional<std::string> config_path;
    std::optional<std::string> system_name;
    std::vector<std::string> params;
    std::optional<std::string> initial;    // JSON array of [re, im]
    std::optional<std::string> t0;         // JSON [re, im]
    std::optional<std::string> candidates; // JSON array of [re, im]
    std::optional<std::string> domain;     // JSON [re_min, re_max, im_min, im_max]
    std::optional<std::string> grid;       // JSON [nx, ny]
    std::optional<double> rel_tol, abs_tol, checkpoint_stride;
    std::optional<long long> max_steps;
    std::optional<double> radius, return_tol, matrix_tol;
    std::optional<int> max_traversals;
    bool clockwise = false;
    std::optional<double> comm_tol, resonance_tol, pair_tol;
    std::optional<int> k_max;
    std::optional<int> jobs;
    std::optional<std::string> report_path, csv_path;
    bool no_timestamp = false;
};

json parse_json_flag(const std::string& text, const std::string& flag) {
    try {
        return json::parse(text);
    } catch (const json::exception& err) {
        throw ConfigError("flag --" + flag + " is not valid JSON: " + err.what());
    }
}

RunConfig assemble_config(const CliOverrides& ov, const std::string& mode) {
    RunConfig cfg;
    if (ov.config_path) cfg = run_config_from_json(read_json_file(*ov.config_path));
    cfg.mode = mode;

    if (ov.system_name) {
        cfg.system = SystemSpec{};
        cfg.system.catalog_name = *ov.system_name;
    }
    for (const auto& kv : ov.params) {
        auto eq = kv.find('=');
        if (eq == std::string::npos)
            throw ConfigError("--param expects name=value, got '" + kv + "'");
        cfg.system.params[kv.substr(0, eq)] = std::stod(kv.substr(eq + 1));
    }
    if (ov.initial) {
        cfg.initial_state.clear();
        for (const auto& z : parse_json_flag(*ov.initial, "initial"))
            cfg.initial_state.push_back(complex_from_json(z));
    }
    if (ov.t0) cfg.t0 = complex_from_json(parse_json_flag(*ov.t0, "t0"));
    if (ov.candidates) {
        cfg.candidates.clear();
        for (const auto& z : parse_json_flag(*ov.candidates, "candidates"))
            cfg.candidates.push_back(complex_from_json(z));
    }
    if (ov.domain) {
        json d = parse_json_flag(*ov.domain, "domain");
        if (!d.is_array() || d.size() != 4)
            throw ConfigError("--domain expects [re_min, re_max, im_min, im_max]");
        cfg.domain = ScanDomain{d[0].get<double>(), d[1].get<double>(), d[2].get<double>(),
                                d[3].get<double>()};
    }
    if (ov.grid) {
        json g = parse_json_flag(*ov.grid, "grid");
        if (!g.is_array() || g.size() != 2) throw ConfigError("--grid expects [nx, ny]");
        cfg.grid = ScanGrid{g[0].get<int>(), g[1].get<int>()};
    }
    if (ov.rel_tol) cfg.probe.integrator.rel_tol = *ov.rel_tol;
    if (ov.abs_tol) cfg.probe.integrator.abs_tol = *ov.abs_tol;
    if (ov.max_steps) cfg.probe.integrator.max_steps = *ov.max_steps;
    if (ov.checkpoint_stride) cfg.probe.integrator.checkpoint_stride = *ov.checkpoint_stride;
    if (ov.radius) cfg.radius = *ov.radius;
    if (ov.return_tol) cfg.probe.return_tol = *ov.return_tol;
    if (ov.matrix_tol) cfg.probe.matrix_tol = *ov.matrix_tol;
    if (ov.max_traversals) cfg.probe.max_traversals = *ov.max_traversals;
    if (ov.clockwise) cfg.probe.clockwise = true;
    if (ov.comm_tol) cfg.obstruction.comm_tol = *ov.comm_tol;
    if (ov.resonance_tol) cfg.obstruction.resonance_tol = *ov.resonance_tol;
    if (ov.pair_tol) cfg.obstruction.pair_tol = *ov.pair_tol;
    if (ov.k_max) cfg.obstruction.k_max = *ov.k_max;
    if (ov.jobs) cfg.jobs = *ov.jobs;
    if (ov.report_path) cfg.report_path = *ov.report_path;
    if (ov.csv_path) cfg.csv_path = *ov.csv_path;
    if (ov.no_timestamp) cfg.timestamp = false;
    return cfg;
}

void add_common_flags(CLI::App* app, CliOverrides& ov) {
    app->add_option("-c,--config", ov.config_path, "JSON config file; flags override its keys");
    app->add_option("--system", ov.system_name, "catalog system name");
    app->add_option("--param", ov.params, "system parameter as name=value (repeatable)");
    app->add_option("--initial", ov.initial, "initial state as JSON [[re,im],...]");
    app->add_option("--t0", ov.t0, "base point as JSON [re,im]");
    app->add_option("--rel-tol", ov.rel_tol, "integrator relative tolerance");
    app->add_option("--abs-tol", ov.abs_tol, "integrator absolute tolerance");
    app->add_option("--max-steps", ov.max_steps, "integrator step budget");
    app->add_option("--checkpoint-stride", ov.checkpoint_stride, "dense checkpoint stride in s");
    app->add_option("--radius", ov.radius, "probe loop radius");
    app->add_option("--return-tol", ov.return_tol, "trajectory return tolerance");
    app->add_option("--matrix-tol", ov.matrix_tol, "identity tolerance for Xi");
    app->add_option("--max-traversals", ov.max_traversals, "traversal budget per candidate");
    app->add_flag("--clockwise", ov.clockwise, "traverse loops clockwise");
    app->add_option("--comm-tol", ov.comm_tol, "relative commutator threshold");
    app->add_option("--k-max", ov.k_max, "resonance exponent bound");
    app->add_option("--resonance-tol", ov.resonance_tol, "resonance relation tolerance");
    app->add_option("--pair-tol", ov.pair_tol, "eigenvalue reciprocal pairing tolerance");
    app->add_option("-j,--jobs", ov.jobs, "number of concurrent probes");
    app->add_option("--report", ov.report_path, "write the JSON report here");
    app->add_option("--csv", ov.csv_path, "write a per-candidate CSV here");
    app->add_flag("--no-timestamp", ov.no_timestamp, "omit the timestamp field from the report");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"monodromy: integrability obstructions of complexified ODE systems "
                 "via numerically computed monodromy generators"};
    app.require_subcommand(1);

    CliOverrides probe_ov, scan_ov;
    std::string check_path;
    CliOverrides check_ov;
    bool machine = false;

    CLI::App* probe = app.add_subcommand("probe", "probe explicit candidate points with loops");
    add_common_flags(probe, probe_ov);
    probe->add_option("--candidates", probe_ov.candidates,
                      "candidate points as JSON [[re,im],...]");

    CLI::App* scanc = app.add_subcommand("scan", "probe every node of a grid over a rectangle");
    add_common_flags(scanc, scan_ov);
    scanc->add_option("--domain", scan_ov.domain, "rectangle as JSON [re_min,re_max,im_min,im_max]");
    scanc->add_option("--grid", scan_ov.grid, "grid as JSON [nx,ny]");

    CLI::App* check = app.add_subcommand("check", "recompute the verdict of a stored report");
    check->add_option("report", check_path, "report JSON path")->required();
    check->add_option("--comm-tol", check_ov.comm_tol, "relative commutator threshold");
    check->add_option("--k-max", check_ov.k_max, "resonance exponent bound");
    check->add_option("--resonance-tol", check_ov.resonance_tol, "resonance relation tolerance");
    check->add_option("--pair-tol", check_ov.pair_tol, "eigenvalue pairing tolerance");

    CLI::App* systems = app.add_subcommand("systems", "list built-in systems");
    systems->add_flag("--json", machine, "machine-readable output");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (probe->parsed()) return monodromy::cmd_probe(assemble_config(probe_ov, "probe"), std::cout);
        if (scanc->parsed()) return monodromy::cmd_scan(assemble_config(scan_ov, "scan"), std::cout);
        if (check->parsed()) {
            monodromy::ObstructionOptions opts;
            if (check_ov.comm_tol) opts.comm_tol = *check_ov.comm_tol;
            if (check_ov.k_max) opts.k_max = *check_ov.k_max;
            if (check_ov.resonance_tol) opts.resonance_tol = *check_ov.resonance_tol;
            if (check_ov.pair_tol) opts.pair_tol = *check_ov.pair_tol;
            return monodromy::cmd_check(check_path, opts, std::cout);
        }
        if (systems->parsed()) return monodromy::cmd_systems_list(machine, std::cout);
    } catch (const monodromy::ConfigError& err) {
        std::cout << "config error: " << err.what() << "\n";
        return 2;
    } catch (const monodromy::ReportError& err) {
        std::cout << "error: " << err.what() << "\n";
        return 2;
    } catch (const std::exception& err) {
        std::cout << "error: " << err.what() << "\n";
        return 2;
    }
    return 2;
}
