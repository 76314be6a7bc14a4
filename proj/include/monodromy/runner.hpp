#pragma once

#include <chrono>
#include <cmath>
#include <iomanip>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "monodromy/catalog.hpp"
#include "monodromy/obstruction.hpp"
#include "monodromy/probing.hpp"
#include "monodromy/report.hpp"
#include "monodromy/system.hpp"

namespace monodromy {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InlineSystem {
    std::string name = "inline";
    std::vector<std::string> rhs;      // either rhs+state ...
    std::vector<std::string> state;
    std::string hamiltonian;           // ... or hamiltonian+coords+momenta
    std::vector<std::string> coords;
    std::vector<std::string> momenta;
    std::vector<int> angles;
};

struct SystemSpec {
    std::optional<std::string> catalog_name;
    std::map<std::string, double> params;
    std::optional<InlineSystem> inline_def;
};

struct RunConfig {
    SystemSpec system;
    std::vector<Cx> initial_state;
    std::optional<Cx> t0;
    std::string mode; // "probe" | "scan"
    std::vector<Cx> candidates;
    std::optional<ScanDomain> domain;
    std::optional<ScanGrid> grid;
    ProbeOptions probe;
    std::optional<double> radius; // explicit probe-disk radius
    ObstructionOptions obstruction;
    std::optional<std::string> report_path;
    std::optional<std::string> csv_path;
    int jobs = 1;
    bool timestamp = true;
};

inline SystemDef build_system(const SystemSpec& spec) {
    const bool has_catalog = spec.catalog_name.has_value();
    const bool has_inline = spec.inline_def.has_value();
    if (has_catalog == has_inline)
        throw ConfigError("config must name exactly one of system.catalog or system.inline");
    if (has_catalog) {
        const CatalogEntry* entry = find_catalog_entry(*spec.catalog_name);
        if (!entry) throw ConfigError("unknown catalog system '" + *spec.catalog_name + "'");
        for (const auto& [key, _] : spec.params) {
            bool known = false;
            for (const auto& ps : entry->params) known = known || ps.name == key;
            if (!known)
                throw ConfigError("system '" + entry->name + "' has no parameter '" + key + "'");
        }
        return entry->build(spec.params);
    }
    const InlineSystem& def = *spec.inline_def;
    try {
        if (!def.hamiltonian.empty()) {
            if (def.coords.empty() || def.momenta.empty())
                throw ConfigError("inline Hamiltonian system needs coords and momenta");
            return hamilton_equations(parse(def.hamiltonian), def.coords, def.momenta, def.name,
                                      def.angles);
        }
        if (def.rhs.empty() || def.state.empty())
            throw ConfigError("inline system needs rhs and state (or hamiltonian and coords/momenta)");
        std::vector<Expr> rhs;
        rhs.reserve(def.rhs.size());
        for (const auto& src : def.rhs) rhs.push_back(parse(src));
        return SystemDef(def.name, def.state, std::move(rhs), def.angles);
    } catch (const ParseError& err) {
        throw ConfigError(std::string("inline system: ") + err.what());
    } catch (const SystemError& err) {
        throw ConfigError(std::string("inline system: ") + err.what());
    }
}

inline json to_json(const RunConfig& cfg) {
    json sys;
    if (cfg.system.catalog_name) {
        sys["catalog"] = *cfg.system.catalog_name;
        if (!cfg.system.params.empty()) sys["params"] = cfg.system.params;
    }
    if (cfg.system.inline_def) {
        const auto& d = *cfg.system.inline_def;
        json ij = {{"name", d.name}};
        if (!d.rhs.empty()) {
            ij["rhs"] = d.rhs;
            ij["state"] = d.state;
        }
        if (!d.hamiltonian.empty()) {
            ij["hamiltonian"] = d.hamiltonian;
            ij["coords"] = d.coords;
            ij["momenta"] = d.momenta;
        }
        if (!d.angles.empty()) ij["angles"] = d.angles;
        sys["inline"] = std::move(ij);
    }
    json out = {{"system", std::move(sys)},
                {"mode", cfg.mode},
                {"probe", to_json(cfg.probe)},
                {"obstruction", to_json(cfg.obstruction)},
                {"jobs", cfg.jobs}};
    json init = json::array();
    for (Cx z : cfg.initial_state) init.push_back(to_json(z));
    out["initial_state"] = std::move(init);
    if (cfg.t0) out["t0"] = to_json(*cfg.t0);
    if (!cfg.candidates.empty()) {
        json c = json::array();
        for (Cx z : cfg.candidates) c.push_back(to_json(z));
        out["candidates"] = std::move(c);
    }
    if (cfg.domain)
        out["domain"] = {{"re", {cfg.domain->re_min, cfg.domain->re_max}},
                         {"im", {cfg.domain->im_min, cfg.domain->im_max}}};
    if (cfg.grid) out["grid"] = {cfg.grid->nx, cfg.grid->ny};
    if (cfg.radius) out["radius"] = *cfg.radius;
    if (cfg.report_path) out["output"]["report"] = *cfg.report_path;
    if (cfg.csv_path) out["output"]["csv"] = *cfg.csv_path;
    return out;
}

inline RunConfig run_config_from_json(const json& j) {
    RunConfig cfg;
    try {
        if (j.contains("system")) {
            const json& s = j["system"];
            if (s.contains("catalog")) cfg.system.catalog_name = s["catalog"].get<std::string>();
            if (s.contains("params"))
                cfg.system.params = s["params"].get<std::map<std::string, double>>();
            if (s.contains("inline")) {
                InlineSystem d;
                const json& ij = s["inline"];
                if (ij.contains("name")) d.name = ij["name"].get<std::string>();
                if (ij.contains("rhs")) d.rhs = ij["rhs"].get<std::vector<std::string>>();
                if (ij.contains("state")) d.state = ij["state"].get<std::vector<std::string>>();
                if (ij.contains("hamiltonian")) d.hamiltonian = ij["hamiltonian"].get<std::string>();
                if (ij.contains("coords")) d.coords = ij["coords"].get<std::vector<std::string>>();
                if (ij.contains("momenta")) d.momenta = ij["momenta"].get<std::vector<std::string>>();
                if (ij.contains("angles")) d.angles = ij["angles"].get<std::vector<int>>();
                cfg.system.inline_def = std::move(d);
            }
        }
        if (j.contains("initial_state"))
            for (const auto& z : j["initial_state"]) cfg.initial_state.push_back(complex_from_json(z));
        if (j.contains("t0")) cfg.t0 = complex_from_json(j["t0"]);
        if (j.contains("mode")) cfg.mode = j["mode"].get<std::string>();
        if (j.contains("candidates"))
            for (const auto& z : j["candidates"]) cfg.candidates.push_back(complex_from_json(z));
        if (j.contains("domain")) {
            const json& d = j["domain"];
            ScanDomain dom;
            dom.re_min = d.at("re").at(0).get<double>();
            dom.re_max = d.at("re").at(1).get<double>();
            dom.im_min = d.at("im").at(0).get<double>();
            dom.im_max = d.at("im").at(1).get<double>();
            cfg.domain = dom;
        }
        if (j.contains("grid")) {
            ScanGrid g;
            g.nx = j["grid"].at(0).get<int>();
            g.ny = j["grid"].at(1).get<int>();
            cfg.grid = g;
        }
        if (j.contains("probe")) cfg.probe = probe_options_from_json(j["probe"]);
        if (j.contains("integrator"))
            cfg.probe.integrator = integrator_options_from_json(j["integrator"]);
        if (j.contains("radius")) cfg.radius = j["radius"].get<double>();
        if (j.contains("obstruction")) cfg.obstruction = obstruction_options_from_json(j["obstruction"]);
        if (j.contains("output")) {
            if (j["output"].contains("report"))
                cfg.report_path = j["output"]["report"].get<std::string>();
            if (j["output"].contains("csv")) cfg.csv_path = j["output"]["csv"].get<std::string>();
        }
        if (j.contains("jobs")) cfg.jobs = j["jobs"].get<int>();
    } catch (const json::exception& err) {
        throw ConfigError(std::string("invalid config: ") + err.what());
    }
    return cfg;
}

namespace detail {

inline std::string iso_timestamp() {
    auto now = std::chrono::system_clock::now();
    std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    std::ostringstream out;
    out << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return out.str();
}

inline std::string format_complex(Cx z) {
    std::ostringstream out;
    out << std::setprecision(10) << z.real();
    out << (z.imag() < 0 ? " - " : " + ") << std::abs(z.imag()) << "i";
    return out.str();
}

inline void write_csv(const std::string& path, const ScanReport& report) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot open '" + path + "' for writing");
    out << "re(t),im(t),classification,traversals,return_residual,det_residual,"
           "symplectic_residual\n";
    out << std::setprecision(17);
    for (const auto& o : report.outcomes) {
        out << o.candidate.real() << "," << o.candidate.imag() << ","
            << to_string(o.classification) << "," << o.traversals_used << ",";
        if (std::isfinite(o.return_residual)) out << o.return_residual;
        out << ",";
        if (o.generator && o.generator->det_residual) out << *o.generator->det_residual;
        out << ",";
        if (o.generator && o.generator->symplectic_residual)
            out << *o.generator->symplectic_residual;
        out << "\n";
    }
}

inline void print_outcomes(std::ostream& out, const ScanReport& report) {
    for (std::size_t k = 0; k < report.outcomes.size(); ++k) {
        const auto& o = report.outcomes[k];
        out << "  [" << k << "] t = " << format_complex(o.candidate) << "  "
            << to_string(o.classification);
        if (o.classification == ProbeClass::Trivial || o.classification == ProbeClass::Generator)
            out << "  (traversals " << o.traversals_used << ", return residual "
                << o.return_residual << ")";
        if (o.abort_reason) out << "  [" << *o.abort_reason << "]";
        out << "\n";
        if (o.generator) {
            const auto& g = *o.generator;
            out << "        |T|_F = " << g.matrix.norm();
            if (g.det_residual) out << ", |det T - 1| = " << *g.det_residual;
            if (g.symplectic_residual) out << ", sympl. residual = " << *g.symplectic_residual;
            out << "\n";
        }
    }
}

inline void print_verdict(std::ostream& out, const ObstructionVerdict& v) {
    out << "verdict: " << to_string(v.conclusion) << "\n";
    for (const auto& w : v.witnesses)
        out << "  witness: generators (" << w.first << ", " << w.second
            << "), relative commutator norm " << w.rel_norm << "\n";
    for (const auto& n : v.notes) out << "  note: " << n << "\n";
}

inline json assemble_report(const RunConfig& cfg, const ScanReport& report,
                            const ObstructionVerdict& v) {
    json doc = to_json(report);
    doc["config"] = to_json(cfg);
    doc["verdict"] = to_json(v);
    if (cfg.timestamp) doc["timestamp"] = iso_timestamp();
    return doc;
}

inline int finish_run(const RunConfig& cfg, const ScanReport& report, std::ostream& out) {
    ObstructionVerdict v = verdict(report, cfg.obstruction);
    print_outcomes(out, report);
    print_verdict(out, v);
    json doc = assemble_report(cfg, report, v);
    if (cfg.report_path) {
        write_json_file(*cfg.report_path, doc);
        out << "report written to " << *cfg.report_path << "\n";
    }
    if (cfg.csv_path) {
        write_csv(*cfg.csv_path, report);
        out << "csv written to " << *cfg.csv_path << "\n";
    }
    bool all_aborted = !report.outcomes.empty();
    for (const auto& o : report.outcomes)
        all_aborted = all_aborted && o.classification == ProbeClass::Aborted;
    return all_aborted ? 3 : 0;
}

inline void validate_common(const RunConfig& cfg, const SystemDef& sys) {
    if (cfg.initial_state.empty()) throw ConfigError("config is missing initial_state");
    if (static_cast<int>(cfg.initial_state.size()) != sys.dimension())
        throw ConfigError("initial_state dimension does not match system dimension " +
                          std::to_string(sys.dimension()));
    if (!cfg.t0) throw ConfigError("config is missing t0");
}

} // namespace detail

inline int cmd_probe(const RunConfig& cfg, std::ostream& out) {
    try {
        SystemDef sys = build_system(cfg.system);
        detail::validate_common(cfg, sys);
        if (cfg.candidates.empty()) throw ConfigError("probe mode needs a candidates list");
        CVec x0(static_cast<Eigen::Index>(cfg.initial_state.size()));
        for (std::size_t k = 0; k < cfg.initial_state.size(); ++k)
            x0[static_cast<Eigen::Index>(k)] = cfg.initial_state[k];
        ProbeOptions opts = cfg.probe;
        if (cfg.radius) opts.radius = *cfg.radius;
        out << "probing " << cfg.candidates.size() << " candidate point(s) of system '"
            << sys.name() << "'\n";
        ScanReport report = probe_candidates(sys, x0, *cfg.t0, cfg.candidates, opts, cfg.jobs);
        return detail::finish_run(cfg, report, out);
    } catch (const ConfigError& err) {
        out << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ReportError& err) {
        out << "error: " << err.what() << "\n";
        return 2;
    }
}

inline int cmd_scan(const RunConfig& cfg, std::ostream& out) {
    try {
        SystemDef sys = build_system(cfg.system);
        detail::validate_common(cfg, sys);
        if (!cfg.domain) throw ConfigError("scan mode needs a domain rectangle");
        if (!cfg.grid) throw ConfigError("scan mode needs grid dimensions");
        CVec x0(static_cast<Eigen::Index>(cfg.initial_state.size()));
        for (std::size_t k = 0; k < cfg.initial_state.size(); ++k)
            x0[static_cast<Eigen::Index>(k)] = cfg.initial_state[k];
        out << "scanning " << cfg.grid->nx << "x" << cfg.grid->ny << " grid over ["
            << cfg.domain->re_min << ", " << cfg.domain->re_max << "] x [" << cfg.domain->im_min
            << ", " << cfg.domain->im_max << "] for system '" << sys.name() << "'\n";
        ScanReport report;
        try {
            report = scan(sys, x0, *cfg.t0, *cfg.domain, *cfg.grid, cfg.probe, cfg.radius,
                          cfg.jobs);
        } catch (const SystemError& err) {
            throw ConfigError(err.what());
        }
        return detail::finish_run(cfg, report, out);
    } catch (const ConfigError& err) {
        out << "config error: " << err.what() << "\n";
        return 2;
    } catch (const ReportError& err) {
        out << "error: " << err.what() << "\n";
        return 2;
    }
}

/// Re-analyses a stored report: recomputes the verdict from the stored
/// generator matrices and outcome classifications, possibly with different
/// tolerances.
inline int cmd_check(const std::string& report_path, const ObstructionOptions& opts,
                     std::ostream& out) {
    try {
        json doc = read_json_file(report_path);
        ScanReport report = report_from_json(doc);
        ObstructionVerdict v = verdict(report, opts);
        out << "report: " << report_path << " (system '" << report.system_name << "', "
            << report.outcomes.size() << " probe(s), "
            << report.generator_matrices().size() << " generator(s))\n";
        for (const auto& w : v.witnesses) {
            out << "  witness pair (" << w.first << ", " << w.second << "): relative norm "
                << w.rel_norm << "\n    commutator entry (1,1) = "
                << detail::format_complex(w.matrix(0, 0)) << "\n";
        }
        detail::print_verdict(out, v);
        return 0;
    } catch (const ReportError& err) {
        out << "error: " << err.what() << "\n";
        return 2;
    }
}

inline int cmd_systems_list(bool machine, std::ostream& out) {
    if (machine) {
        json arr = json::array();
        for (const auto& e : catalog()) {
            json params = json::array();
            for (const auto& p : e.params)
                params.push_back({{"name", p.name}, {"default", p.default_value}});
            SystemDef sys = e.build({});
            json ej = {{"name", e.name},
                       {"description", e.description},
                       {"params", std::move(params)},
                       {"dimension", sys.dimension()},
                       {"state", sys.state_symbols()},
                       {"angle_indices", sys.angle_indices()},
                       {"hamiltonian", sys.is_hamiltonian()},
                       {"dsl", sys.dsl_source()}};
            if (e.reference) {
                json ref = {{"t0", to_json(e.reference->t0)},
                            {"initial_state", to_json(e.reference->x0)}};
                json cands = json::array();
                for (Cx z : e.reference->candidates) cands.push_back(to_json(z));
                ref["candidates"] = std::move(cands);
                if (e.reference->traversals > 0) ref["traversals"] = e.reference->traversals;
                ej["reference"] = std::move(ref);
            }
            arr.push_back(std::move(ej));
        }
        out << arr.dump(2) << "\n";
        return 0;
    }
    for (const auto& e : catalog()) {
        SystemDef sys = e.build({});
        out << e.name << "  (dim " << sys.dimension() << (sys.is_hamiltonian() ? ", hamiltonian" : "")
            << ")\n    " << e.description << "\n";
        if (!e.params.empty()) {
            out << "    params:";
            for (const auto& p : e.params) out << " " << p.name << "=" << p.default_value;
            out << "\n";
        }
        out << "    state:";
        for (const auto& s : sys.state_symbols()) out << " " << s;
        out << "\n    rhs:\n";
        for (const auto& line : sys.dsl_source()) out << "      " << line << "\n";
        if (e.reference) {
            out << "    reference: t0 = " << detail::format_complex(e.reference->t0)
                << ", candidates:";
            for (Cx z : e.reference->candidates) out << " " << detail::format_complex(z);
            if (e.reference->traversals > 0)
                out << " (" << e.reference->traversals << " traversals)";
            out << "\n";
        }
    }
    return 0;
}

} // namespace monodromy
