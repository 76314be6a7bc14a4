#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "monodromy/cpath.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/obstruction.hpp"
#include "monodromy/probing.hpp"

namespace monodromy {

using json = nlohmann::json;

struct ReportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Complex numbers are stored as [re, im] pairs throughout; matrices as arrays
// of rows of such pairs. Strings are never used for numbers.

inline json to_json(Cx z) { return json::array({z.real(), z.imag()}); }

inline Cx complex_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number())
        throw ReportError("expected complex number as [re, im]");
    return Cx(j[0].get<double>(), j[1].get<double>());
}

inline json to_json(const CVec& v) {
    json out = json::array();
    for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(to_json(v[k]));
    return out;
}

inline CVec cvec_from_json(const json& j) {
    if (!j.is_array()) throw ReportError("expected vector of complex numbers");
    CVec v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t k = 0; k < j.size(); ++k)
        v[static_cast<Eigen::Index>(k)] = complex_from_json(j[k]);
    return v;
}

inline json to_json(const CMat& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(to_json(m(r, c)));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline CMat cmat_from_json(const json& j) {
    if (!j.is_array() || j.empty()) throw ReportError("expected matrix as array of rows");
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto cols = static_cast<Eigen::Index>(j[0].size());
    CMat m(rows, cols);
    for (Eigen::Index r = 0; r < rows; ++r) {
        if (static_cast<Eigen::Index>(j[static_cast<std::size_t>(r)].size()) != cols)
            throw ReportError("ragged matrix rows");
        for (Eigen::Index c = 0; c < cols; ++c)
            m(r, c) = complex_from_json(j[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]);
    }
    return m;
}

inline json to_json(const CPath& path) {
    json pieces = json::array();
    for (const PathPiece& p : path.pieces()) {
        if (const auto* s = std::get_if<Segment>(&p)) {
            pieces.push_back({{"type", "segment"}, {"start", to_json(s->start)},
                              {"end", to_json(s->end)}});
        } else {
            const auto& a = std::get<Arc>(p);
            pieces.push_back({{"type", "arc"}, {"center", to_json(a.center)},
                              {"radius", a.radius}, {"angle_start", a.angle_start},
                              {"angle_sweep", a.angle_sweep}});
        }
    }
    return pieces;
}

inline json to_json(const IntegratorOptions& o) {
    return {{"rel_tol", o.rel_tol},
            {"abs_tol", o.abs_tol},
            {"max_steps", o.max_steps},
            {"checkpoint_stride", o.checkpoint_stride},
            {"initial_step", o.initial_step},
            {"singularity_guard", o.singularity_guard}};
}

inline IntegratorOptions integrator_options_from_json(const json& j) {
    IntegratorOptions o;
    if (j.contains("rel_tol")) o.rel_tol = j["rel_tol"].get<double>();
    if (j.contains("abs_tol")) o.abs_tol = j["abs_tol"].get<double>();
    if (j.contains("max_steps")) o.max_steps = j["max_steps"].get<long long>();
    if (j.contains("checkpoint_stride")) o.checkpoint_stride = j["checkpoint_stride"].get<double>();
    if (j.contains("initial_step")) o.initial_step = j["initial_step"].get<double>();
    if (j.contains("singularity_guard")) o.singularity_guard = j["singularity_guard"].get<double>();
    return o;
}

inline json to_json(const ProbeOptions& o) {
    json w = json::array();
    for (Cx z : o.waypoints) w.push_back(to_json(z));
    return {{"radius", o.radius},
            {"max_traversals", o.max_traversals},
            {"return_tol", o.return_tol},
            {"matrix_tol", o.matrix_tol},
            {"clockwise", o.clockwise},
            {"waypoints", std::move(w)},
            {"integrator", to_json(o.integrator)}};
}

inline ProbeOptions probe_options_from_json(const json& j) {
    ProbeOptions o;
    if (j.contains("radius")) o.radius = j["radius"].get<double>();
    if (j.contains("max_traversals")) o.max_traversals = j["max_traversals"].get<int>();
    if (j.contains("return_tol")) o.return_tol = j["return_tol"].get<double>();
    if (j.contains("matrix_tol")) o.matrix_tol = j["matrix_tol"].get<double>();
    if (j.contains("clockwise")) o.clockwise = j["clockwise"].get<bool>();
    if (j.contains("waypoints"))
        for (const auto& w : j["waypoints"]) o.waypoints.push_back(complex_from_json(w));
    if (j.contains("integrator")) o.integrator = integrator_options_from_json(j["integrator"]);
    return o;
}

inline json to_json(const ObstructionOptions& o) {
    return {{"comm_tol", o.comm_tol},
            {"k_max", o.k_max},
            {"resonance_tol", o.resonance_tol},
            {"pair_tol", o.pair_tol}};
}

inline ObstructionOptions obstruction_options_from_json(const json& j) {
    ObstructionOptions o;
    if (j.contains("comm_tol")) o.comm_tol = j["comm_tol"].get<double>();
    if (j.contains("k_max")) o.k_max = j["k_max"].get<int>();
    if (j.contains("resonance_tol")) o.resonance_tol = j["resonance_tol"].get<double>();
    if (j.contains("pair_tol")) o.pair_tol = j["pair_tol"].get<double>();
    return o;
}

inline json to_json(const ObstructionVerdict& v) {
    json witnesses = json::array();
    for (const auto& w : v.witnesses)
        witnesses.push_back({{"pair", {w.first, w.second}},
                             {"rel_norm", w.rel_norm},
                             {"commutator", to_json(w.matrix)}});
    json diags = json::array();
    for (const auto& d : v.diagnostics) {
        json dj = {{"outcome_index", d.outcome_index}};
        if (d.det_residual) dj["det_residual"] = *d.det_residual;
        if (d.symplectic_residual) dj["symplectic_residual"] = *d.symplectic_residual;
        if (d.pairing) {
            json pairs = json::array();
            for (const auto& [a, b] : d.pairing->pairs)
                pairs.push_back({to_json(a), to_json(b)});
            json leftovers = json::array();
            for (Cx z : d.pairing->leftovers) leftovers.push_back(to_json(z));
            dj["eigen_pairs"] = std::move(pairs);
            dj["eigen_leftovers"] = std::move(leftovers);
        }
        if (d.resonance) {
            dj["nonresonant"] = d.resonance->nonresonant;
            if (!d.resonance->nonresonant) dj["resonance_witness"] = d.resonance->witness;
        }
        diags.push_back(std::move(dj));
    }
    return {{"conclusion", std::string(to_string(v.conclusion))},
            {"witnesses", std::move(witnesses)},
            {"diagnostics", std::move(diags)},
            {"notes", v.notes}};
}

inline json to_json(const ScanReport& r) {
    json outcomes = json::array();
    json generators = json::array();
    for (const auto& o : r.outcomes) {
        json oj = {{"candidate", to_json(o.candidate)},
                   {"classification", std::string(to_string(o.classification))},
                   {"traversals", o.traversals_used}};
        if (std::isfinite(o.return_residual)) oj["return_residual"] = o.return_residual;
        if (o.abort_reason) oj["abort_reason"] = *o.abort_reason;
        if (o.generator) {
            const auto& g = *o.generator;
            json gj = {{"matrix", to_json(g.matrix)},
                       {"candidate", to_json(g.candidate)},
                       {"traversals", g.traversals},
                       {"base_point", to_json(g.base_point)},
                       {"initial_x", to_json(g.initial_x)},
                       {"loop", to_json(g.loop)},
                       {"return_residual", g.return_residual}};
            if (g.det_residual) gj["det_residual"] = *g.det_residual;
            if (g.symplectic_residual) gj["symplectic_residual"] = *g.symplectic_residual;
            oj["generator_index"] = generators.size();
            generators.push_back(std::move(gj));
        }
        outcomes.push_back(std::move(oj));
    }
    json out = {{"tool", {{"name", std::string(kToolName)}, {"version", r.tool_version}}},
                {"system",
                 {{"name", r.system_name},
                  {"hash", r.system_hash},
                  {"dimension", r.dimension},
                  {"hamiltonian", r.hamiltonian},
                  {"angle_indices", r.angle_indices}}},
                {"mode", r.mode},
                {"t0", to_json(r.t0)},
                {"initial_state", to_json(r.x0)},
                {"candidates", [&] {
                     json c = json::array();
                     for (Cx z : r.candidates) c.push_back(to_json(z));
                     return c;
                 }()},
                {"options", to_json(r.options)},
                {"outcomes", std::move(outcomes)},
                {"generators", std::move(generators)}};
    if (r.domain)
        out["domain"] = {{"re", {r.domain->re_min, r.domain->re_max}},
                         {"im", {r.domain->im_min, r.domain->im_max}}};
    if (r.grid) out["grid"] = {r.grid->nx, r.grid->ny};
    return out;
}

inline ProbeClass probe_class_from_string(const std::string& s) {
    if (s == "trivial") return ProbeClass::Trivial;
    if (s == "generator") return ProbeClass::Generator;
    if (s == "non_returning") return ProbeClass::NonReturning;
    if (s == "aborted") return ProbeClass::Aborted;
    throw ReportError("unknown probe classification '" + s + "'");
}

/// Reads back the parts of a report needed for re-analysis: outcome
/// classifications and generator matrices. Loop provenance is not restored.
inline ScanReport report_from_json(const json& j) {
    ScanReport r;
    try {
        r.tool_version = j.at("tool").at("version").get<std::string>();
        r.system_name = j.at("system").at("name").get<std::string>();
        r.system_hash = j.at("system").at("hash").get<std::uint64_t>();
        r.dimension = j.at("system").at("dimension").get<int>();
        r.hamiltonian = j.at("system").at("hamiltonian").get<bool>();
        r.angle_indices = j.at("system").at("angle_indices").get<std::vector<int>>();
        r.mode = j.at("mode").get<std::string>();
        r.t0 = complex_from_json(j.at("t0"));
        r.x0 = cvec_from_json(j.at("initial_state"));
        for (const auto& c : j.at("candidates")) r.candidates.push_back(complex_from_json(c));
        if (j.contains("options")) r.options = probe_options_from_json(j["options"]);
        const json& gens = j.at("generators");
        for (const auto& oj : j.at("outcomes")) {
            ProbeOutcome o;
            o.candidate = complex_from_json(oj.at("candidate"));
            o.classification = probe_class_from_string(oj.at("classification").get<std::string>());
            o.traversals_used = oj.at("traversals").get<int>();
            if (oj.contains("return_residual")) o.return_residual = oj["return_residual"].get<double>();
            if (oj.contains("abort_reason")) o.abort_reason = oj["abort_reason"].get<std::string>();
            if (oj.contains("generator_index")) {
                const json& gj = gens.at(oj["generator_index"].get<std::size_t>());
                MonodromyGenerator g;
                g.matrix = cmat_from_json(gj.at("matrix"));
                if (g.matrix.rows() != g.matrix.cols() || g.matrix.rows() != r.dimension)
                    throw ReportError("generator matrix dimension mismatch");
                g.candidate = complex_from_json(gj.at("candidate"));
                g.traversals = gj.at("traversals").get<int>();
                g.base_point = complex_from_json(gj.at("base_point"));
                g.initial_x = cvec_from_json(gj.at("initial_x"));
                g.return_residual = gj.at("return_residual").get<double>();
                if (gj.contains("det_residual")) g.det_residual = gj["det_residual"].get<double>();
                if (gj.contains("symplectic_residual"))
                    g.symplectic_residual = gj["symplectic_residual"].get<double>();
                o.generator = std::move(g);
            }
            r.outcomes.push_back(std::move(o));
        }
    } catch (const json::exception& err) {
        throw ReportError(std::string("invalid report: ") + err.what());
    }
    return r;
}

inline void write_json_file(const std::string& path, const json& j) {
    std::ofstream out(path);
    if (!out) throw ReportError("cannot open '" + path + "' for writing");
    out << j.dump(2) << "\n";
}

inline json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ReportError("cannot open '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& err) {
        throw ReportError(std::string("invalid JSON in '") + path + "': " + err.what());
    }
}

} // namespace monodromy
