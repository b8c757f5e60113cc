#include "isoflow/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace isoflow {

namespace {

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

struct Entry {
    std::string value;
    int line = 0;
};

using Section = std::map<std::string, Entry>;

const std::map<std::string, std::set<std::string>>& known_keys() {
    static const std::map<std::string, std::set<std::string>> keys = {
        {"geometry", {"kind", "n", "R", "R0", "inner", "outer", "side", "eps", "mode", "pole_cut"}},
        {"experiment", {"kind", "expect", "surface", "field"}},
        {"numeric", {"N", "Nr", "Nphi", "nu", "nv", "dt", "T", "k", "levels", "solver", "richardson", "sweep"}},
        {"checks",
         {"spread_tol", "nonconstant_min", "serrin_tol", "serrin_min", "mu_tol", "d_tol", "coeff_tol",
          "rate_min", "roundoff_floor", "residual_min", "closed_form_tol", "flux_tol", "witness_min", "angle_tol",
          "stability_ratio"}},
        {"output", {"dir"}},
    };
    return keys;
}

const std::map<std::string, GeometryKind>& geometry_names() {
    static const std::map<std::string, GeometryKind> names = {
        {"ball", GeometryKind::Ball},
        {"cap", GeometryKind::Cap},
        {"clifford", GeometryKind::Clifford},
        {"annulus", GeometryKind::Annulus},
        {"revolution", GeometryKind::Revolution},
        {"revolution-perturbed", GeometryKind::RevolutionPerturbed},
    };
    return names;
}

const std::map<std::string, ExperimentKind>& experiment_names() {
    static const std::map<std::string, ExperimentKind> names = {
        {"heat-flow", ExperimentKind::HeatFlow},
        {"exit-time", ExperimentKind::ExitTime},
        {"spectrum", ExperimentKind::Spectrum},
        {"commute", ExperimentKind::Commute},
        {"level-identity", ExperimentKind::LevelIdentity},
        {"focal-order", ExperimentKind::FocalOrder},
        {"soul-minimality", ExperimentKind::SoulMinimality},
        {"free-boundary", ExperimentKind::FreeBoundary},
    };
    return names;
}

// Geometry parameters each catalog kind accepts (besides `kind`).
const std::set<std::string>& geometry_parameters(GeometryKind kind) {
    static const std::map<GeometryKind, std::set<std::string>> params = {
        {GeometryKind::Ball, {"n", "R"}},
        {GeometryKind::Cap, {"n", "R0"}},
        {GeometryKind::Clifford, {"R"}},
        {GeometryKind::Annulus, {"inner", "outer", "side"}},
        {GeometryKind::Revolution, {"pole_cut"}},
        {GeometryKind::RevolutionPerturbed, {"pole_cut", "eps", "mode"}},
    };
    return params.at(kind);
}

class Parser {
public:
    std::vector<ConfigError> errors;

    void error(int line, std::string message) { errors.push_back({line, std::move(message)}); }

    std::optional<double> real(const Entry& e, const std::string& key) {
        const std::string s = trim(e.value);
        double v = 0.0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) {
            error(e.line, "`" + key + "` expects a real number, got `" + s + "`");
            return std::nullopt;
        }
        return v;
    }

    std::optional<int> integer(const Entry& e, const std::string& key) {
        const std::string s = trim(e.value);
        int v = 0;
        const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
        if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size()) {
            error(e.line, "`" + key + "` expects an integer, got `" + s + "`");
            return std::nullopt;
        }
        return v;
    }

    template <class T>
    std::optional<T> choice(const Entry& e, const std::string& key, const std::map<std::string, T>& names) {
        const std::string s = trim(e.value);
        if (auto it = names.find(s); it != names.end()) return it->second;
        std::ostringstream os;
        os << "`" << key << "` must be one of";
        for (const auto& [name, _] : names) os << " " << name;
        os << "; got `" << s << "`";
        error(e.line, os.str());
        return std::nullopt;
    }
};

}  // namespace

std::string_view to_string(GeometryKind kind) {
    for (const auto& [name, k] : geometry_names())
        if (k == kind) return name;
    return "?";
}

std::string_view to_string(ExperimentKind kind) {
    for (const auto& [name, k] : experiment_names())
        if (k == kind) return name;
    return "?";
}

std::string_view to_string(Expectation e) { return e == Expectation::Constant ? "constant" : "nonconstant"; }

ParseResult parse_config(std::string_view text) {
    Parser p;
    std::map<std::string, Section> sections;
    std::map<std::string, int> section_lines;
    std::string current;
    int line_no = 0;

    std::istringstream in{std::string(text)};
    std::string raw;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string line = raw.substr(0, raw.find('#'));
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            const auto close = line.find(']');
            if (close == std::string::npos) {
                p.error(line_no, "unterminated section header");
                continue;
            }
            current = trim(std::string_view(line).substr(1, close - 1));
            if (!known_keys().contains(current)) {
                p.error(line_no, "unknown section [" + current + "]");
                current = "\x01";  // swallow its keys without further noise
            } else if (section_lines.contains(current)) {
                p.error(line_no, "duplicate section [" + current + "]");
            } else {
                section_lines[current] = line_no;
                sections[current];
            }
            line = trim(std::string_view(line).substr(close + 1));
            if (line.empty()) continue;
        }
        // One or more `key = value` assignments; a key is the last word before each '='.
        std::vector<std::string> parts;
        std::size_t start = 0;
        for (std::size_t pos; (pos = line.find('=', start)) != std::string::npos; start = pos + 1)
            parts.push_back(line.substr(start, pos - start));
        parts.push_back(line.substr(start));
        if (parts.size() < 2) {
            p.error(line_no, "expected `key = value`, got `" + line + "`");
            continue;
        }
        std::string key = trim(parts[0]);
        for (std::size_t i = 1; i < parts.size(); ++i) {
            std::string value = trim(parts[i]);
            std::string next_key;
            if (i + 1 < parts.size()) {
                const auto cut = value.find_last_of(" \t");
                if (cut == std::string::npos) {
                    p.error(line_no, "cannot split assignments in `" + line + "`");
                    break;
                }
                next_key = trim(std::string_view(value).substr(cut + 1));
                value = trim(std::string_view(value).substr(0, cut));
            }
            if (current.empty()) {
                p.error(line_no, "`" + key + "` appears before any section header");
            } else if (current != "\x01") {
                if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
                    p.error(line_no, "malformed key `" + key + "`");
                } else if (!known_keys().at(current).contains(key)) {
                    p.error(line_no, "unknown key `" + key + "` in [" + current + "]");
                } else if (sections[current].contains(key)) {
                    p.error(line_no, "duplicate key `" + key + "` in [" + current + "]");
                } else if (value.empty()) {
                    p.error(line_no, "missing value for `" + key + "`");
                } else {
                    sections[current][key] = Entry{value, line_no};
                }
            }
            key = next_key;
        }
    }

    RunConfig cfg;
    auto get = [&](const std::string& section, const std::string& key) -> const Entry* {
        const auto s = sections.find(section);
        if (s == sections.end()) return nullptr;
        const auto k = s->second.find(key);
        return k == s->second.end() ? nullptr : &k->second;
    };

    // [experiment]
    if (const Entry* e = get("experiment", "kind")) {
        if (auto v = p.choice(*e, "kind", experiment_names())) cfg.experiment.kind = *v;
    } else {
        p.error(section_lines.contains("experiment") ? section_lines["experiment"] : 0,
                "missing required key `kind` in [experiment] (one of heat-flow, exit-time, spectrum, commute, "
                "level-identity, focal-order, soul-minimality, free-boundary)");
    }
    if (const Entry* e = get("experiment", "expect"))
        if (auto v = p.choice(*e, "expect", std::map<std::string, Expectation>{
                                                {"constant", Expectation::Constant},
                                                {"nonconstant", Expectation::Nonconstant}}))
            cfg.experiment.expect = *v;
    if (const Entry* e = get("experiment", "surface"))
        if (auto v = p.choice(*e, "surface", std::map<std::string, SurfaceKind>{
                                                 {"flat-disk", SurfaceKind::FlatDisk},
                                                 {"catenoid", SurfaceKind::Catenoid},
                                                 {"spherical-cap", SurfaceKind::SphericalCap}}))
            cfg.experiment.surface = *v;
    if (const Entry* e = get("experiment", "field"))
        if (auto v = p.choice(*e, "field", std::map<std::string, TestField>{
                                               {"r-cos-phi", TestField::RCosPhi},
                                               {"radial", TestField::Radial},
                                               {"one", TestField::One},
                                               {"r", TestField::R},
                                               {"cos-phi", TestField::CosPhi}}))
            cfg.experiment.field = *v;

    // [geometry]
    const bool needs_geometry = cfg.experiment.kind != ExperimentKind::FreeBoundary;
    std::optional<GeometryKind> gkind;
    if (const Entry* e = get("geometry", "kind")) {
        gkind = p.choice(*e, "kind", geometry_names());
    } else if (needs_geometry) {
        p.error(section_lines.contains("geometry") ? section_lines["geometry"] : 0,
                "missing required key `kind` in [geometry]");
    }
    if (gkind) {
        cfg.geometry.kind = *gkind;
        const auto& allowed = geometry_parameters(*gkind);
        for (const auto& [key, entry] : sections["geometry"]) {
            if (key == "kind") continue;
            if (!allowed.contains(key)) {
                p.error(entry.line, "`" + key + "` is not a parameter of geometry `" +
                                        std::string(to_string(*gkind)) + "`");
                continue;
            }
            if (key == "n" || key == "mode") {
                if (auto v = p.integer(entry, key)) (key == "n" ? cfg.geometry.n : cfg.geometry.mode) = *v;
            } else if (key == "side") {
                if (auto v = p.choice(entry, key, std::map<std::string, AnnulusSide>{
                                                      {"outward", AnnulusSide::Outward},
                                                      {"inward", AnnulusSide::Inward}}))
                    cfg.geometry.side = *v;
            } else if (auto v = p.real(entry, key)) {
                if (key == "R") cfg.geometry.R = *v;
                if (key == "R0") cfg.geometry.R0 = *v;
                if (key == "inner") cfg.geometry.inner = *v;
                if (key == "outer") cfg.geometry.outer = *v;
                if (key == "eps") cfg.geometry.eps = *v;
                if (key == "pole_cut") cfg.geometry.pole_cut = *v;
            }
        }
        // The shared default R = 1 lies outside the Clifford range.
        if (cfg.geometry.kind == GeometryKind::Clifford && !get("geometry", "R"))
            cfg.geometry.R = std::numbers::pi / 8.0;
        const auto& g = cfg.geometry;
        const int gl = section_lines.contains("geometry") ? section_lines["geometry"] : 0;
        auto line_of = [&](const std::string& key) {
            const Entry* e = get("geometry", key);
            return e ? e->line : gl;
        };
        constexpr double pi = std::numbers::pi;
        switch (g.kind) {
            case GeometryKind::Ball:
                if (g.n < 1) p.error(line_of("n"), "ball: n must be >= 1");
                if (!(g.R > 0.0)) p.error(line_of("R"), "ball: R must be positive");
                break;
            case GeometryKind::Cap:
                if (g.n < 2) p.error(line_of("n"), "cap: n must be >= 2");
                if (!(g.R0 > 0.0 && g.R0 < pi)) p.error(line_of("R0"), "cap: R0 must lie in (0, pi)");
                break;
            case GeometryKind::Clifford:
                if (!(g.R > 0.0 && g.R < pi / 4.0))
                    p.error(line_of("R"), "clifford: R must lie in (0, pi/4); R >= pi/4 is rejected");
                break;
            case GeometryKind::Annulus:
                if (!(g.inner > 0.0 && g.outer > g.inner))
                    p.error(line_of("outer"), "annulus: need 0 < inner < outer");
                break;
            case GeometryKind::RevolutionPerturbed:
                if (!(std::abs(g.eps) < 1.0)) p.error(line_of("eps"), "revolution-perturbed: |eps| must be < 1");
                if (g.mode < 0) p.error(line_of("mode"), "revolution-perturbed: mode must be >= 0");
                [[fallthrough]];
            case GeometryKind::Revolution:
                if (!(g.pole_cut > 0.0 && g.pole_cut < pi / 4.0))
                    p.error(line_of("pole_cut"), "revolution: pole_cut must lie in (0, pi/4)");
                break;
        }
    }

    // [numeric]
    for (const auto& [key, entry] : sections["numeric"]) {
        auto& n = cfg.numeric;
        if (key == "dt" || key == "T") {
            if (auto v = p.real(entry, key)) {
                if (!(*v > 0.0)) p.error(entry.line, "`" + key + "` must be positive");
                (key == "dt" ? n.dt.emplace() : n.T) = *v;
            }
        } else if (key == "solver") {
            if (auto v = p.choice(entry, key, std::map<std::string, SolverPath>{{"radial", SolverPath::Radial},
                                                                                {"surface", SolverPath::Surface}}))
                n.solver = *v;
        } else if (key == "richardson") {
            if (auto v = p.choice(entry, key, std::map<std::string, bool>{{"true", true}, {"false", false}}))
                n.richardson = *v;
        } else if (key == "sweep") {
            std::istringstream items(entry.value);
            for (std::string item; std::getline(items, item, ',');) {
                Entry sub{trim(item), entry.line};
                if (auto v = p.integer(sub, key)) {
                    if (*v < 0 || *v > 6) p.error(entry.line, "sweep offsets must lie in [0, 6]");
                    n.sweep.push_back(*v);
                }
            }
        } else if (auto v = p.integer(entry, key)) {
            const std::map<std::string, std::pair<int*, int>> ints = {
                {"N", {&n.N, 8}},   {"Nr", {&n.Nr, 16}},  {"Nphi", {&n.Nphi, 16}}, {"nu", {&n.nu, 4}},
                {"nv", {&n.nv, 4}}, {"k", {&n.k, 1}},     {"levels", {&n.levels, 2}},
            };
            const auto& [target, minimum] = ints.at(key);
            if (*v < minimum) p.error(entry.line, "`" + key + "` must be >= " + std::to_string(minimum));
            *target = *v;
        }
    }

    // [checks]
    for (const auto& [key, entry] : sections["checks"]) {
        auto v = p.real(entry, key);
        if (!v) continue;
        if (!(*v > 0.0)) p.error(entry.line, "`" + key + "` must be positive");
        auto& c = cfg.checks;
        const std::map<std::string, double*> fields = {
            {"spread_tol", &c.spread_tol}, {"nonconstant_min", &c.nonconstant_min}, {"serrin_tol", &c.serrin_tol},
            {"serrin_min", &c.serrin_min}, {"mu_tol", &c.mu_tol},                   {"d_tol", &c.d_tol},
            {"coeff_tol", &c.coeff_tol},   {"rate_min", &c.rate_min},               {"roundoff_floor", &c.roundoff_floor},
            {"residual_min", &c.residual_min}, {"closed_form_tol", &c.closed_form_tol},
            {"flux_tol", &c.flux_tol},
            {"witness_min", &c.witness_min},   {"angle_tol", &c.angle_tol},
            {"stability_ratio", &c.stability_ratio},
        };
        *fields.at(key) = *v;
    }

    if (const Entry* e = get("output", "dir")) cfg.output_dir = trim(e->value);

    // Experiment / geometry compatibility.
    if (gkind && p.errors.empty()) {
        const auto g = *gkind;
        const bool profile = g == GeometryKind::Ball || g == GeometryKind::Cap || g == GeometryKind::Clifford;
        const bool chart = g == GeometryKind::Revolution || g == GeometryKind::RevolutionPerturbed;
        const int el = section_lines.contains("experiment") ? section_lines["experiment"] : 0;
        const std::string pair =
            std::string(to_string(cfg.experiment.kind)) + " is not available for geometry " + std::string(to_string(g));
        switch (cfg.experiment.kind) {
            case ExperimentKind::Spectrum:
            case ExperimentKind::FocalOrder:
            case ExperimentKind::SoulMinimality:
                if (chart) p.error(el, pair);
                break;
            case ExperimentKind::Commute:
                if (profile) p.error(el, pair);
                break;
            case ExperimentKind::LevelIdentity:
                if (profile || g == GeometryKind::RevolutionPerturbed) p.error(el, pair);
                break;
            default:
                break;
        }
        if (cfg.experiment.kind == ExperimentKind::Spectrum && cfg.numeric.richardson &&
            (cfg.numeric.N % 4 != 0 || cfg.numeric.N < 32 || cfg.numeric.k > cfg.numeric.N / 4)) {
            const Entry* e = get("numeric", "N");
            p.error(e ? e->line : el, "richardson needs N divisible by 4, N >= 32 and k <= N/4");
        }
        if (cfg.numeric.solver == SolverPath::Surface && g != GeometryKind::Annulus)
            p.error(el, "solver = surface applies to the annulus only (charts always use the surface solver)");
    }

    ParseResult result;
    result.errors = std::move(p.errors);
    std::sort(result.errors.begin(), result.errors.end(),
              [](const ConfigError& a, const ConfigError& b) { return a.line < b.line; });
    if (result.errors.empty()) result.config = std::move(cfg);
    return result;
}

RunConfig refined(const RunConfig& config, int times) {
    RunConfig out = config;
    for (int i = 0; i < times; ++i) {
        out.numeric.N *= 2;
        out.numeric.Nr *= 2;
        out.numeric.Nphi *= 2;
        out.numeric.nu *= 2;
        out.numeric.nv *= 2;
    }
    return out;
}

}  // namespace isoflow
