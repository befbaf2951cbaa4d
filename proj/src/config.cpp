#include "gplab/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "gplab/errors.hpp"

#include "json.hpp"

namespace gplab {

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::string where(const std::string& key, int line) {
    return "'" + key + "'" + (line > 0 ? " (line " + std::to_string(line) + ")" : "");
}

bool parse_real_token(const std::string& tok, double& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtod(tok.c_str(), &end);
    return end == tok.c_str() + tok.size();
}

bool parse_int_token(const std::string& tok, long long& out) {
    if (tok.empty()) return false;
    char* end = nullptr;
    out = std::strtoll(tok.c_str(), &end, 10);
    return end == tok.c_str() + tok.size();
}

std::vector<std::string> split_list(const std::string& raw, const std::string& key,
                                    int line) {
    std::string body = trim(raw);
    if (body.size() < 2 || body.front() != '[' || body.back() != ']') {
        fail_config("OutOfRange", where(key, line) + ": expected a [..] list");
    }
    body = body.substr(1, body.size() - 2);
    std::vector<std::string> items;
    std::string cur;
    for (char c : body) {
        if (c == ',') {
            items.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    if (!trim(cur).empty()) items.push_back(trim(cur));
    for (const std::string& it : items) {
        if (it.empty()) {
            fail_config("OutOfRange", where(key, line) + ": empty list element");
        }
    }
    return items;
}

bool valid_key(const std::string& key) {
    if (key.empty()) return false;
    for (char c : key) {
        if (!(std::islower((unsigned char)c) || std::isdigit((unsigned char)c) ||
              c == '_' || c == '.')) {
            return false;
        }
    }
    return key.front() != '.' && key.back() != '.';
}

}  // namespace

/* ---- ConfigMap ----------------------------------------------------------------- */

ConfigMap ConfigMap::parse(const std::string& text) {
    ConfigMap map;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            fail_config("OutOfRange",
                        "line " + std::to_string(lineno) + ": expected key = value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string raw = trim(line.substr(eq + 1));
        if (!valid_key(key)) {
            fail_config("UnknownKey", "malformed key " + where(key, lineno));
        }
        if (raw.empty()) {
            fail_config("MissingRequired", where(key, lineno) + ": empty value");
        }
        if (map.entries_.count(key)) {
            fail_config("DuplicateKey", where(key, lineno) + " already set on line " +
                                            std::to_string(map.entries_[key].line));
        }
        map.entries_[key] = Entry{raw, lineno};
    }
    return map;
}

void ConfigMap::set(const std::string& key, const std::string& raw) {
    if (!valid_key(key)) fail_config("UnknownKey", "malformed key '" + key + "'");
    const std::string value = trim(raw);
    if (value.empty()) fail_config("MissingRequired", where(key, 0) + ": empty value");
    entries_[key] = Entry{value, 0};
}

bool ConfigMap::has(const std::string& key) const { return entries_.count(key) != 0; }

const ConfigMap::Entry* ConfigMap::find(const std::string& key) const {
    auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    used_.insert(key);
    return &it->second;
}

double ConfigMap::get_real(const std::string& key, double def, double lo,
                           double hi) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    double v = 0.0;
    if (!parse_real_token(e->raw, v)) {
        fail_config("OutOfRange", where(key, e->line) + ": not a number");
    }
    if (!(v >= lo && v <= hi)) {
        fail_config("OutOfRange", where(key, e->line) + ": " + format_double(v) +
                                      " outside [" + format_double(lo) + ", " +
                                      format_double(hi) + "]");
    }
    return v;
}

double ConfigMap::require_real(const std::string& key, double lo, double hi) const {
    if (!has(key)) fail_config("MissingRequired", "missing required key '" + key + "'");
    return get_real(key, 0.0, lo, hi);
}

int ConfigMap::get_int(const std::string& key, int def, int lo, int hi) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    long long v = 0;
    if (!parse_int_token(e->raw, v)) {
        fail_config("OutOfRange", where(key, e->line) + ": not an integer");
    }
    if (!(v >= lo && v <= hi)) {
        fail_config("OutOfRange", where(key, e->line) + ": " + std::to_string(v) +
                                      " outside [" + std::to_string(lo) + ", " +
                                      std::to_string(hi) + "]");
    }
    return (int)v;
}

bool ConfigMap::get_bool(const std::string& key, bool def) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    if (e->raw == "true" || e->raw == "1") return true;
    if (e->raw == "false" || e->raw == "0") return false;
    fail_config("OutOfRange", where(key, e->line) + ": expected true or false");
}

std::uint64_t ConfigMap::get_seed(const std::string& key, std::uint64_t def) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    char* end = nullptr;
    const std::uint64_t v = std::strtoull(e->raw.c_str(), &end, 10);
    if (end != e->raw.c_str() + e->raw.size()) {
        fail_config("OutOfRange", where(key, e->line) + ": not a non-negative integer");
    }
    return v;
}

std::string ConfigMap::get_enum(const std::string& key, const std::string& def,
                                const std::vector<std::string>& choices) const {
    const Entry* e = find(key);
    std::string v = e == nullptr ? def : e->raw;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        v = v.substr(1, v.size() - 2);
    }
    if (std::find(choices.begin(), choices.end(), v) == choices.end()) {
        std::string opts;
        for (const std::string& c : choices) opts += (opts.empty() ? "" : ", ") + c;
        fail_config("OutOfRange", where(key, e != nullptr ? e->line : 0) + ": '" + v +
                                      "' not one of {" + opts + "}");
    }
    return v;
}

std::string ConfigMap::get_string(const std::string& key, const std::string& def) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    std::string v = e->raw;
    if (v.size() >= 2 && v.front() == '"' && v.back() == '"') {
        v = v.substr(1, v.size() - 2);
    }
    return v;
}

std::vector<double> ConfigMap::get_real_list(const std::string& key,
                                             std::vector<double> def, double lo,
                                             double hi) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    std::vector<double> out;
    for (const std::string& tok : split_list(e->raw, key, e->line)) {
        double v = 0.0;
        if (!parse_real_token(tok, v)) {
            fail_config("OutOfRange", where(key, e->line) + ": '" + tok + "' is not a number");
        }
        if (!(v >= lo && v <= hi)) {
            fail_config("OutOfRange", where(key, e->line) + ": " + format_double(v) +
                                          " outside [" + format_double(lo) + ", " +
                                          format_double(hi) + "]");
        }
        out.push_back(v);
    }
    if (out.empty()) fail_config("OutOfRange", where(key, e->line) + ": empty list");
    return out;
}

std::vector<int> ConfigMap::get_int_list(const std::string& key, std::vector<int> def,
                                         int lo, int hi) const {
    const Entry* e = find(key);
    if (e == nullptr) return def;
    std::vector<int> out;
    for (const std::string& tok : split_list(e->raw, key, e->line)) {
        long long v = 0;
        if (!parse_int_token(tok, v)) {
            fail_config("OutOfRange",
                        where(key, e->line) + ": '" + tok + "' is not an integer");
        }
        if (!(v >= lo && v <= hi)) {
            fail_config("OutOfRange", where(key, e->line) + ": " + std::to_string(v) +
                                          " outside [" + std::to_string(lo) + ", " +
                                          std::to_string(hi) + "]");
        }
        out.push_back((int)v);
    }
    if (out.empty()) fail_config("OutOfRange", where(key, e->line) + ": empty list");
    return out;
}

void ConfigMap::finish() const {
    for (const auto& [key, entry] : entries_) {
        if (!used_.count(key)) {
            fail_config("UnknownKey", "unknown key " + where(key, entry.line));
        }
    }
}

std::string ConfigMap::canonical() const {
    std::string out;
    for (const auto& [key, entry] : entries_) {
        std::string value = entry.raw;
        if (!value.empty() && value.front() == '[') {
            std::string norm = "[";
            bool first = true;
            for (const std::string& tok : split_list(value, key, entry.line)) {
                norm += (first ? "" : ", ") + tok;
                first = false;
            }
            value = norm + "]";
        }
        out += key + " = " + value + "\n";
    }
    return out;
}

std::string ConfigMap::hash_hex() const {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : canonical()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", (unsigned long long)h);
    return buf;
}

/* ---- subcommands ----------------------------------------------------------------- */

Subcommand subcommand_from_name(const std::string& name) {
    if (name == "gp") return Subcommand::Gp;
    if (name == "hartree") return Subcommand::Hartree;
    if (name == "scattering") return Subcommand::Scattering;
    if (name == "rate") return Subcommand::Rate;
    if (name == "chi-beta") return Subcommand::ChiBeta;
    if (name == "free-energy") return Subcommand::FreeEnergy;
    if (name == "diagram") return Subcommand::Diagram;
    if (name == "validate") return Subcommand::Validate;
    fail_config("UnknownKey", "unknown subcommand '" + name + "'");
}

std::string subcommand_name(Subcommand sub) {
    switch (sub) {
        case Subcommand::Gp: return "gp";
        case Subcommand::Hartree: return "hartree";
        case Subcommand::Scattering: return "scattering";
        case Subcommand::Rate: return "rate";
        case Subcommand::ChiBeta: return "chi-beta";
        case Subcommand::FreeEnergy: return "free-energy";
        case Subcommand::Diagram: return "diagram";
        case Subcommand::Validate: return "validate";
    }
    fail_config("UnknownKey", "bad subcommand value");
}

/* ---- typed extraction -------------------------------------------------------------*/

namespace {

void read_grid(const ConfigMap& m, RunConfig& c) {
    c.dim = m.get_int("grid.dim", 2, 1, 3);
    c.half_width = m.get_real("grid.half_width", 6.0, 1e-6, 1e6);
    c.points = m.get_int("grid.points_per_axis", 96, 8, 2048);
    c.boundary = m.get_enum("grid.boundary", "periodic", {"periodic", "dirichlet"}) ==
                         "periodic"
                     ? Boundary::Periodic
                     : Boundary::Dirichlet;
}

void read_trap(const ConfigMap& m, RunConfig& c) {
    const std::string kind =
        m.get_enum("trap.kind", "harmonic", {"harmonic", "box", "quartic"});
    c.trap.kind = kind == "harmonic" ? TrapKind::Harmonic
                  : kind == "box"    ? TrapKind::Box
                                     : TrapKind::Quartic;
    c.trap.params = m.get_real_list("trap.params", {1.0}, 1e-12, 1e12);
}

void read_interaction(const ConfigMap& m, RunConfig& c) {
    const std::string kind = m.get_enum(
        "interaction.kind", "gaussian", {"gaussian", "hard_sphere", "truncated_inverse"});
    c.interaction.kind = kind == "gaussian"      ? InteractionKind::Gaussian
                         : kind == "hard_sphere" ? InteractionKind::HardSphere
                                                 : InteractionKind::TruncatedInverse;
    std::vector<double> def;
    switch (c.interaction.kind) {
        case InteractionKind::Gaussian: def = {0.5, 2.0}; break;
        case InteractionKind::HardSphere: def = {0.5, 100.0}; break;
        case InteractionKind::TruncatedInverse: def = {1.0, 2.0, 100.0, 1.0}; break;
    }
    c.interaction.params = m.get_real_list("interaction.params", def, 0.0, 1e12);
}

void read_gp_opts(const ConfigMap& m, RunConfig& c) {
    c.gp_opts.step = m.get_real("gp.step", 0.0, 0.0, 1e6);
    c.gp_opts.tol = m.get_real("gp.tol", 1e-9, 1e-15, 1.0);
    c.gp_opts.max_iter = m.get_int("gp.max_iter", 50000, 10, 10000000);
}

void read_hartree_opts(const ConfigMap& m, RunConfig& c) {
    c.hartree.tol = m.get_real("hartree.tol", 1e-9, 1e-15, 1.0);
    c.hartree.max_sweeps = m.get_int("hartree.max_sweeps", 200, 1, 100000);
    c.hartree.mixing = m.get_real("hartree.mixing", 0.5, 1e-3, 1.0);
}

void read_rate_opts(const ConfigMap& m, RunConfig& c) {
    c.rate.dt = m.get_real("rate.dt", 0.1, 1e-6, 10.0);
    c.rate.snapshots = m.get_int("rate.snapshots", 128, 4, 4096);
    c.rate.tol = m.get_real("rate.tol", 5e-3, 1e-10, 1.0);
    c.rate.max_iter = m.get_int("rate.max_iter", 400, 1, 1000000);
    c.rate.f_cap = m.get_real("rate.f_cap", 50.0, 1e-3, 1e4);
    c.rate.step0 = m.get_real("rate.step0", 1.0, 1e-6, 1e4);
    c.rate.init = m.get_enum("rate.init", "stationary", {"stationary", "point"}) ==
                          "stationary"
                      ? MgfInit::Stationary
                      : MgfInit::PointCenter;
    c.rate.a = c.a;
}

void read_chi_opts(const ConfigMap& m, RunConfig& c) {
    c.chi.rate = c.rate;
    c.chi.step0 = m.get_real("chi.step0", 0.5, 1e-6, 1e3);
    c.chi.tol = m.get_real("chi.tol", 1e-5, 1e-12, 1.0);
    c.chi.max_outer = m.get_int("chi.max_outer", 150, 1, 100000);
    c.chi.init_from_quartic_minimizer = m.get_bool("chi.from_quartic", true);
}

void read_mc(const ConfigMap& m, RunConfig& c) {
    c.mc.n_samples = m.get_int("mc.samples", 1000, 2, 100000000);
    c.mc.dt = m.get_real("mc.dt", 0.01, 1e-8, 10.0);
    c.mc.stride = m.get_int("mc.stride", 1, 1, 1000000);
    c.seed = m.get_seed("mc.seed", 1);
    c.mc.seed = c.seed;
    c.mc.a = c.a;
    c.mc.sampling = m.get_enum("mc.sampling", "direct", {"direct", "tilted"}) == "direct"
                        ? Sampling::Direct
                        : Sampling::GirsanovTilted;
    c.mc.ess_floor = m.get_real("mc.ess_floor", 0.01, 0.0, 0.999);
}

}  // namespace

RunConfig parse_config(const std::string& text, Subcommand sub) {
    const ConfigMap map = ConfigMap::parse(text);
    RunConfig c;
    c.subcommand = sub;
    c.out_dir = map.get_string("out.dir", ".");
    c.a = map.get_real("a", 1.0, 1e-9, 100.0);

    switch (sub) {
        case Subcommand::Gp:
            read_grid(map, c);
            read_trap(map, c);
            c.alpha = map.get_real("alpha", 0.0, 0.0, 1e6);
            read_gp_opts(map, c);
            break;

        case Subcommand::Hartree:
            read_grid(map, c);
            read_trap(map, c);
            read_interaction(map, c);
            c.n_particles = map.get_int("n", 2, 1, 256);
            c.dirac = map.get_bool("dirac", false);
            read_hartree_opts(map, c);
            break;

        case Subcommand::Scattering:
            c.dim = map.get_int("grid.dim", 3, 2, 3);
            read_interaction(map, c);
            c.sc_r_max = map.get_real("scattering.r_max", 12.0, 1e-6, 1e4);
            c.sc_r = map.get_real("scattering.r", 4.0, 1e-6, 1e4);
            c.sc_r_star = map.get_real("scattering.r_star", 100.0, 1e-6, 1e9);
            c.sc_r_eval = map.get_real("scattering.r_eval", 0.0, 0.0, 1e9);
            c.sc_mesh = map.get_int("scattering.mesh", 2048, 16, 10000000);
            break;

        case Subcommand::Rate:
            read_grid(map, c);
            read_trap(map, c);
            c.alpha = map.get_real("alpha", 0.0, 0.0, 1e6);
            c.beta = map.get_real("beta", 10.0, 1e-6, 1e6);
            c.mu_profile =
                map.get_enum("mu.profile", "gp_ground", {"gp_ground", "gaussian", "flat"});
            c.mu_sigma = map.get_real("mu.sigma", 1.0, 1e-6, 100.0);
            read_gp_opts(map, c);
            read_rate_opts(map, c);
            break;

        case Subcommand::ChiBeta:
            read_grid(map, c);
            read_trap(map, c);
            c.alpha = map.get_real("alpha", 0.0, 0.0, 1e6);
            c.beta = map.get_real("beta", 10.0, 1e-6, 1e6);
            c.betas_given = map.has("betas");
            c.betas = map.get_real_list("betas", {}, 1e-6, 1e6);
            read_rate_opts(map, c);
            read_chi_opts(map, c);
            break;

        case Subcommand::FreeEnergy:
            read_grid(map, c);
            read_trap(map, c);
            read_interaction(map, c);
            c.n_particles = map.get_int("n", 2, 1, 64);
            c.beta = map.get_real("beta", 4.0, 1e-6, 1e6);
            c.eps_given = map.has("eps");
            c.eps_list = map.get_real_list("eps", {}, 1e-9, 100.0);
            read_mc(map, c);
            read_gp_opts(map, c);
            read_hartree_opts(map, c);
            break;

        case Subcommand::Diagram: {
            read_grid(map, c);
            read_trap(map, c);
            read_interaction(map, c);
            read_gp_opts(map, c);
            read_hartree_opts(map, c);
            read_rate_opts(map, c);
            read_chi_opts(map, c);
            read_mc(map, c);
            c.betas = map.get_real_list("betas", {5.0, 10.0, 20.0, 40.0}, 1e-6, 1e6);
            c.particle_counts = map.get_int_list("ns", {2, 4, 8, 16}, 1, 4096);
            c.diagram.dim = c.dim;
            c.diagram.half_width = c.half_width;
            c.diagram.points_per_axis = c.points;
            c.diagram.boundary = c.boundary;
            c.diagram.trap = c.trap;
            c.diagram.interaction = c.interaction;
            c.diagram.betas = c.betas;
            c.diagram.particle_counts = c.particle_counts;
            const std::string variant = map.get_enum(
                "diagram.alpha_variant", "coupling", {"coupling", "born", "born_measure"});
            c.diagram.alpha_variant = variant == "coupling" ? AlphaVariant::Coupling
                                      : variant == "born"   ? AlphaVariant::Born
                                                            : AlphaVariant::BornMeasure;
            c.diagram.model = map.get_enum("diagram.model", "inverse_x",
                                           {"inverse_x", "inverse_x_sq"}) == "inverse_x"
                                  ? ExtrapModel::InverseX
                                  : ExtrapModel::InverseXSq;
            c.diagram.tolerance = map.get_real("diagram.tolerance", 0.05, 1e-6, 1.0);
            c.diagram.chi = c.chi;
            c.diagram.hartree = c.hartree;
            c.diagram.gp = c.gp_opts;
            c.diagram.with_sampling_corner = map.get_bool("diagram.corner", false);
            c.diagram.corner_n = map.get_int("diagram.corner_n", 2, 1, 64);
            c.diagram.corner_beta = map.get_real("diagram.corner_beta", 4.0, 1e-6, 1e6);
            c.diagram.corner_mc = c.mc;
            break;
        }

        case Subcommand::Validate:
            c.dim = map.get_int("grid.dim", 3, 1, 3);
            read_interaction(map, c);
            break;
    }

    map.finish();
    c.canonical_text = map.canonical();
    c.config_hash_hex = map.hash_hex();
    return c;
}

/* ---- manifest ---------------------------------------------------------------------*/

std::string manifest_json(const std::string& subcommand, const ConfigMap& map,
                          const std::vector<std::string>& outputs) {
    nlohmann::json j;
    j["tool"] = "gplab";
    j["format"] = 1;
    j["subcommand"] = subcommand;
    j["config_hash"] = map.hash_hex();
    j["config"] = map.canonical();
    j["outputs"] = outputs;
    return j.dump(2) + "\n";
}

ManifestData read_manifest(const std::string& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        fail_config("CorruptManifest", path + ": " + e.what());
    }
    if (!j.contains("subcommand") || !j.contains("config")) {
        fail_config("CorruptManifest", path + ": missing subcommand or config field");
    }
    ManifestData md;
    md.subcommand = j["subcommand"].get<std::string>();
    md.config_text = j["config"].get<std::string>();
    if (j.contains("outputs")) {
        for (const auto& o : j["outputs"]) md.outputs.push_back(o.get<std::string>());
    }
    return md;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail_config("IoError", "cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("IoError", "cannot write " + path);
    out << content;
    if (!out) fail("IoError", "short write to " + path);
}

}  // namespace gplab
