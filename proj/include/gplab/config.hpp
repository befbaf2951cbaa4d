#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "gplab/diagram.hpp"
#include "gplab/dv_rate.hpp"
#include "gplab/free_energy.hpp"
#include "gplab/gp.hpp"
#include "gplab/grid.hpp"
#include "gplab/hartree.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Flat key-value run configuration:
 *
 *   # comment
 *   grid.dim = 2
 *   grid.boundary = periodic
 *   trap.params = [1.0]
 *
 * Keys are dotted lowercase words; values are numbers, booleans, bare or
 * quoted strings, or bracketed comma-separated lists.  Every numeric field is
 * range-checked at parse time; keys that no getter consumed are rejected
 * (UnknownKey), so typos cannot silently fall back to defaults.  All errors
 * carry the key and line number.
 */

class ConfigMap {
public:
    static ConfigMap parse(const std::string& text);

    /* Insert or replace a key (command-line override; line 0). */
    void set(const std::string& key, const std::string& raw);

    bool has(const std::string& key) const;

    /* Typed getters: the `get_*` forms fall back to a default, the
     * `require_*` forms raise MissingRequired.  All mark the key consumed and
     * range-check the parsed value (OutOfRange). */
    double get_real(const std::string& key, double def, double lo, double hi) const;
    double require_real(const std::string& key, double lo, double hi) const;
    int get_int(const std::string& key, int def, int lo, int hi) const;
    bool get_bool(const std::string& key, bool def) const;
    std::uint64_t get_seed(const std::string& key, std::uint64_t def) const;
    std::string get_enum(const std::string& key, const std::string& def,
                         const std::vector<std::string>& choices) const;
    std::string get_string(const std::string& key, const std::string& def) const;
    std::vector<double> get_real_list(const std::string& key, std::vector<double> def,
                                      double lo, double hi) const;
    std::vector<int> get_int_list(const std::string& key, std::vector<int> def, int lo,
                                  int hi) const;

    /* UnknownKey if any stored key was never consumed. */
    void finish() const;

    /* Sorted "key = value" lines with normalized spacing. */
    std::string canonical() const;

    /* FNV-1a 64-bit hash of canonical(), as fixed-width hex. */
    std::string hash_hex() const;

private:
    struct Entry {
        std::string raw;
        int line = 0;
    };
    std::map<std::string, Entry> entries_;
    mutable std::set<std::string> used_;

    const Entry* find(const std::string& key) const;
};

enum class Subcommand { Gp, Hartree, Scattering, Rate, ChiBeta, FreeEnergy, Diagram, Validate };

Subcommand subcommand_from_name(const std::string& name);
std::string subcommand_name(Subcommand sub);

/* Fully validated run description for one subcommand. */
struct RunConfig {
    Subcommand subcommand = Subcommand::Gp;

    int dim = 2;
    double half_width = 6.0;
    int points = 96;
    Boundary boundary = Boundary::Periodic;
    double a = 1.0;

    TrapSpec trap{TrapKind::Harmonic, {1.0}};
    InteractionSpec interaction{InteractionKind::Gaussian, {0.5, 2.0}};

    double alpha = 0.0;
    double beta = 10.0;
    std::vector<double> betas;
    bool betas_given = false;
    int n_particles = 2;
    std::vector<int> particle_counts;
    std::vector<double> eps_list;
    bool eps_given = false;
    bool dirac = false;  // hartree: point pair term instead of a kernel

    std::string mu_profile = "gp_ground";  // rate subcommand target density
    double mu_sigma = 1.0;

    MinimizeOptions gp_opts;
    HartreeOptions hartree;
    RateOptions rate;
    ChiBetaOptions chi;
    EnsembleOptions mc;

    double sc_r_max = 12.0;  // 3d ODE outer radius
    double sc_r = 4.0;       // 2d kernel support radius
    double sc_r_star = 100.0;
    double sc_r_eval = 0.0;  // 0: midpoint
    int sc_mesh = 2048;

    DiagramConfig diagram;

    std::string out_dir = ".";

    std::string canonical_text;
    std::string config_hash_hex;
    std::uint64_t seed = 1;
};

/* Parse + validate the configuration text for one subcommand; rejects keys
 * the subcommand does not use. */
RunConfig parse_config(const std::string& text, Subcommand sub);

/* ---- run manifest ----------------------------------------------------------
 * Every CLI run writes manifest.json: tool, subcommand, config hash, the full
 * canonical configuration text, and the list of output files.  Re-running
 * from a manifest reproduces all outputs bit-identically (all randomness
 * flows from the seed recorded in the configuration).
 */

struct ManifestData {
    std::string subcommand;
    std::string config_text;
    std::vector<std::string> outputs;
};

std::string manifest_json(const std::string& subcommand, const ConfigMap& map,
                          const std::vector<std::string>& outputs);

ManifestData read_manifest(const std::string& path);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace gplab
