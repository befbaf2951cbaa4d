#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gplab/config.hpp"
#include "gplab/errors.hpp"
#include "gplab/scattering.hpp"

namespace {

using nlohmann::json;
using namespace gplab;

constexpr const char* kVersion = "gplab 1.0.0";

/* JSON-safe real: non-finite values become strings so they survive dump/parse. */
json jreal(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

struct OutputSet {
    std::string dir;
    std::vector<std::string> files;

    std::string path(const std::string& name) const { return dir + "/" + name; }
    void add(const std::string& name, const std::string& content) {
        write_text_file(path(name), content);
        files.push_back(name);
    }
};

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (std::size_t i = 0; i < header.size(); ++i) {
        out += (i ? "," : "") + header[i];
    }
    out += "\n";
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out += (i ? "," : "") + fmt17(row[i]);
        }
        out += "\n";
    }
    return out;
}

/* values of one or more fields along the first axis through the box center */
std::string center_line_csv(const Grid& grid, const std::vector<std::string>& names,
                            const std::vector<const GridField*>& fields) {
    std::vector<std::string> header = {"x"};
    header.insert(header.end(), names.begin(), names.end());
    std::vector<std::vector<double>> rows;
    std::array<int, 3> id{0, 0, 0};
    for (int k = 1; k < grid.dim; ++k) id[k] = grid.points_per_axis / 2;
    for (int i = 0; i < grid.points_per_axis; ++i) {
        id[0] = i;
        const std::int64_t node = grid.ravel(id);
        std::vector<double> row = {grid.coord(i)};
        for (const GridField* f : fields) row.push_back((*f)[node]);
        rows.push_back(std::move(row));
    }
    return csv_table(header, rows);
}

GridField density_from_profile(const Grid& grid, const RunConfig& c, const TrapField& trap) {
    if (c.mu_profile == "gp_ground") {
        GpSolution s = gp_minimize(grid, c.trap, c.alpha, c.gp_opts);
        GridField mu = make_field(grid);
        for (std::int64_t i = 0; i < grid.node_count; ++i) mu[i] = s.phi[i] * s.phi[i];
        return mu;
    }
    GridField mu = make_field(grid);
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        if (trap.any_infinite && trap.infinite[i]) continue;
        if (c.mu_profile == "flat") {
            mu[i] = 1.0;
        } else {
            double r2 = 0.0;
            double xs[3] = {0.0, 0.0, 0.0};
            grid.node_coords(i, xs);
            for (int k = 0; k < grid.dim; ++k) r2 += xs[k] * xs[k];
            mu[i] = std::exp(-r2 / (2.0 * c.mu_sigma * c.mu_sigma));
        }
    }
    if (grid.boundary == Boundary::Dirichlet) zero_boundary(mu);
    const double mass = integrate(mu);
    require(mass > 0.0, "NotNormalizable", "target density has zero mass");
    for (double& v : mu.values) v /= mass;
    return mu;
}

/* ---- subcommand runners ------------------------------------------------------------*/

void run_gp(const RunConfig& c, OutputSet& out, json& result) {
    const Grid grid = build_grid(c.dim, c.half_width, c.points, c.boundary);
    const GpSolution s = gp_minimize(grid, c.trap, c.alpha, c.gp_opts);
    result["energy"] = jreal(s.energy);
    result["alpha"] = jreal(s.alpha);
    result["iterations"] = s.iterations;
    result["residual"] = jreal(s.residual);
    result["lambda"] = jreal(s.lambda);
    result["converged"] = s.converged;
    out.add("gp_profile.csv", center_line_csv(grid, {"phi"}, {&s.phi}));
}

void run_hartree(const RunConfig& c, OutputSet& out, json& result) {
    const Grid grid = build_grid(c.dim, c.half_width, c.points, c.boundary);
    const HartreeSolution h =
        c.dirac ? dirac_hartree_minimize(grid, c.trap, c.n_particles, c.hartree)
                : hartree_minimize(grid, c.trap, c.interaction, c.n_particles, c.hartree);
    result["energy"] = jreal(h.energy);
    result["energy_per_particle"] = jreal(h.energy / h.n_particles);
    result["n"] = h.n_particles;
    result["scf_sweeps"] = h.scf_sweeps;
    result["symmetric"] = h.symmetric;
    result["converged"] = h.converged;
    result["dirac"] = c.dirac;
    std::vector<std::vector<double>> rows;
    for (std::size_t i = 0; i < h.energy_trace.size(); ++i) {
        rows.push_back({(double)i, h.energy_trace[i]});
    }
    out.add("hartree_trace.csv", csv_table({"sweep", "energy"}, rows));
    out.add("hartree_orbital.csv",
            center_line_csv(grid, {"h"}, {&h.state.orbitals.front()}));
}

void run_scattering(const RunConfig& c, OutputSet& out, json& result) {
    (void)out;
    ScatteringResult r;
    if (c.dim == 3) {
        r = scattering_length_3d(c.interaction, c.sc_r_max, c.sc_mesh);
    } else {
        r = scattering_length_2d(c.interaction, c.sc_r, c.sc_r_star, c.sc_mesh,
                                 c.sc_r_eval);
    }
    result["alpha_tilde"] = jreal(r.alpha_tilde);
    result["born"] = jreal(r.born);
    result["born_measure"] = jreal(r.born_measure);
    result["coupling"] = jreal(mean_field_coupling(c.interaction, c.dim));
    result["dim"] = c.dim;
    result["mesh"] = r.ode_mesh;
    switch (r.method) {
        case ScatteringMethod::Ode3d: result["method"] = "ode_3d"; break;
        case ScatteringMethod::Shooting2d: result["method"] = "shooting_2d"; break;
        case ScatteringMethod::HardSphereClosedForm:
            result["method"] = "hard_sphere_closed_form";
            break;
    }
}

void run_rate(const RunConfig& c, OutputSet& out, json& result) {
    const Grid grid = build_grid(c.dim, c.half_width, c.points, c.boundary);
    const TrapField trap = eval_trap(c.trap, grid);
    const GridField mu = density_from_profile(grid, c, trap);
    const RateResult r = rate_J(grid, mu, c.beta, c.rate);
    result["value"] = jreal(r.value);
    result["beta"] = jreal(c.beta);
    result["grad_l1"] = jreal(r.grad_l1);
    result["iterations"] = r.iterations;
    result["cap_active"] = r.cap_active;
    result["converged"] = r.converged;
    out.add("rate_profile.csv",
            center_line_csv(grid, {"mu", "occupation", "witness_f"},
                            {&mu, &r.occupation, &r.f}));
}

void run_chi_beta(const RunConfig& c, OutputSet& out, json& result) {
    const Grid grid = build_grid(c.dim, c.half_width, c.points, c.boundary);
    const TrapField trap = eval_trap(c.trap, grid);
    if (c.betas_given) {
        std::vector<std::vector<double>> rows;
        std::vector<double> xs, ys;
        for (double beta : c.betas) {
            const ChiBetaResult r = chi_otimes_beta(grid, trap, c.alpha, beta, c.chi);
            xs.push_back(beta);
            ys.push_back(r.value);
            rows.push_back({beta, r.value, r.rate_value});
        }
        result["betas"] = xs;
        result["values"] = ys;
        if (xs.size() >= 3) {
            const ExtrapResult ex = extrapolate(xs, ys, ExtrapModel::InverseX);
            result["limit"] = jreal(ex.limit);
            result["residual"] = jreal(ex.residual);
        }
        out.add("chi_beta_sweep.csv", csv_table({"beta", "value", "rate_value"}, rows));
    } else {
        const ChiBetaResult r = chi_otimes_beta(grid, trap, c.alpha, c.beta, c.chi);
        result["value"] = jreal(r.value);
        result["rate_value"] = jreal(r.rate_value);
        result["beta"] = jreal(c.beta);
        result["alpha"] = jreal(c.alpha);
        result["outer_iterations"] = r.outer_iterations;
        result["converged"] = r.converged;
        out.add("chi_beta_density.csv",
                center_line_csv(grid, {"mu", "witness_f"}, {&r.density, &r.witness_f}));
    }
}

void run_free_energy(const RunConfig& c, OutputSet& out, json& result) {
    EnsembleOptions mc = c.mc;
    Grid grid;
    HartreeSolution tilt_source;
    if (mc.sampling == Sampling::GirsanovTilted) {
        grid = build_grid(c.dim, c.half_width, c.points, c.boundary);
        tilt_source =
            c.eps_given
                ? dirac_hartree_minimize(grid, c.trap, c.n_particles, c.hartree)
                : hartree_minimize(grid, c.trap, c.interaction, c.n_particles, c.hartree);
        mc.tilt_grid = &grid;
        mc.tilt_phi = &tilt_source.state.orbitals.front();
    }
    if (c.eps_given) {
        const MollifiedEstimate g =
            estimate_G(c.dim, c.trap, c.n_particles, c.beta, c.eps_list, mc);
        result["value"] = jreal(g.value);
        result["std_err"] = jreal(g.std_err);
        result["epsilons"] = g.epsilons;
        json rows = json::array();
        std::vector<std::vector<double>> csv;
        for (std::size_t i = 0; i < g.at_eps.size(); ++i) {
            const FreeEnergyEstimate& e = g.at_eps[i];
            rows.push_back({{"eps", jreal(g.epsilons[i])},
                            {"value", jreal(e.value)},
                            {"std_err", jreal(e.std_err)},
                            {"ess", jreal(e.ess)},
                            {"stride", e.stride}});
            csv.push_back({g.epsilons[i], e.value, e.std_err, e.ess, (double)e.stride});
        }
        result["at_eps"] = rows;
        out.add("free_energy_eps.csv",
                csv_table({"eps", "value", "std_err", "ess", "stride"}, csv));
    } else {
        const FreeEnergyEstimate e =
            estimate_F(c.dim, c.trap, c.interaction, c.n_particles, c.beta, mc);
        result["value"] = jreal(e.value);
        result["std_err"] = jreal(e.std_err);
        result["log_mean"] = jreal(e.log_mean);
        result["ess"] = jreal(e.ess);
        result["steps"] = e.steps;
        result["stride"] = e.stride;
        result["tilted"] = e.tilted;
    }
    result["n"] = c.n_particles;
    result["beta"] = jreal(c.beta);
    result["samples"] = c.mc.n_samples;
}

void run_diagram_cmd(const RunConfig& c, OutputSet& out, json& result) {
    const DiagramReport rep = run_diagram(c.diagram);
    result["chi_gp"] = jreal(rep.chi_gp);
    result["alpha_used"] = jreal(rep.alpha_used);
    result["alpha_coupling"] = jreal(rep.alpha_coupling);
    result["alpha_born"] = jreal(rep.alpha_born);
    result["alpha_born_measure"] = jreal(rep.alpha_born_measure);
    result["tolerance"] = jreal(rep.tolerance);
    auto edge_json = [](const DiagramEdge& e) {
        json j;
        j["xs"] = e.xs;
        j["values"] = e.values;
        j["limit"] = jreal(e.limit);
        j["residual"] = jreal(e.residual);
        j["rel_err"] = jreal(e.rel_err);
        j["verdict"] = e.verdict;
        j["ran"] = e.ran;
        return j;
    };
    result["path_a"] = edge_json(rep.path_a);
    result["path_b"] = edge_json(rep.path_b);
    if (rep.corner.ran) {
        result["corner"] = {{"n", rep.corner.n_particles},
                            {"beta", jreal(rep.corner.beta)},
                            {"estimate", jreal(rep.corner.estimate)},
                            {"std_err", jreal(rep.corner.std_err)},
                            {"reference", jreal(rep.corner.reference)}};
    }
    result["mismatch"] = jreal(rep.mismatch);
    result["commute_ok"] = rep.commute_ok;
    result["partial"] = rep.partial;
    result["notes"] = rep.notes;

    std::vector<std::vector<double>> rows_a, rows_b;
    for (std::size_t i = 0; i < rep.path_a.xs.size() && i < rep.path_a.values.size(); ++i) {
        rows_a.push_back({rep.path_a.xs[i], rep.path_a.values[i]});
    }
    for (std::size_t i = 0; i < rep.path_b.xs.size() && i < rep.path_b.values.size(); ++i) {
        rows_b.push_back({rep.path_b.xs[i], rep.path_b.values[i]});
    }
    out.add("diagram_path_a.csv", csv_table({"beta", "chi_beta"}, rows_a));
    out.add("diagram_path_b.csv", csv_table({"n", "energy_per_particle"}, rows_b));
}

void run_validate(const RunConfig& c, OutputSet& out, json& result) {
    (void)out;
    const AssumptionReport rep = validate_assumptions(c.interaction, c.dim);
    result["all_pass"] = rep.all_pass;
    json checks = json::array();
    for (const AssumptionCheck& ch : rep.checks) {
        checks.push_back(
            {{"name", ch.name}, {"finite", ch.finite}, {"value", jreal(ch.value)}});
    }
    result["checks"] = checks;
    result["dim"] = c.dim;
}

/* ---- dispatch ----------------------------------------------------------------------*/

int run(Subcommand sub, const std::string& config_text,
        const std::vector<std::string>& overrides, const std::string& out_override) {
    ConfigMap map = ConfigMap::parse(config_text);
    for (const std::string& ov : overrides) {
        const std::size_t eq = ov.find('=');
        if (eq == std::string::npos) {
            fail_config("OutOfRange", "override '" + ov + "' is not key=value");
        }
        map.set(ov.substr(0, eq), ov.substr(eq + 1));
    }
    const std::string merged = map.canonical();
    RunConfig c = parse_config(merged, sub);
    if (!out_override.empty()) c.out_dir = out_override;

    std::error_code ec;
    std::filesystem::create_directories(c.out_dir, ec);
    if (ec) fail("IoError", "cannot create output directory " + c.out_dir);

    OutputSet out;
    out.dir = c.out_dir;
    json result;
    result["subcommand"] = subcommand_name(sub);
    result["config_hash"] = c.config_hash_hex;

    switch (sub) {
        case Subcommand::Gp: run_gp(c, out, result); break;
        case Subcommand::Hartree: run_hartree(c, out, result); break;
        case Subcommand::Scattering: run_scattering(c, out, result); break;
        case Subcommand::Rate: run_rate(c, out, result); break;
        case Subcommand::ChiBeta: run_chi_beta(c, out, result); break;
        case Subcommand::FreeEnergy: run_free_energy(c, out, result); break;
        case Subcommand::Diagram: run_diagram_cmd(c, out, result); break;
        case Subcommand::Validate: run_validate(c, out, result); break;
    }

    std::string result_name = subcommand_name(sub);
    for (char& ch : result_name) {
        if (ch == '-') ch = '_';
    }
    result_name += "_result.json";
    out.add(result_name, result.dump(2) + "\n");

    const ConfigMap merged_map = ConfigMap::parse(merged);
    write_text_file(out.path("manifest.json"),
                    manifest_json(subcommand_name(sub), merged_map, out.files));
    std::cout << result.dump(2) << std::endl;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"variational and path-sampling toolkit for trapped interacting diffusions"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(0, 1);

    std::string manifest_path;
    app.add_option("--from-manifest", manifest_path,
                   "re-run a recorded manifest; outputs are reproduced bit-identically");
    std::string top_out;
    app.add_option("--out", top_out, "output directory (default from config or '.')");

    struct SubArgs {
        CLI::App* cmd = nullptr;
        std::string config_path;
        std::vector<std::string> overrides;
        std::string out_dir;
    };
    const std::vector<std::pair<std::string, std::string>> subs = {
        {"gp", "minimize the quartic ground-state functional"},
        {"hartree", "minimize the product-state energy (kernel or point pair term)"},
        {"scattering", "scattering length and first-order couplings of a pair kernel"},
        {"rate", "occupation-rate functional of a target density"},
        {"chi-beta", "finite-temperature variational energy (optionally a beta sweep)"},
        {"free-energy", "Monte Carlo free-energy estimate (kernel or mollified)"},
        {"diagram", "two-route consistency experiment"},
        {"validate", "integrability checks for a pair kernel"},
    };
    std::vector<SubArgs> args(subs.size());
    for (std::size_t i = 0; i < subs.size(); ++i) {
        args[i].cmd = app.add_subcommand(subs[i].first, subs[i].second);
        args[i].cmd->add_option("--config", args[i].config_path, "configuration file");
        args[i].cmd->add_option("--override", args[i].overrides,
                                "key=value overrides applied after the file");
        args[i].cmd->add_option("--out", args[i].out_dir, "output directory");
    }

    try {
        app.parse(argc, argv);

        if (!manifest_path.empty()) {
            const ManifestData md = read_manifest(manifest_path);
            return run(subcommand_from_name(md.subcommand), md.config_text, {}, top_out);
        }
        for (std::size_t i = 0; i < subs.size(); ++i) {
            if (args[i].cmd->parsed()) {
                const std::string text = args[i].config_path.empty()
                                             ? std::string()
                                             : gplab::read_text_file(args[i].config_path);
                const std::string out_dir =
                    !args[i].out_dir.empty() ? args[i].out_dir : top_out;
                return run(gplab::subcommand_from_name(subs[i].first), text,
                           args[i].overrides, out_dir);
            }
        }
        std::cerr << app.help() << std::flush;
        return 2;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return app.exit(e);
        }
        std::cerr << "config error [BadArguments]: " << e.what() << std::endl;
        return 2;
    } catch (const gplab::ConfigError& e) {
        std::cerr << "config error [" << e.name() << "]: " << e.what() << std::endl;
        return 2;
    } catch (const gplab::Error& e) {
        std::cerr << "error [" << e.name() << "]: " << e.what() << std::endl;
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error [Internal]: " << e.what() << std::endl;
        return 3;
    }
}
