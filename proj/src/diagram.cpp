#include "gplab/diagram.hpp"

#include <cmath>

#include "gplab/errors.hpp"
#include "gplab/scattering.hpp"

namespace gplab {

ExtrapResult extrapolate(const std::vector<double>& xs, const std::vector<double>& ys,
                         ExtrapModel model) {
    const int n = (int)xs.size();
    if (n < 3) fail("TooFewPoints", "extrapolation needs at least three samples");
    require(ys.size() == xs.size(), "ShapeMismatch", "xs and ys differ in length");
    for (int i = 0; i < n; ++i) {
        require(xs[i] > 0.0, "OutOfRange", "abscissas must be positive");
        require(i == 0 || xs[i] > xs[i - 1], "OutOfRange",
                "abscissas must be strictly increasing");
    }
    double s01 = 0.0, s11 = 0.0, b0 = 0.0, b1 = 0.0;
    std::vector<double> us(n);
    for (int i = 0; i < n; ++i) {
        const double u = model == ExtrapModel::InverseX ? 1.0 / xs[i]
                                                        : 1.0 / (xs[i] * xs[i]);
        us[i] = u;
        s01 += u;
        s11 += u * u;
        b0 += ys[i];
        b1 += u * ys[i];
    }
    const double det = n * s11 - s01 * s01;
    require(det > 1e-30, "OutOfRange", "degenerate abscissas");
    ExtrapResult res;
    res.limit = (s11 * b0 - s01 * b1) / det;
    res.coefficient = (n * b1 - s01 * b0) / det;
    double ss = 0.0;
    for (int i = 0; i < n; ++i) {
        const double r = ys[i] - res.limit - res.coefficient * us[i];
        ss += r * r;
    }
    res.residual = std::sqrt(ss / n);
    return res;
}

namespace {

double rel_err(double value, double reference) {
    const double scale = std::max(std::abs(reference), 1e-300);
    return std::abs(value - reference) / scale;
}

}  // namespace

DiagramReport run_diagram(const DiagramConfig& config) {
    DiagramReport rep;
    rep.tolerance = config.tolerance;
    const Grid grid = build_grid(config.dim, config.half_width, config.points_per_axis,
                                 config.boundary);
    const TrapField trap = eval_trap(config.trap, grid);

    rep.alpha_coupling = mean_field_coupling(config.interaction, config.dim);
    rep.alpha_born = born_alpha(config.interaction);
    rep.alpha_born_measure = born_alpha_measure(config.interaction, config.dim);
    switch (config.alpha_variant) {
        case AlphaVariant::Coupling: rep.alpha_used = rep.alpha_coupling; break;
        case AlphaVariant::Born: rep.alpha_used = rep.alpha_born; break;
        case AlphaVariant::BornMeasure: rep.alpha_used = rep.alpha_born_measure; break;
    }
    require(std::isfinite(rep.alpha_used) && rep.alpha_used >= 0.0, "OutOfRange",
            "selected coupling variant is not a finite non-negative number");

    const GpSolution gp = gp_minimize(grid, config.trap, rep.alpha_used, config.gp);
    rep.chi_gp = gp.energy;

    // route A: finite-temperature variational energies, beta -> infinity
    try {
        rep.path_a.xs.assign(config.betas.begin(), config.betas.end());
        ChiBetaOptions chi = config.chi;
        GridField carry_density, carry_witness;
        for (double beta : config.betas) {
            ChiBetaResult r = chi_otimes_beta(grid, trap, rep.alpha_used, beta, chi);
            rep.path_a.values.push_back(r.value);
            // warm-start the next sweep point from this minimizer
            carry_density = std::move(r.density);
            carry_witness = std::move(r.witness_f);
            chi.init_density = &carry_density;
            chi.init_witness = &carry_witness;
        }
        ExtrapResult ex = extrapolate(rep.path_a.xs, rep.path_a.values, config.model);
        rep.path_a.limit = ex.limit;
        rep.path_a.residual = ex.residual;
        rep.path_a.rel_err = rel_err(ex.limit, rep.chi_gp);
        rep.path_a.verdict = rep.path_a.rel_err <= config.tolerance;
        rep.path_a.ran = true;
    } catch (const Error& e) {
        rep.partial = true;
        rep.notes.push_back(std::string("beta sweep failed: ") + e.what());
    }

    // route B: product-state energies per particle, N -> infinity
    try {
        for (int n : config.particle_counts) {
            HartreeSolution h =
                hartree_minimize(grid, config.trap, config.interaction, n, config.hartree);
            rep.path_b.xs.push_back((double)n);
            rep.path_b.values.push_back(h.energy / n);
        }
        ExtrapResult ex = extrapolate(rep.path_b.xs, rep.path_b.values, config.model);
        rep.path_b.limit = ex.limit;
        rep.path_b.residual = ex.residual;
        rep.path_b.rel_err = rel_err(ex.limit, rep.chi_gp);
        rep.path_b.verdict = rep.path_b.rel_err <= config.tolerance;
        rep.path_b.ran = true;
    } catch (const Error& e) {
        rep.partial = true;
        rep.notes.push_back(std::string("particle sweep failed: ") + e.what());
    }

    if (config.with_sampling_corner) {
        try {
            rep.corner.n_particles = config.corner_n;
            rep.corner.beta = config.corner_beta;
            HartreeSolution h = hartree_minimize(grid, config.trap, config.interaction,
                                                 config.corner_n, config.hartree);
            rep.corner.reference = h.energy / config.corner_n;
            EnsembleOptions mc = config.corner_mc;
            if (mc.sampling == Sampling::GirsanovTilted && mc.tilt_phi == nullptr) {
                mc.tilt_grid = &grid;
                mc.tilt_phi = &h.state.orbitals.front();
            }
            FreeEnergyEstimate est =
                estimate_F(config.dim, config.trap, config.interaction, config.corner_n,
                           config.corner_beta, mc);
            rep.corner.estimate = est.value;
            rep.corner.std_err = est.std_err;
            rep.corner.ran = true;
        } catch (const Error& e) {
            rep.partial = true;
            rep.notes.push_back(std::string("sampling corner failed: ") + e.what());
        }
    }

    if (rep.path_a.ran && rep.path_b.ran) {
        rep.mismatch = std::abs(rep.path_a.limit - rep.path_b.limit);
        rep.commute_ok = rep.path_a.verdict && rep.path_b.verdict &&
                         rep.mismatch <= 2.0 * config.tolerance *
                                             std::max(std::abs(rep.chi_gp), 1e-300);
    }
    return rep;
}

}  // namespace gplab
