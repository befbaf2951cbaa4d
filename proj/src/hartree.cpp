#include "gplab/hartree.hpp"

#include <algorithm>
#include <cmath>

#include "gplab/errors.hpp"

namespace gplab {

namespace {

/* Pair interaction used in the product energy: none (free particles), the
 * point kernel <h_i^2, h_j^2>, or a radial kernel via convolution. */
enum class PairMode { None, Point, Kernel };

bool all_orbitals_equal(const ProductState& s) {
    for (std::size_t i = 1; i < s.orbitals.size(); ++i) {
        if (s.orbitals[i].values != s.orbitals[0].values) return false;
    }
    return true;
}

GridField squared(const Grid& grid, const GridField& h) {
    GridField q = make_field(grid);
    for (std::int64_t i = 0; i < grid.node_count; ++i) q[i] = h[i] * h[i];
    return q;
}

GridField pair_response(const Grid& grid, const GridField& h, PairMode mode,
                        const InteractionSpec* kernel) {
    GridField q = squared(grid, h);
    if (mode == PairMode::Point) return q;
    return convolve_density(grid, *kernel, q);
}

/* Permutation-invariant sum: accumulate addends in ascending order, so
 * relabeling orbitals gives the bit-identical result. */
double sorted_sum(std::vector<double>& terms) {
    std::sort(terms.begin(), terms.end());
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
}

double product_energy(const Grid& grid, const ProductState& state, const TrapField& trap,
                      PairMode mode, const InteractionSpec* kernel) {
    const int n = (int)state.orbitals.size();
    require(n >= 1, "InvalidN", "product state needs at least one orbital");
    for (const auto& h : state.orbitals) {
        require((std::int64_t)h.values.size() == grid.node_count, "ShapeMismatch",
                "orbital does not match the grid");
    }

    std::vector<double> terms;
    terms.reserve(n + n * (n - 1) / 2);
    for (const auto& h : state.orbitals) {
        double single = gradient_sq_norm(h);
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            single += trap.values.values[i] * h[i] * h[i] * grid.node_weight(i);
        }
        terms.push_back(single);
    }

    if (mode != PairMode::None && n > 1) {
        if (all_orbitals_equal(state)) {
            GridField resp = pair_response(grid, state.orbitals[0], mode, kernel);
            GridField q = squared(grid, state.orbitals[0]);
            const double pair = inner(q, resp);
            for (int c = 0; c < n * (n - 1) / 2; ++c) terms.push_back(pair);
        } else {
            std::vector<GridField> resp, dens;
            resp.reserve(n);
            dens.reserve(n);
            for (const auto& h : state.orbitals) {
                resp.push_back(pair_response(grid, h, mode, kernel));
                dens.push_back(squared(grid, h));
            }
            for (int i = 0; i < n; ++i) {
                for (int j = i + 1; j < n; ++j) {
                    // Symmetrized so the value is invariant (bitwise) under
                    // orbital relabeling: the two orientations swap and IEEE
                    // addition is commutative.
                    terms.push_back(0.5 * (inner(dens[i], resp[j]) + inner(dens[j], resp[i])));
                }
            }
        }
    }
    return sorted_sum(terms);
}

HartreeSolution scf_minimize(const Grid& grid, const TrapSpec& trap_spec, PairMode mode,
                             const InteractionSpec* kernel, int n_particles,
                             const HartreeOptions& opts) {
    require(n_particles >= 1, "InvalidN", "particle count must be positive");
    require(opts.mixing > 0.0 && opts.mixing <= 1.0, "OutOfRange", "mixing must be in (0,1]");
    const TrapField trap = eval_trap(trap_spec, grid);
    const bool pair_active = mode != PairMode::None && n_particles > 1;

    HartreeSolution sol;
    sol.n_particles = n_particles;
    if (mode == PairMode::Kernel) sol.kernel = *kernel;

    GridField init = default_initial_profile(grid, trap);
    sol.state.orbitals.assign(n_particles, init);

    double energy = product_energy(grid, sol.state, trap, mode, kernel);
    sol.energy_trace.push_back(energy);
    double mixing = opts.mixing;

    int sweep = 0;
    bool converged = false;
    while (sweep < opts.max_sweeps) {
        ++sweep;
        // Mean fields from the pre-sweep snapshot; updating every orbital from
        // the same snapshot preserves exchange symmetry of the state exactly.
        const bool sym = all_orbitals_equal(sol.state);
        std::vector<GridField> resp;
        GridField resp_total = make_field(grid);
        if (pair_active) {
            if (sym) {
                resp.push_back(pair_response(grid, sol.state.orbitals[0], mode, kernel));
            } else {
                for (const auto& h : sol.state.orbitals) {
                    resp.push_back(pair_response(grid, h, mode, kernel));
                    for (std::int64_t i = 0; i < grid.node_count; ++i)
                        resp_total[i] += resp.back()[i];
                }
            }
        }

        ProductState trial = sol.state;
        TrapField mean_field = trap;  // shares the inadmissible-node mask
        for (int i = 0; i < n_particles; ++i) {
            if (sym && i > 0) {
                trial.orbitals[i] = trial.orbitals[0];
                continue;
            }
            for (std::int64_t k = 0; k < grid.node_count; ++k) {
                double u = trap.values.values[k];
                if (pair_active) {
                    u += sym ? (n_particles - 1) * resp[0][k] : resp_total[k] - resp[i][k];
                }
                mean_field.values.values[k] = u;
            }
            MinimizeResult inner_res =
                minimize_energy(grid, mean_field, 0.0, sol.state.orbitals[i], opts.inner);
            GridField mixed = sol.state.orbitals[i];
            for (std::int64_t k = 0; k < grid.node_count; ++k) {
                mixed[k] = (1.0 - mixing) * mixed[k] + mixing * inner_res.phi[k];
            }
            normalize_l2(mixed);
            trial.orbitals[i] = std::move(mixed);
        }

        double e_new = product_energy(grid, trial, trap, mode, kernel);
        if (e_new > energy + 1e-12 * (1.0 + std::abs(energy))) {
            mixing *= 0.5;
            if (mixing < 1e-3) {
                fail("EnergyIncrease",
                     "energy kept rising despite mixing reductions; state not improvable");
            }
            continue;  // retry from the same state with gentler mixing
        }
        double decrease = energy - e_new;
        sol.state = std::move(trial);
        energy = e_new;
        sol.energy_trace.push_back(energy);
        if (decrease < opts.tol && sweep > 1) {
            converged = true;
            break;
        }
    }
    if (!converged) {
        fail("MaxIterExceeded", "self-consistent sweeps did not converge within the limit");
    }

    sol.energy = energy;
    sol.scf_sweeps = sweep;
    sol.converged = true;
    double worst = 0.0;
    for (int i = 1; i < n_particles; ++i) {
        double d2 = 0.0;
        for (std::int64_t k = 0; k < grid.node_count; ++k) {
            double d = sol.state.orbitals[i][k] - sol.state.orbitals[0][k];
            d2 += d * d * grid.node_weight(k);
        }
        worst = std::max(worst, std::sqrt(d2));
    }
    sol.symmetric = worst <= 1e-8;
    return sol;
}

}  // namespace

double hartree_energy(const Grid& grid, const ProductState& state, const TrapField& trap,
                      const InteractionSpec& kernel) {
    if (interaction_is_zero(kernel)) {
        return product_energy(grid, state, trap, PairMode::None, nullptr);
    }
    return product_energy(grid, state, trap, PairMode::Kernel, &kernel);
}

double dirac_hartree_energy(const Grid& grid, const ProductState& state, const TrapField& trap) {
    return product_energy(grid, state, trap, PairMode::Point, nullptr);
}

HartreeSolution hartree_minimize(const Grid& grid, const TrapSpec& trap, const InteractionSpec& v,
                                 int n_particles, const HartreeOptions& opts) {
    InteractionSpec v_n = rescale_interaction(v, n_particles, grid.dim);
    if (interaction_is_zero(v_n)) {
        return scf_minimize(grid, trap, PairMode::None, nullptr, n_particles, opts);
    }
    return scf_minimize(grid, trap, PairMode::Kernel, &v_n, n_particles, opts);
}

HartreeSolution dirac_hartree_minimize(const Grid& grid, const TrapSpec& trap, int n_particles,
                                       const HartreeOptions& opts) {
    return scf_minimize(grid, trap, PairMode::Point, nullptr, n_particles, opts);
}

double product_rate_I(const Grid& grid, const ProductState& state, double a) {
    (void)grid;
    require(a > 0.0, "OutOfRange", "diffusion coefficient must be positive");
    std::vector<double> terms;
    terms.reserve(state.orbitals.size());
    for (const auto& h : state.orbitals) terms.push_back(a * gradient_sq_norm(h));
    return sorted_sum(terms);
}

}  // namespace gplab
