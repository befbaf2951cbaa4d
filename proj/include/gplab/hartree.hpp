#pragma once

#include <vector>

#include "gplab/gp.hpp"
#include "gplab/grid.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Product-state energies for N particles with orbitals h_1..h_N:
 *
 *   E = sum_i ( |grad h_i|^2 + <W, h_i^2> ) + sum_{i<j} <h_i^2, K * h_j^2>
 *
 * where K is either the N-rescaled pair kernel v_N(r) = N^(d-1) v(N r) (so
 * the convolution appears), or a point interaction K = delta (pair term
 * <h_i^2, h_j^2>). Addends are accumulated in sorted order, so relabeling the
 * orbitals returns the bit-identical energy.
 *
 * Minimization is self-consistent: every sweep rebuilds each orbital's mean
 * field from the current state (all orbitals updated from the same snapshot,
 * which preserves exchange symmetry exactly), solves the linear ground-state
 * problem in that field by imaginary time, then mixes old and new orbitals.
 * The mixing weight halves whenever a sweep would raise the energy.
 */

struct ProductState {
    std::vector<GridField> orbitals;
};

struct HartreeOptions {
    double tol = 1e-9;       // stop when the energy decrease per sweep is below tol
    int max_sweeps = 200;
    double mixing = 0.5;     // fraction of the new orbital blended in per sweep
    MinimizeOptions inner{.step = 0.0, .tol = 1e-12, .max_iter = 50000, .max_halvings = 20};
};

struct HartreeSolution {
    double energy = 0.0;
    ProductState state;
    int n_particles = 0;
    int scf_sweeps = 0;
    bool symmetric = false;   // all returned orbitals agree to 1e-8
    bool converged = false;
    InteractionSpec kernel;   // the rescaled kernel actually used (zero for Dirac)
    std::vector<double> energy_trace;
};

/* Energy of an explicit product state under the (already rescaled) kernel. */
double hartree_energy(const Grid& grid, const ProductState& state, const TrapField& trap,
                      const InteractionSpec& kernel);

/* Energy with the point pair interaction sum_{i<j} <h_i^2, h_j^2>. */
double dirac_hartree_energy(const Grid& grid, const ProductState& state, const TrapField& trap);

/* Minimize over product states; `v` is the unscaled kernel, rescaled to v_N
 * internally. */
HartreeSolution hartree_minimize(const Grid& grid, const TrapSpec& trap, const InteractionSpec& v,
                                 int n_particles, const HartreeOptions& opts = {});

/* Minimize with the point pair interaction. */
HartreeSolution dirac_hartree_minimize(const Grid& grid, const TrapSpec& trap, int n_particles,
                                       const HartreeOptions& opts = {});

/* Kinetic part sum_i a |grad h_i|^2 (the zero-temperature limit of the path
 * rate term for product states). */
double product_rate_I(const Grid& grid, const ProductState& state, double a = 1.0);

}  // namespace gplab
