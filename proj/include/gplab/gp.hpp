#pragma once

#include <vector>

#include "gplab/grid.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Energy functional on L2-normalized fields:
 *
 *   E(phi) = |grad phi|^2 + <W, phi^2> + (alpha/2) |phi|_4^4
 *
 * with the grid quadrature and the summation-by-parts gradient norm, so the
 * energy gradient -Lap phi + W phi + alpha phi^3 is exact for the discrete
 * functional. Minimization is projected gradient descent in imaginary time:
 * descend, clamp to the trap's admissible region, take |.|, renormalize.
 * The step halves whenever a step would raise the energy, so the energy
 * trace of accepted iterates is non-increasing by construction.
 */

struct MinimizeOptions {
    double step = 0.0;     // 0: choose from the stability bound
    double tol = 1e-9;     // termination: energy decrease per step below tol
    int max_iter = 50000;
    int max_halvings = 20;
};

struct MinimizeResult {
    GridField phi;
    double energy = 0.0;
    int iterations = 0;
    double residual = 0.0;  // Euler-Lagrange residual |(-Lap + W + alpha phi^2 - lambda) phi|_2
    double lambda = 0.0;    // Lagrange multiplier <phi, H phi>
    bool converged = false;
    std::vector<double> energy_trace;  // energy after each accepted step
};

/* Minimize E over the unit L2 sphere starting from `init` (need not be
 * normalized; must vanish on `trap.infinite` nodes). */
MinimizeResult minimize_energy(const Grid& grid, const TrapField& trap, double alpha,
                               GridField init, const MinimizeOptions& opts);

struct GpSolution {
    double energy = 0.0;
    GridField phi;
    double alpha = 0.0;
    int iterations = 0;
    double residual = 0.0;
    double lambda = 0.0;
    bool converged = false;
};

/* Evaluate E(phi); phi must be L2-normalized (NotNormalized) and vanish on
 * nodes where the trap is flagged infinite (InfiniteOverlap). */
double gp_energy(const Grid& grid, const GridField& phi, const TrapField& trap, double alpha);

/* Ground state of E for the given trap and quartic coupling alpha >= 0. */
GpSolution gp_minimize(const Grid& grid, const TrapSpec& trap, double alpha,
                       const MinimizeOptions& opts = {});

/* Deterministic positive initial profile adapted to the trap (broad Gaussian,
 * zeroed on inadmissible nodes, L2-normalized). */
GridField default_initial_profile(const Grid& grid, const TrapField& trap);

}  // namespace gplab
