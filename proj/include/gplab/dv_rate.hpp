#pragma once

#include <vector>

#include "gplab/grid.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Occupation-measure large deviations for the grid diffusion with generator
 * a * Lap (the second-difference Laplacian of the grid).
 *
 *   Lambda_beta(f) = (1/beta) log E[ exp( int_0^beta f(X_t) dt ) ]
 *   J_beta(mu)     = sup_f  <mu, f> - Lambda_beta(f)
 *
 * Lambda is computed from the Feynman-Kac evolution u' = a Lap u + f u.  The
 * default stepper is symmetric operator splitting with exact per-axis heat
 * kernels (closed-form eigenbases of the 1-d second difference), so a
 * constant field f = c yields Lambda = c to machine precision under the
 * conditioned normalization.  The backward Euler stepper (I - dt(a Lap + f))
 * keeps the resolvent entrywise non-negative whenever dt * max f_+ < 1, which
 * makes the maximum-principle witness bound exact at the discrete level.
 *
 * J_beta is maximized by monotone concave ascent on f; the gradient is the
 * expected occupation density of the tilted bridge, accumulated from forward
 * and backward Feynman-Kac snapshots.
 *
 * As beta -> infinity, J_beta(phi^2) -> a * |grad phi|^2 with the grid
 * gradient norm; chi_otimes_beta minimizes J_beta(mu) + <W, mu> +
 * (alpha/2) |mu|_2^2 over probability densities.
 */

enum class MgfStepper { Splitting, BackwardEuler };
enum class MgfInit { Stationary, PointCenter };
enum class MgfNormalization { Conditioned, Raw };

struct MgfOptions {
    double dt = 0.05;  // rounded so an integer number of steps spans beta
    MgfStepper stepper = MgfStepper::Splitting;
    MgfInit init = MgfInit::Stationary;
    MgfNormalization normalization = MgfNormalization::Conditioned;
    double a = 1.0;
};

struct MgfResult {
    double lambda = 0.0;      // Lambda_beta(f)
    double log_mass_f = 0.0;  // log total mass of the f-tilted evolution
    double log_mass_0 = 0.0;  // log total mass of the free evolution (Conditioned)
    int steps = 0;
    double dt = 0.0;
};

MgfResult log_mgf(const Grid& grid, const GridField& f, double beta, const MgfOptions& opts = {});

struct RateOptions {
    double dt = 0.1;
    int snapshots = 128;   // occupation-density quadrature points in time
    double tol = 5e-3;     // stop when |mu - occupation|_L1 is below tol
    int max_iter = 400;
    double f_cap = 50.0;   // witness fields are clipped to [-f_cap, f_cap]
    double step0 = 1.0;
    MgfInit init = MgfInit::Stationary;
    double a = 1.0;
};

struct RateResult {
    double value = 0.0;      // J_beta(mu)
    GridField f;             // maximizing witness field
    GridField occupation;    // occupation density of the tilted bridge at f
    double grad_l1 = 0.0;    // |mu - occupation|_L1 at termination
    int iterations = 0;
    bool cap_active = false; // the clip at +-f_cap was binding at termination
    bool converged = false;
};

/* J_beta of a probability density mu (non-negative, unit mass within 1e-8).
 * `warm_start`, when non-null, seeds the witness ascent and receives the
 * final witness field. */
RateResult rate_J(const Grid& grid, const GridField& mu, double beta, const RateOptions& opts = {},
                  GridField* warm_start = nullptr);

struct WitnessReport {
    double lambda_raw = 0.0;  // raw (unconditioned) log-mass rate at the witness field
    double bound = 0.0;       // (1/beta) log( (c + max phi) / c )
    double margin = 0.0;      // bound - lambda_raw
    bool holds = false;
    GridField f;              // the witness field -a (Lap Psi)/Psi, Psi = c + phi
};

/* Maximum-principle check: for Psi = c + phi (phi >= 0), the raw exponential
 * moment of the witness field is bounded by (c + max phi)/c.  Verified with
 * the backward Euler stepper, for which the bound is exact on the grid. */
WitnessReport witness_bound_check(const Grid& grid, const GridField& phi, double c, double beta,
                                  double dt = 0.1, double a = 1.0);

struct ChiBetaOptions {
    RateOptions rate;
    double step0 = 0.5;
    int max_outer = 150;
    double tol = 1e-5;  // stop when the energy decrease per accepted step is below tol
    bool init_from_quartic_minimizer = true;  // else start from the flat density
    // Optional warm starts (borrowed, must match the grid): an initial density
    // overriding the choice above, and an initial witness field for the inner
    // rate solves.  Chaining these across a beta sweep cuts the solve cost by
    // an order of magnitude.
    const GridField* init_density = nullptr;
    const GridField* init_witness = nullptr;
};

struct ChiBetaResult {
    double value = 0.0;       // J_beta(mu) + <W, mu> + (alpha/2) |mu|_2^2 at the minimizer
    double rate_value = 0.0;  // J_beta(mu)
    GridField density;
    GridField witness_f;
    int outer_iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

/* Finite-beta variational energy over probability densities. */
ChiBetaResult chi_otimes_beta(const Grid& grid, const TrapField& trap, double alpha, double beta,
                              const ChiBetaOptions& opts = {});

}  // namespace gplab
