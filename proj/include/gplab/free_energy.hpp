#pragma once

#include <cstdint>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Monte Carlo estimates of the N-particle free energy
 *
 *   F = -(1/(N beta)) log E[ exp( - sum_i int W(X^i) - (1/beta) sum_{i<j}
 *                                   int int v_N(|X^i_s - X^j_t|) ds dt ) ],
 *
 * over independent diffusions started at the origin, with the pair kernel
 * rescaled as v_N(r) = N^(dim-1) v(N r).  Time integrals use left-endpoint
 * sums; the double (pair) sum may be thinned by a stride.  Sampling is either
 * from the reference measure directly or from a Girsanov-tilted measure whose
 * per-path log weights restore the reference expectation exactly.
 */

enum class Sampling { Direct, GirsanovTilted };

struct EnsembleOptions {
    int n_samples = 1000;
    double dt = 0.01;
    int stride = 1;  // pair-sum thinning; rounded down to a divisor of the step count
    std::uint64_t seed = 1;
    double a = 1.0;
    Sampling sampling = Sampling::Direct;
    const Grid* tilt_grid = nullptr;      // both required for GirsanovTilted
    const GridField* tilt_phi = nullptr;  // non-negative orbital defining the drift
    double ess_floor = 0.01;  // DegenerateWeights below ess_floor * n_samples
};

struct FreeEnergyEstimate {
    double value = 0.0;     // -(1/(N beta)) log mean exp(-action + log weight)
    double std_err = 0.0;   // delta-method standard error on `value`
    double log_mean = 0.0;  // log of the weighted sample mean
    double ess = 0.0;       // (sum w)^2 / sum w^2 over samples
    int n_samples = 0;
    int n_particles = 0;
    double beta = 0.0;
    double dt = 0.0;  // effective step beta / steps
    int steps = 0;
    int stride = 1;  // effective pair stride actually used
    bool tilted = false;
};

/* KernelUnresolved when the rescaled kernel is narrower than the strided step
 * resolution sqrt(2 a dt stride); DegenerateWeights when the effective sample
 * size collapses. */
FreeEnergyEstimate estimate_F(int dim, const TrapSpec& trap, const InteractionSpec& v,
                              int n_particles, double beta, const EnsembleOptions& opts);

/* Same functional with the pair kernel replaced by the width-eps mollifier
 * (no N-rescaling).  All widths share the same path ensembles; each width
 * gets the widest pair stride resolving it (stride <= eps^2 / (8 a dt)).
 * `value` extrapolates the two smallest widths linearly to eps = 0. */
struct MollifiedEstimate {
    std::vector<double> epsilons;
    std::vector<FreeEnergyEstimate> at_eps;  // same order as `epsilons`
    double value = 0.0;
    double std_err = 0.0;
};

MollifiedEstimate estimate_G(int dim, const TrapSpec& trap, int n_particles, double beta,
                             const std::vector<double>& epsilons,
                             const EnsembleOptions& opts);

}  // namespace gplab
