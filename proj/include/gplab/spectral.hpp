#pragma once

#include "gplab/grid.hpp"

namespace gplab {

/*
 * Spectral helpers for the grid Schrodinger operator H = -kc*Lap + W
 * (kc = kinetic coefficient, W a potential field; Dirichlet boundary rows
 * are identically zero so the operator acts on boundary-vanishing fields).
 *
 * lambda0_inverse_power is an oracle implementation kept deliberately
 * independent of the variational / semigroup code paths it is used to
 * check: shifted inverse power iteration with a Jacobi-preconditioned
 * conjugate-gradient inner solve.
 */

void apply_schrodinger(const GridField& phi, const GridField& W, double kinetic_coeff,
                       GridField& out);

struct EigenPair {
    double lambda0 = 0.0;
    GridField mode;       // L2-normalized, nonnegative
    int iterations = 0;
    double residual = 0.0;  // ||H mode - lambda0 mode||_2
};

EigenPair lambda0_inverse_power(const Grid& grid, const GridField& W, double kinetic_coeff,
                                double tol = 1e-11, int max_iter = 200);

}  // namespace gplab
