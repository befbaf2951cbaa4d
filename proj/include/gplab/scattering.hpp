#pragma once

#include "gplab/potentials.hpp"

namespace gplab {

/*
 * Scattering lengths of a radial pair potential under the zero-energy
 * two-body problem u'' = (1/2) u v.
 *
 * d=3: integrate u(0)=0, u'(0)=1 out to r_max (v must be compactly supported
 *      or negligible there); alpha_tilde = r_max - u(r_max)/u'(r_max).
 * d=2: solve the radial problem (r psi')' = (1/2) r v psi, regular at 0, on
 *      [0, R_star] with support(v) inside [0, R]; normalize psi(R_star)=1 and
 *      invert the logarithmic exterior profile at an evaluation point in the
 *      potential-free annulus (R, R_star):
 *        log(alpha_tilde) = (log r - psi(r) log R_star) / (1 - psi(r)).
 * Hard spheres short-circuit to the exact closed forms (alpha_tilde = core
 * radius in both dimensions).
 *
 * born        = (1/8 pi) * int_0^inf v(r) dr      (flat radial integral)
 * born_measure= (1/8 pi) * int_{R^d} v(|x|) dx    (measure integral)
 * mean-field coupling = int_{R^d} v(|x|) dx       (product-state pair limit)
 */

enum class ScatteringMethod { Ode3d, Shooting2d, HardSphereClosedForm };

struct ScatteringResult {
    double alpha_tilde = 0.0;
    double born = 0.0;          // may be +inf (hard core)
    double born_measure = 0.0;  // may be +inf
    ScatteringMethod method = ScatteringMethod::Ode3d;
    int ode_mesh = 0;
};

ScatteringResult scattering_length_3d(const InteractionSpec& v, double r_max, int mesh);

ScatteringResult scattering_length_2d(const InteractionSpec& v, double R, double R_star,
                                      int mesh, double r_eval = 0.0 /* 0: midpoint */);

/* (1/8 pi) int_0^inf v(r) dr of the analytic kernel; DivergentIntegral if the
 * integral does not converge. */
double born_alpha(const InteractionSpec& v);

/* (1/8 pi) int_{R^dim} v(|x|) dx. */
double born_alpha_measure(const InteractionSpec& v, int dim);

/* int_{R^dim} v(|x|) dx — the pair coupling reproduced by product states. */
double mean_field_coupling(const InteractionSpec& v, int dim);

}  // namespace gplab
