#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gplab/grid.hpp"

namespace gplab {

/* ---- traps ---------------------------------------------------------------
 * Harmonic: W(x) = scale*|x|^2     params = {scale}, default {1}
 * Quartic:  W(x) = scale*|x|^4     params = {scale}, default {1}
 * Box:      W(x) = 0 for |x| <= radius, +infinity outside; realized on the
 *           grid as a zero-valued field plus a flag mask of the infinite
 *           region (never as non-finite node values).  params = {radius}.
 */

enum class TrapKind { Harmonic, Box, Quartic };

struct TrapSpec {
    TrapKind kind = TrapKind::Harmonic;
    std::vector<double> params;
};

struct TrapField {
    GridField values;                    // finite part (0 on the Box interior)
    std::vector<std::uint8_t> infinite;  // 1 where W = +infinity
    bool any_infinite = false;
};

TrapField eval_trap(const TrapSpec& spec, const Grid& grid);

/* Pointwise trap value at an off-grid position; +infinity outside a Box. */
double trap_value(const TrapSpec& spec, const double* x, int dim);

/* ---- pair interactions ----------------------------------------------------
 * Gaussian:          v(r) = g * exp(-r^2 / (2 s^2))        params = {g, s}
 * HardSphere:        v(r) = +infinity for r <= a, 0 beyond; the grid/path
 *                    representation replaces the core by the finite cap,
 *                    params = {a, cap}; analytic consumers (scattering,
 *                    assumption checks) use the exact infinite core.
 * TruncatedInverse:  v(r) = g * min(r^-p, cap) for r <= R, 0 beyond,
 *                    params = {g, p, cap, R}
 */

enum class InteractionKind { Gaussian, HardSphere, TruncatedInverse };

struct InteractionSpec {
    InteractionKind kind = InteractionKind::Gaussian;
    std::vector<double> params;
};

/* Capped value used by grid/path arithmetic. */
double interaction_value(const InteractionSpec& v, double r);

/* Analytic value (infinite hard core, uncapped inverse power). */
double interaction_value_analytic(const InteractionSpec& v, double r);

bool interaction_is_zero(const InteractionSpec& v);

/* Resolution scale of the kernel (Gaussian width s, core radius, support). */
double interaction_width(const InteractionSpec& v);

/* Radius beyond which the (capped) kernel is numerically negligible. */
double interaction_range(const InteractionSpec& v);

/* v_N(r) = N^(dim-1) * v(N r); exact closed-family rescaling, N = 1 is the
 * identity.  Error InvalidN for N < 1. */
InteractionSpec rescale_interaction(const InteractionSpec& v, int N, int dim);

/* ---- mollifier -------------------------------------------------------------
 * Truncated Gaussian bump: phi_eps(x) = Z^-1 exp(-|x|^2/(2 eps)) 1(|x|<=eps),
 * Z chosen so the continuum integral over R^dim is 1.
 */

struct MollifierSpec {
    double epsilon = 0.0;
};

class Mollifier {
public:
    Mollifier(const MollifierSpec& spec, int dim);
    double operator()(double r) const;
    double epsilon() const { return eps_; }
    double peak() const { return inv_z_; }

private:
    double eps_ = 0.0;
    double inv_z_ = 0.0;
};

/* Node samples of phi_eps, renormalized so the *grid quadrature* integral is
 * exactly 1 (documented deviation from raw sampling: keeps convolution mass-
 * preserving and the mass invariant exact on coarse grids). */
GridField sample_mollifier(const MollifierSpec& spec, const Grid& grid);

/* ---- convolution -----------------------------------------------------------
 * out(x_i) = sum_j K(|x_i - x_j|) rho(x_j) w_j with the grid quadrature
 * weights; periodic grids use minimal-image distances.  Error
 * KernelUnresolved if the kernel's width or support is below one spacing.
 */

GridField convolve_radial(const Grid& grid, const std::function<double(double)>& kernel,
                          double range, const GridField& density);

GridField convolve_density(const Grid& grid, const InteractionSpec& kernel,
                           const GridField& density);

GridField convolve_density(const Grid& grid, const MollifierSpec& kernel,
                           const GridField& density);

/* ---- radial quadrature with divergence detection --------------------------
 * integral of f(r) * r^power over (0, r_max], dyadic panels toward 0 with
 * 16-point Gauss-Legendre per panel; finite=false when panel contributions
 * fail to decay (integrable-singularity test).
 */

struct RadialIntegral {
    double value = 0.0;
    bool finite = true;
};

RadialIntegral integrate_radial_to(const std::function<double(double)>& f, double r_max,
                                   double power);

/* integral over (0, infinity): outward doubling until the tail is negligible;
 * finite=false if either end diverges. */
RadialIntegral integrate_radial(const std::function<double(double)>& f, double power);

/* ---- assumption checks -----------------------------------------------------
 * Integrability gates for an interaction in a given dimension:
 *   v_integrable:        int_{R^d} v(|x|) dx finite
 *   v_square_integrable: int_{R^d} v(|x|)^2 dx finite
 *   green_overlap (d=3): int_{B_1} |y|^-1 vbar(|y|) dy finite, with vbar the
 *                        decreasing majorant of v (our kernel family is
 *                        already nonincreasing, so vbar = v).
 * All checks consume the analytic (uncapped) kernel.
 */

struct AssumptionCheck {
    std::string name;
    bool finite = true;
    double value = 0.0;
};

struct AssumptionReport {
    std::vector<AssumptionCheck> checks;
    bool all_pass = true;
};

AssumptionReport validate_assumptions(const InteractionSpec& v, int dim);

/* Surface area of the unit sphere in R^d, d = 1,2,3 (2, 2*pi, 4*pi). */
double sphere_surface(int dim);

}  // namespace gplab
