#include "gplab/scattering.hpp"

#include <cmath>
#include <limits>

#include "gplab/errors.hpp"

namespace gplab {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kInf = std::numeric_limits<double>::infinity();

double capped_v(const InteractionSpec& v, double r) { return interaction_value(v, r); }

// Relative tail size of the kernel at radius r against its overall amplitude.
double tail_fraction(const InteractionSpec& v, double r) {
    double amp = std::max(std::abs(capped_v(v, 0.0)), std::abs(capped_v(v, 0.5 * r)));
    if (amp == 0.0) return 0.0;
    return std::abs(capped_v(v, r)) / amp;
}

double born_integral_or_inf(const InteractionSpec& v, int power) {
    if (v.kind == InteractionKind::HardSphere) return kInf;
    RadialIntegral ri =
        integrate_radial_to([&](double r) { return interaction_value_analytic(v, r); },
                            interaction_range(v), power);
    if (!ri.finite) return kInf;
    // The supported kernels vanish (or are truncated to zero) beyond
    // interaction_range, so no outward continuation is needed.
    return ri.value;
}

void fill_born_fields(const InteractionSpec& v, int dim, ScatteringResult& out) {
    double flat = born_integral_or_inf(v, 0);
    double meas = born_integral_or_inf(v, dim - 1);
    out.born = std::isfinite(flat) ? flat / (8.0 * kPi) : kInf;
    out.born_measure = std::isfinite(meas) ? sphere_surface(dim) * meas / (8.0 * kPi) : kInf;
}

}  // namespace

ScatteringResult scattering_length_3d(const InteractionSpec& v, double r_max, int mesh) {
    require(r_max > 0.0 && std::isfinite(r_max), "OutOfRange", "r_max must be positive");
    require(mesh >= 16, "OutOfRange", "ode mesh must be at least 16");

    ScatteringResult out;
    out.ode_mesh = mesh;
    fill_born_fields(v, 3, out);

    if (v.kind == InteractionKind::HardSphere) {
        // Exact solution: u = 0 on [0,a], u = r - a beyond.
        double a = v.params[0];
        require(a < r_max, "OutOfRange", "hard-sphere radius must lie inside r_max");
        out.alpha_tilde = a;
        out.method = ScatteringMethod::HardSphereClosedForm;
        return out;
    }

    if (tail_fraction(v, r_max) > 1e-12) {
        fail("UnsupportedPotential",
             "kernel is not negligible at r_max; enlarge r_max or truncate the kernel");
    }

    // RK4 on u'' = (1/2) u v(r), u(0)=0, u'(0)=1.
    //
    // Kernels with a hard support edge are integrated only up to that edge:
    // the zero-energy solution is exactly linear wherever the kernel vanishes,
    // so the intercept extracted at the edge equals the one at r_max. Stepping
    // across the jump instead would degrade RK4 to first order.
    double r_end = r_max;
    if (v.kind == InteractionKind::TruncatedInverse) {
        const double edge = interaction_range(v);
        if (edge > 0.0 && edge < r_max) r_end = edge;
    }
    const double h = r_end / mesh;
    double u = 0.0, p = 1.0;
    auto rhs = [&](double r, double uu, double pp, double& du, double& dp) {
        du = pp;
        // Clamp stage radii: accumulated rounding in k*h + h can overshoot the
        // support edge by an ulp, which would sample the kernel on its zero side.
        dp = 0.5 * uu * capped_v(v, r > r_end ? r_end : r);
    };
    for (int k = 0; k < mesh; ++k) {
        double r = k * h;
        double k1u, k1p, k2u, k2p, k3u, k3p, k4u, k4p;
        rhs(r, u, p, k1u, k1p);
        rhs(r + 0.5 * h, u + 0.5 * h * k1u, p + 0.5 * h * k1p, k2u, k2p);
        rhs(r + 0.5 * h, u + 0.5 * h * k2u, p + 0.5 * h * k2p, k3u, k3p);
        rhs(r + h, u + h * k3u, p + h * k3p, k4u, k4p);
        u += (h / 6.0) * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
        p += (h / 6.0) * (k1p + 2.0 * k2p + 2.0 * k3p + k4p);
        if (!(std::isfinite(u) && std::isfinite(p))) {
            fail("NodeCrossing", "zero-energy solution blew up; kernel too strong for the mesh");
        }
        if ((u <= 0.0 && k > 0) || p <= 0.0) {
            fail("NodeCrossing",
                 "zero-energy solution crossed a node; kernel supports a bound state");
        }
    }
    out.alpha_tilde = r_end - u / p;
    out.method = ScatteringMethod::Ode3d;
    return out;
}

ScatteringResult scattering_length_2d(const InteractionSpec& v, double R, double R_star,
                                      int mesh, double r_eval) {
    require(R > 0.0 && R_star > R, "OutOfRange", "need 0 < R < R_star");
    require(mesh >= 64, "OutOfRange", "ode mesh must be at least 64");

    ScatteringResult out;
    out.ode_mesh = mesh;
    fill_born_fields(v, 2, out);
    out.method = ScatteringMethod::Shooting2d;

    if (v.kind == InteractionKind::HardSphere) {
        double a = v.params[0];
        require(a < R, "OutOfRange", "hard-disk radius must lie inside R");
        out.alpha_tilde = a;  // psi = log(r/a)/log(R_star/a): matching is exact
        out.method = ScatteringMethod::HardSphereClosedForm;
        return out;
    }

    if (interaction_is_zero(v)) {
        // psi identically 1: the exterior profile carries no radius scale.
        fail("DegenerateFormula", "zero kernel admits no two-dimensional scattering length");
    }
    if (tail_fraction(v, R) > 1e-13) {
        fail("UnsupportedPotential",
             "kernel is not negligible at R; two-dimensional matching needs a free annulus");
    }

    if (r_eval == 0.0) r_eval = 0.5 * (R + R_star);
    require(r_eval > R && r_eval < R_star, "OutOfRange",
            "evaluation radius must lie in the free annulus (R, R_star)");

    // Radial problem (r psi')' = (1/2) r v psi, regular at the origin.
    // Series start one mesh step out: psi ~ 1 + v(0) r^2 / 8, psi' ~ v(0) r / 4.
    const double h = R_star / mesh;
    const int eval_idx = std::max(2, std::min(mesh - 1, (int)std::lround(r_eval / h)));
    r_eval = eval_idx * h;

    double psi = 1.0 + capped_v(v, 0.0) * h * h / 8.0;
    double p = capped_v(v, 0.0) * h / 4.0;
    double psi_eval = 0.0;
    auto rhs = [&](double r, double f, double g, double& df, double& dg) {
        df = g;
        dg = -g / r + 0.5 * capped_v(v, r) * f;
    };
    for (int k = 1; k < mesh; ++k) {
        double r = k * h;
        double k1f, k1g, k2f, k2g, k3f, k3g, k4f, k4g;
        rhs(r, psi, p, k1f, k1g);
        rhs(r + 0.5 * h, psi + 0.5 * h * k1f, p + 0.5 * h * k1g, k2f, k2g);
        rhs(r + 0.5 * h, psi + 0.5 * h * k2f, p + 0.5 * h * k2g, k3f, k3g);
        rhs(r + h, psi + h * k3f, p + h * k3g, k4f, k4g);
        psi += (h / 6.0) * (k1f + 2.0 * k2f + 2.0 * k3f + k4f);
        p += (h / 6.0) * (k1g + 2.0 * k2g + 2.0 * k3g + k4g);
        if (!(std::isfinite(psi) && std::isfinite(p)) || psi <= 0.0) {
            fail("NodeCrossing", "radial solution lost positivity; kernel supports a bound state");
        }
        if (k + 1 == eval_idx) psi_eval = psi;
    }
    double psi_end = psi;
    double u_hat = psi_eval / psi_end;
    double denom = 1.0 - u_hat;
    if (std::abs(denom) < 1e-9 * (1.0 + std::abs(u_hat))) {
        fail("DegenerateFormula",
             "exterior profile is flat between r_eval and R_star; no radius scale to extract");
    }
    out.alpha_tilde = std::exp((std::log(r_eval) - u_hat * std::log(R_star)) / denom);
    return out;
}

double born_alpha(const InteractionSpec& v) {
    double flat = born_integral_or_inf(v, 0);
    if (!std::isfinite(flat)) {
        fail("DivergentIntegral", "flat radial integral of the kernel diverges");
    }
    return flat / (8.0 * kPi);
}

double born_alpha_measure(const InteractionSpec& v, int dim) {
    require(dim >= 1 && dim <= 3, "InvalidDimension", "dim must be 1, 2, or 3");
    double meas = born_integral_or_inf(v, dim - 1);
    if (!std::isfinite(meas)) {
        fail("DivergentIntegral", "kernel is not integrable over space");
    }
    return sphere_surface(dim) * meas / (8.0 * kPi);
}

double mean_field_coupling(const InteractionSpec& v, int dim) {
    require(dim >= 1 && dim <= 3, "InvalidDimension", "dim must be 1, 2, or 3");
    double meas = born_integral_or_inf(v, dim - 1);
    if (!std::isfinite(meas)) {
        fail("DivergentIntegral", "kernel is not integrable over space");
    }
    return sphere_surface(dim) * meas;
}

}  // namespace gplab
