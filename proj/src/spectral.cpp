#include "gplab/spectral.hpp"

#include <algorithm>
#include <cmath>

namespace gplab {

void apply_schrodinger(const GridField& phi, const GridField& W, double kinetic_coeff,
                       GridField& out) {
    apply_generator(phi, kinetic_coeff, out);  // out = kc * Lap(phi)
    const std::int64_t n = phi.grid.node_count;
    for (std::int64_t i = 0; i < n; ++i) out[i] = -out[i] + W[i] * phi[i];
    zero_boundary(out);
}

namespace {

/* Jacobi-preconditioned CG for (H + shift) x = b, H = -kc*Lap + W. */
int solve_shifted(const Grid& grid, const GridField& W, double kinetic_coeff, double shift,
                  const GridField& b, GridField& x, double tol, int max_iter) {
    const std::int64_t n = grid.node_count;
    const double diag_lap = 2.0 * grid.dim * kinetic_coeff / (grid.spacing * grid.spacing);
    GridField r = b, p = make_field(grid), z = make_field(grid), hp = make_field(grid);
    std::fill(x.values.begin(), x.values.end(), 0.0);
    zero_boundary(r);
    auto precond = [&](const GridField& rin, GridField& zout) {
        for (std::int64_t i = 0; i < n; ++i) {
            const double d = diag_lap + W[i] + shift;
            zout[i] = rin[i] / (d > 1e-30 ? d : 1.0);
        }
        zero_boundary(zout);
    };
    precond(r, z);
    p = z;
    double rz = 0.0;
    for (std::int64_t i = 0; i < n; ++i) rz += r[i] * z[i];
    double b2 = 0.0;
    for (std::int64_t i = 0; i < n; ++i) b2 += b[i] * b[i];
    const double stop = tol * tol * (b2 > 0 ? b2 : 1.0);
    int it = 0;
    for (; it < max_iter; ++it) {
        apply_schrodinger(p, W, kinetic_coeff, hp);
        for (std::int64_t i = 0; i < n; ++i) hp[i] += shift * p[i];
        zero_boundary(hp);
        double php = 0.0;
        for (std::int64_t i = 0; i < n; ++i) php += p[i] * hp[i];
        if (!(php > 0.0)) break;
        const double alpha = rz / php;
        double r2 = 0.0;
        for (std::int64_t i = 0; i < n; ++i) {
            x[i] += alpha * p[i];
            r[i] -= alpha * hp[i];
            r2 += r[i] * r[i];
        }
        if (r2 < stop) break;
        precond(r, z);
        double rz_new = 0.0;
        for (std::int64_t i = 0; i < n; ++i) rz_new += r[i] * z[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
    }
    return it;
}

}  // namespace

EigenPair lambda0_inverse_power(const Grid& grid, const GridField& W, double kinetic_coeff,
                                double tol, int max_iter) {
    double wmin = 0.0;
    for (double v : W.values) wmin = std::min(wmin, v);
    const double shift = 1.0 + std::max(0.0, -wmin);

    /* deterministic positive start: broad Gaussian bump */
    GridField x = sample_field(grid, [&](const double* p) {
        double r2 = 0.0;
        for (int k = 0; k < grid.dim; ++k) r2 += p[k] * p[k];
        return std::exp(-r2 / (grid.half_width * grid.half_width));
    });
    zero_boundary(x);
    normalize_l2(x);

    EigenPair out;
    GridField y = make_field(grid), hx = make_field(grid);
    double lambda = 0.0;
    int it = 0;
    for (; it < max_iter; ++it) {
        solve_shifted(grid, W, kinetic_coeff, shift, x, y, 1e-13,
                      static_cast<int>(grid.node_count) + 1000);
        zero_boundary(y);
        normalize_l2(y);
        x = y;
        apply_schrodinger(x, W, kinetic_coeff, hx);
        lambda = inner(x, hx);
        double res2 = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            const double r = hx[i] - lambda * x[i];
            res2 += r * r * grid.node_weight(i);
        }
        out.residual = std::sqrt(res2);
        if (out.residual <= tol * std::max(1.0, std::abs(lambda))) {
            ++it;
            break;
        }
    }
    /* ground mode of these operators can be chosen nonnegative */
    double total = 0.0;
    for (double v : x.values) total += v;
    if (total < 0.0)
        for (double& v : x.values) v = -v;
    out.lambda0 = lambda;
    out.mode = x;
    out.iterations = it;
    return out;
}

}  // namespace gplab
