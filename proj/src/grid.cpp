#include "gplab/grid.hpp"

#include <cmath>

namespace gplab {

Grid build_grid(int dim, double half_width, int points_per_axis, Boundary boundary) {
    if (dim < 1 || dim > 3)
        fail("InvalidDimension", "grid dim must be 1, 2 or 3, got " + std::to_string(dim));
    if (points_per_axis < 8)
        fail("TooFewPoints",
             "points_per_axis must be >= 8, got " + std::to_string(points_per_axis));
    if (!(half_width > 0.0) || !std::isfinite(half_width))
        fail("OutOfRange", "half_width must be positive and finite");

    Grid g;
    g.dim = dim;
    g.half_width = half_width;
    g.points_per_axis = points_per_axis;
    g.boundary = boundary;
    g.spacing = (boundary == Boundary::Dirichlet) ? 2.0 * half_width / (points_per_axis - 1)
                                                  : 2.0 * half_width / points_per_axis;
    g.node_count = 1;
    for (int k = 0; k < dim; ++k) g.node_count *= points_per_axis;
    return g;
}

GridField make_field(const Grid& grid, double fill) {
    GridField f;
    f.grid = grid;
    f.values.assign(static_cast<std::size_t>(grid.node_count), fill);
    return f;
}

GridField sample_field(const Grid& grid, const std::function<double(const double*)>& fn) {
    GridField f = make_field(grid);
    double x[3] = {0, 0, 0};
    std::array<int, 3> id{0, 0, 0};
    const int n = grid.points_per_axis;
    for (std::int64_t idx = 0; idx < grid.node_count; ++idx) {
        for (int k = 0; k < grid.dim; ++k) x[k] = grid.coord(id[k]);
        f[idx] = fn(x);
        for (int k = grid.dim - 1; k >= 0; --k) {  // odometer increment
            if (++id[k] < n) break;
            id[k] = 0;
        }
    }
    return f;
}

double integrate(const GridField& f) {
    const Grid& g = f.grid;
    if (g.boundary == Boundary::Periodic) {
        double s = 0.0;
        for (double v : f.values) s += v;
        return s * g.cell_volume();
    }
    double s = 0.0;
    for (std::int64_t idx = 0; idx < g.node_count; ++idx) s += g.node_weight(idx) * f[idx];
    return s;
}

double inner(const GridField& f, const GridField& g) {
    const Grid& gr = f.grid;
    if (gr.boundary == Boundary::Periodic) {
        double s = 0.0;
        for (std::int64_t i = 0; i < gr.node_count; ++i) s += f[i] * g[i];
        return s * gr.cell_volume();
    }
    double s = 0.0;
    for (std::int64_t i = 0; i < gr.node_count; ++i) s += gr.node_weight(i) * f[i] * g[i];
    return s;
}

double l2_norm(const GridField& f) { return std::sqrt(inner(f, f)); }

/*
 * Axis-line walker: for a given axis, the grid decomposes into independent
 * 1D lines.  A line is addressed by (outer, inner) with element j at
 * outer*n*stride + inner + j*stride.
 */
namespace {

template <typename LineFn>
void for_each_line(const Grid& g, int axis, LineFn&& fn) {
    const std::int64_t s = g.stride(axis);
    const std::int64_t n = g.points_per_axis;
    const std::int64_t outer_count = g.node_count / (n * s);
    for (std::int64_t outer = 0; outer < outer_count; ++outer)
        for (std::int64_t in = 0; in < s; ++in) fn(outer * n * s + in, s);
}

/* Product of 1D quadrature weights over all axes except `axis` for the line
 * containing node `base` (base has axis-index 0). */
double transverse_weight(const Grid& g, int axis, std::int64_t base) {
    if (g.boundary == Boundary::Periodic) {
        double w = 1.0;
        for (int k = 0; k < g.dim; ++k)
            if (k != axis) w *= g.spacing;
        return w;
    }
    const auto id = g.unravel(base);
    double w = 1.0;
    for (int k = 0; k < g.dim; ++k)
        if (k != axis) w *= g.weight1d(id[k]);
    return w;
}

}  // namespace

double gradient_sq_norm(const GridField& f) {
    const Grid& g = f.grid;
    const int n = g.points_per_axis;
    const double h = g.spacing;
    double total = 0.0;
    for (int axis = 0; axis < g.dim; ++axis) {
        double axis_sum = 0.0;
        for_each_line(g, axis, [&](std::int64_t base, std::int64_t s) {
            const double tw = transverse_weight(g, axis, base);
            double line = 0.0;
            if (g.boundary == Boundary::Periodic) {
                for (int j = 0; j < n; ++j) {
                    const double d =
                        f[base + ((j + 1) % n) * s] - f[base + static_cast<std::int64_t>(j) * s];
                    line += d * d;
                }
            } else {
                for (int j = 0; j + 1 < n; ++j) {
                    const double d =
                        f[base + (j + 1) * s] - f[base + static_cast<std::int64_t>(j) * s];
                    line += d * d;
                }
            }
            axis_sum += tw * line;
        });
        total += axis_sum / h;  // (d/h)^2 * h = d^2/h per edge
    }
    return total;
}

void apply_generator(const GridField& f, double a, GridField& out) {
    const Grid& g = f.grid;
    if (out.values.size() != f.values.size()) out = make_field(g);
    const int n = g.points_per_axis;
    const double c = a / (g.spacing * g.spacing);
    std::fill(out.values.begin(), out.values.end(), 0.0);
    for (int axis = 0; axis < g.dim; ++axis) {
        for_each_line(g, axis, [&](std::int64_t base, std::int64_t s) {
            if (g.boundary == Boundary::Periodic) {
                for (int j = 0; j < n; ++j) {
                    const double up = f[base + ((j + 1) % n) * s];
                    const double dn = f[base + ((j + n - 1) % n) * s];
                    out[base + static_cast<std::int64_t>(j) * s] +=
                        c * (up + dn - 2.0 * f[base + static_cast<std::int64_t>(j) * s]);
                }
            } else {
                for (int j = 1; j + 1 < n; ++j) {
                    const double up = f[base + (j + 1) * s];
                    const double dn = f[base + (j - 1) * s];
                    out[base + static_cast<std::int64_t>(j) * s] +=
                        c * (up + dn - 2.0 * f[base + static_cast<std::int64_t>(j) * s]);
                }
            }
        });
    }
    if (g.boundary == Boundary::Dirichlet) {
        /* zero every node of the boundary layer (lines along other axes may
         * have written there) */
        for (std::int64_t idx = 0; idx < g.node_count; ++idx)
            if (g.on_boundary(idx)) out[idx] = 0.0;
    }
}

GridField apply_generator(const GridField& f, double a) {
    GridField out = make_field(f.grid);
    apply_generator(f, a, out);
    return out;
}

double normalize_l2(GridField& f) {
    const double nrm = l2_norm(f);
    if (!(nrm > 0.0) || !std::isfinite(nrm))
        fail("NotNormalizable", "field has zero or non-finite L2 norm");
    const double inv = 1.0 / nrm;
    for (double& v : f.values) v *= inv;
    return nrm;
}

void zero_boundary(GridField& f) {
    const Grid& g = f.grid;
    if (g.boundary == Boundary::Periodic) return;
    for (std::int64_t idx = 0; idx < g.node_count; ++idx)
        if (g.on_boundary(idx)) f[idx] = 0.0;
}

}  // namespace gplab
