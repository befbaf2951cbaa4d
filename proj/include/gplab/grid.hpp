#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include "gplab/errors.hpp"

namespace gplab {

/*
 * Uniform tensor grid on the box [-L, L]^dim, dim in {1,2,3}.
 *
 * Dirichlet: nodes -L + i*h, i = 0..n-1, h = 2L/(n-1); fields are zero on the
 *            boundary layer (any axis index 0 or n-1); quadrature is the
 *            tensor trapezoid rule (per-axis weights h/2 at the ends).
 * Periodic:  nodes -L + i*h, i = 0..n-1, h = 2L/n, wrap-around neighbors;
 *            quadrature is the uniform rule (exact for the torus).
 *
 * The discrete calculus is built so that the summation-by-parts identity
 *   gradient_sq_norm(phi) == -integrate(phi * apply_generator(phi, a)) / a
 * holds to machine precision: apply_generator is the standard second
 * difference (zero output on the Dirichlet boundary) and gradient_sq_norm is
 * the edge-based forward-difference quadratic form that is its exact
 * negative Dirichlet form.
 */

enum class Boundary { Dirichlet, Periodic };

struct Grid {
    int dim = 0;
    double half_width = 0.0;
    int points_per_axis = 0;
    Boundary boundary = Boundary::Periodic;
    double spacing = 0.0;
    std::int64_t node_count = 0;

    double coord(int i) const { return -half_width + spacing * i; }

    double weight1d(int i) const {
        if (boundary == Boundary::Periodic) return spacing;
        return (i == 0 || i == points_per_axis - 1) ? 0.5 * spacing : spacing;
    }

    /* strides: last axis is contiguous */
    std::int64_t stride(int axis) const {
        std::int64_t s = 1;
        for (int k = dim - 1; k > axis; --k) s *= points_per_axis;
        return s;
    }

    std::array<int, 3> unravel(std::int64_t idx) const {
        std::array<int, 3> id{0, 0, 0};
        for (int k = dim - 1; k >= 0; --k) {
            id[k] = static_cast<int>(idx % points_per_axis);
            idx /= points_per_axis;
        }
        return id;
    }

    std::int64_t ravel(const std::array<int, 3>& id) const {
        std::int64_t idx = 0;
        for (int k = 0; k < dim; ++k) idx = idx * points_per_axis + id[k];
        return idx;
    }

    void node_coords(std::int64_t idx, double* x) const {
        const auto id = unravel(idx);
        for (int k = 0; k < dim; ++k) x[k] = coord(id[k]);
    }

    double node_weight(std::int64_t idx) const {
        if (boundary == Boundary::Periodic) return cell_volume();
        const auto id = unravel(idx);
        double w = 1.0;
        for (int k = 0; k < dim; ++k) w *= weight1d(id[k]);
        return w;
    }

    bool on_boundary(std::int64_t idx) const {
        if (boundary == Boundary::Periodic) return false;
        const auto id = unravel(idx);
        for (int k = 0; k < dim; ++k)
            if (id[k] == 0 || id[k] == points_per_axis - 1) return true;
        return false;
    }

    double cell_volume() const {
        double v = 1.0;
        for (int k = 0; k < dim; ++k) v *= spacing;
        return v;
    }
};

Grid build_grid(int dim, double half_width, int points_per_axis, Boundary boundary);

struct GridField {
    Grid grid;
    std::vector<double> values;

    double& operator[](std::int64_t i) { return values[static_cast<std::size_t>(i)]; }
    double operator[](std::int64_t i) const { return values[static_cast<std::size_t>(i)]; }
};

GridField make_field(const Grid& grid, double fill = 0.0);

/* Sample f(x) at every node; x points at grid.dim coordinates. */
GridField sample_field(const Grid& grid, const std::function<double(const double*)>& f);

/* Quadrature integral of the field over the box. */
double integrate(const GridField& f);

/* Quadrature inner product <f, g>. */
double inner(const GridField& f, const GridField& g);

/* Quadrature L2 norm. */
double l2_norm(const GridField& f);

/* Edge-based squared-gradient quadratic form, ||grad f||_2^2. */
double gradient_sq_norm(const GridField& f);

/* out = a * (discrete Laplacian of f); zero on the Dirichlet boundary. */
void apply_generator(const GridField& f, double a, GridField& out);
GridField apply_generator(const GridField& f, double a);

/* Scale the field so that its L2 norm is 1; returns the previous norm.
 * Error NotNormalizable if the field is (numerically) zero. */
double normalize_l2(GridField& f);

/* Zero the Dirichlet boundary layer in place (no-op for Periodic). */
void zero_boundary(GridField& f);

}  // namespace gplab
