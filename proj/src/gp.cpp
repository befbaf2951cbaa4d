#include "gplab/gp.hpp"

#include <algorithm>
#include <cmath>

#include "gplab/errors.hpp"

namespace gplab {

namespace {

void check_admissible(const Grid& grid, const GridField& phi, const TrapField& trap) {
    if (!trap.any_infinite) return;
    double worst = 0.0;
    for (int64_t i = 0; i < grid.node_count; ++i) {
        if (trap.infinite[i]) worst = std::max(worst, std::abs(phi.values[i]));
    }
    require(worst <= 1e-12, "InfiniteOverlap",
            "field does not vanish where the trap is infinite");
}

void project_admissible(const Grid& grid, GridField& phi, const TrapField& trap) {
    for (auto& x : phi.values) x = std::abs(x);
    if (trap.any_infinite) {
        for (int64_t i = 0; i < grid.node_count; ++i) {
            if (trap.infinite[i]) phi.values[i] = 0.0;
        }
    }
    if (grid.boundary == Boundary::Dirichlet) zero_boundary(phi);
}

double quartic_integral(const Grid& grid, const GridField& phi) {
    double s = 0.0;
    for (int64_t i = 0; i < grid.node_count; ++i) {
        double q = phi.values[i] * phi.values[i];
        s += q * q * grid.node_weight(i);
    }
    return s;
}

double energy_of(const Grid& grid, const GridField& phi, const TrapField& trap, double alpha) {
    double e = gradient_sq_norm(phi);
    for (int64_t i = 0; i < grid.node_count; ++i) {
        e += trap.values.values[i] * phi.values[i] * phi.values[i] * grid.node_weight(i);
    }
    e += 0.5 * alpha * quartic_integral(grid, phi);
    return e;
}

/* grad = -Lap phi + W phi + alpha phi^3 (zero on the Dirichlet boundary layer). */
void energy_gradient(const Grid& grid, const GridField& phi, const TrapField& trap, double alpha,
                     GridField& out) {
    apply_generator(phi, 1.0, out);
    for (int64_t i = 0; i < grid.node_count; ++i) {
        double p = phi.values[i];
        out.values[i] = -out.values[i] + trap.values.values[i] * p + alpha * p * p * p;
        if (trap.any_infinite && trap.infinite[i]) out.values[i] = 0.0;
    }
    if (grid.boundary == Boundary::Dirichlet) zero_boundary(out);
}

}  // namespace

GridField default_initial_profile(const Grid& grid, const TrapField& trap) {
    double sigma = std::max(0.5, grid.half_width / 4.0);
    GridField phi = sample_field(grid, [&](const double* x) {
        double r2 = 0.0;
        for (int k = 0; k < grid.dim; ++k) r2 += x[k] * x[k];
        return std::exp(-r2 / (2.0 * sigma * sigma));
    });
    project_admissible(grid, phi, trap);
    normalize_l2(phi);
    return phi;
}

MinimizeResult minimize_energy(const Grid& grid, const TrapField& trap, double alpha,
                               GridField init, const MinimizeOptions& opts) {
    require(alpha >= 0.0, "OutOfRange", "quartic coupling must be non-negative");
    require((int64_t)init.values.size() == grid.node_count, "ShapeMismatch",
            "initial field does not match the grid");

    MinimizeResult res;
    res.phi = std::move(init);
    project_admissible(grid, res.phi, trap);
    normalize_l2(res.phi);

    double w_max = 0.0;
    for (int64_t i = 0; i < grid.node_count; ++i) {
        if (!trap.any_infinite || !trap.infinite[i]) {
            w_max = std::max(w_max, std::abs(trap.values.values[i]));
        }
    }
    double phi_max = 0.0;
    for (double x : res.phi.values) phi_max = std::max(phi_max, std::abs(x));
    double h2 = grid.spacing * grid.spacing;
    double step = opts.step > 0.0
                      ? opts.step
                      : 0.9 / (4.0 * grid.dim / h2 + w_max + 3.0 * alpha * phi_max * phi_max);

    GridField grad = make_field(grid);
    GridField trial = make_field(grid);
    double energy = energy_of(grid, res.phi, trap, alpha);
    res.energy_trace.push_back(energy);

    int halvings = 0;
    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iter; ++iter) {
        energy_gradient(grid, res.phi, trap, alpha, grad);
        trial.values = res.phi.values;
        for (int64_t i = 0; i < grid.node_count; ++i) {
            trial.values[i] -= step * grad.values[i];
        }
        project_admissible(grid, trial, trap);
        normalize_l2(trial);
        double e_new = energy_of(grid, trial, trap, alpha);
        if (e_new > energy + 1e-13 * (1.0 + std::abs(energy))) {
            ++halvings;
            if (halvings > opts.max_halvings) {
                fail("StepTooLarge", "step halved past the limit without an energy decrease");
            }
            step *= 0.5;
            continue;
        }
        double decrease = energy - e_new;
        res.phi.values.swap(trial.values);
        energy = e_new;
        res.energy_trace.push_back(energy);
        if (decrease < opts.tol) {
            converged = true;
            ++iter;
            break;
        }
    }

    res.energy = energy;
    res.iterations = iter;
    res.converged = converged;

    energy_gradient(grid, res.phi, trap, alpha, grad);
    res.lambda = inner(res.phi, grad);
    double r2 = 0.0;
    for (int64_t i = 0; i < grid.node_count; ++i) {
        double r = grad.values[i] - res.lambda * res.phi.values[i];
        if (trap.any_infinite && trap.infinite[i]) r = 0.0;
        r2 += r * r * grid.node_weight(i);
    }
    res.residual = std::sqrt(r2);
    return res;
}

double gp_energy(const Grid& grid, const GridField& phi, const TrapField& trap, double alpha) {
    require(alpha >= 0.0, "OutOfRange", "quartic coupling must be non-negative");
    double n = l2_norm(phi);
    require(std::abs(n - 1.0) <= 1e-8, "NotNormalized", "field must have unit L2 norm");
    check_admissible(grid, phi, trap);
    return energy_of(grid, phi, trap, alpha);
}

GpSolution gp_minimize(const Grid& grid, const TrapSpec& trap, double alpha,
                       const MinimizeOptions& opts) {
    TrapField field = eval_trap(trap, grid);
    MinimizeResult r = minimize_energy(grid, field, alpha,
                                       default_initial_profile(grid, field), opts);
    GpSolution sol;
    sol.energy = r.energy;
    sol.phi = std::move(r.phi);
    sol.alpha = alpha;
    sol.iterations = r.iterations;
    sol.residual = r.residual;
    sol.lambda = r.lambda;
    sol.converged = r.converged;
    return sol;
}

}  // namespace gplab
