#include <algorithm>
#include <cmath>

#include "doctest.h"
#include "gplab/dv_rate.hpp"
#include "gplab/spectral.hpp"
#include "test_util.hpp"

using namespace gplab;
using gplab_test::error_name_of;
using gplab_test::random_field;

namespace {

GridField gaussian_density(const Grid& grid, double s) {
    auto mu = sample_field(grid, [s](const double* x) {
        double r2 = 0.0;
        for (int k = 0; k < 3; ++k) r2 += x[k] * x[k];
        return std::exp(-0.5 * r2 / (s * s));
    });
    /* exact unit mass under the grid quadrature */
    const double z = integrate(mu);
    for (auto& v : mu.values) v /= z;
    return mu;
}

}  // namespace

TEST_SUITE("dv_rate") {

TEST_CASE("constant fields are fixed points of the cumulant") {
    const double c = -0.7, dt = 0.05;
    for (auto boundary : {Boundary::Periodic, Boundary::Dirichlet}) {
        const auto grid = build_grid(1, 4.0, 33, boundary);
        for (auto stepper : {MgfStepper::Splitting, MgfStepper::BackwardEuler}) {
            MgfOptions opts;
            opts.stepper = stepper;
            opts.dt = dt;
            auto f = make_field(grid, c);
            const auto res = log_mgf(grid, f, 3.0, opts);
            if (stepper == MgfStepper::Splitting) {
                /* exp(c dt) factors out of every substep, so conditioning
                 * cancels it exactly */
                CHECK(res.lambda == doctest::Approx(c).epsilon(1e-12));
            } else {
                /* the resolvent turns a constant into -log(1 - dt c)/dt;
                 * conditioning cannot cancel the O(dt) defect because the
                 * diffusion part is rescaled by 1/(1 - dt c) */
                CHECK(res.lambda == doctest::Approx(-std::log1p(-dt * c) / dt)
                                        .epsilon(boundary == Boundary::Periodic ? 1e-12 : 1e-4));
                CHECK(std::fabs(res.lambda - c) < c * c * dt);
            }

            auto zero = make_field(grid, 0.0);
            CHECK(log_mgf(grid, zero, 3.0, opts).lambda == doctest::Approx(0.0).epsilon(1e-12));
        }
    }
}

TEST_CASE("cumulant is convex along random directions") {
    const auto grid = build_grid(1, 3.0, 25, Boundary::Periodic);
    const auto f = random_field(grid, 11);
    const auto g = random_field(grid, 12);
    MgfOptions opts;
    opts.dt = 0.05;
    const double beta = 2.0;
    for (double t : {0.25, 0.5, 0.75}) {
        GridField mix = f;
        for (size_t i = 0; i < mix.values.size(); ++i)
            mix.values[i] = (1.0 - t) * f.values[i] + t * g.values[i];
        const double lhs = log_mgf(grid, mix, beta, opts).lambda;
        const double rhs = (1.0 - t) * log_mgf(grid, f, beta, opts).lambda +
                           t * log_mgf(grid, g, beta, opts).lambda;
        CHECK(lhs <= rhs + 1e-10);
    }
}

TEST_CASE("rate value satisfies the dual identity at its witness") {
    const auto grid = build_grid(1, 4.0, 41, Boundary::Periodic);
    const auto mu = gaussian_density(grid, 1.0);
    RateOptions opts;
    opts.dt = 0.1;
    opts.tol = 1e-3;
    const double beta = 6.0;
    const auto res = rate_J(grid, mu, beta, opts);
    CHECK(res.converged);
    MgfOptions mg;
    mg.dt = opts.dt;
    const double lam = log_mgf(grid, res.f, beta, mg).lambda;
    CHECK(res.value == doctest::Approx(inner(mu, res.f) - lam).epsilon(1e-10));
}

TEST_CASE("rate dominates every duality test field") {
    const auto grid = build_grid(1, 4.0, 33, Boundary::Periodic);
    const auto mu = gaussian_density(grid, 1.2);
    RateOptions opts;
    opts.dt = 0.1;
    opts.tol = 1e-3;
    const double beta = 5.0;
    const auto res = rate_J(grid, mu, beta, opts);
    MgfOptions mg;
    mg.dt = opts.dt;
    for (int trial = 0; trial < 20; ++trial) {
        auto f = random_field(grid, 100 + trial, -0.5, 0.5);
        const double pairing = inner(mu, f) - log_mgf(grid, f, beta, mg).lambda;
        CHECK(res.value >= pairing - 1e-10);
    }
}

TEST_CASE("stationary density has rate zero") {
    const auto grid = build_grid(1, 3.0, 25, Boundary::Periodic);
    /* uniform density is invariant for the periodic diffusion */
    auto mu = make_field(grid, 1.0);
    const double z = integrate(mu);
    for (auto& v : mu.values) v /= z;
    const auto res = rate_J(grid, mu, 4.0, {});
    CHECK(res.value == doctest::Approx(0.0).epsilon(1e-8));
}

TEST_CASE("large beta rate approaches the gradient form of the root density") {
    const auto grid = build_grid(1, 5.0, 81, Boundary::Periodic);
    const double a = 1.0;
    const auto mu = gaussian_density(grid, 1.0);
    GridField root = mu;
    for (auto& v : root.values) v = std::sqrt(v);
    const double target = a * gradient_sq_norm(root);

    RateOptions opts;
    opts.dt = 0.1;
    opts.tol = 5e-4;
    opts.max_iter = 800;
    const auto res = rate_J(grid, mu, 25.0, opts);
    CHECK(res.value == doctest::Approx(target).epsilon(0.08));
    /* the cumulant is a chord slope of a convex function of beta, hence
     * increasing in beta; the rate therefore decreases toward its limit */
    const auto res_low = rate_J(grid, mu, 8.0, opts);
    CHECK(res.value < res_low.value + 1e-3);
}

TEST_CASE("maximum-principle witness bound holds") {
    const auto grid = build_grid(1, 4.0, 41, Boundary::Dirichlet);
    auto phi = sample_field(grid, [](const double* x) { return std::exp(-x[0] * x[0]); });
    zero_boundary(phi);
    for (double c : {0.05, 1.0}) {
        const auto rep = witness_bound_check(grid, phi, c, 4.0, 0.05);
        CHECK(rep.holds);
        CHECK(rep.margin >= -1e-10);
        const double mx = *std::max_element(phi.values.begin(), phi.values.end());
        CHECK(rep.bound == doctest::Approx(std::log((c + mx) / c) / 4.0).epsilon(1e-12));
    }
}

TEST_CASE("beta-damped trap cumulant recovers the ground eigenvalue") {
    const auto grid = build_grid(1, 6.0, 97, Boundary::Dirichlet);
    const auto trap = eval_trap({TrapKind::Harmonic, {1.0}}, grid);
    const auto eig = lambda0_inverse_power(grid, trap.values, 1.0);
    GridField f = trap.values;
    for (auto& v : f.values) v = -v;
    MgfOptions opts;
    opts.dt = 0.02;
    opts.normalization = MgfNormalization::Raw;
    opts.init = MgfInit::PointCenter;
    const auto res = log_mgf(grid, f, 50.0, opts);
    /* exp(beta(aLap - W)) mass decays like exp(-beta lambda0) */
    CHECK(-res.lambda == doctest::Approx(eig.lambda0).epsilon(0.02));
}

TEST_CASE("variational energy at alpha 0 meets the eigenvalue from above") {
    const auto grid = build_grid(1, 6.0, 61, Boundary::Dirichlet);
    const auto trap = eval_trap({TrapKind::Harmonic, {1.0}}, grid);
    const auto eig = lambda0_inverse_power(grid, trap.values, 1.0);
    ChiBetaOptions opts;
    opts.rate.dt = 0.1;
    opts.rate.tol = 2e-3;
    opts.tol = 1e-4;
    const auto res = chi_otimes_beta(grid, trap, 0.0, 30.0, opts);
    CHECK(res.value == doctest::Approx(eig.lambda0).epsilon(0.05));
}

TEST_CASE("variational energy is nondecreasing in alpha") {
    const auto grid = build_grid(1, 5.0, 51, Boundary::Dirichlet);
    const auto trap = eval_trap({TrapKind::Harmonic, {1.0}}, grid);
    ChiBetaOptions opts;
    opts.rate.dt = 0.1;
    opts.rate.tol = 2e-3;
    opts.tol = 1e-4;
    double prev = -1.0;
    for (double alpha : {0.0, 1.0, 4.0}) {
        const auto res = chi_otimes_beta(grid, trap, alpha, 20.0, opts);
        CHECK(res.value >= prev - 5e-3);
        prev = res.value;
    }
}

TEST_CASE("rate input validation") {
    const auto grid = build_grid(1, 3.0, 25, Boundary::Periodic);
    auto mu = make_field(grid, 1.0);  /* mass 6, not a probability density */
    CHECK(error_name_of([&] { (void)rate_J(grid, mu, 2.0, {}); }) == "NotNormalized");
    auto neg = gaussian_density(grid, 1.0);
    neg.values[3] = -neg.values[3] - 1e-3;
    CHECK(error_name_of([&] { (void)rate_J(grid, neg, 2.0, {}); }) != "");
}

}  // TEST_SUITE
