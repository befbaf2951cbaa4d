#include <cmath>

#include "doctest.h"
#include "gplab/dv_rate.hpp"
#include "gplab/free_energy.hpp"
#include "gplab/hartree.hpp"
#include "test_util.hpp"

using namespace gplab;
using gplab_test::error_name_of;

TEST_SUITE("free_energy") {

TEST_CASE("free dynamics with no trap and no kernel has zero free energy") {
    const TrapSpec wide_box{TrapKind::Box, {1e6}};
    const InteractionSpec off{InteractionKind::Gaussian, {0.0, 1.0}};
    EnsembleOptions opts;
    opts.n_samples = 64;
    opts.dt = 0.05;
    opts.seed = 4;
    const auto est = estimate_F(1, wide_box, off, 2, 1.0, opts);
    CHECK(est.value == 0.0);
    CHECK(est.std_err == 0.0);
    CHECK(est.ess == doctest::Approx(64.0).epsilon(1e-12));
    CHECK(est.n_samples == 64);
    CHECK(est.tilted == false);
}

TEST_CASE("single-particle estimate matches the feynman-kac cumulant") {
    /* -(1/beta) log E_0[ exp(-int W) ] computed two ways: by monte carlo over
     * paths from the origin, and by the deterministic evolution with f = -W
     * from a point mass. */
    const double beta = 2.0;
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    const InteractionSpec off{InteractionKind::Gaussian, {0.0, 1.0}};

    EnsembleOptions opts;
    opts.n_samples = 20000;
    opts.dt = 0.005;
    opts.seed = 11;
    const auto mc = estimate_F(1, trap, off, 1, beta, opts);

    const auto grid = build_grid(1, 8.0, 257, Boundary::Dirichlet);
    const auto tf = eval_trap(trap, grid);
    GridField f = tf.values;
    for (auto& v : f.values) v = -v;
    MgfOptions mg;
    mg.dt = 0.005;
    mg.init = MgfInit::PointCenter;
    mg.normalization = MgfNormalization::Raw;
    const double fk = -log_mgf(grid, f, beta, mg).lambda;

    CHECK(std::fabs(mc.value - fk) <= 3.0 * mc.std_err + 0.02);
}

TEST_CASE("tilted and direct estimates agree within errors") {
    const double beta = 1.5;
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    const InteractionSpec v{InteractionKind::Gaussian, {0.8, 0.5}};

    EnsembleOptions direct;
    direct.n_samples = 8000;
    direct.dt = 0.01;
    direct.seed = 5;
    const auto d = estimate_F(1, trap, v, 2, beta, direct);

    const auto grid = build_grid(1, 7.0, 129, Boundary::Dirichlet);
    const auto sol = hartree_minimize(grid, trap, v, 2);
    REQUIRE(sol.converged);

    EnsembleOptions tilted = direct;
    tilted.seed = 6;
    tilted.sampling = Sampling::GirsanovTilted;
    tilted.tilt_grid = &grid;
    tilted.tilt_phi = &sol.state.orbitals[0];
    /* ground-state tilts have marginally square-integrable weights (the
     * terminal 1/phi factor balances the tilted terminal density exactly),
     * so the effective sample size sits at a small fraction of n_samples;
     * lower the guard floor and let the standard error carry the cost */
    tilted.ess_floor = 1e-4;
    const auto t = estimate_F(1, trap, v, 2, beta, tilted);
    CHECK(t.tilted);
    CHECK(t.ess > 10.0);

    const double gap = std::fabs(d.value - t.value);
    const double se = std::hypot(d.std_err, t.std_err);
    CHECK(gap <= 3.0 * se + 0.02);
}

TEST_CASE("estimates are deterministic in the seed") {
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    const InteractionSpec v{InteractionKind::Gaussian, {0.6, 0.6}};
    EnsembleOptions opts;
    opts.n_samples = 200;
    opts.dt = 0.02;
    opts.seed = 39;
    const auto e1 = estimate_F(2, trap, v, 2, 1.0, opts);
    const auto e2 = estimate_F(2, trap, v, 2, 1.0, opts);
    CHECK(e1.value == e2.value);
    CHECK(e1.std_err == e2.std_err);
    CHECK(e1.log_mean == e2.log_mean);

    const auto g1 = estimate_G(2, trap, 2, 1.0, {0.6, 0.4}, opts);
    const auto g2 = estimate_G(2, trap, 2, 1.0, {0.6, 0.4}, opts);
    CHECK(g1.value == g2.value);
    REQUIRE(g1.at_eps.size() == g2.at_eps.size());
    for (size_t k = 0; k < g1.at_eps.size(); ++k) {
        CHECK(g1.at_eps[k].value == g2.at_eps[k].value);
        CHECK(g1.at_eps[k].std_err == g2.at_eps[k].std_err);
    }
}

TEST_CASE("mollified estimate reports the widths it used") {
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    EnsembleOptions opts;
    opts.n_samples = 400;
    opts.dt = 0.005;
    opts.seed = 9;
    const auto g = estimate_G(1, trap, 2, 1.0, {0.8, 0.5, 0.3}, opts);
    REQUIRE(g.epsilons.size() == 3);
    /* widths are reported in the order given */
    CHECK(g.epsilons[0] == 0.8);
    CHECK(g.epsilons[1] == 0.5);
    CHECK(g.epsilons[2] == 0.3);
    REQUIRE(g.at_eps.size() == 3);
    for (const auto& e : g.at_eps) CHECK(std::isfinite(e.value));
    CHECK(std::isfinite(g.value));
}

TEST_CASE("an ess floor near one rejects any genuine weight spread") {
    const auto grid = build_grid(1, 6.0, 97, Boundary::Dirichlet);
    auto phi = sample_field(grid, [](const double* x) {
        return std::exp(-0.5 * x[0] * x[0]);
    });
    zero_boundary(phi);
    normalize_l2(phi);

    EnsembleOptions opts;
    opts.n_samples = 50;
    opts.dt = 0.01;
    opts.seed = 3;
    opts.sampling = Sampling::GirsanovTilted;
    opts.tilt_grid = &grid;
    opts.tilt_phi = &phi;
    opts.ess_floor = 0.9999;  /* effectively demand equal weights */
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    const InteractionSpec off{InteractionKind::Gaussian, {0.0, 1.0}};
    CHECK(error_name_of([&] { (void)estimate_F(1, trap, off, 2, 2.0, opts); }) ==
          "DegenerateWeights");
}

TEST_CASE("unresolvable rescaled kernels are rejected") {
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    /* width s/N = 0.002 is far below the step resolution sqrt(2 dt) */
    const InteractionSpec v{InteractionKind::Gaussian, {1.0, 0.016}};
    EnsembleOptions opts;
    opts.n_samples = 16;
    opts.dt = 0.05;
    CHECK(error_name_of([&] { (void)estimate_F(1, trap, v, 8, 1.0, opts); }) ==
          "KernelUnresolved");
}

TEST_CASE("mollified estimate rejects unresolved widths and bad input") {
    const TrapSpec trap{TrapKind::Harmonic, {1.0}};
    EnsembleOptions opts;
    opts.n_samples = 16;
    opts.dt = 0.05;
    CHECK(error_name_of([&] { (void)estimate_G(1, trap, 2, 1.0, {0.01, 0.005}, opts); }) ==
          "EpsilonUnderresolved");
    CHECK(error_name_of([&] { (void)estimate_G(1, trap, 2, 1.0, {0.5}, opts); }) ==
          "OutOfRange");
}

}  // TEST_SUITE
