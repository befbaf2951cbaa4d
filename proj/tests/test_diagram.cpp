#include <cmath>

#include "doctest.h"
#include "gplab/diagram.hpp"
#include "gplab/spectral.hpp"
#include "test_util.hpp"

using namespace gplab;
using gplab_test::error_name_of;

TEST_SUITE("diagram") {

TEST_CASE("extrapolation recovers an exact 1/x law") {
    const std::vector<double> xs{2.0, 4.0, 8.0, 16.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(3.0 + 2.0 / x);
    const auto res = extrapolate(xs, ys, ExtrapModel::InverseX);
    CHECK(res.limit == doctest::Approx(3.0).epsilon(1e-10));
    CHECK(res.coefficient == doctest::Approx(2.0).epsilon(1e-10));
    CHECK(res.residual < 1e-10);
}

TEST_CASE("extrapolation recovers an exact 1/x^2 law") {
    const std::vector<double> xs{1.0, 2.0, 3.0, 5.0};
    std::vector<double> ys;
    for (double x : xs) ys.push_back(-1.5 + 0.7 / (x * x));
    const auto res = extrapolate(xs, ys, ExtrapModel::InverseXSq);
    CHECK(res.limit == doctest::Approx(-1.5).epsilon(1e-10));
    CHECK(res.coefficient == doctest::Approx(0.7).epsilon(1e-10));
}

TEST_CASE("constant data extrapolates to itself with zero residual") {
    const std::vector<double> xs{1.0, 2.0, 4.0};
    const std::vector<double> ys{5.0, 5.0, 5.0};
    const auto res = extrapolate(xs, ys, ExtrapModel::InverseX);
    CHECK(res.limit == doctest::Approx(5.0).epsilon(1e-12));
    CHECK(res.residual <= 1e-12);
}

TEST_CASE("small noise perturbs the limit mildly") {
    const std::vector<double> xs{2.0, 4.0, 8.0, 16.0, 32.0};
    std::vector<double> ys;
    int sign = 1;
    for (double x : xs) {
        ys.push_back(1.0 + 4.0 / x + sign * 1e-3);
        sign = -sign;
    }
    const auto res = extrapolate(xs, ys, ExtrapModel::InverseX);
    CHECK(std::fabs(res.limit - 1.0) < 5e-3);
    CHECK(res.residual > 0.0);
}

TEST_CASE("extrapolation input validation") {
    CHECK(error_name_of([] {
              (void)extrapolate({1.0, 2.0}, {0.0, 0.0}, ExtrapModel::InverseX);
          }) == "TooFewPoints");
    CHECK(error_name_of([] {
              (void)extrapolate({1.0, 2.0, 3.0}, {0.0, 0.0}, ExtrapModel::InverseX);
          }) == "ShapeMismatch");
    CHECK(error_name_of([] {
              (void)extrapolate({3.0, 2.0, 4.0}, {0.0, 0.0, 0.0}, ExtrapModel::InverseX);
          }) == "OutOfRange");
    CHECK(error_name_of([] {
              (void)extrapolate({-1.0, 2.0, 4.0}, {0.0, 0.0, 0.0}, ExtrapModel::InverseX);
          }) == "OutOfRange");
}

TEST_CASE("decoupled system commutes: both routes hit the linear ground energy") {
    /* With a zero pair kernel both limits collapse onto the trap eigenvalue,
     * so the whole consistency check must pass on a cheap 1d grid.  Periodic
     * boundary matters: the conditioned cumulant divides out the free-
     * evolution mass, which is conserved there; on a Dirichlet grid that
     * mass decays at the free ground energy and shifts the large-beta limit
     * down by it. */
    DiagramConfig cfg;
    cfg.dim = 1;
    cfg.half_width = 6.0;
    cfg.points_per_axis = 49;
    cfg.boundary = Boundary::Periodic;
    cfg.trap = {TrapKind::Harmonic, {1.0}};
    cfg.interaction = {InteractionKind::Gaussian, {0.0, 1.0}};
    cfg.betas = {6.0, 12.0, 24.0};
    cfg.particle_counts = {1, 2, 4};
    cfg.alpha_variant = AlphaVariant::Coupling;
    cfg.tolerance = 0.05;
    cfg.chi.rate.dt = 0.1;
    cfg.chi.rate.tol = 2e-3;
    cfg.chi.tol = 1e-4;

    const auto rep = run_diagram(cfg);
    CHECK(rep.alpha_used == 0.0);
    CHECK(!rep.partial);
    CHECK(rep.path_a.ran);
    CHECK(rep.path_b.ran);

    const auto grid = build_grid(1, 6.0, 49, Boundary::Periodic);
    const auto tf = eval_trap(cfg.trap, grid);
    const double lam0 = lambda0_inverse_power(grid, tf.values, 1.0).lambda0;

    CHECK(rep.chi_gp == doctest::Approx(lam0).epsilon(1e-6));
    CHECK(rep.path_b.limit == doctest::Approx(lam0).epsilon(1e-6));
    CHECK(rep.path_a.limit == doctest::Approx(lam0).epsilon(0.02));
    CHECK(rep.path_a.verdict);
    CHECK(rep.path_b.verdict);
    CHECK(rep.commute_ok);
}

TEST_CASE("a failing sweep yields a partial report with a note") {
    DiagramConfig cfg;
    cfg.dim = 1;
    cfg.half_width = 5.0;
    cfg.points_per_axis = 33;
    cfg.boundary = Boundary::Dirichlet;
    cfg.trap = {TrapKind::Harmonic, {1.0}};
    cfg.interaction = {InteractionKind::Gaussian, {0.5, 0.5}};
    cfg.betas = {4.0, 8.0, 16.0};
    cfg.particle_counts = {1, 2, 4};
    cfg.chi.rate.dt = 0.1;
    cfg.chi.rate.tol = 2e-3;
    cfg.chi.tol = 1e-4;
    /* sabotage route b: a single scf sweep cannot converge */
    cfg.hartree.max_sweeps = 1;
    cfg.hartree.tol = 1e-14;

    const auto rep = run_diagram(cfg);
    CHECK(rep.partial);
    CHECK(!rep.path_b.ran);
    CHECK(rep.path_a.ran);  /* the other route still completes */
    REQUIRE(!rep.notes.empty());
    bool mentions_b = false;
    for (const auto& n : rep.notes) {
        if (n.find("particle sweep") != std::string::npos) mentions_b = true;
    }
    CHECK(mentions_b);
    CHECK(!rep.commute_ok);
}

TEST_CASE("alpha variants are all reported") {
    DiagramConfig cfg;
    cfg.dim = 1;
    cfg.half_width = 5.0;
    cfg.points_per_axis = 33;
    cfg.boundary = Boundary::Dirichlet;
    cfg.trap = {TrapKind::Harmonic, {1.0}};
    cfg.interaction = {InteractionKind::Gaussian, {1.0, 0.5}};
    cfg.betas = {4.0, 8.0, 16.0};
    cfg.particle_counts = {1, 2};
    cfg.alpha_variant = AlphaVariant::Born;
    cfg.chi.rate.dt = 0.1;
    cfg.chi.rate.tol = 5e-3;
    cfg.chi.tol = 1e-3;

    const auto rep = run_diagram(cfg);
    /* flat radial integral: g s sqrt(pi/2) / (8 pi) */
    const double born = 1.0 * 0.5 * std::sqrt(M_PI / 2.0) / (8.0 * M_PI);
    CHECK(rep.alpha_born == doctest::Approx(born).epsilon(1e-8));
    CHECK(rep.alpha_used == doctest::Approx(born).epsilon(1e-12));
    /* coupling in 1d: g sqrt(2 pi) s */
    CHECK(rep.alpha_coupling ==
          doctest::Approx(std::sqrt(2.0 * M_PI) * 0.5).epsilon(1e-8));
    CHECK(rep.alpha_born_measure > 0.0);
}

}  // TEST_SUITE
