#include <cmath>
#include <vector>

#include "doctest.h"
#include "gplab/scattering.hpp"
#include "test_util.hpp"

using namespace gplab;
using gplab_test::error_name_of;

namespace {

/* Closed form for a 3d square barrier v = g on [0, a]:
 * u'' = (g/2) u inside, linear outside; alpha = a - tanh(k a)/k, k = sqrt(g/2). */
double barrier_alpha_3d(double g, double a) {
    const double k = std::sqrt(0.5 * g);
    return a - std::tanh(k * a) / k;
}

/* Closed form for a 2d square barrier: psi = I0(k r) inside, A + B log r
 * outside; alpha = a * exp(-I0(k a) / (k a I1(k a))). */
double barrier_alpha_2d(double g, double a) {
    const double k = std::sqrt(0.5 * g);
    const double i0 = std::cyl_bessel_i(0.0, k * a);
    const double i1 = std::cyl_bessel_i(1.0, k * a);
    return a * std::exp(-i0 / (k * a * i1));
}

InteractionSpec square_barrier(double g, double a) {
    return {InteractionKind::TruncatedInverse, {g, 0.0, 1e8, a}};
}

}  // namespace

TEST_SUITE("scattering") {

TEST_CASE("hard sphere short-circuits to the exact core radius") {
    const InteractionSpec v{InteractionKind::HardSphere, {0.37, 1e8}};
    const auto r3 = scattering_length_3d(v, 8.0, 256);
    CHECK(r3.alpha_tilde == 0.37);
    CHECK(r3.method == ScatteringMethod::HardSphereClosedForm);
    CHECK(std::isinf(r3.born));
    CHECK(std::isinf(r3.born_measure));

    const auto r2 = scattering_length_2d(v, 2.0, 50.0, 512);
    CHECK(r2.alpha_tilde == 0.37);
    CHECK(r2.method == ScatteringMethod::HardSphereClosedForm);
}

TEST_CASE("3d square barrier matches the tanh closed form") {
    const double g = 3.0, a = 1.25;
    const auto res = scattering_length_3d(square_barrier(g, a), 4.0, 8192);
    const double exact = barrier_alpha_3d(g, a);
    CHECK(res.method == ScatteringMethod::Ode3d);
    CHECK(res.alpha_tilde == doctest::Approx(exact).epsilon(1e-9));
    /* first-order value (volume integral of the kernel) bounds the true
     * length from above for a repulsive kernel */
    CHECK(res.born_measure > res.alpha_tilde);
    CHECK(res.born == doctest::Approx(g * a / (8.0 * M_PI)).epsilon(1e-12));
    CHECK(res.born_measure == doctest::Approx(g * a * a * a / 6.0).epsilon(1e-10));
}

TEST_CASE("3d ode error shrinks at fourth order under mesh refinement") {
    const InteractionSpec v{InteractionKind::Gaussian, {1.5, 0.4}};
    const double ref = scattering_length_3d(v, 6.0, 32768).alpha_tilde;
    const double e_coarse = std::fabs(scattering_length_3d(v, 6.0, 128).alpha_tilde - ref);
    const double e_fine = std::fabs(scattering_length_3d(v, 6.0, 512).alpha_tilde - ref);
    CHECK(e_coarse < 1e-6);
    CHECK(e_fine < e_coarse / 32.0);
}

TEST_CASE("2d square barrier matches the Bessel closed form") {
    const double g = 2.0, a = 0.8;
    const auto res = scattering_length_2d(square_barrier(g, a), 1.0, 200.0, 65536);
    const double exact = barrier_alpha_2d(g, a);
    CHECK(res.method == ScatteringMethod::Shooting2d);
    CHECK(res.alpha_tilde == doctest::Approx(exact).epsilon(1e-4));
}

TEST_CASE("3d gaussian kernel: ode result sits below its first-order value") {
    const InteractionSpec v{InteractionKind::Gaussian, {1.5, 0.4}};
    const auto res = scattering_length_3d(v, 6.0, 8192);
    CHECK(res.alpha_tilde > 0.0);
    CHECK(res.alpha_tilde < res.born_measure);
}

TEST_CASE("born integrals of a gaussian match closed forms") {
    const double g = 1.3, s = 0.6;
    const InteractionSpec v{InteractionKind::Gaussian, {g, s}};
    /* int_0^inf g e^{-r^2/2s^2} dr = g s sqrt(pi/2) */
    const double flat = g * s * std::sqrt(M_PI / 2.0) / (8.0 * M_PI);
    CHECK(born_alpha(v) == doctest::Approx(flat).epsilon(1e-10));
    /* int_{R^d} g e^{-|x|^2/2s^2} dx = g (2 pi s^2)^{d/2} */
    const double m2 = g * 2.0 * M_PI * s * s / (8.0 * M_PI);
    const double m3 = g * std::pow(2.0 * M_PI * s * s, 1.5) / (8.0 * M_PI);
    CHECK(born_alpha_measure(v, 2) == doctest::Approx(m2).epsilon(1e-10));
    CHECK(born_alpha_measure(v, 3) == doctest::Approx(m3).epsilon(1e-10));
    CHECK(mean_field_coupling(v, 2) == doctest::Approx(8.0 * M_PI * m2).epsilon(1e-10));
    CHECK(mean_field_coupling(v, 3) == doctest::Approx(8.0 * M_PI * m3).epsilon(1e-10));
}

TEST_CASE("kernel with a fat tail at r_max is rejected") {
    const InteractionSpec v{InteractionKind::Gaussian, {1.0, 5.0}};
    CHECK(error_name_of([&] { (void)scattering_length_3d(v, 6.0, 512); }) ==
          "UnsupportedPotential");
}

TEST_CASE("zero kernel has no 2d scattering length") {
    const InteractionSpec v{InteractionKind::Gaussian, {0.0, 1.0}};
    CHECK(error_name_of([&] { (void)scattering_length_2d(v, 1.0, 50.0, 512); }) ==
          "DegenerateFormula");
}

TEST_CASE("parameter validation") {
    const InteractionSpec v{InteractionKind::Gaussian, {1.0, 0.3}};
    CHECK(error_name_of([&] { (void)scattering_length_3d(v, -1.0, 512); }) == "OutOfRange");
    CHECK(error_name_of([&] { (void)scattering_length_3d(v, 4.0, 4); }) == "OutOfRange");
    CHECK(error_name_of([&] { (void)scattering_length_2d(v, 3.0, 2.0, 512); }) == "OutOfRange");
    /* int_0^2 r^{-1/2} dr = 2 sqrt(2); int_0^2 r^{-1} dr diverges */
    const InteractionSpec soft{InteractionKind::TruncatedInverse, {1.0, 0.5, 1e12, 2.0}};
    CHECK(born_alpha(soft) ==
          doctest::Approx(2.0 * std::sqrt(2.0) / (8.0 * M_PI)).epsilon(1e-8));
    const InteractionSpec hard{InteractionKind::TruncatedInverse, {1.0, 1.0, 1e12, 2.0}};
    CHECK(error_name_of([&] { (void)born_alpha(hard); }) == "DivergentIntegral");
}

}  // TEST_SUITE
