#include <cmath>
#include <cstdio>
#include <fstream>

#include "doctest.h"
#include "gplab/path_mc.hpp"
#include "gplab/potentials.hpp"
#include "test_util.hpp"

using namespace gplab;
using gplab_test::error_name_of;

namespace {

GridField normalized_gaussian_root(const Grid& grid, double s) {
    auto phi = sample_field(grid, [s](const double* x) {
        double r2 = 0.0;
        for (int k = 0; k < 3; ++k) r2 += x[k] * x[k];
        return std::exp(-0.25 * r2 / (s * s));
    });
    if (grid.boundary == Boundary::Dirichlet) zero_boundary(phi);
    normalize_l2(phi);
    return phi;
}

PathOptions base_opts(int dim, double beta, double dt, int n_paths, uint64_t seed) {
    PathOptions o;
    o.dim = dim;
    o.beta = beta;
    o.dt = dt;
    o.n_paths = n_paths;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_SUITE("path_mc") {

TEST_CASE("sampling is deterministic in the seed and storage-independent") {
    auto opts = base_opts(2, 1.5, 0.01, 40, 7);
    opts.store_paths = true;
    const auto a = sample_paths(opts);
    const auto b = sample_paths(opts);
    CHECK(a.paths == b.paths);
    CHECK(a.log_weights == b.log_weights);

    auto lean = opts;
    lean.store_paths = false;
    const auto c = sample_paths(lean);
    CHECK(c.has_paths == false);
    CHECK(c.log_weights == a.log_weights);  /* same draws either way */

    auto other = opts;
    other.seed = 8;
    CHECK(sample_paths(other).paths != a.paths);
}

TEST_CASE("untilted sampling carries zero girsanov weight") {
    const auto ens = sample_paths(base_opts(1, 2.0, 0.02, 16, 3));
    for (double w : ens.log_weights) CHECK(w == 0.0);
}

TEST_CASE("tilted weights average to one") {
    const auto grid = build_grid(1, 6.0, 97, Boundary::Periodic);
    const auto phi = normalized_gaussian_root(grid, 1.0);
    TiltField tilt(grid, phi, 1.0);

    auto opts = base_opts(1, 1.0, 0.005, 4000, 21);
    opts.tilt = &tilt;
    opts.start = StartKind::TiltStationary;
    const auto ens = sample_paths(opts);

    double m1 = 0.0, m2 = 0.0;
    for (double lw : ens.log_weights) {
        const double w = std::exp(lw);
        m1 += w;
        m2 += w * w;
    }
    const int n = ens.n_paths;
    m1 /= n;
    m2 /= n;
    const double se = std::sqrt(std::max(0.0, m2 - m1 * m1) / n);
    CHECK(std::fabs(m1 - 1.0) <= 3.0 * se + 1e-3);
}

TEST_CASE("occupation measure integrates to one") {
    const auto grid = build_grid(2, 4.0, 33, Boundary::Periodic);
    auto opts = base_opts(2, 1.0, 0.01, 50, 5);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);
    const auto occ = occupation_measure(grid, ens);
    CHECK(occ.clamped == 0);
    CHECK(integrate(occ.density) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("occupation requires stored paths and a matching dimension") {
    const auto grid = build_grid(1, 4.0, 33, Boundary::Periodic);
    auto opts = base_opts(1, 1.0, 0.01, 8, 5);
    opts.store_paths = false;
    const auto lean = sample_paths(opts);
    CHECK(error_name_of([&] { (void)occupation_measure(grid, lean); }) == "MissingPaths");

    auto opts2 = base_opts(2, 1.0, 0.01, 8, 5);
    opts2.store_paths = true;
    const auto wrong = sample_paths(opts2);
    CHECK(error_name_of([&] { (void)occupation_measure(grid, wrong); }) == "ShapeMismatch");
}

TEST_CASE("tilt field interpolation is exact on affine profiles") {
    const auto grid = build_grid(1, 2.0, 17, Boundary::Dirichlet);
    /* phi(x) = 3 + x is affine; multilinear interpolation reproduces it */
    auto phi = sample_field(grid, [](const double* x) { return 3.0 + x[0]; });
    TiltField tilt(grid, phi, 0.5);
    double b = 0.0;
    for (double x : {-1.3, -0.2, 0.77, 1.9}) {
        CHECK(tilt.value(&x) == doctest::Approx(3.0 + x).epsilon(1e-13));
        tilt.drift(&x, &b);
        /* drift = 2a phi'/phi */
        CHECK(b == doctest::Approx(2.0 * 0.5 / (3.0 + x)).epsilon(1e-12));
    }
}

TEST_CASE("tilt field interpolation is bilinear in 2d") {
    const auto grid = build_grid(2, 2.0, 9, Boundary::Dirichlet);
    auto phi = sample_field(grid, [](const double* x) { return 2.0 + 0.5 * x[0] - 0.25 * x[1]; });
    TiltField tilt(grid, phi, 1.0);
    const double pt[2] = {0.3, -0.8};
    CHECK(tilt.value(pt) == doctest::Approx(2.0 + 0.15 + 0.2).epsilon(1e-13));
    double b[2];
    tilt.drift(pt, b);
    const double val = 2.0 + 0.15 + 0.2;
    CHECK(b[0] == doctest::Approx(2.0 * 0.5 / val).epsilon(1e-12));
    CHECK(b[1] == doctest::Approx(2.0 * (-0.25) / val).epsilon(1e-12));
}

TEST_CASE("drift blows up where the profile vanishes") {
    const auto grid = build_grid(1, 2.0, 33, Boundary::Dirichlet);
    auto phi = sample_field(grid, [](const double* x) { return std::max(0.0, x[0]); });
    TiltField tilt(grid, phi, 1.0);
    double b = 0.0;
    const double left = -1.5;  /* phi = 0 on the whole left half */
    CHECK(error_name_of([&] { tilt.drift(&left, &b); }) == "DriftSingularity");
}

TEST_CASE("pair intersection mass of pinned paths hits the kernel peak") {
    /* hand-build an ensemble of two constant paths at distance r0 */
    const int steps = 10;
    PathEnsemble ens;
    ens.dim = 2;
    ens.beta = 1.0;
    ens.dt = 0.1;
    ens.a = 1.0;
    ens.n_paths = 2;
    ens.steps = steps;
    ens.seed = 0;
    ens.has_paths = true;
    ens.paths.assign(static_cast<size_t>(2) * (steps + 1) * 2, 0.0);
    for (int k = 0; k <= steps; ++k) {
        ens.paths[static_cast<size_t>(1 * (steps + 1) + k) * 2 + 0] = 0.2;  /* second path at (0.2, 0) */
    }
    Mollifier moll(MollifierSpec{0.5}, 2);
    const auto kernel = [&](double r) { return moll(r); };

    /* sum over (steps)^2 left endpoints of k(0.2) dt^2 / beta^2 */
    const double expect = moll(0.2) * steps * steps * 0.1 * 0.1 / (1.0 * 1.0);
    const double mass = pair_intersection_mass(ens, 0, 1, kernel, 0.5);
    CHECK(mass == doctest::Approx(expect).epsilon(1e-12));

    /* far-apart pair contributes nothing */
    for (int k = 0; k <= steps; ++k) {
        ens.paths[static_cast<size_t>(1 * (steps + 1) + k) * 2 + 0] = 3.0;
    }
    CHECK(pair_intersection_mass(ens, 0, 1, kernel, 0.5) == 0.0);
}

TEST_CASE("intersection statistics guard their resolution") {
    auto opts = base_opts(3, 0.5, 0.01, 8, 9);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);
    /* epsilon below 2 sqrt(2 a dt) is unresolved at this step size */
    CHECK(error_name_of([&] { (void)intersection_mass(ens, 0.05); }) == "EpsilonUnderresolved");
    const auto stats = intersection_mass(ens, 0.6);
    CHECK(stats.pairs == 4);
    CHECK(stats.epsilon == 0.6);
    CHECK(stats.mean >= 0.0);
    /* stride must divide the step count */
    CHECK(error_name_of([&] { (void)pair_intersection_mass(
                                  ens, 0, 1, [](double) { return 1.0; }, 1.0, 7); }) ==
          "OutOfRange");
}

TEST_CASE("mollification probe reports successive differences") {
    auto opts = base_opts(2, 1.0, 0.005, 12, 13);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);
    const auto probe = mollification_error_probe(ens, {0.9, 0.6, 0.4});
    REQUIRE(probe.epsilons.size() == 3);
    REQUIRE(probe.means.size() == 3);
    REQUIRE(probe.diffs.size() == 2);
    for (double d : probe.diffs) CHECK(d >= 0.0);
}

TEST_CASE("path dumps round-trip bitwise") {
    auto opts = base_opts(2, 1.0, 0.01, 6, 31);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);
    const std::string file = "paths_roundtrip.bin";
    dump_paths(ens, file);
    const auto back = load_paths(file);
    CHECK(back.dim == ens.dim);
    CHECK(back.beta == ens.beta);
    CHECK(back.dt == ens.dt);
    CHECK(back.seed == ens.seed);
    CHECK(back.paths == ens.paths);
    CHECK(back.log_weights == ens.log_weights);
    std::remove(file.c_str());
}

TEST_CASE("corrupt dumps are rejected") {
    auto opts = base_opts(1, 0.5, 0.01, 4, 2);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);
    const std::string file = "paths_corrupt.bin";
    dump_paths(ens, file);

    /* truncate */
    {
        std::ifstream in(file, std::ios::binary);
        std::string all((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
        std::ofstream out(file, std::ios::binary | std::ios::trunc);
        out.write(all.data(), static_cast<std::streamsize>(all.size() / 2));
    }
    CHECK(error_name_of([&] { (void)load_paths(file); }) == "CorruptDump");

    /* bad magic */
    dump_paths(ens, file);
    {
        std::fstream io(file, std::ios::binary | std::ios::in | std::ios::out);
        io.seekp(0);
        io.write("XXXXXXXX", 8);
    }
    CHECK(error_name_of([&] { (void)load_paths(file); }) == "CorruptDump");
    std::remove(file.c_str());
    CHECK(error_name_of([&] { (void)load_paths("no_such_dump.bin"); }) == "IoError");
}

TEST_CASE("diffusive scaling maps intersection masses exactly") {
    /* Under X'(t) = sqrt(theta) X(t/theta) on [0, theta beta] with the kernel
     * K'(w) = theta^{-d/2} K(w / sqrt(theta)), the unnormalized double time
     * integral of K' over the scaled pair equals theta^{2 - d/2} times the
     * original.  For theta = 4 every factor is a power of two, so the identity
     * holds bitwise; the beta^2-normalized masses then satisfy
     * mapped = theta^{-d/2} base. */
    const double theta = 4.0;
    const double root = 2.0;  /* sqrt(4) */
    auto opts = base_opts(2, 1.0, 0.0125, 8, 17);
    opts.store_paths = true;
    const auto ens = sample_paths(opts);

    PathEnsemble scaled = ens;
    for (auto& x : scaled.paths) x *= root;
    scaled.beta = theta * ens.beta;
    scaled.dt = theta * ens.dt;

    Mollifier moll(MollifierSpec{0.4}, 2);
    const auto kernel = [&](double r) { return moll(r); };
    const auto kernel_scaled = [&](double r) {
        return moll(r / root) / theta;  /* theta^{-d/2} = 1/4 in d = 2; exact ops */
    };

    for (int i = 0; i + 1 < ens.n_paths; i += 2) {
        const double base = pair_intersection_mass(ens, i, i + 1, kernel, 0.4);
        const double mapped =
            pair_intersection_mass(scaled, i, i + 1, kernel_scaled, 0.4 * root);
        CHECK(mapped == base / theta);  /* theta^{-d/2} with d = 2, bitwise */
        /* unnormalized masses carry the theta^{2 - d/2} factor */
        const double u_base = base * ens.beta * ens.beta;
        const double u_mapped = mapped * scaled.beta * scaled.beta;
        CHECK(u_mapped == theta * u_base);  /* theta^{2 - d/2} = theta in d = 2 */
    }
}

}  // TEST_SUITE
