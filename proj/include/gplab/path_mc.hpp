#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "gplab/grid.hpp"
#include "gplab/rng.hpp"

namespace gplab {

/*
 * Euler-Maruyama sampling of the diffusion dX = b(X) dt + sqrt(2a) dB with
 * per-path log importance weights against the driftless reference measure:
 * each step contributes the exact log-ratio of the discrete Gaussian
 * transition kernels,
 *
 *   log dP/dP^b  +=  ( |dX - b dt|^2 - |dX|^2 ) / (4 a dt),
 *
 * so exp(log_weight) has mean one under the tilted measure exactly, step by
 * step.  Paths are reproducible: path i uses the RNG stream derived from
 * (seed, i), independent of whether positions are stored.
 */

/* Drift 2a grad(phi)/phi from a non-negative grid field by multilinear
 * interpolation (exact for linear fields).  Positions are wrapped into the
 * box for periodic grids and clamped for Dirichlet grids. */
class TiltField {
public:
    TiltField() = default;
    TiltField(const Grid& grid, const GridField& phi, double a);

    bool active() const { return phi_ != nullptr; }
    const Grid& grid() const { return *grid_; }
    /* interpolated phi at x; DriftSingularity if below 1e-12 * max phi */
    double value(const double* x) const;
    void drift(const double* x, double* b) const;
    /* node sampling density phi^2 w (cumulative), for stationary starts */
    const std::vector<double>& start_cdf() const;

private:
    const Grid* grid_ = nullptr;
    const GridField* phi_ = nullptr;
    double a_ = 1.0;
    double phi_max_ = 0.0;
    mutable std::vector<double> cdf_;
};

enum class StartKind { Origin, TiltStationary };

struct PathOptions {
    int dim = 1;
    double beta = 1.0;
    double dt = 0.01;
    int n_paths = 1;
    std::uint64_t seed = 1;
    double a = 1.0;
    StartKind start = StartKind::Origin;
    const TiltField* tilt = nullptr;  // null: driftless reference dynamics
    bool store_paths = true;
};

struct PathEnsemble {
    int dim = 0;
    double beta = 0.0;
    double dt = 0.0;
    double a = 1.0;
    int n_paths = 0;
    int steps = 0;
    std::uint64_t seed = 0;
    bool has_paths = false;
    std::vector<double> paths;        // [path][step 0..steps][axis]
    std::vector<double> log_weights;  // log dP/dP^tilt per path

    const double* path(int i) const {
        return paths.data() + static_cast<std::size_t>(i) * (steps + 1) * dim;
    }
    const double* point(int i, int k) const { return path(i) + static_cast<std::size_t>(k) * dim; }
};

PathEnsemble sample_paths(const PathOptions& opts);

/* Generate one path into `x` (size (steps+1)*dim; may be null to skip
 * storage); returns the log weight.  `unit` selects the RNG stream. */
double generate_path(const PathOptions& opts, std::uint64_t unit, double* x);

/* Time-average nearest-node deposit of all paths; integrates to exactly one.
 * Positions outside a Dirichlet box are clamped and counted. */
struct OccupationResult {
    GridField density;
    std::int64_t clamped = 0;
};
OccupationResult occupation_measure(const Grid& grid, const PathEnsemble& ens);

struct MeanEstimate {
    double mean = 0.0;
    double std_err = 0.0;
    int n = 0;
};

/* Mean of -log_weight / beta over paths: the relative entropy rate of the
 * tilted measure, which converges to a |grad phi|^2 for stationary tilts. */
MeanEstimate entropy_rate_estimate(const PathEnsemble& ens);

/* (1/beta^2) sum_s sum_t kernel(|X_s - Y_t|) dt_eff^2 over left-endpoint
 * strided time pairs of paths i and j. */
double pair_intersection_mass(const PathEnsemble& ens, int i, int j,
                              const std::function<double(double)>& kernel, double radius,
                              int stride = 1);

/* Same with the truncated-Gaussian mollifier of width epsilon; disjoint pairs
 * (0,1), (2,3), ... are averaged.  EpsilonUnderresolved when epsilon <
 * 2 sqrt(2 a dt stride). */
struct IntersectionStats {
    double mean = 0.0;
    double std_err = 0.0;
    int pairs = 0;
    double epsilon = 0.0;
    int stride = 1;
};
IntersectionStats intersection_mass(const PathEnsemble& ens, double epsilon, int stride = 1);

/* Evaluate the intersection mass across a ladder of mollifier widths on the
 * same ensemble; diffs[k] = |mean(eps[k+1]) - mean(eps[k])| estimates the
 * mollification error between neighboring widths. */
struct MollificationProbe {
    std::vector<double> epsilons;
    std::vector<double> means;
    std::vector<double> std_errs;
    std::vector<double> diffs;
};
MollificationProbe mollification_error_probe(const PathEnsemble& ens,
                                             std::vector<double> epsilons);

/* Binary round-trip of an ensemble (little-endian doubles, fixed header). */
void dump_paths(const PathEnsemble& ens, const std::string& file);
PathEnsemble load_paths(const std::string& file);

}  // namespace gplab
