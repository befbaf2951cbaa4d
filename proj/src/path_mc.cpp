#include "gplab/path_mc.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>

#include "gplab/errors.hpp"
#include "gplab/parallel.hpp"
#include "gplab/potentials.hpp"

namespace gplab {

/* ---- tilt field -------------------------------------------------------------------*/

TiltField::TiltField(const Grid& grid, const GridField& phi, double a)
    : grid_(&grid), phi_(&phi), a_(a) {
    require(a > 0.0, "OutOfRange", "diffusion coefficient must be positive");
    require((std::int64_t)phi.values.size() == grid.node_count, "ShapeMismatch",
            "tilt field does not match the grid");
    for (double v : phi.values) phi_max_ = std::max(phi_max_, std::abs(v));
    require(phi_max_ > 0.0, "NotNormalizable", "tilt field is identically zero");
}

namespace {

struct CellLocation {
    int base[3];
    double frac[3];
};

CellLocation locate(const Grid& g, const double* x) {
    CellLocation loc{};
    const int n = g.points_per_axis;
    for (int k = 0; k < g.dim; ++k) {
        double t = (x[k] + g.half_width) / g.spacing;
        if (g.boundary == Boundary::Periodic) {
            t -= std::floor(t / n) * n;  // into [0, n)
            int b = (int)std::floor(t);
            if (b >= n) b = n - 1;
            loc.base[k] = b;
            loc.frac[k] = t - b;
        } else {
            t = std::clamp(t, 0.0, (double)(n - 1));
            int b = std::min((int)std::floor(t), n - 2);
            loc.base[k] = b;
            loc.frac[k] = t - b;
        }
    }
    return loc;
}

}  // namespace

double TiltField::value(const double* x) const {
    const Grid& g = *grid_;
    const CellLocation loc = locate(g, x);
    const int n = g.points_per_axis;
    double acc = 0.0;
    for (int c = 0; c < (1 << g.dim); ++c) {
        double w = 1.0;
        std::array<int, 3> id{0, 0, 0};
        for (int k = 0; k < g.dim; ++k) {
            const bool hi = c & (1 << k);
            w *= hi ? loc.frac[k] : 1.0 - loc.frac[k];
            int j = loc.base[k] + (hi ? 1 : 0);
            if (g.boundary == Boundary::Periodic && j == n) j = 0;
            id[k] = j;
        }
        acc += w * (*phi_)[g.ravel(id)];
    }
    return acc;
}

void TiltField::drift(const double* x, double* b) const {
    const Grid& g = *grid_;
    const CellLocation loc = locate(g, x);
    const int n = g.points_per_axis;
    double value = 0.0;
    double partial[3] = {0.0, 0.0, 0.0};
    for (int c = 0; c < (1 << g.dim); ++c) {
        double w = 1.0;
        std::array<int, 3> id{0, 0, 0};
        for (int k = 0; k < g.dim; ++k) {
            const bool hi = c & (1 << k);
            w *= hi ? loc.frac[k] : 1.0 - loc.frac[k];
            int j = loc.base[k] + (hi ? 1 : 0);
            if (g.boundary == Boundary::Periodic && j == n) j = 0;
            id[k] = j;
        }
        const double p = (*phi_)[g.ravel(id)];
        value += w * p;
        for (int k = 0; k < g.dim; ++k) {
            const bool hi = c & (1 << k);
            double dw = (hi ? 1.0 : -1.0) / g.spacing;
            for (int j = 0; j < g.dim; ++j) {
                if (j == k) continue;
                const bool hj = c & (1 << j);
                dw *= hj ? loc.frac[j] : 1.0 - loc.frac[j];
            }
            partial[k] += dw * p;
        }
    }
    if (!(value > 1e-12 * phi_max_)) {
        fail("DriftSingularity", "tilt field vanishes at the current position");
    }
    for (int k = 0; k < g.dim; ++k) b[k] = 2.0 * a_ * partial[k] / value;
}

const std::vector<double>& TiltField::start_cdf() const {
    if (cdf_.empty()) {
        const Grid& g = *grid_;
        cdf_.resize(g.node_count);
        double acc = 0.0;
        for (std::int64_t i = 0; i < g.node_count; ++i) {
            const double p = (*phi_)[i];
            acc += p * p * g.node_weight(i);
            cdf_[i] = acc;
        }
        require(acc > 0.0, "NotNormalizable", "tilt density has zero mass");
        for (double& v : cdf_) v /= acc;
    }
    return cdf_;
}

/* ---- path generation --------------------------------------------------------------*/

double generate_path(const PathOptions& opts, std::uint64_t unit, double* x_out) {
    require(opts.dim >= 1 && opts.dim <= 3, "InvalidDimension", "dim must be 1, 2, or 3");
    require(opts.beta > 0.0 && opts.dt > 0.0, "OutOfRange", "beta and dt must be positive");
    require(opts.a > 0.0, "OutOfRange", "diffusion coefficient must be positive");

    const int steps = std::max(1, (int)std::lround(opts.beta / opts.dt));
    const double dt = opts.beta / steps;
    const double sig = std::sqrt(2.0 * opts.a * dt);
    const int d = opts.dim;

    Rng rng(derive_seed(opts.seed, unit));
    double x[3] = {0.0, 0.0, 0.0};
    if (opts.start == StartKind::TiltStationary) {
        require(opts.tilt != nullptr && opts.tilt->active(), "OutOfRange",
                "stationary start needs an active tilt field");
        const auto& cdf = opts.tilt->start_cdf();
        const double u = rng.uniform();
        const std::int64_t node =
            std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin();
        const Grid& tg = opts.tilt->grid();
        const auto id = tg.unravel(std::min(node, tg.node_count - 1));
        for (int k = 0; k < d; ++k) {
            x[k] = tg.coord(id[k]) + (rng.uniform() - 0.5) * tg.spacing;
            if (tg.boundary == Boundary::Dirichlet) {
                x[k] = std::clamp(x[k], -tg.half_width, tg.half_width);
            }
        }
    }
    if (x_out != nullptr) {
        for (int k = 0; k < d; ++k) x_out[k] = x[k];
    }

    double logw = 0.0;
    double b[3] = {0.0, 0.0, 0.0};
    for (int s = 0; s < steps; ++s) {
        if (opts.tilt != nullptr && opts.tilt->active()) opts.tilt->drift(x, b);
        for (int k = 0; k < d; ++k) {
            const double dx = b[k] * dt + sig * rng.normal();
            const double res = dx - b[k] * dt;
            logw += (res * res - dx * dx) / (4.0 * opts.a * dt);
            x[k] += dx;
        }
        if (x_out != nullptr) {
            double* p = x_out + (std::size_t)(s + 1) * d;
            for (int k = 0; k < d; ++k) p[k] = x[k];
        }
    }
    return logw;
}

PathEnsemble sample_paths(const PathOptions& opts) {
    require(opts.n_paths >= 1, "OutOfRange", "need at least one path");
    PathEnsemble ens;
    ens.dim = opts.dim;
    ens.steps = std::max(1, (int)std::lround(opts.beta / opts.dt));
    ens.dt = opts.beta / ens.steps;
    ens.beta = opts.beta;
    ens.a = opts.a;
    ens.n_paths = opts.n_paths;
    ens.seed = opts.seed;
    ens.has_paths = opts.store_paths;
    ens.log_weights.assign(opts.n_paths, 0.0);
    if (opts.store_paths) {
        ens.paths.assign((std::size_t)opts.n_paths * (ens.steps + 1) * opts.dim, 0.0);
    }
    parallel_for(opts.n_paths, [&](std::int64_t i) {
        double* buf = opts.store_paths
                          ? ens.paths.data() + (std::size_t)i * (ens.steps + 1) * opts.dim
                          : nullptr;
        ens.log_weights[i] = generate_path(opts, (std::uint64_t)i, buf);
    });
    return ens;
}

/* ---- occupation -------------------------------------------------------------------*/

OccupationResult occupation_measure(const Grid& grid, const PathEnsemble& ens) {
    require(ens.has_paths, "MissingPaths", "ensemble was sampled without stored paths");
    require(grid.dim == ens.dim, "ShapeMismatch", "grid and ensemble dimension differ");
    OccupationResult out{make_field(grid), 0};
    const int n = grid.points_per_axis;
    const double share = ens.dt / (ens.beta * ens.n_paths);
    for (int i = 0; i < ens.n_paths; ++i) {
        for (int s = 0; s < ens.steps; ++s) {  // left endpoints
            const double* p = ens.point(i, s);
            std::array<int, 3> id{0, 0, 0};
            bool clamped = false;
            for (int k = 0; k < grid.dim; ++k) {
                double t = (p[k] + grid.half_width) / grid.spacing;
                long j = std::lround(t);
                if (grid.boundary == Boundary::Periodic) {
                    j = ((j % n) + n) % n;
                } else if (j < 0 || j >= n) {
                    j = std::clamp(j, 0L, (long)n - 1);
                    clamped = true;
                }
                id[k] = (int)j;
            }
            if (clamped) ++out.clamped;
            const std::int64_t node = grid.ravel(id);
            out.density[node] += share / grid.node_weight(node);
        }
    }
    return out;
}

MeanEstimate entropy_rate_estimate(const PathEnsemble& ens) {
    MeanEstimate est;
    est.n = ens.n_paths;
    if (ens.n_paths == 0) return est;
    double s = 0.0, s2 = 0.0;
    for (double lw : ens.log_weights) {
        const double v = -lw / ens.beta;
        s += v;
        s2 += v * v;
    }
    est.mean = s / ens.n_paths;
    if (ens.n_paths > 1) {
        const double var = std::max(0.0, (s2 - s * s / ens.n_paths) / (ens.n_paths - 1));
        est.std_err = std::sqrt(var / ens.n_paths);
    }
    return est;
}

/* ---- intersection -----------------------------------------------------------------*/

double pair_intersection_mass(const PathEnsemble& ens, int i, int j,
                              const std::function<double(double)>& kernel, double radius,
                              int stride) {
    require(ens.has_paths, "MissingPaths", "ensemble was sampled without stored paths");
    require(i >= 0 && i < ens.n_paths && j >= 0 && j < ens.n_paths, "OutOfRange",
            "path index out of range");
    require(stride >= 1 && ens.steps % stride == 0, "OutOfRange",
            "stride must divide the step count");
    const int m = ens.steps / stride;
    const double dt_eff = ens.dt * stride;
    const double r2cap = radius * radius;
    const int d = ens.dim;
    const double* xs = ens.path(i);
    const double* ys = ens.path(j);
    double acc = 0.0;
    for (int s = 0; s < m; ++s) {
        const double* xp = xs + (std::size_t)s * stride * d;
        for (int t = 0; t < m; ++t) {
            const double* yp = ys + (std::size_t)t * stride * d;
            double r2 = 0.0;
            for (int k = 0; k < d; ++k) {
                const double dd = xp[k] - yp[k];
                r2 += dd * dd;
            }
            if (r2 > r2cap) continue;
            acc += kernel(std::sqrt(r2));
        }
    }
    return acc * dt_eff * dt_eff / (ens.beta * ens.beta);
}

IntersectionStats intersection_mass(const PathEnsemble& ens, double epsilon, int stride) {
    require(epsilon > 0.0, "OutOfRange", "mollifier width must be positive");
    const double dt_eff = ens.dt * stride;
    if (epsilon < 2.0 * std::sqrt(2.0 * ens.a * dt_eff)) {
        fail("EpsilonUnderresolved",
             "mollifier width is below the step resolution 2 sqrt(2 a dt stride)");
    }
    require(ens.n_paths >= 2, "OutOfRange", "need at least two paths");
    const Mollifier kern(MollifierSpec{epsilon}, ens.dim);
    IntersectionStats st;
    st.epsilon = epsilon;
    st.stride = stride;
    st.pairs = ens.n_paths / 2;
    double s = 0.0, s2 = 0.0;
    for (int p = 0; p < st.pairs; ++p) {
        const double v = pair_intersection_mass(
            ens, 2 * p, 2 * p + 1, [&](double r) { return kern(r); }, epsilon, stride);
        s += v;
        s2 += v * v;
    }
    st.mean = s / st.pairs;
    if (st.pairs > 1) {
        const double var = std::max(0.0, (s2 - s * s / st.pairs) / (st.pairs - 1));
        st.std_err = std::sqrt(var / st.pairs);
    }
    return st;
}

MollificationProbe mollification_error_probe(const PathEnsemble& ens,
                                             std::vector<double> epsilons) {
    require(epsilons.size() >= 2, "OutOfRange", "probe needs at least two widths");
    MollificationProbe probe;
    probe.epsilons = std::move(epsilons);
    for (double e : probe.epsilons) {
        IntersectionStats st = intersection_mass(ens, e, 1);
        probe.means.push_back(st.mean);
        probe.std_errs.push_back(st.std_err);
    }
    for (std::size_t k = 0; k + 1 < probe.means.size(); ++k) {
        probe.diffs.push_back(std::abs(probe.means[k + 1] - probe.means[k]));
    }
    return probe;
}

/* ---- binary round-trip ------------------------------------------------------------*/

namespace {
constexpr char kMagic[8] = {'G', 'P', 'L', 'P', 'A', 'T', 'H', '1'};
}

void dump_paths(const PathEnsemble& ens, const std::string& file) {
    std::FILE* fp = std::fopen(file.c_str(), "wb");
    if (fp == nullptr) fail("IoError", "cannot open " + file + " for writing");
    auto put = [&](const void* p, std::size_t bytes) {
        if (std::fwrite(p, 1, bytes, fp) != bytes) {
            std::fclose(fp);
            fail("IoError", "short write to " + file);
        }
    };
    put(kMagic, sizeof kMagic);
    const std::int32_t meta[4] = {ens.dim, ens.n_paths, ens.steps, ens.has_paths ? 1 : 0};
    put(meta, sizeof meta);
    const double reals[3] = {ens.beta, ens.dt, ens.a};
    put(reals, sizeof reals);
    put(&ens.seed, sizeof ens.seed);
    put(ens.log_weights.data(), ens.log_weights.size() * sizeof(double));
    if (ens.has_paths) put(ens.paths.data(), ens.paths.size() * sizeof(double));
    std::fclose(fp);
}

PathEnsemble load_paths(const std::string& file) {
    std::FILE* fp = std::fopen(file.c_str(), "rb");
    if (fp == nullptr) fail("IoError", "cannot open " + file);
    auto get = [&](void* p, std::size_t bytes) {
        if (std::fread(p, 1, bytes, fp) != bytes) {
            std::fclose(fp);
            fail("CorruptDump", "truncated path dump " + file);
        }
    };
    char magic[8];
    get(magic, sizeof magic);
    if (std::memcmp(magic, kMagic, sizeof kMagic) != 0) {
        std::fclose(fp);
        fail("CorruptDump", "bad magic in " + file);
    }
    std::int32_t meta[4];
    get(meta, sizeof meta);
    double reals[3];
    get(reals, sizeof reals);
    PathEnsemble ens;
    ens.dim = meta[0];
    ens.n_paths = meta[1];
    ens.steps = meta[2];
    ens.has_paths = meta[3] != 0;
    ens.beta = reals[0];
    ens.dt = reals[1];
    ens.a = reals[2];
    get(&ens.seed, sizeof ens.seed);
    if (ens.dim < 1 || ens.dim > 3 || ens.n_paths < 0 || ens.steps < 1) {
        std::fclose(fp);
        fail("CorruptDump", "implausible header in " + file);
    }
    ens.log_weights.resize(ens.n_paths);
    get(ens.log_weights.data(), ens.log_weights.size() * sizeof(double));
    if (ens.has_paths) {
        ens.paths.resize((std::size_t)ens.n_paths * (ens.steps + 1) * ens.dim);
        get(ens.paths.data(), ens.paths.size() * sizeof(double));
    }
    std::fclose(fp);
    return ens;
}

}  // namespace gplab
