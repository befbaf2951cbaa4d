#include "gplab/free_energy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "gplab/errors.hpp"
#include "gplab/parallel.hpp"
#include "gplab/path_mc.hpp"

namespace gplab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

int largest_divisor_at_most(int n, int cap) {
    cap = std::clamp(cap, 1, n);
    while (n % cap != 0) --cap;
    return cap;
}

/* Left-endpoint trap action sum_k W(x_k) dt over one path; +inf inside an
 * infinite trap region. */
double trap_action(const TrapSpec& trap, const double* path, int steps, int dim,
                   double dt) {
    double acc = 0.0;
    for (int k = 0; k < steps; ++k) {
        const double w = trap_value(trap, path + (std::size_t)k * dim, dim);
        if (!std::isfinite(w)) return kInf;
        acc += w;
    }
    return acc * dt;
}

/* Strided left-endpoint double time sum of kernel(|x_s - y_t|), returned
 * already scaled by dt_pair^2 / beta. */
template <typename Kernel>
double pair_action(const double* xs, const double* ys, int steps, int dim, double dt,
                   int stride, double beta, double range, Kernel&& kernel) {
    const int m = steps / stride;
    const double r2cap = range * range;
    double acc = 0.0;
    for (int s = 0; s < m; ++s) {
        const double* xp = xs + (std::size_t)s * stride * dim;
        for (int t = 0; t < m; ++t) {
            const double* yp = ys + (std::size_t)t * stride * dim;
            double r2 = 0.0;
            for (int k = 0; k < dim; ++k) {
                const double dd = xp[k] - yp[k];
                r2 += dd * dd;
            }
            if (r2 > r2cap) continue;
            acc += kernel(std::sqrt(r2));
        }
    }
    const double dt_pair = dt * stride;
    return acc * dt_pair * dt_pair / beta;
}

FreeEnergyEstimate reduce_samples(std::vector<double>& ylog, int n_particles, double beta,
                                  int steps, double dt, int stride, bool tilted,
                                  double ess_floor) {
    const int m = (int)ylog.size();
    double top = -kInf;
    for (double y : ylog) top = std::max(top, y);
    if (!std::isfinite(top)) {
        fail("DegenerateWeights", "every sample carries zero weight");
    }
    double s1 = 0.0, s2 = 0.0;
    for (double y : ylog) {
        const double w = std::exp(y - top);
        s1 += w;
        s2 += w * w;
    }
    const double m1 = s1 / m;
    const double m2 = s2 / m;
    FreeEnergyEstimate est;
    est.n_samples = m;
    est.n_particles = n_particles;
    est.beta = beta;
    est.dt = dt;
    est.steps = steps;
    est.stride = stride;
    est.tilted = tilted;
    est.ess = s1 * s1 / s2;
    if (est.ess < ess_floor * m) {
        fail("DegenerateWeights", "effective sample size " + format_double(est.ess) +
                                      " of " + std::to_string(m));
    }
    est.log_mean = top + std::log(m1);
    est.value = -est.log_mean / (n_particles * beta);
    if (m > 1) {
        const double rel_var = std::max(0.0, m2 / (m1 * m1) - 1.0);
        est.std_err = std::sqrt(rel_var / (m - 1)) / (n_particles * beta);
    }
    return est;
}

struct SampleContext {
    PathOptions popts;
    TiltField tilt;
    int n_particles = 0;
    int steps = 0;
    std::size_t path_len = 0;  // doubles per path
};

SampleContext make_context(int dim, int n_particles, double beta,
                           const EnsembleOptions& opts) {
    require(dim >= 1 && dim <= 3, "InvalidDimension", "dim must be 1, 2, or 3");
    require(n_particles >= 1, "InvalidN", "need at least one particle");
    require(beta > 0.0 && opts.dt > 0.0, "OutOfRange", "beta and dt must be positive");
    require(opts.n_samples >= 2, "OutOfRange", "need at least two samples");
    SampleContext ctx;
    ctx.n_particles = n_particles;
    ctx.steps = std::max(1, (int)std::lround(beta / opts.dt));
    ctx.path_len = (std::size_t)(ctx.steps + 1) * dim;
    ctx.popts.dim = dim;
    ctx.popts.beta = beta;
    ctx.popts.dt = opts.dt;
    ctx.popts.seed = opts.seed;
    ctx.popts.a = opts.a;
    ctx.popts.start = StartKind::Origin;
    ctx.popts.store_paths = true;
    if (opts.sampling == Sampling::GirsanovTilted) {
        require(opts.tilt_grid != nullptr && opts.tilt_phi != nullptr, "OutOfRange",
                "tilted sampling needs tilt_grid and tilt_phi");
        ctx.tilt = TiltField(*opts.tilt_grid, *opts.tilt_phi, opts.a);
        ctx.popts.tilt = &ctx.tilt;
    }
    return ctx;
}

}  // namespace

FreeEnergyEstimate estimate_F(int dim, const TrapSpec& trap, const InteractionSpec& v,
                              int n_particles, double beta, const EnsembleOptions& opts) {
    SampleContext ctx = make_context(dim, n_particles, beta, opts);
    const double dt_eff = beta / ctx.steps;
    const int stride = largest_divisor_at_most(ctx.steps, opts.stride);
    const InteractionSpec vN = rescale_interaction(v, n_particles, dim);
    const bool has_pair = !interaction_is_zero(vN) && n_particles > 1;
    if (has_pair) {
        const double resolution = std::sqrt(2.0 * opts.a * dt_eff * stride);
        if (interaction_width(vN) < resolution) {
            fail("KernelUnresolved", "rescaled kernel width " +
                                         format_double(interaction_width(vN)) +
                                         " is below the step resolution " +
                                         format_double(resolution));
        }
    }
    const double range = has_pair ? interaction_range(vN) : 0.0;

    const int N = n_particles;
    std::vector<double> ylog(opts.n_samples, 0.0);
    parallel_for(opts.n_samples, [&](std::int64_t m) {
        std::vector<double> buf((std::size_t)N * ctx.path_len);
        double logw = 0.0;
        for (int i = 0; i < N; ++i) {
            logw += generate_path(ctx.popts, (std::uint64_t)m * N + i,
                                  buf.data() + (std::size_t)i * ctx.path_len);
        }
        double action = 0.0;
        for (int i = 0; i < N && std::isfinite(action); ++i) {
            action += trap_action(trap, buf.data() + (std::size_t)i * ctx.path_len,
                                  ctx.steps, dim, dt_eff);
        }
        if (has_pair && std::isfinite(action)) {
            for (int i = 0; i < N; ++i) {
                for (int j = i + 1; j < N; ++j) {
                    action += pair_action(
                        buf.data() + (std::size_t)i * ctx.path_len,
                        buf.data() + (std::size_t)j * ctx.path_len, ctx.steps, dim,
                        dt_eff, stride, beta, range,
                        [&](double r) { return interaction_value(vN, r); });
                }
            }
        }
        ylog[m] = std::isfinite(action) ? logw - action : -kInf;
    });
    return reduce_samples(ylog, N, beta, ctx.steps, dt_eff, stride,
                          opts.sampling == Sampling::GirsanovTilted, opts.ess_floor);
}

MollifiedEstimate estimate_G(int dim, const TrapSpec& trap, int n_particles, double beta,
                             const std::vector<double>& epsilons,
                             const EnsembleOptions& opts) {
    require(epsilons.size() >= 2, "OutOfRange", "need at least two mollifier widths");
    SampleContext ctx = make_context(dim, n_particles, beta, opts);
    const double dt_eff = beta / ctx.steps;
    const int n_eps = (int)epsilons.size();

    std::vector<Mollifier> kernels;
    std::vector<int> strides(n_eps);
    for (int e = 0; e < n_eps; ++e) {
        const double eps = epsilons[e];
        require(eps > 0.0, "OutOfRange", "mollifier width must be positive");
        if (eps < 2.0 * std::sqrt(2.0 * opts.a * dt_eff)) {
            fail("EpsilonUnderresolved",
                 "width " + format_double(eps) +
                     " is below the step resolution 2 sqrt(2 a dt)");
        }
        kernels.emplace_back(MollifierSpec{eps}, dim);
        strides[e] = largest_divisor_at_most(
            ctx.steps, (int)(eps * eps / (8.0 * opts.a * dt_eff)));
    }

    const int N = n_particles;
    std::vector<std::vector<double>> ylog(n_eps,
                                          std::vector<double>(opts.n_samples, 0.0));
    parallel_for(opts.n_samples, [&](std::int64_t m) {
        std::vector<double> buf((std::size_t)N * ctx.path_len);
        double logw = 0.0;
        for (int i = 0; i < N; ++i) {
            logw += generate_path(ctx.popts, (std::uint64_t)m * N + i,
                                  buf.data() + (std::size_t)i * ctx.path_len);
        }
        double base = 0.0;
        for (int i = 0; i < N && std::isfinite(base); ++i) {
            base += trap_action(trap, buf.data() + (std::size_t)i * ctx.path_len,
                                ctx.steps, dim, dt_eff);
        }
        for (int e = 0; e < n_eps; ++e) {
            if (!std::isfinite(base)) {
                ylog[e][m] = -kInf;
                continue;
            }
            double action = base;
            if (N > 1) {
                for (int i = 0; i < N; ++i) {
                    for (int j = i + 1; j < N; ++j) {
                        action += pair_action(
                            buf.data() + (std::size_t)i * ctx.path_len,
                            buf.data() + (std::size_t)j * ctx.path_len, ctx.steps, dim,
                            dt_eff, strides[e], beta, epsilons[e],
                            [&](double r) { return kernels[e](r); });
                    }
                }
            }
            ylog[e][m] = logw - action;
        }
    });

    MollifiedEstimate out;
    out.epsilons = epsilons;
    for (int e = 0; e < n_eps; ++e) {
        out.at_eps.push_back(reduce_samples(
            ylog[e], N, beta, ctx.steps, dt_eff, strides[e],
            opts.sampling == Sampling::GirsanovTilted, opts.ess_floor));
    }

    // linear extrapolation to zero width from the two smallest widths
    int e1 = 0;
    for (int e = 1; e < n_eps; ++e) {
        if (epsilons[e] < epsilons[e1]) e1 = e;
    }
    int e2 = e1 == 0 ? 1 : 0;
    for (int e = 0; e < n_eps; ++e) {
        if (e != e1 && epsilons[e] < epsilons[e2]) e2 = e;
    }
    const double x1 = epsilons[e1], x2 = epsilons[e2];
    require(x2 > x1, "OutOfRange", "mollifier widths must be distinct");
    const double t = x1 / (x2 - x1);
    out.value = (1.0 + t) * out.at_eps[e1].value - t * out.at_eps[e2].value;
    out.std_err = std::sqrt((1.0 + t) * (1.0 + t) * out.at_eps[e1].std_err *
                                out.at_eps[e1].std_err +
                            t * t * out.at_eps[e2].std_err * out.at_eps[e2].std_err);
    return out;
}

}  // namespace gplab
