#include "gplab/dv_rate.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "gplab/errors.hpp"
#include "gplab/gp.hpp"

namespace gplab {

namespace {

constexpr double kPi = 3.14159265358979323846;

double plain_sum(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s;
}

/* ---- exact per-axis heat kernels -------------------------------------------------
 *
 * e^{t a L1} for the 1-d second difference L1, built from the closed-form
 * eigenbasis (circulant Fourier modes / interior sine modes).  The result is a
 * symmetric, entrywise non-negative matrix (non-negativity is exact for the
 * exponential of a generator; tiny negative roundoff is clamped). */
Eigen::MatrixXd build_heat_kernel(const Grid& grid, double a, double t) {
    const int n = grid.points_per_axis;
    const double h = grid.spacing;
    Eigen::MatrixXd K = Eigen::MatrixXd::Zero(n, n);
    if (grid.boundary == Boundary::Periodic) {
        std::vector<double> row(n, 0.0);
        for (int m = 0; m < n; ++m) {
            const double s = std::sin(kPi * m / n);
            const double lam = -4.0 * a / (h * h) * s * s;
            const double e = std::exp(t * lam);
            for (int r = 0; r < n; ++r) row[r] += e * std::cos(2.0 * kPi * m * r / n) / n;
        }
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) K(i, j) = std::max(0.0, row[(i - j + n) % n]);
    } else {
        const int ni = n - 2;
        Eigen::VectorXd mode(ni);
        for (int m = 1; m <= ni; ++m) {
            const double s = std::sin(kPi * m / (2.0 * (n - 1)));
            const double lam = -4.0 * a / (h * h) * s * s;
            const double e = std::exp(t * lam) * 2.0 / (n - 1);
            for (int j = 0; j < ni; ++j) mode[j] = std::sin(kPi * m * (j + 1) / (n - 1));
            K.block(1, 1, ni, ni).noalias() += (e * mode) * mode.transpose();
        }
        for (int i = 1; i <= ni; ++i)
            for (int j = 1; j <= ni; ++j) K(i, j) = std::max(0.0, K(i, j));
    }
    return K;
}

/* Apply the per-axis kernel along every axis (tensor product action). */
void apply_heat(const Grid& grid, const Eigen::MatrixXd& K, std::vector<double>& vals) {
    using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
    const int n = grid.points_per_axis;
    for (int axis = 0; axis < grid.dim; ++axis) {
        const std::int64_t st = grid.stride(axis);
        if (st == 1) {
            Eigen::Map<RowMat> M(vals.data(), grid.node_count / n, n);
            RowMat tmp = M * K;
            M = tmp;
        } else {
            const std::int64_t block = st * n;
            for (std::int64_t b = 0; b < grid.node_count / block; ++b) {
                Eigen::Map<RowMat> B(vals.data() + b * block, n, st);
                RowMat tmp = K * B;
                B = tmp;
            }
        }
    }
}

std::vector<double> initial_vector(const Grid& grid, MgfInit init) {
    std::vector<double> u(grid.node_count, 0.0);
    if (init == MgfInit::PointCenter) {
        std::array<int, 3> c{0, 0, 0};
        for (int k = 0; k < grid.dim; ++k) c[k] = grid.points_per_axis / 2;
        u[grid.ravel(c)] = 1.0;
        return u;
    }
    if (grid.boundary == Boundary::Periodic) {
        std::fill(u.begin(), u.end(), 1.0 / grid.node_count);
        return u;
    }
    // quasi-stationary profile: the ground sine mode, as a probability vector
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        auto id = grid.unravel(i);
        double v = 1.0;
        for (int k = 0; k < grid.dim; ++k)
            v *= std::sin(kPi * id[k] / (grid.points_per_axis - 1.0));
        u[i] = v;
    }
    const double s = plain_sum(u);
    for (double& x : u) x /= s;
    return u;
}

/* Feynman-Kac evolution by symmetric splitting.  Evolves `v` in place for
 * `steps` steps; optionally records mass-normalized snapshots after the step
 * counts listed in `snap_idx` (sorted, may include 0).  Returns log total
 * mass. */
double fk_run(const Grid& grid, const Eigen::MatrixXd& K, const std::vector<double>* ef_half,
              int steps, std::vector<double>& v, const std::vector<int>* snap_idx = nullptr,
              std::vector<std::vector<double>>* snaps = nullptr) {
    double log_scale = 0.0;
    std::size_t next_snap = 0;
    auto record = [&](int done) {
        if (snap_idx == nullptr) return;
        while (next_snap < snap_idx->size() && (*snap_idx)[next_snap] == done) {
            std::vector<double> s = v;
            const double m = plain_sum(s);
            if (m > 0.0)
                for (double& x : s) x /= m;
            snaps->push_back(std::move(s));
            ++next_snap;
        }
    };
    if (snaps != nullptr) {
        snaps->clear();
        snaps->reserve(snap_idx->size());
    }
    record(0);
    for (int s = 0; s < steps; ++s) {
        if (ef_half != nullptr)
            for (std::int64_t i = 0; i < grid.node_count; ++i) v[i] *= (*ef_half)[i];
        apply_heat(grid, K, v);
        if (ef_half != nullptr)
            for (std::int64_t i = 0; i < grid.node_count; ++i) v[i] *= (*ef_half)[i];
        const double m = plain_sum(v);
        if (!(m > 0.0)) {
            // fully absorbed: the exponential moment underflowed to zero mass
            log_scale = -std::numeric_limits<double>::infinity();
            break;
        }
        if (m > 1e100 || m < 1e-100) {
            for (double& x : v) x /= m;
            log_scale += std::log(m);
        }
        record(s + 1);
    }
    return std::isfinite(log_scale) ? std::log(plain_sum(v)) + log_scale : log_scale;
}

/* ---- backward Euler resolvent steps ----------------------------------------------
 *
 * One step solves (I - dt (a Lap + f)) x = b.  On a Dirichlet grid the
 * boundary rows are decoupled (the generator vanishes there), so they are
 * eliminated first and conjugate gradients runs on the interior block, which
 * is symmetric positive definite whenever dt * max f < 1. */
struct BeWorkspace {
    GridField r, p, q, z;
};

void be_solve(const Grid& grid, double a, double dt, const std::vector<double>& f,
              const std::vector<double>& b, std::vector<double>& x, BeWorkspace& ws) {
    const bool dirichlet = grid.boundary == Boundary::Dirichlet;
    GridField& r = ws.r;
    GridField& p = ws.p;
    GridField& q = ws.q;
    GridField& z = ws.z;

    std::vector<double> rhs = b;
    if (dirichlet) {
        // boundary rows: x_b (1 - dt f_b) = b_b
        z.values.assign(grid.node_count, 0.0);
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            if (grid.on_boundary(i)) {
                x[i] = b[i] / (1.0 - dt * f[i]);
                z.values[i] = x[i];
            }
        }
        // move the known boundary flux into the interior right-hand side
        apply_generator(z, a, q);
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            if (grid.on_boundary(i)) rhs[i] = 0.0;
            else rhs[i] += dt * q.values[i];
        }
    }

    auto apply_op = [&](const GridField& in, GridField& out) {
        apply_generator(in, a, out);
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            out.values[i] = in.values[i] - dt * (out.values[i] + f[i] * in.values[i]);
            if (dirichlet && grid.on_boundary(i)) out.values[i] = 0.0;
        }
    };

    const double h2 = grid.spacing * grid.spacing;
    auto precond = [&](std::int64_t i) {
        return 1.0 / (1.0 + 2.0 * grid.dim * a * dt / h2 - dt * f[i]);
    };

    // CG with diagonal preconditioning on x (interior part for Dirichlet)
    GridField xin = make_field(grid);
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        xin.values[i] = (dirichlet && grid.on_boundary(i)) ? 0.0 : x[i];
    }
    apply_op(xin, q);
    double b2 = 0.0;
    r.values.assign(grid.node_count, 0.0);
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        r.values[i] = rhs[i] - q.values[i];
        b2 += rhs[i] * rhs[i];
    }
    double rz = 0.0;
    p.values.assign(grid.node_count, 0.0);
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        const double zi = precond(i) * r.values[i];
        p.values[i] = zi;
        rz += zi * r.values[i];
    }
    const double tol2 = 1e-28 * std::max(b2, 1e-300);
    for (int it = 0; it < 20000; ++it) {
        double r2 = 0.0;
        for (double v : r.values) r2 += v * v;
        if (r2 <= tol2) break;
        apply_op(p, q);
        double pq = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i) pq += p.values[i] * q.values[i];
        if (!(pq > 0.0)) break;
        const double alpha = rz / pq;
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            xin.values[i] += alpha * p.values[i];
            r.values[i] -= alpha * q.values[i];
        }
        double rz_new = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            rz_new += precond(i) * r.values[i] * r.values[i];
        const double beta = rz_new / rz;
        rz = rz_new;
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            p.values[i] = precond(i) * r.values[i] + beta * p.values[i];
    }
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        if (!(dirichlet && grid.on_boundary(i))) x[i] = xin.values[i];
    }
}

/* Evolve `v` through `steps` resolvent factors; returns the accumulated
 * rescaling log-factor (v holds the remaining, O(1)-normalized part). */
double be_run(const Grid& grid, double a, double dt, const std::vector<double>& f, int steps,
              std::vector<double>& v) {
    BeWorkspace ws{make_field(grid), make_field(grid), make_field(grid), make_field(grid)};
    std::vector<double> x(v.size(), 0.0);
    double log_scale = 0.0;
    for (int s = 0; s < steps; ++s) {
        x = v;  // warm start from the previous level
        be_solve(grid, a, dt, f, v, x, ws);
        v.swap(x);
        const double m = plain_sum(v);
        if (!(m > 0.0)) return -std::numeric_limits<double>::infinity();
        if (m > 1e100 || m < 1e-100) {
            for (double& y : v) y /= m;
            log_scale += std::log(m);
        }
    }
    return log_scale;
}

double dot_measure(const std::vector<double>& pi0, const std::vector<double>& v) {
    double s = 0.0;
    for (std::size_t i = 0; i < pi0.size(); ++i) s += pi0[i] * v[i];
    return s;
}

}  // namespace

MgfResult log_mgf(const Grid& grid, const GridField& f, double beta, const MgfOptions& opts) {
    require(beta > 0.0 && std::isfinite(beta), "OutOfRange", "beta must be positive");
    require(opts.dt > 0.0, "OutOfRange", "dt must be positive");
    require(opts.a > 0.0, "OutOfRange", "diffusion coefficient must be positive");
    require((std::int64_t)f.values.size() == grid.node_count, "ShapeMismatch",
            "field does not match the grid");

    MgfResult out;
    out.steps = std::max(1, (int)std::lround(beta / opts.dt));
    out.dt = beta / out.steps;

    const std::vector<double> pi0 = initial_vector(grid, opts.init);

    if (opts.stepper == MgfStepper::Splitting) {
        Eigen::MatrixXd K = build_heat_kernel(grid, opts.a, out.dt);
        std::vector<double> ef(grid.node_count);
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            ef[i] = std::exp(0.5 * out.dt * f.values[i]);
        std::vector<double> u = pi0;
        out.log_mass_f = fk_run(grid, K, &ef, out.steps, u);
        if (opts.normalization == MgfNormalization::Conditioned) {
            std::vector<double> u0 = pi0;
            out.log_mass_0 = fk_run(grid, K, nullptr, out.steps, u0);
        }
    } else {
        double fmax = 0.0;
        for (double x : f.values) fmax = std::max(fmax, x);
        if (out.dt * fmax >= 1.0) {
            fail("OutOfRange",
                 "backward Euler needs dt * max(f) < 1; reduce dt for this field");
        }
        std::vector<double> ones(grid.node_count, 1.0);
        const double sc = be_run(grid, opts.a, out.dt, f.values, out.steps, ones);
        out.log_mass_f = std::isfinite(sc) ? sc + std::log(dot_measure(pi0, ones)) : sc;
        if (opts.normalization == MgfNormalization::Conditioned) {
            std::vector<double> zero(grid.node_count, 0.0), ones0(grid.node_count, 1.0);
            const double sc0 = be_run(grid, opts.a, out.dt, zero, out.steps, ones0);
            out.log_mass_0 = std::isfinite(sc0) ? sc0 + std::log(dot_measure(pi0, ones0)) : sc0;
        }
    }
    out.lambda = (out.log_mass_f - out.log_mass_0) / beta;
    return out;
}

RateResult rate_J(const Grid& grid, const GridField& mu, double beta, const RateOptions& opts,
                  GridField* warm_start) {
    require(beta > 0.0 && std::isfinite(beta), "OutOfRange", "beta must be positive");
    require(opts.dt > 0.0, "OutOfRange", "dt must be positive");
    require(opts.a > 0.0, "OutOfRange", "diffusion coefficient must be positive");
    require((std::int64_t)mu.values.size() == grid.node_count, "ShapeMismatch",
            "density does not match the grid");
    double mass = 0.0;
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        require(mu.values[i] >= -1e-12, "OutOfRange", "density must be non-negative");
        mass += std::max(0.0, mu.values[i]) * grid.node_weight(i);
    }
    require(std::abs(mass - 1.0) <= 1e-8, "NotNormalized", "density must integrate to one");

    const int steps = std::max(1, (int)std::lround(beta / opts.dt));
    const double dt = beta / steps;
    const Eigen::MatrixXd K = build_heat_kernel(grid, opts.a, dt);
    const std::vector<double> pi0 = initial_vector(grid, opts.init);

    // snapshot step counts and trapezoid weights in time
    std::vector<int> snap_idx;
    {
        const int ks = std::min(std::max(1, opts.snapshots), steps);
        for (int k = 0; k <= ks; ++k) {
            int idx = (int)std::lround((double)k * steps / ks);
            if (snap_idx.empty() || idx > snap_idx.back()) snap_idx.push_back(idx);
        }
    }
    std::vector<double> tau(snap_idx.size(), 0.0);
    for (std::size_t k = 0; k < snap_idx.size(); ++k) {
        const double prev = k == 0 ? snap_idx[0] * dt : snap_idx[k - 1] * dt;
        const double next = k + 1 == snap_idx.size() ? snap_idx.back() * dt : snap_idx[k + 1] * dt;
        tau[k] = 0.5 * (next - prev);
    }
    std::vector<int> snap_idx_back(snap_idx.size());
    for (std::size_t k = 0; k < snap_idx.size(); ++k)
        snap_idx_back[k] = steps - snap_idx[snap_idx.size() - 1 - k];

    // free-evolution mass (f-independent)
    double log_mass0;
    {
        std::vector<double> u = pi0;
        log_mass0 = fk_run(grid, K, nullptr, steps, u);
    }

    RateResult res;
    res.f = make_field(grid);
    if (warm_start != nullptr && (std::int64_t)warm_start->values.size() == grid.node_count) {
        res.f = *warm_start;
        for (double& x : res.f.values) x = std::clamp(x, -opts.f_cap, opts.f_cap);
    }

    std::vector<std::vector<double>> usnaps, vsnaps;
    std::vector<double> ef(grid.node_count);
    auto forward = [&](const GridField& field, std::vector<std::vector<double>>& snaps) {
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            ef[i] = std::exp(0.5 * dt * field.values[i]);
        std::vector<double> u = pi0;
        const double lm = fk_run(grid, K, &ef, steps, u, &snap_idx, &snaps);
        return (lm - log_mass0) / beta;  // Lambda_beta(field)
    };
    auto pair_mu = [&](const GridField& field) {
        double s = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            s += mu.values[i] * field.values[i] * grid.node_weight(i);
        return s;
    };

    double lambda = forward(res.f, usnaps);
    double gain = pair_mu(res.f) - lambda;
    double step = opts.step0;
    GridField rho = make_field(grid);
    GridField trial = make_field(grid);

    int iter = 0;
    bool converged = false;
    for (; iter < opts.max_iter; ++iter) {
        // occupation density of the tilted bridge from forward/backward snapshots
        {
            for (std::int64_t i = 0; i < grid.node_count; ++i)
                ef[i] = std::exp(0.5 * dt * res.f.values[i]);  // factors of the accepted field
            std::vector<double> ones(grid.node_count, 1.0);
            fk_run(grid, K, &ef, steps, ones, &snap_idx_back, &vsnaps);
            require(usnaps.size() == snap_idx.size() && vsnaps.size() == snap_idx.size(),
                    "NotNormalizable", "evolution mass vanished; field too singular");
            std::fill(rho.values.begin(), rho.values.end(), 0.0);
            for (std::size_t k = 0; k < snap_idx.size(); ++k) {
                const auto& uk = usnaps[k];
                const auto& vk = vsnaps[snap_idx.size() - 1 - k];
                double denom = 0.0;
                for (std::int64_t i = 0; i < grid.node_count; ++i) denom += uk[i] * vk[i];
                if (!(denom > 0.0)) continue;
                const double w = tau[k] / (beta * denom);
                for (std::int64_t i = 0; i < grid.node_count; ++i)
                    rho.values[i] += w * uk[i] * vk[i];
            }
            for (std::int64_t i = 0; i < grid.node_count; ++i)
                rho.values[i] /= grid.node_weight(i);
        }
        double g1 = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            g1 += std::abs(mu.values[i] - rho.values[i]) * grid.node_weight(i);
        res.grad_l1 = g1;
        if (g1 <= opts.tol) {
            converged = true;
            break;
        }
        // monotone backtracking ascent along mu - rho
        bool accepted = false;
        while (step >= 1e-7) {
            for (std::int64_t i = 0; i < grid.node_count; ++i) {
                trial.values[i] = std::clamp(
                    res.f.values[i] + step * (mu.values[i] - rho.values[i]), -opts.f_cap,
                    opts.f_cap);
            }
            std::vector<std::vector<double>> tsnaps;
            const double lam_t = forward(trial, tsnaps);
            const double gain_t = pair_mu(trial) - lam_t;
            if (gain_t > gain + 1e-14) {
                res.f.values.swap(trial.values);
                lambda = lam_t;
                gain = gain_t;
                usnaps.swap(tsnaps);
                step = std::min(step * 1.25, 1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) break;  // no ascent direction at this resolution
    }

    res.value = gain;
    res.occupation = rho;
    res.iterations = iter;
    res.converged = converged;
    double fmax = 0.0;
    for (double x : res.f.values) fmax = std::max(fmax, std::abs(x));
    res.cap_active = fmax >= opts.f_cap * (1.0 - 1e-9);
    if (warm_start != nullptr) *warm_start = res.f;
    return res;
}

WitnessReport witness_bound_check(const Grid& grid, const GridField& phi, double c, double beta,
                                  double dt, double a) {
    require(c > 0.0 && std::isfinite(c), "OutOfRange", "offset c must be positive");
    require(beta > 0.0 && std::isfinite(beta), "OutOfRange", "beta must be positive");
    require(dt > 0.0, "OutOfRange", "dt must be positive");
    require(a > 0.0, "OutOfRange", "diffusion coefficient must be positive");
    require((std::int64_t)phi.values.size() == grid.node_count, "ShapeMismatch",
            "field does not match the grid");

    GridField psi = make_field(grid);
    double phi_max = 0.0;
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        const double p = std::abs(phi.values[i]);
        phi_max = std::max(phi_max, p);
        psi.values[i] = c + p;
    }
    if (grid.boundary == Boundary::Dirichlet) {
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            if (grid.on_boundary(i)) psi.values[i] = c;
    }

    WitnessReport rep;
    rep.f = make_field(grid);
    GridField lap = make_field(grid);
    apply_generator(psi, a, lap);
    double fmax = 0.0;
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        rep.f.values[i] = -lap.values[i] / psi.values[i];
        fmax = std::max(fmax, rep.f.values[i]);
    }

    double dt_eff = fmax > 0.0 ? std::min(dt, 0.5 / fmax) : dt;
    const int steps = std::max(1, (int)std::ceil(beta / dt_eff));
    dt_eff = beta / steps;

    std::vector<double> ones(grid.node_count, 1.0);
    const double sc = be_run(grid, a, dt_eff, rep.f.values, steps, ones);
    const std::vector<double> pi0 = initial_vector(grid, MgfInit::Stationary);
    rep.lambda_raw = std::isfinite(sc)
                         ? (sc + std::log(dot_measure(pi0, ones))) / beta
                         : -std::numeric_limits<double>::infinity();
    rep.bound = std::log1p(phi_max / c) / beta;
    rep.margin = rep.bound - rep.lambda_raw;
    rep.holds = rep.margin >= -1e-10;
    return rep;
}

ChiBetaResult chi_otimes_beta(const Grid& grid, const TrapField& trap, double alpha, double beta,
                              const ChiBetaOptions& opts) {
    require(alpha >= 0.0, "OutOfRange", "quartic coupling must be non-negative");
    require(beta > 0.0 && std::isfinite(beta), "OutOfRange", "beta must be positive");

    ChiBetaResult res;
    res.density = make_field(grid);

    // admissible-probability-density projection in the quadrature metric
    auto project = [&](GridField& x) {
        double lo = 1e300, hi = -1e300, wsum = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            const bool off = (trap.any_infinite && trap.infinite[i]) ||
                             (grid.boundary == Boundary::Dirichlet && grid.on_boundary(i));
            if (off) {
                x.values[i] = -1e300;  // excluded nodes never activate
                continue;
            }
            lo = std::min(lo, x.values[i]);
            hi = std::max(hi, x.values[i]);
            wsum += grid.node_weight(i);
        }
        require(wsum > 0.0, "NotNormalizable", "no admissible nodes for the density");
        double llo = lo - (1.0 + std::abs(lo)) - 1.0 / wsum, lhi = hi;
        for (int it = 0; it < 200; ++it) {
            const double mid = 0.5 * (llo + lhi);
            double m = 0.0;
            for (std::int64_t i = 0; i < grid.node_count; ++i)
                m += std::max(0.0, x.values[i] - mid) * grid.node_weight(i);
            (m > 1.0 ? llo : lhi) = mid;
        }
        const double tau_lvl = 0.5 * (llo + lhi);
        double m = 0.0;
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            x.values[i] = std::max(0.0, x.values[i] - tau_lvl);
            m += x.values[i] * grid.node_weight(i);
        }
        for (double& v : x.values) v /= m;
    };

    if (opts.init_density != nullptr &&
        (std::int64_t)opts.init_density->values.size() == grid.node_count) {
        res.density = *opts.init_density;
        project(res.density);
    } else if (opts.init_from_quartic_minimizer) {
        MinimizeOptions mo;
        mo.tol = 1e-10;
        MinimizeResult mr =
            minimize_energy(grid, trap, alpha, default_initial_profile(grid, trap), mo);
        for (std::int64_t i = 0; i < grid.node_count; ++i)
            res.density.values[i] = mr.phi[i] * mr.phi[i];
    } else {
        std::fill(res.density.values.begin(), res.density.values.end(), 1.0);
        project(res.density);
    }

    GridField warm_f = make_field(grid);
    if (opts.init_witness != nullptr &&
        (std::int64_t)opts.init_witness->values.size() == grid.node_count) {
        warm_f = *opts.init_witness;
    }
    auto energy_of = [&](const GridField& mu_field, GridField& wf, double& rate_out,
                         GridField& witness_out) {
        GridField warm = wf;
        RateResult rr = rate_J(grid, mu_field, beta, opts.rate, &warm);
        wf = warm;
        witness_out = rr.f;
        rate_out = rr.value;
        double e = rr.value;
        for (std::int64_t i = 0; i < grid.node_count; ++i) {
            const double m = mu_field.values[i];
            e += (trap.values.values[i] + 0.5 * alpha * m) * m * grid.node_weight(i);
        }
        return e;
    };

    double rate_val = 0.0;
    GridField witness = make_field(grid);
    double energy = energy_of(res.density, warm_f, rate_val, witness);
    res.trace.push_back(energy);

    double step = opts.step0;
    GridField trial = make_field(grid);
    int outer = 0;
    bool converged = false;
    for (; outer < opts.max_outer; ++outer) {
        bool accepted = false;
        double decrease = 0.0;
        while (step >= 1e-6) {
            for (std::int64_t i = 0; i < grid.node_count; ++i) {
                const double g = witness.values[i] + trap.values.values[i] +
                                 alpha * res.density.values[i];
                trial.values[i] = res.density.values[i] - step * g;
            }
            project(trial);
            GridField wf_trial = warm_f;
            double rate_trial = 0.0;
            GridField witness_trial;
            const double e_trial = energy_of(trial, wf_trial, rate_trial, witness_trial);
            if (e_trial < energy - 1e-10 * (1.0 + std::abs(energy))) {
                decrease = energy - e_trial;
                res.density.values.swap(trial.values);
                energy = e_trial;
                rate_val = rate_trial;
                witness = witness_trial;
                warm_f = wf_trial;
                res.trace.push_back(energy);
                step = std::min(step * 1.2, 1e3);
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            converged = true;  // no descent direction at the smallest step
            break;
        }
        if (decrease < opts.tol && outer > 2) {
            converged = true;
            ++outer;
            break;
        }
    }

    res.value = energy;
    res.rate_value = rate_val;
    res.witness_f = witness;
    res.outer_iterations = outer;
    res.converged = converged;
    return res;
}

}  // namespace gplab
