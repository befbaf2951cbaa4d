#include "gplab/potentials.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace gplab {

namespace {

double param(const std::vector<double>& p, std::size_t i, double def) {
    return i < p.size() ? p[i] : def;
}

constexpr double kPi = 3.14159265358979323846264338327950288;

}  // namespace

double sphere_surface(int dim) {
    switch (dim) {
        case 1: return 2.0;
        case 2: return 2.0 * kPi;
        case 3: return 4.0 * kPi;
        default: fail("InvalidDimension", "sphere_surface: dim must be 1..3");
    }
}

/* ---- traps ---------------------------------------------------------------*/

double trap_value(const TrapSpec& spec, const double* x, int dim) {
    double r2 = 0.0;
    for (int k = 0; k < dim; ++k) r2 += x[k] * x[k];
    switch (spec.kind) {
        case TrapKind::Harmonic: return param(spec.params, 0, 1.0) * r2;
        case TrapKind::Quartic: return param(spec.params, 0, 1.0) * r2 * r2;
        case TrapKind::Box: {
            const double radius = param(spec.params, 0, 0.0);
            if (!(radius > 0.0)) fail("OutOfRange", "Box trap requires a positive radius");
            return r2 <= radius * radius ? 0.0 : std::numeric_limits<double>::infinity();
        }
    }
    fail("OutOfRange", "unknown trap kind");
}

TrapField eval_trap(const TrapSpec& spec, const Grid& grid) {
    TrapField out;
    out.values = make_field(grid);
    out.infinite.assign(static_cast<std::size_t>(grid.node_count), 0);
    double x[3];
    for (std::int64_t i = 0; i < grid.node_count; ++i) {
        grid.node_coords(i, x);
        const double w = trap_value(spec, x, grid.dim);
        if (std::isinf(w)) {
            out.infinite[static_cast<std::size_t>(i)] = 1;
            out.any_infinite = true;
            out.values[i] = 0.0;
        } else {
            out.values[i] = w;
        }
    }
    return out;
}

/* ---- interactions ---------------------------------------------------------*/

double interaction_value(const InteractionSpec& v, double r) {
    switch (v.kind) {
        case InteractionKind::Gaussian: {
            const double g = param(v.params, 0, 1.0);
            const double s = param(v.params, 1, 1.0);
            if (g == 0.0) return 0.0;
            const double z = r / s;
            return g * std::exp(-0.5 * z * z);
        }
        case InteractionKind::HardSphere: {
            const double a = param(v.params, 0, 1.0);
            const double cap = param(v.params, 1, 1e8);
            return r <= a ? cap : 0.0;
        }
        case InteractionKind::TruncatedInverse: {
            const double g = param(v.params, 0, 1.0);
            const double p = param(v.params, 1, 1.0);
            const double cap = param(v.params, 2, 1e8);
            const double R = param(v.params, 3, 1.0);
            if (g == 0.0 || r > R) return 0.0;
            if (p == 0.0) return g * std::min(1.0, cap);
            const double val = r > 0.0 ? std::pow(r, -p) : std::numeric_limits<double>::infinity();
            return g * std::min(val, cap);
        }
    }
    fail("OutOfRange", "unknown interaction kind");
}

double interaction_value_analytic(const InteractionSpec& v, double r) {
    switch (v.kind) {
        case InteractionKind::HardSphere: {
            const double a = param(v.params, 0, 1.0);
            return r <= a ? std::numeric_limits<double>::infinity() : 0.0;
        }
        case InteractionKind::TruncatedInverse: {
            const double g = param(v.params, 0, 1.0);
            const double p = param(v.params, 1, 1.0);
            const double R = param(v.params, 3, 1.0);
            if (g == 0.0 || r > R) return 0.0;
            if (p == 0.0) return g;
            return r > 0.0 ? g * std::pow(r, -p) : std::numeric_limits<double>::infinity();
        }
        case InteractionKind::Gaussian: return interaction_value(v, r);
    }
    fail("OutOfRange", "unknown interaction kind");
}

bool interaction_is_zero(const InteractionSpec& v) {
    switch (v.kind) {
        case InteractionKind::Gaussian:
        case InteractionKind::TruncatedInverse: return param(v.params, 0, 1.0) == 0.0;
        case InteractionKind::HardSphere:
            return param(v.params, 0, 1.0) == 0.0 || param(v.params, 1, 1e8) == 0.0;
    }
    return false;
}

double interaction_width(const InteractionSpec& v) {
    switch (v.kind) {
        case InteractionKind::Gaussian: return param(v.params, 1, 1.0);
        case InteractionKind::HardSphere: return param(v.params, 0, 1.0);
        case InteractionKind::TruncatedInverse: return param(v.params, 3, 1.0);
    }
    return 0.0;
}

double interaction_range(const InteractionSpec& v) {
    switch (v.kind) {
        case InteractionKind::Gaussian: {
            /* exp(-0.5 z^2) < 1e-14 for z > 8.03 */
            return 8.1 * param(v.params, 1, 1.0);
        }
        case InteractionKind::HardSphere: return param(v.params, 0, 1.0);
        case InteractionKind::TruncatedInverse: return param(v.params, 3, 1.0);
    }
    return 0.0;
}

InteractionSpec rescale_interaction(const InteractionSpec& v, int N, int dim) {
    if (N < 1) fail("InvalidN", "rescale_interaction requires N >= 1");
    if (dim < 1 || dim > 3) fail("InvalidDimension", "rescale_interaction: dim must be 1..3");
    if (N == 1) return v;
    const double nd = std::pow(static_cast<double>(N), dim - 1);
    InteractionSpec out = v;
    switch (v.kind) {
        case InteractionKind::Gaussian: {
            /* N^(d-1) g exp(-(Nr)^2/(2s^2)) = Gaussian(g*N^(d-1), s/N) */
            out.params = {param(v.params, 0, 1.0) * nd, param(v.params, 1, 1.0) / N};
            return out;
        }
        case InteractionKind::HardSphere: {
            out.params = {param(v.params, 0, 1.0) / N, param(v.params, 1, 1e8) * nd};
            return out;
        }
        case InteractionKind::TruncatedInverse: {
            const double g = param(v.params, 0, 1.0);
            const double p = param(v.params, 1, 1.0);
            const double cap = param(v.params, 2, 1e8);
            const double R = param(v.params, 3, 1.0);
            /* N^(d-1) g min((Nr)^-p, cap) = g N^(d-1-p) min(r^-p, N^p cap) on r <= R/N */
            out.params = {g * nd * std::pow(static_cast<double>(N), -p), p,
                          cap * std::pow(static_cast<double>(N), p), R / N};
            return out;
        }
    }
    fail("OutOfRange", "unknown interaction kind");
}

/* ---- radial quadrature ------------------------------------------------------*/

namespace {

/* 16-point Gauss-Legendre nodes/weights on [-1, 1]. */
const double kGlX[16] = {
    -0.9894009349916499, -0.9445750230732326, -0.8656312023878318, -0.7554044083550030,
    -0.6178762444026438, -0.4580167776572274, -0.2816035507792589, -0.0950125098376374,
    0.0950125098376374,  0.2816035507792589,  0.4580167776572274,  0.6178762444026438,
    0.7554044083550030,  0.8656312023878318,  0.9445750230732326,  0.9894009349916499};
const double kGlW[16] = {
    0.0271524594117541, 0.0622535239386479, 0.0951585116824928, 0.1246289712555339,
    0.1495959888165767, 0.1691565193950025, 0.1826034150449236, 0.1894506104550685,
    0.1894506104550685, 0.1826034150449236, 0.1691565193950025, 0.1495959888165767,
    0.1246289712555339, 0.0951585116824928, 0.0622535239386479, 0.0271524594117541};

double panel(const std::function<double(double)>& f, double lo, double hi, double power) {
    const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
    double s = 0.0;
    for (int i = 0; i < 16; ++i) {
        const double r = mid + half * kGlX[i];
        const double fr = f(r);
        if (!std::isfinite(fr)) return std::numeric_limits<double>::infinity();
        s += kGlW[i] * fr * (power == 0.0 ? 1.0 : std::pow(r, power));
    }
    return s * half;
}

}  // namespace

RadialIntegral integrate_radial_to(const std::function<double(double)>& f, double r_max,
                                   double power) {
    RadialIntegral out;
    if (!(r_max > 0.0)) return out;
    double total = 0.0;
    double hi = r_max;
    double prev_mag = -1.0;
    int flat_or_growing = 0;
    int tiny_streak = 0;
    const int max_panels = 200;  // reaches r ~ r_max * 2^-200
    for (int k = 0; k < max_panels; ++k) {
        const double lo = hi * 0.5;
        const double p = panel(f, lo, hi, power);
        if (std::isinf(p)) {
            out.finite = false;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        total += p;
        const double mag = std::abs(p);
        if (prev_mag >= 0.0) {
            if (mag >= 0.999 * prev_mag && mag > 1e-300)
                ++flat_or_growing;
            else
                flat_or_growing = 0;
        }
        if (flat_or_growing >= 24 || std::abs(total) > 1e100) {
            /* panel contributions not decaying toward r=0: divergent */
            out.finite = false;
            out.value = std::numeric_limits<double>::infinity();
            return out;
        }
        tiny_streak = (mag <= 1e-17 * std::max(std::abs(total), 1e-300)) ? tiny_streak + 1 : 0;
        if (tiny_streak >= 3) break;
        prev_mag = mag;
        hi = lo;
    }
    out.value = total;
    return out;
}

RadialIntegral integrate_radial(const std::function<double(double)>& f, double power) {
    /* inner part on (0, 1] */
    RadialIntegral inner_part = integrate_radial_to(f, 1.0, power);
    if (!inner_part.finite) return inner_part;
    /* outer part: [1, infinity) by doubling panels */
    double total = inner_part.value;
    double lo = 1.0;
    int tiny_streak = 0;
    for (int k = 0; k < 64; ++k) {
        const double hi = lo * 2.0;
        const double p = panel(f, lo, hi, power);
        if (std::isinf(p)) return {std::numeric_limits<double>::infinity(), false};
        total += p;
        tiny_streak = (std::abs(p) <= 1e-17 * std::max(std::abs(total), 1e-300)) ? tiny_streak + 1
                                                                                 : 0;
        if (tiny_streak >= 3) return {total, true};
        lo = hi;
    }
    /* tail never became negligible */
    return {total, false};
}

/* ---- mollifier ---------------------------------------------------------------*/

Mollifier::Mollifier(const MollifierSpec& spec, int dim) : eps_(spec.epsilon) {
    if (!(eps_ > 0.0)) fail("OutOfRange", "mollifier epsilon must be positive");
    const double e = eps_;
    const RadialIntegral z = integrate_radial_to(
        [e](double r) { return std::exp(-r * r / (2.0 * e)); }, e, dim - 1);
    const double Z = z.value * sphere_surface(dim);
    if (!(Z > 0.0)) fail("OutOfRange", "mollifier normalization failed");
    inv_z_ = 1.0 / Z;
}

double Mollifier::operator()(double r) const {
    if (r > eps_) return 0.0;
    return inv_z_ * std::exp(-r * r / (2.0 * eps_));
}

GridField sample_mollifier(const MollifierSpec& spec, const Grid& grid) {
    const Mollifier m(spec, grid.dim);
    GridField f = sample_field(grid, [&](const double* x) {
        double r2 = 0.0;
        for (int k = 0; k < grid.dim; ++k) r2 += x[k] * x[k];
        return m(std::sqrt(r2));
    });
    const double mass = integrate(f);
    if (!(mass > 0.0))
        fail("KernelUnresolved", "mollifier support does not cover any grid node");
    for (double& v : f.values) v /= mass;
    return f;
}

/* ---- convolution ---------------------------------------------------------------*/

GridField convolve_radial(const Grid& grid, const std::function<double(double)>& kernel,
                          double range, const GridField& density) {
    const int n = grid.points_per_axis;
    const double h = grid.spacing;
    const bool periodic = grid.boundary == Boundary::Periodic;

    /* stamp of kernel values on the offset lattice */
    int m = static_cast<int>(std::ceil(range / h));
    int lo = -m, hi = m;
    if (periodic && 2 * m + 1 > n) {  // each node visited once on the torus
        lo = -(n - 1) / 2;
        hi = n / 2;
    } else if (!periodic && m > n - 1) {
        lo = -(n - 1);
        hi = n - 1;
    }
    struct StampEntry {
        int d[3];
        double k;
    };
    std::vector<StampEntry> stamp;
    {
        int d[3] = {0, 0, 0};
        std::function<void(int)> rec = [&](int axis) {
            if (axis == grid.dim) {
                double r2 = 0.0;
                for (int kk = 0; kk < grid.dim; ++kk) r2 += d[kk] * (double)d[kk];
                const double r = h * std::sqrt(r2);
                const double kv = kernel(r);
                if (kv != 0.0) stamp.push_back({{d[0], d[1], d[2]}, kv});
                return;
            }
            for (int off = lo; off <= hi; ++off) {
                d[axis] = off;
                rec(axis + 1);
            }
        };
        rec(0);
    }

    GridField out = make_field(grid);
    std::array<int, 3> id{0, 0, 0};
    for (std::int64_t idx = 0; idx < grid.node_count; ++idx) {
        double acc = 0.0;
        for (const auto& e : stamp) {
            std::int64_t j = 0;
            bool inside = true;
            double w = periodic ? 0.0 : 1.0;
            for (int k = 0; k < grid.dim; ++k) {
                int jj = id[k] + e.d[k];
                if (periodic) {
                    jj = ((jj % n) + n) % n;
                } else {
                    if (jj < 0 || jj >= n) {
                        inside = false;
                        break;
                    }
                    w *= grid.weight1d(jj);
                }
                j = j * n + jj;
            }
            if (!inside) continue;
            acc += e.k * density[j] * (periodic ? 1.0 : w);
        }
        out[idx] = periodic ? acc * grid.cell_volume() : acc;
        for (int k = grid.dim - 1; k >= 0; --k) {
            if (++id[k] < n) break;
            id[k] = 0;
        }
    }
    return out;
}

namespace {

/* Gaussian kernels factor over axes, so the d-dimensional quadrature sum is a
 * sequence of 1-d passes: out = g * (k1 * ... * kd) applied to the weighted
 * density. Exactly matches the direct stamp (same offset box, same weights). */
GridField convolve_gaussian_separable(const Grid& grid, double g, double s,
                                      const GridField& density) {
    const int n = grid.points_per_axis;
    const double h = grid.spacing;
    const bool periodic = grid.boundary == Boundary::Periodic;

    int m = static_cast<int>(std::ceil(8.1 * s / h));
    int lo = -m, hi = m;
    if (periodic && 2 * m + 1 > n) {
        lo = -(n - 1) / 2;
        hi = n / 2;
    } else if (!periodic && m > n - 1) {
        lo = -(n - 1);
        hi = n - 1;
    }
    std::vector<double> prof(hi - lo + 1);
    for (int off = lo; off <= hi; ++off) {
        const double x = off * h;
        prof[off - lo] = std::exp(-x * x / (2.0 * s * s));
    }

    GridField cur = density;
    GridField next = make_field(grid);
    std::vector<double> line(n);
    for (int axis = 0; axis < grid.dim; ++axis) {
        const std::int64_t st = grid.stride(axis);
        const std::int64_t block = st * n;
        for (std::int64_t outer = 0; outer < grid.node_count / block; ++outer) {
            for (std::int64_t inner = 0; inner < st; ++inner) {
                const std::int64_t base = outer * block + inner;
                for (int i = 0; i < n; ++i)
                    line[i] = cur[base + i * st] * (periodic ? h : grid.weight1d(i));
                for (int i = 0; i < n; ++i) {
                    double acc = 0.0;
                    for (int off = lo; off <= hi; ++off) {
                        int j = i + off;
                        if (periodic) {
                            j = ((j % n) + n) % n;
                        } else if (j < 0 || j >= n) {
                            continue;
                        }
                        acc += prof[off - lo] * line[j];
                    }
                    next[base + i * st] = acc;
                }
            }
        }
        cur.values.swap(next.values);
    }
    for (double& v : cur.values) v *= g;
    return cur;
}

}  // namespace

GridField convolve_density(const Grid& grid, const InteractionSpec& kernel,
                           const GridField& density) {
    if (interaction_is_zero(kernel)) return make_field(grid);
    const double width = interaction_width(kernel);
    if (width < grid.spacing)
        fail("KernelUnresolved", "interaction width " + std::to_string(width) +
                                     " is below the grid spacing " + std::to_string(grid.spacing));
    if (kernel.kind == InteractionKind::Gaussian)
        return convolve_gaussian_separable(grid, kernel.params[0], kernel.params[1], density);
    return convolve_radial(
        grid, [&](double r) { return interaction_value(kernel, r); }, interaction_range(kernel),
        density);
}

GridField convolve_density(const Grid& grid, const MollifierSpec& kernel,
                           const GridField& density) {
    if (kernel.epsilon < grid.spacing)
        fail("KernelUnresolved", "mollifier epsilon " + std::to_string(kernel.epsilon) +
                                     " is below the grid spacing " +
                                     std::to_string(grid.spacing));
    const Mollifier m(kernel, grid.dim);
    /* renormalize by the discrete stamp mass so convolution preserves mass */
    GridField out = convolve_radial(
        grid, [&](double r) { return m(r); }, kernel.epsilon, density);
    GridField ones = make_field(grid, 1.0);
    GridField unit = convolve_radial(
        grid, [&](double r) { return m(r); }, kernel.epsilon, ones);
    /* on a periodic grid unit mass is constant; use its center value */
    const double scale = unit[grid.node_count / 2];
    if (scale > 0.0)
        for (double& v : out.values) v /= scale;
    return out;
}

/* ---- assumptions ---------------------------------------------------------------*/

AssumptionReport validate_assumptions(const InteractionSpec& v, int dim) {
    if (dim < 1 || dim > 3) fail("InvalidDimension", "validate_assumptions: dim must be 1..3");
    AssumptionReport rep;
    const double surf = sphere_surface(dim);
    const bool hard_core =
        v.kind == InteractionKind::HardSphere && !interaction_is_zero(v);

    auto add = [&](const std::string& name, const RadialIntegral& ri, double factor) {
        rep.checks.push_back({name, ri.finite,
                              ri.finite ? ri.value * factor
                                        : std::numeric_limits<double>::infinity()});
        rep.all_pass = rep.all_pass && ri.finite;
    };

    if (hard_core) {
        /* infinite core: every integrability check fails by inspection */
        add("v_integrable", {0.0, false}, surf);
        add("v_square_integrable", {0.0, false}, surf);
        if (dim == 3) add("green_overlap", {0.0, false}, surf);
        return rep;
    }

    auto value = [&](double r) { return interaction_value_analytic(v, r); };
    auto value_sq = [&](double r) {
        const double x = interaction_value_analytic(v, r);
        return x * x;
    };
    add("v_integrable", integrate_radial(value, dim - 1), surf);
    add("v_square_integrable", integrate_radial(value_sq, dim - 1), surf);
    if (dim == 3) {
        /* Green-function overlap near 0: G(0,y) ~ |y|^-1 against the
         * decreasing majorant of v (equal to v for this kernel family) */
        const double eps0 = std::min(1.0, std::max(interaction_range(v), 1e-3));
        add("green_overlap", integrate_radial_to(value, eps0, 1.0), surf);
    }
    return rep;
}

}  // namespace gplab
