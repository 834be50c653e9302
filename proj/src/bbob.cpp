#include "bbo/bbob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <utility>

#include "bbo/errors.hpp"
#include "bbo/linalg.hpp"
#include "bbo/rng.hpp"

namespace bbo {

namespace {

constexpr double kPi = 3.14159265358979323846;

// --- standard coordinate transforms ---------------------------------------

double t_osz_scalar(double x) {
    if (x == 0.0) return 0.0;
    const double xhat = std::log(std::abs(x));
    const double c1 = x > 0.0 ? 10.0 : 5.5;
    const double c2 = x > 0.0 ? 7.9 : 3.1;
    const double sign = x > 0.0 ? 1.0 : -1.0;
    return sign * std::exp(xhat + 0.049 * (std::sin(c1 * xhat) + std::sin(c2 * xhat)));
}

std::vector<double> t_osz(std::vector<double> v) {
    for (auto& x : v) x = t_osz_scalar(x);
    return v;
}

std::vector<double> t_asy(std::vector<double> v, double beta) {
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i) {
        double& x = v[static_cast<std::size_t>(i)];
        if (x > 0.0) {
            const double e = 1.0 + beta * (static_cast<double>(i) / (n - 1)) * std::sqrt(x);
            x = std::pow(x, e);
        }
    }
    return v;
}

// diag(alpha^(0.5 * i/(n-1))) applied in place
std::vector<double> lambda_scale(std::vector<double> v, double alpha) {
    const int n = static_cast<int>(v.size());
    for (int i = 0; i < n; ++i)
        v[static_cast<std::size_t>(i)] *= std::pow(alpha, 0.5 * static_cast<double>(i) / (n - 1));
    return v;
}

double boundary_penalty(std::span<const double> x) {
    double s = 0.0;
    for (double xi : x) {
        const double d = std::abs(xi) - 5.0;
        if (d > 0.0) s += d * d;
    }
    return s;
}

std::vector<double> subtract(std::span<const double> x, std::span<const double> y) {
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = x[i] - y[i];
    return out;
}

// --- instance data ----------------------------------------------------------

Rng instance_rng(int fid, int instance, int dim, const char* salt) {
    std::uint64_t h = stable_hash("bbob");
    h = hash_combine(h, static_cast<std::uint64_t>(fid));
    h = hash_combine(h, static_cast<std::uint64_t>(instance));
    h = hash_combine(h, static_cast<std::uint64_t>(dim));
    h = hash_combine(h, stable_hash(salt));
    return Rng(h);
}

std::vector<double> draw_x_opt(int fid, int instance, int dim) {
    Rng rng = instance_rng(fid, instance, dim, "xopt");
    std::vector<double> x(static_cast<std::size_t>(dim));
    for (auto& v : x) v = rng.uniform(-4.0, 4.0);
    return x;
}

double draw_f_opt(int fid, int instance, int dim) {
    Rng rng = instance_rng(fid, instance, dim, "fopt");
    return std::round(rng.uniform(-100.0, 100.0) * 100.0) / 100.0;
}

Matrix draw_rotation(int fid, int instance, int dim, const char* salt) {
    Rng rng = instance_rng(fid, instance, dim, salt);
    return random_rotation(dim, rng);
}

struct FnEntry {
    int id;
    const char* name;
};

constexpr FnEntry kFunctionTable[] = {
    {1, "sphere"},
    {3, "rastrigin"},
    {4, "bueche_rastrigin"},
    {6, "attractive_sector"},
    {9, "rosenbrock_rotated"},
    {10, "ellipsoid_rotated"},
    {11, "discus"},
    {13, "sharp_ridge"},
    {14, "different_powers"},
    {15, "rastrigin_rotated"},
    {17, "schaffers_f7"},
    {18, "schaffers_f7_ill"},
    {19, "griewank_rosenbrock"},
    {20, "schwefel"},
    {21, "gallagher_gaussian101"},
    {22, "gallagher_gaussian21"},
    {24, "lunacek_bi_rastrigin"},
};

using Evaluator = std::function<double(std::span<const double>)>;

double rastrigin_core(std::span<const double> z) {
    const int n = static_cast<int>(z.size());
    double c = 0.0, sq = 0.0;
    for (double zi : z) {
        c += std::cos(2.0 * kPi * zi);
        sq += zi * zi;
    }
    return 10.0 * (n - c) + sq;
}

Evaluator build_evaluator(int fid, int instance, int dim,
                          const std::vector<double>& x_opt, double f_opt) {
    const int n = dim;

    switch (fid) {
    case 1: // sphere
        return [x_opt, f_opt](std::span<const double> x) {
            double s = 0.0;
            for (std::size_t i = 0; i < x.size(); ++i) {
                const double d = x[i] - x_opt[i];
                s += d * d;
            }
            return s + f_opt;
        };
    case 3: // separable Rastrigin
        return [x_opt, f_opt](std::span<const double> x) {
            auto z = lambda_scale(t_asy(t_osz(subtract(x, x_opt)), 0.2), 10.0);
            return rastrigin_core(z) + f_opt;
        };
    case 4: // Bueche-Rastrigin
        return [x_opt, f_opt, n](std::span<const double> x) {
            auto z = t_osz(subtract(x, x_opt));
            for (int i = 0; i < n; ++i) {
                double s = std::pow(10.0, 0.5 * static_cast<double>(i) / (n - 1));
                if (z[static_cast<std::size_t>(i)] > 0.0 && i % 2 == 0) s *= 10.0; // odd axis, 1-indexed
                z[static_cast<std::size_t>(i)] *= s;
            }
            return rastrigin_core(z) + 100.0 * boundary_penalty(x) + f_opt;
        };
    case 6: { // attractive sector
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const Matrix q = draw_rotation(fid, instance, dim, "Q");
        return [x_opt, f_opt, r, q](std::span<const double> x) {
            auto z = q.multiply(lambda_scale(r.multiply(subtract(x, x_opt)), 10.0));
            double s = 0.0;
            for (std::size_t i = 0; i < z.size(); ++i) {
                const double scale = z[i] * x_opt[i] > 0.0 ? 100.0 : 1.0;
                s += scale * z[i] * scale * z[i];
            }
            return std::pow(t_osz_scalar(s), 0.9) + f_opt;
        };
    }
    case 9: { // rotated Rosenbrock
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const double scale = std::max(1.0, std::sqrt(static_cast<double>(n)) / 8.0);
        return [x_opt, f_opt, r, scale](std::span<const double> x) {
            auto z = r.multiply(subtract(x, x_opt));
            for (auto& zi : z) zi = scale * zi + 1.0;
            double s = 0.0;
            for (std::size_t i = 0; i + 1 < z.size(); ++i) {
                const double a = z[i] * z[i] - z[i + 1];
                const double b = z[i] - 1.0;
                s += 100.0 * a * a + b * b;
            }
            return s + f_opt;
        };
    }
    case 10: { // rotated ellipsoid
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        return [x_opt, f_opt, r, n](std::span<const double> x) {
            auto z = t_osz(r.multiply(subtract(x, x_opt)));
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += std::pow(10.0, 6.0 * static_cast<double>(i) / (n - 1)) *
                     z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)];
            return s + f_opt;
        };
    }
    case 11: { // discus
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        return [x_opt, f_opt, r](std::span<const double> x) {
            auto z = t_osz(r.multiply(subtract(x, x_opt)));
            double s = 1e6 * z[0] * z[0];
            for (std::size_t i = 1; i < z.size(); ++i) s += z[i] * z[i];
            return s + f_opt;
        };
    }
    case 13: { // sharp ridge
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const Matrix q = draw_rotation(fid, instance, dim, "Q");
        return [x_opt, f_opt, r, q](std::span<const double> x) {
            auto z = q.multiply(lambda_scale(r.multiply(subtract(x, x_opt)), 10.0));
            double tail = 0.0;
            for (std::size_t i = 1; i < z.size(); ++i) tail += z[i] * z[i];
            return z[0] * z[0] + 100.0 * std::sqrt(tail) + f_opt;
        };
    }
    case 14: { // different powers
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        return [x_opt, f_opt, r, n](std::span<const double> x) {
            auto z = r.multiply(subtract(x, x_opt));
            double s = 0.0;
            for (int i = 0; i < n; ++i)
                s += std::pow(std::abs(z[static_cast<std::size_t>(i)]),
                              2.0 + 4.0 * static_cast<double>(i) / (n - 1));
            return std::sqrt(s) + f_opt;
        };
    }
    case 15: { // rotated Rastrigin
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const Matrix q = draw_rotation(fid, instance, dim, "Q");
        return [x_opt, f_opt, r, q](std::span<const double> x) {
            auto z = r.multiply(lambda_scale(q.multiply(t_asy(t_osz(r.multiply(subtract(x, x_opt))), 0.2)), 10.0));
            return rastrigin_core(z) + f_opt;
        };
    }
    case 17:
    case 18: { // Schaffers F7, plain and ill-conditioned
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const Matrix q = draw_rotation(fid, instance, dim, "Q");
        const double alpha = fid == 17 ? 10.0 : 1000.0;
        return [x_opt, f_opt, r, q, alpha, n](std::span<const double> x) {
            auto z = lambda_scale(q.multiply(t_asy(r.multiply(subtract(x, x_opt)), 0.5)), alpha);
            double s = 0.0;
            for (int i = 0; i + 1 < n; ++i) {
                const double si = std::sqrt(z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)] +
                                            z[static_cast<std::size_t>(i + 1)] * z[static_cast<std::size_t>(i + 1)]);
                const double root = std::sqrt(si);
                const double trig = std::sin(50.0 * std::pow(si, 0.2));
                s += root + root * trig * trig;
            }
            s /= n - 1;
            return s * s + 10.0 * boundary_penalty(x) + f_opt;
        };
    }
    case 19: { // composite Griewank-Rosenbrock
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const double scale = std::max(1.0, std::sqrt(static_cast<double>(n)) / 8.0);
        return [x_opt, f_opt, r, scale, n](std::span<const double> x) {
            auto z = r.multiply(subtract(x, x_opt));
            for (auto& zi : z) zi = scale * zi + 1.0;
            double s = 0.0;
            for (int i = 0; i + 1 < n; ++i) {
                const double a = z[static_cast<std::size_t>(i)] * z[static_cast<std::size_t>(i)] -
                                 z[static_cast<std::size_t>(i + 1)];
                const double b = z[static_cast<std::size_t>(i)] - 1.0;
                const double si = 100.0 * a * a + b * b;
                s += si / 4000.0 - std::cos(si);
            }
            return 10.0 * s / (n - 1) + 10.0 + f_opt;
        };
    }
    case 20: { // Schwefel
        Rng rng = instance_rng(fid, instance, dim, "sign");
        std::vector<double> sign(static_cast<std::size_t>(n));
        for (auto& s : sign) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
        constexpr double kMuHat = 4.2096874633;
        return [x_opt, f_opt, sign, n](std::span<const double> x) {
            // translated so the single in-bounds optimum sits exactly at x_opt
            std::vector<double> xhat(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                xhat[static_cast<std::size_t>(i)] =
                    kMuHat + 2.0 * sign[static_cast<std::size_t>(i)] * (x[static_cast<std::size_t>(i)] - x_opt[i]);
            std::vector<double> zhat(static_cast<std::size_t>(n));
            zhat[0] = xhat[0];
            for (int i = 1; i < n; ++i)
                zhat[static_cast<std::size_t>(i)] = xhat[static_cast<std::size_t>(i)] +
                                                    0.25 * (xhat[static_cast<std::size_t>(i - 1)] - kMuHat);
            for (auto& z : zhat) z -= kMuHat;
            auto z = lambda_scale(std::move(zhat), 10.0);
            for (auto& zi : z) zi = 100.0 * (zi + kMuHat);
            double s = 0.0;
            std::vector<double> scaled(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                s += z[static_cast<std::size_t>(i)] *
                     std::sin(std::sqrt(std::abs(z[static_cast<std::size_t>(i)])));
                scaled[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)] / 100.0;
            }
            return -s / (100.0 * n) + 4.189828872724339 + 100.0 * boundary_penalty(scaled) + f_opt;
        };
    }
    case 21:
    case 22: { // Gallagher peaks
        const int peaks = fid == 21 ? 101 : 21;
        const double alpha_first = fid == 21 ? 1000.0 : 1e6;
        Rng rng = instance_rng(fid, instance, dim, "peaks");
        const Matrix r = draw_rotation(fid, instance, dim, "R");

        std::vector<std::vector<double>> centers(static_cast<std::size_t>(peaks));
        std::vector<std::vector<double>> diag(static_cast<std::size_t>(peaks));
        std::vector<double> weight(static_cast<std::size_t>(peaks));

        const int pool = peaks - 1;
        std::vector<double> alphas(static_cast<std::size_t>(pool));
        for (int j = 0; j < pool; ++j)
            alphas[static_cast<std::size_t>(j)] = std::pow(1000.0, 2.0 * j / (pool - 1));
        // Fisher-Yates with the instance stream
        for (int j = pool - 1; j > 0; --j)
            std::swap(alphas[static_cast<std::size_t>(j)],
                      alphas[static_cast<std::size_t>(rng.uniform_int(0, j))]);

        for (int p = 0; p < peaks; ++p) {
            if (p == 0) {
                centers[0] = x_opt;
                weight[0] = 10.0;
            } else {
                auto& c = centers[static_cast<std::size_t>(p)];
                c.resize(static_cast<std::size_t>(n));
                for (auto& v : c) v = rng.uniform(-4.9, 4.9);
                weight[static_cast<std::size_t>(p)] = 1.1 + 8.0 * (p - 1) / (peaks - 2);
            }
            const double alpha = p == 0 ? alpha_first : alphas[static_cast<std::size_t>(p - 1)];
            auto& d = diag[static_cast<std::size_t>(p)];
            d.resize(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                d[static_cast<std::size_t>(i)] =
                    std::pow(alpha, 0.5 * static_cast<double>(i) / (n - 1)) / std::pow(alpha, 0.25);
            for (int i = n - 1; i > 0; --i)
                std::swap(d[static_cast<std::size_t>(i)], d[static_cast<std::size_t>(rng.uniform_int(0, i))]);
        }

        return [f_opt, r, centers, diag, weight, n, peaks](std::span<const double> x) {
            double best = 0.0;
            for (int p = 0; p < peaks; ++p) {
                auto v = r.multiply(subtract(x, centers[static_cast<std::size_t>(p)]));
                double q = 0.0;
                for (int i = 0; i < n; ++i)
                    q += diag[static_cast<std::size_t>(p)][static_cast<std::size_t>(i)] *
                         v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
                best = std::max(best, weight[static_cast<std::size_t>(p)] * std::exp(-q / (2.0 * n)));
            }
            const double t = t_osz_scalar(10.0 - best);
            return t * t + boundary_penalty(x) + f_opt;
        };
    }
    case 24: { // Lunacek bi-Rastrigin
        Rng rng = instance_rng(fid, instance, dim, "sign");
        std::vector<double> sign(static_cast<std::size_t>(n));
        for (auto& s : sign) s = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const Matrix r = draw_rotation(fid, instance, dim, "R");
        const Matrix q = draw_rotation(fid, instance, dim, "Q");
        const double mu0 = 2.5;
        const double s_coef = 1.0 - 1.0 / (2.0 * std::sqrt(static_cast<double>(n) + 20.0) - 8.2);
        const double mu1 = -std::sqrt((mu0 * mu0 - 1.0) / s_coef);
        return [x_opt, f_opt, sign, r, q, mu0, s_coef, mu1, n](std::span<const double> x) {
            std::vector<double> xhat(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i)
                xhat[static_cast<std::size_t>(i)] =
                    mu0 + 2.0 * sign[static_cast<std::size_t>(i)] * (x[static_cast<std::size_t>(i)] - x_opt[i]);
            double s0 = 0.0, s1 = 0.0;
            std::vector<double> centered(static_cast<std::size_t>(n));
            for (int i = 0; i < n; ++i) {
                const double xi = xhat[static_cast<std::size_t>(i)];
                s0 += (xi - mu0) * (xi - mu0);
                s1 += (xi - mu1) * (xi - mu1);
                centered[static_cast<std::size_t>(i)] = xi - mu0;
            }
            auto z = q.multiply(lambda_scale(r.multiply(centered), 100.0));
            double c = 0.0;
            for (double zi : z) c += std::cos(2.0 * kPi * zi);
            const double basin = std::min(s0, 1.0 * n + s_coef * s1);
            return basin + 10.0 * (n - c) + 1e4 * boundary_penalty(x) + f_opt;
        };
    }
    default:
        throw UnsupportedFunction("bbob: function id " + std::to_string(fid) + " not implemented");
    }
}

} // namespace

const std::vector<int>& bbob_function_ids() {
    static const std::vector<int> ids = [] {
        std::vector<int> v;
        for (const auto& e : kFunctionTable) v.push_back(e.id);
        return v;
    }();
    return ids;
}

std::string bbob_function_name(int function_id) {
    for (const auto& e : kFunctionTable)
        if (e.id == function_id) return e.name;
    throw UnsupportedFunction("bbob: function id " + std::to_string(function_id) + " not implemented");
}

TaskSpec bbob_task(int function_id, int instance, int dim) {
    bbob_function_name(function_id); // validates the id
    if (dim != 2 && dim != 5) throw ContractViolation("bbob_task: dim must be 2 or 5");
    if (instance < 1) throw ContractViolation("bbob_task: instance must be >= 1");

    const auto x_opt = draw_x_opt(function_id, instance, dim);
    const double f_opt = draw_f_opt(function_id, instance, dim);

    TaskSpec task;
    char id[64];
    std::snprintf(id, sizeof id, "bbob%dd_f%02d_i%d", dim, function_id, instance);
    task.id = id;
    task.family = dim == 2 ? Family::Bbob2d : Family::Bbob5d;
    task.bounds = Bounds::box(dim, -5.0, 5.0);
    task.seed = hash_combine(static_cast<std::uint64_t>(function_id),
                             hash_combine(static_cast<std::uint64_t>(instance),
                                          static_cast<std::uint64_t>(dim)));
    task.optimum_loss = f_opt;
    for (int i = 0; i < dim; ++i) task.keys.push_back("x" + std::to_string(i));
    task.evaluator = build_evaluator(function_id, instance, dim, x_opt, f_opt);
    return task;
}

std::vector<double> bbob_task_optimum(const TaskSpec& task) {
    // re-derive fid/instance from the id string
    int dim = 0, fid = 0, instance = 0;
    if (std::sscanf(task.id.c_str(), "bbob%dd_f%d_i%d", &dim, &fid, &instance) != 3)
        throw ContractViolation("bbob_task_optimum: not a bbob task: " + task.id);
    return draw_x_opt(fid, instance, dim);
}

std::vector<TaskSpec> make_bbob_tasks(int dim, int count, int max_instances) {
    if (count < 1) throw ContractViolation("make_bbob_tasks: count must be >= 1");
    std::vector<TaskSpec> tasks;
    for (int inst = 1; inst <= max_instances && static_cast<int>(tasks.size()) < count; ++inst)
        for (int fid : bbob_function_ids()) {
            if (static_cast<int>(tasks.size()) >= count) break;
            tasks.push_back(bbob_task(fid, inst, dim));
        }
    if (static_cast<int>(tasks.size()) < count)
        throw ContractViolation("make_bbob_tasks: catalog exhausted before reaching count");
    return tasks;
}

} // namespace bbo
