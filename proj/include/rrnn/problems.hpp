#pragma once

// Benchmark elliptic problems  -div(A grad u) + kappa u = f  on the unit
// interval / square with Dirichlet data g. The coefficient is scalar (A * I).

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "rrnn/error.hpp"
#include "rrnn/partition.hpp"

namespace rrnn {

template <int Dim>
using ScalarField = std::function<double(const Point<Dim>&)>;

template <int Dim>
struct ProblemSpec {
    std::string name;
    Domain<Dim> domain{};
    ScalarField<Dim> coefficient;
    ScalarField<Dim> source;
    ScalarField<Dim> dirichlet;
    ScalarField<Dim> reaction;  ///< empty means kappa == 0
    ScalarField<Dim> exact;     ///< empty when no closed form is known
    std::map<std::string, double> params;
    std::optional<std::pair<double, double>> ellipticity;  ///< (lambda, Lambda), metadata only

    bool has_exact() const { return static_cast<bool>(exact); }
    bool has_reaction() const { return static_cast<bool>(reaction); }
    double kappa(const Point<Dim>& x) const { return reaction ? reaction(x) : 0.0; }

    /// Coefficient positivity (and kappa >= 0) on a random sample of the domain.
    /// Returns the sampled (min, max) of the coefficient.
    std::pair<double, double> check_ellipticity(int samples = 10000, std::uint64_t seed = 12345) const {
        if (!coefficient || !source || !dirichlet) throw InvalidArgument("problem '" + name + "' is incomplete");
        std::mt19937_64 rng(seed);
        std::array<std::uniform_real_distribution<double>, Dim> axis;
        for (int d = 0; d < Dim; ++d)
            axis[d] = std::uniform_real_distribution<double>(domain.lower[d], domain.upper[d]);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (int s = 0; s < samples; ++s) {
            Point<Dim> x;
            for (int d = 0; d < Dim; ++d) x[d] = axis[d](rng);
            const double a = coefficient(x);
            if (!(a > 0.0) || !std::isfinite(a))
                throw InvalidArgument("coefficient of '" + name + "' is not positive at " + format_point<Dim>(x));
            if (reaction && !(reaction(x) >= 0.0))
                throw InvalidArgument("reaction term of '" + name + "' is negative at " + format_point<Dim>(x));
            lo = std::min(lo, a);
            hi = std::max(hi, a);
        }
        return {lo, hi};
    }
};

namespace detail {

inline void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) throw InvalidArgument(std::string(what) + " must be positive");
}

template <int Dim>
ProblemSpec<Dim> finish(ProblemSpec<Dim> p) {
    const auto [lo, hi] = p.check_ellipticity();
    if (!p.ellipticity) p.ellipticity = std::make_pair(lo, hi);
    return p;
}

} // namespace detail

using std::numbers::pi;

/// A = 1 / (2 + cos(2 pi x / eps)), f = 1, u(0) = u(1) = 0, closed-form solution.
inline ProblemSpec<1> periodic_1d(double eps) {
    detail::require_positive(eps, "eps");
    ProblemSpec<1> p;
    p.name = "periodic_1d";
    p.params = {{"eps", eps}};
    p.coefficient = [eps](const Point<1>& x) { return 1.0 / (2.0 + std::cos(2.0 * pi * x[0] / eps)); };
    p.source = [](const Point<1>&) { return 1.0; };
    p.exact = [eps](const Point<1>& p1) {
        const double x = p1[0];
        const double t = 2.0 * pi * x / eps;
        return x - x * x + eps * (std::sin(t) / (4.0 * pi) - x * std::sin(t) / (2.0 * pi)) -
               eps * eps * (std::cos(t) / (4.0 * pi * pi) + 1.0 / (4.0 * pi * pi));
    };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(1.0 / 3.0, 1.0);
    return detail::finish(std::move(p));
}

/// A = 2 + sin(2 pi x / eps) cos(2 pi x), f = 1, g = 1. No closed form.
inline ProblemSpec<1> two_scale_1d(double eps) {
    detail::require_positive(eps, "eps");
    ProblemSpec<1> p;
    p.name = "two_scale_1d";
    p.params = {{"eps", eps}};
    p.coefficient = [eps](const Point<1>& x) {
        return 2.0 + std::sin(2.0 * pi * x[0] / eps) * std::cos(2.0 * pi * x[0]);
    };
    p.source = [](const Point<1>&) { return 1.0; };
    p.dirichlet = [](const Point<1>&) { return 1.0; };
    p.ellipticity = std::make_pair(1.0, 3.0);
    return detail::finish(std::move(p));
}

/// A = (2 + cos(2 pi x / eps1)) (2 + cos(2 pi x / eps2)), f = 1, g = 1.
inline ProblemSpec<1> three_scale_1d(double eps1, double eps2) {
    detail::require_positive(eps1, "eps1");
    detail::require_positive(eps2, "eps2");
    ProblemSpec<1> p;
    p.name = "three_scale_1d";
    p.params = {{"eps1", eps1}, {"eps2", eps2}};
    p.coefficient = [eps1, eps2](const Point<1>& x) {
        return (2.0 + std::cos(2.0 * pi * x[0] / eps1)) * (2.0 + std::cos(2.0 * pi * x[0] / eps2));
    };
    p.source = [](const Point<1>&) { return 1.0; };
    p.dirichlet = [](const Point<1>&) { return 1.0; };
    p.ellipticity = std::make_pair(1.0, 9.0);
    return detail::finish(std::move(p));
}

/// A = 1 / (4 + cos(2 pi r^2 / eps)), f = -r^2, radially symmetric exact solution.
inline ProblemSpec<2> radial_2d(double eps) {
    detail::require_positive(eps, "eps");
    ProblemSpec<2> p;
    p.name = "radial_2d";
    p.params = {{"eps", eps}};
    p.coefficient = [eps](const Point<2>& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        return 1.0 / (4.0 + std::cos(2.0 * pi * r2 / eps));
    };
    p.source = [](const Point<2>& x) { return -(x[0] * x[0] + x[1] * x[1]); };
    p.exact = [eps](const Point<2>& x) {
        const double r2 = x[0] * x[0] + x[1] * x[1];
        const double t = 2.0 * pi * r2 / eps;
        return 0.25 * r2 * r2 + eps / (16.0 * pi) * r2 * std::sin(t) + eps * eps / (32.0 * pi * pi) * std::cos(t);
    };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(0.2, 1.0 / 3.0);
    return detail::finish(std::move(p));
}

/// Two-scale oscillating coefficient on the square, f = -10, g = 0.
inline ProblemSpec<2> two_scale_2d(double eps) {
    detail::require_positive(eps, "eps");
    ProblemSpec<2> p;
    p.name = "two_scale_2d";
    p.params = {{"eps", eps}};
    p.coefficient = [eps](const Point<2>& x) {
        const double sx = std::sin(2.0 * pi * x[0] / eps);
        const double sy = std::sin(2.0 * pi * x[1] / eps);
        const double cx = std::cos(2.0 * pi * x[0] / eps);
        return (1.5 + sx) / (1.5 + sy) + (1.5 + sy) / (1.5 + cx) + std::sin(4.0 * x[0] * x[0] * x[1] * x[1]) + 1.0;
    };
    p.source = [](const Point<2>&) { return -10.0; };
    p.dirichlet = [](const Point<2>&) { return 0.0; };
    return detail::finish(std::move(p));
}

/// Poisson-Boltzmann type problem with kappa = pi^2 and an imposed exact solution
///   u = sin(pi x) sin(pi y) + 0.05 sin(10 pi x) sin(20 pi y),
///   A = 1 + 0.5 cos(10 pi x) cos(20 pi y).
inline ProblemSpec<2> poisson_boltzmann_2d() {
    ProblemSpec<2> p;
    p.name = "poisson_boltzmann_2d";
    p.coefficient = [](const Point<2>& x) {
        return 1.0 + 0.5 * std::cos(10.0 * pi * x[0]) * std::cos(20.0 * pi * x[1]);
    };
    p.reaction = [](const Point<2>&) { return pi * pi; };
    p.exact = [](const Point<2>& x) {
        return std::sin(pi * x[0]) * std::sin(pi * x[1]) + 0.05 * std::sin(10.0 * pi * x[0]) * std::sin(20.0 * pi * x[1]);
    };
    // f = -(A lap u + grad A . grad u) + kappa u
    p.source = [](const Point<2>& x) {
        const double s1x = std::sin(pi * x[0]), c1x = std::cos(pi * x[0]);
        const double s1y = std::sin(pi * x[1]), c1y = std::cos(pi * x[1]);
        const double s10x = std::sin(10.0 * pi * x[0]), c10x = std::cos(10.0 * pi * x[0]);
        const double s20y = std::sin(20.0 * pi * x[1]), c20y = std::cos(20.0 * pi * x[1]);
        const double a = 1.0 + 0.5 * c10x * c20y;
        const double ax = -5.0 * pi * s10x * c20y;
        const double ay = -10.0 * pi * c10x * s20y;
        const double u = s1x * s1y + 0.05 * s10x * s20y;
        const double ux = pi * c1x * s1y + 0.5 * pi * c10x * s20y;
        const double uy = pi * s1x * c1y + pi * s10x * c20y;
        const double lap = -2.0 * pi * pi * s1x * s1y - 25.0 * pi * pi * s10x * s20y;
        return -(a * lap + ax * ux + ay * uy) + pi * pi * u;
    };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(0.5, 1.5);
    return detail::finish(std::move(p));
}

// Manufactured problems with simple closed forms, used as sanity checks.

/// A = 1, f = 0, u = x.
inline ProblemSpec<1> linear_1d() {
    ProblemSpec<1> p;
    p.name = "linear_1d";
    p.coefficient = [](const Point<1>&) { return 1.0; };
    p.source = [](const Point<1>&) { return 0.0; };
    p.exact = [](const Point<1>& x) { return x[0]; };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(1.0, 1.0);
    return detail::finish(std::move(p));
}

/// A = 1, u = sin(pi x).
inline ProblemSpec<1> sine_1d() {
    ProblemSpec<1> p;
    p.name = "sine_1d";
    p.coefficient = [](const Point<1>&) { return 1.0; };
    p.source = [](const Point<1>& x) { return pi * pi * std::sin(pi * x[0]); };
    p.exact = [](const Point<1>& x) { return std::sin(pi * x[0]); };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(1.0, 1.0);
    return detail::finish(std::move(p));
}

/// A = 1, u = sin(pi x) sin(pi y).
inline ProblemSpec<2> sine_2d() {
    ProblemSpec<2> p;
    p.name = "sine_2d";
    p.coefficient = [](const Point<2>&) { return 1.0; };
    p.source = [](const Point<2>& x) { return 2.0 * pi * pi * std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    p.exact = [](const Point<2>& x) { return std::sin(pi * x[0]) * std::sin(pi * x[1]); };
    p.dirichlet = p.exact;
    p.ellipticity = std::make_pair(1.0, 1.0);
    return detail::finish(std::move(p));
}

/// Named problem lookup for configuration files and the command line.
struct ProblemRequest {
    std::string name;
    double eps = 0.5;
    double eps1 = 0.1;
    double eps2 = 0.01;
};

inline const std::vector<std::pair<std::string, int>>& problem_catalog() {
    static const std::vector<std::pair<std::string, int>> names = {
        {"periodic_1d", 1}, {"two_scale_1d", 1}, {"three_scale_1d", 1}, {"linear_1d", 1},
        {"sine_1d", 1},     {"radial_2d", 2},    {"two_scale_2d", 2},   {"poisson_boltzmann_2d", 2},
        {"sine_2d", 2},
    };
    return names;
}

inline int problem_dim(const std::string& name) {
    for (const auto& [n, d] : problem_catalog())
        if (n == name) return d;
    throw InvalidArgument("unknown problem '" + name + "'");
}

template <int Dim>
ProblemSpec<Dim> make_problem(const ProblemRequest& req) {
    if (problem_dim(req.name) != Dim) throw InvalidArgument("problem '" + req.name + "' has a different dimension");
    if constexpr (Dim == 1) {
        if (req.name == "periodic_1d") return periodic_1d(req.eps);
        if (req.name == "two_scale_1d") return two_scale_1d(req.eps);
        if (req.name == "three_scale_1d") return three_scale_1d(req.eps1, req.eps2);
        if (req.name == "linear_1d") return linear_1d();
        if (req.name == "sine_1d") return sine_1d();
    } else {
        if (req.name == "radial_2d") return radial_2d(req.eps);
        if (req.name == "two_scale_2d") return two_scale_2d(req.eps);
        if (req.name == "poisson_boltzmann_2d") return poisson_boltzmann_2d();
        if (req.name == "sine_2d") return sine_2d();
    }
    throw InvalidArgument("unknown problem '" + req.name + "'");
}

} // namespace rrnn
