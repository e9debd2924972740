#pragma once

// Second-order conservative finite differences on a uniform grid, used as the
// reference solution for problems without a closed form.
//
//   -[a_{i+1/2}(u_{i+1}-u_i) - a_{i-1/2}(u_i-u_{i-1})]/h^2 + kappa_i u_i = f_i
//
// with a evaluated at the face midpoints (five-point analogue in 2D).

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "rrnn/error.hpp"
#include "rrnn/partition.hpp"
#include "rrnn/problems.hpp"

namespace rrnn {

template <int Dim>
struct FdmSolution {
    double h = 0.0;
    Point<Dim> lower{};
    std::array<std::int64_t, Dim> extents{};  ///< nodes per axis, including both ends
    std::vector<double> values;               ///< row-major, x index fastest
    std::string problem;                      ///< cache key of the problem solved
    double relative_residual = 0.0;

    std::size_t index(const std::array<std::int64_t, Dim>& i) const {
        std::size_t at = 0;
        for (int d = Dim - 1; d >= 0; --d) at = at * static_cast<std::size_t>(extents[d]) + static_cast<std::size_t>(i[d]);
        return at;
    }
    double at(const std::array<std::int64_t, Dim>& i) const { return values[index(i)]; }
    Point<Dim> node(const std::array<std::int64_t, Dim>& i) const {
        Point<Dim> x;
        for (int d = 0; d < Dim; ++d) x[d] = lower[d] + static_cast<double>(i[d]) * h;
        return x;
    }
};

struct FdmOptions {
    std::size_t max_nodes = 4'100'000;     ///< refuse grids larger than this
    std::size_t direct_limit = 600'000;    ///< sparse Cholesky up to this many unknowns, PCG above
    double tolerance = 1e-10;              ///< relative residual target
};

/// "name[_key=value...]" identifying a problem instance, used for caching.
template <int Dim>
std::string problem_key(const ProblemSpec<Dim>& p) {
    std::ostringstream os;
    os.precision(12);
    os << p.name;
    for (const auto& [k, v] : p.params) os << '_' << k << '=' << v;
    return os.str();
}

namespace detail {

template <int Dim>
std::array<std::int64_t, Dim> grid_intervals(const Domain<Dim>& dom, double h) {
    if (!(h > 0.0)) throw InvalidArgument("grid step must be positive");
    std::array<std::int64_t, Dim> n;
    for (int d = 0; d < Dim; ++d) {
        const double len = dom.upper[d] - dom.lower[d];
        const double ratio = len / h;
        n[d] = std::llround(ratio);
        if (n[d] < 2 || std::abs(ratio - static_cast<double>(n[d])) > 1e-9 * ratio)
            throw InvalidArgument("grid step does not divide the domain into an integral number of cells");
    }
    return n;
}

} // namespace detail

inline FdmSolution<1> fdm_solve_1d(const ProblemSpec<1>& problem, double h, const FdmOptions& opts = {}) {
    const auto n = detail::grid_intervals<1>(problem.domain, h)[0];
    if (static_cast<std::size_t>(n + 1) > opts.max_nodes) throw InvalidArgument("grid exceeds the configured node cap");
    const double lo = problem.domain.lower[0];
    const double step = (problem.domain.upper[0] - lo) / static_cast<double>(n);

    FdmSolution<1> sol;
    sol.h = step;
    sol.lower = problem.domain.lower;
    sol.extents = {n + 1};
    sol.problem = problem_key(problem);
    sol.values.assign(static_cast<std::size_t>(n + 1), 0.0);
    sol.values.front() = problem.dirichlet({lo});
    sol.values.back() = problem.dirichlet({problem.domain.upper[0]});

    // Tridiagonal system for the interior nodes, scaled by h^2.
    const auto m = static_cast<std::size_t>(n - 1);
    std::vector<double> sub(m), diag(m), sup(m), rhs(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double x = lo + static_cast<double>(k + 1) * step;
        const double aw = problem.coefficient({x - 0.5 * step});
        const double ae = problem.coefficient({x + 0.5 * step});
        sub[k] = -aw;
        sup[k] = -ae;
        diag[k] = aw + ae + problem.kappa({x}) * step * step;
        rhs[k] = problem.source({x}) * step * step;
    }
    rhs.front() -= sub.front() * sol.values.front();
    rhs.back() -= sup.back() * sol.values.back();

    // Thomas algorithm.
    std::vector<double> c(m), d(m);
    c[0] = sup[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t k = 1; k < m; ++k) {
        const double denom = diag[k] - sub[k] * c[k - 1];
        c[k] = sup[k] / denom;
        d[k] = (rhs[k] - sub[k] * d[k - 1]) / denom;
    }
    for (std::size_t k = m; k-- > 0;) {
        d[k] -= k + 1 < m ? c[k] * d[k + 1] : 0.0;
        sol.values[k + 1] = d[k];
    }

    double res2 = 0.0, rhs2 = 0.0;
    for (std::size_t k = 0; k < m; ++k) {
        double r = diag[k] * sol.values[k + 1] - rhs[k];
        if (k > 0) r += sub[k] * sol.values[k];
        if (k + 1 < m) r += sup[k] * sol.values[k + 2];
        res2 += r * r;
        rhs2 += rhs[k] * rhs[k];
    }
    sol.relative_residual = rhs2 > 0.0 ? std::sqrt(res2 / rhs2) : std::sqrt(res2);
    return sol;
}

inline FdmSolution<2> fdm_solve_2d(const ProblemSpec<2>& problem, double h, const FdmOptions& opts = {}) {
    const auto n = detail::grid_intervals<2>(problem.domain, h);
    const auto nodes = static_cast<std::size_t>((n[0] + 1) * (n[1] + 1));
    if (nodes > opts.max_nodes)
        throw InvalidArgument("grid of " + std::to_string(nodes) + " nodes exceeds the configured cap of " +
                              std::to_string(opts.max_nodes));
    const auto& dom = problem.domain;
    const double hx = (dom.upper[0] - dom.lower[0]) / static_cast<double>(n[0]);
    const double hy = (dom.upper[1] - dom.lower[1]) / static_cast<double>(n[1]);

    FdmSolution<2> sol;
    sol.h = hx;
    sol.lower = dom.lower;
    sol.extents = {n[0] + 1, n[1] + 1};
    sol.problem = problem_key(problem);
    sol.values.assign(nodes, 0.0);
    for (std::int64_t j = 0; j <= n[1]; ++j)
        for (std::int64_t i = 0; i <= n[0]; ++i)
            if (i == 0 || j == 0 || i == n[0] || j == n[1]) sol.values[sol.index({i, j})] = problem.dirichlet(sol.node({i, j}));

    const std::int64_t mx = n[0] - 1, my = n[1] - 1;
    const auto unknown = [mx](std::int64_t i, std::int64_t j) { return (j - 1) * mx + (i - 1); };
    const Eigen::Index size = mx * my;
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(static_cast<std::size_t>(size) * 5);
    Eigen::VectorXd rhs(size);
    const double rx = 1.0 / (hx * hx), ry = 1.0 / (hy * hy);

    for (std::int64_t j = 1; j <= my; ++j) {
        for (std::int64_t i = 1; i <= mx; ++i) {
            const auto x = sol.node({i, j});
            const auto row = unknown(i, j);
            const double aw = problem.coefficient({x[0] - 0.5 * hx, x[1]}) * rx;
            const double ae = problem.coefficient({x[0] + 0.5 * hx, x[1]}) * rx;
            const double as = problem.coefficient({x[0], x[1] - 0.5 * hy}) * ry;
            const double an = problem.coefficient({x[0], x[1] + 0.5 * hy}) * ry;
            double b = problem.source(x);
            trips.emplace_back(row, row, aw + ae + as + an + problem.kappa(x));
            const auto link = [&](std::int64_t ii, std::int64_t jj, double a) {
                if (ii == 0 || jj == 0 || ii == n[0] || jj == n[1])
                    b += a * sol.values[sol.index({ii, jj})];
                else
                    trips.emplace_back(row, unknown(ii, jj), -a);
            };
            link(i - 1, j, aw);
            link(i + 1, j, ae);
            link(i, j - 1, as);
            link(i, j + 1, an);
            rhs[row] = b;
        }
    }
    Eigen::SparseMatrix<double> k(size, size);
    k.setFromTriplets(trips.begin(), trips.end());
    trips.clear();
    trips.shrink_to_fit();

    Eigen::VectorXd u;
    if (static_cast<std::size_t>(size) <= opts.direct_limit) {
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(k);
        if (ldlt.info() != Eigen::Success) throw SolverError("sparse factorization of the difference operator failed");
        u = ldlt.solve(rhs);
        // One refinement step brings the residual to the working-precision floor.
        u += ldlt.solve(rhs - k * u);
    } else {
        Eigen::ConjugateGradient<Eigen::SparseMatrix<double>, Eigen::Lower | Eigen::Upper,
                                 Eigen::IncompleteCholesky<double>>
            cg;
        cg.setTolerance(opts.tolerance * 0.1);
        cg.setMaxIterations(static_cast<Eigen::Index>(20 * (mx + my) + 1000));
        cg.compute(k);
        if (cg.info() != Eigen::Success) throw SolverError("incomplete Cholesky preconditioner failed");
        u = cg.solve(rhs);
    }
    const double rnorm = rhs.norm();
    sol.relative_residual = (k * u - rhs).norm() / (rnorm > 0.0 ? rnorm : 1.0);
    if (!(sol.relative_residual <= opts.tolerance))
        throw SolverError("difference solve stalled at relative residual " + std::to_string(sol.relative_residual));

    for (std::int64_t j = 1; j <= my; ++j)
        for (std::int64_t i = 1; i <= mx; ++i) sol.values[sol.index({i, j})] = u[unknown(i, j)];
    return sol;
}

/// Linear (1D) / bilinear (2D) interpolation of grid values.
template <int Dim>
double interpolate(const FdmSolution<Dim>& sol, const Point<Dim>& x) {
    std::array<std::int64_t, Dim> cell;
    std::array<double, Dim> t;
    for (int d = 0; d < Dim; ++d) {
        const auto cells = sol.extents[d] - 1;
        const double upper = sol.lower[d] + static_cast<double>(cells) * sol.h;
        if (x[d] < sol.lower[d] - facet_tolerance || x[d] > upper + facet_tolerance)
            throw OutOfDomain("point " + format_point<Dim>(x) + " lies outside the difference grid");
        const double s = (x[d] - sol.lower[d]) / sol.h;
        auto c = static_cast<std::int64_t>(std::floor(s));
        c = std::clamp<std::int64_t>(c, 0, cells - 1);
        cell[d] = c;
        t[d] = std::clamp(s - static_cast<double>(c), 0.0, 1.0);
    }
    double out = 0.0;
    for (int corner = 0; corner < (1 << Dim); ++corner) {
        double w = 1.0;
        auto at = cell;
        for (int d = 0; d < Dim; ++d) {
            const bool up = (corner >> d) & 1;
            at[d] += up ? 1 : 0;
            w *= up ? t[d] : 1.0 - t[d];
        }
        if (w != 0.0) out += w * sol.at(at);
    }
    return out;
}

// Grid cache files: 8-byte tag "RRNNFDM1", int32 dim, float64 h, int64 extents[dim],
// then the row-major float64 nodal values. The grid origin is the domain's lower corner.

template <int Dim>
void save_fdm(const std::string& path, const FdmSolution<Dim>& sol) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
    const char tag[8] = {'R', 'R', 'N', 'N', 'F', 'D', 'M', '1'};
    const std::int32_t dim = Dim;
    os.write(tag, 8);
    os.write(reinterpret_cast<const char*>(&dim), sizeof dim);
    os.write(reinterpret_cast<const char*>(&sol.h), sizeof sol.h);
    os.write(reinterpret_cast<const char*>(sol.extents.data()), sizeof(std::int64_t) * Dim);
    os.write(reinterpret_cast<const char*>(sol.values.data()),
             static_cast<std::streamsize>(sizeof(double) * sol.values.size()));
    if (!os) throw InvalidArgument("failed writing '" + path + "'");
}

template <int Dim>
FdmSolution<Dim> load_fdm(const std::string& path, const Point<Dim>& lower = {}) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw InvalidArgument("cannot open '" + path + "'");
    char tag[8];
    std::int32_t dim = 0;
    FdmSolution<Dim> sol;
    is.read(tag, 8);
    is.read(reinterpret_cast<char*>(&dim), sizeof dim);
    if (!is || std::string(tag, 8) != "RRNNFDM1" || dim != Dim)
        throw InvalidArgument("'" + path + "' is not a " + std::to_string(Dim) + "D grid file");
    is.read(reinterpret_cast<char*>(&sol.h), sizeof sol.h);
    is.read(reinterpret_cast<char*>(sol.extents.data()), sizeof(std::int64_t) * Dim);
    std::size_t count = 1;
    for (auto e : sol.extents) {
        if (e < 2) throw InvalidArgument("'" + path + "' has a corrupt header");
        count *= static_cast<std::size_t>(e);
    }
    sol.values.resize(count);
    is.read(reinterpret_cast<char*>(sol.values.data()), static_cast<std::streamsize>(sizeof(double) * count));
    if (!is) throw InvalidArgument("'" + path + "' is truncated");
    sol.lower = lower;
    return sol;
}

} // namespace rrnn
