#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>

#include "rrnn/fdm.hpp"

using namespace rrnn;

namespace {

template <int Dim>
double max_error(const FdmSolution<Dim>& sol, const ProblemSpec<Dim>& p) {
    double e = 0.0;
    if constexpr (Dim == 1) {
        for (std::int64_t i = 0; i < sol.extents[0]; ++i) e = std::max(e, std::abs(sol.at({i}) - p.exact(sol.node({i}))));
    } else {
        for (std::int64_t j = 0; j < sol.extents[1]; ++j)
            for (std::int64_t i = 0; i < sol.extents[0]; ++i)
                e = std::max(e, std::abs(sol.at({i, j}) - p.exact(sol.node({i, j}))));
    }
    return e;
}

} // namespace

TEST(Fdm, OneDimensionalAgreesWithExact) {
    const auto p = periodic_1d(0.1);
    const auto sol = fdm_solve_1d(p, 1e-3);
    EXPECT_EQ(sol.extents[0], 1001);
    EXPECT_LE(sol.relative_residual, 1e-10);
    EXPECT_LE(max_error(sol, p), 1e-5);
    EXPECT_EQ(sol.at({0}), p.dirichlet({0.0}));
}

TEST(Fdm, OneDimensionalSecondOrder) {
    const auto p = sine_1d();
    const double e1 = max_error(fdm_solve_1d(p, 1.0 / 32), p);
    const double e2 = max_error(fdm_solve_1d(p, 1.0 / 64), p);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
}

TEST(Fdm, TwoDimensionalConvergenceOrder) {
    const auto p = sine_2d();
    std::vector<double> err;
    for (int n : {16, 32, 64}) {
        const auto sol = fdm_solve_2d(p, 1.0 / n);
        EXPECT_LE(sol.relative_residual, 1e-10);
        err.push_back(max_error(sol, p));
    }
    EXPECT_NEAR(std::log2(err[0] / err[1]), 2.0, 0.2);
    EXPECT_NEAR(std::log2(err[1] / err[2]), 2.0, 0.2);
}

// Variable coefficient and reaction term, against the imposed exact solution.
TEST(Fdm, VariableCoefficientConvergence) {
    const auto p = poisson_boltzmann_2d();
    const double e1 = max_error(fdm_solve_2d(p, 1.0 / 128), p);
    const double e2 = max_error(fdm_solve_2d(p, 1.0 / 256), p);
    EXPECT_NEAR(std::log2(e1 / e2), 2.0, 0.2);
}

TEST(Fdm, IterativeBranchMatchesDirect) {
    const auto p = two_scale_2d(0.5);
    FdmOptions iterative;
    iterative.direct_limit = 0;
    const auto a = fdm_solve_2d(p, 1.0 / 64);
    const auto b = fdm_solve_2d(p, 1.0 / 64, iterative);
    EXPECT_LE(b.relative_residual, 1e-10);
    double diff = 0.0, scale = 0.0;
    for (std::size_t k = 0; k < a.values.size(); ++k) {
        diff = std::max(diff, std::abs(a.values[k] - b.values[k]));
        scale = std::max(scale, std::abs(a.values[k]));
    }
    EXPECT_LE(diff, 1e-8 * scale);
}

TEST(Fdm, InterpolationIsExactForBilinear) {
    FdmSolution<2> sol;
    sol.h = 0.25;
    sol.lower = {0.0, 0.0};
    sol.extents = {5, 5};
    sol.values.resize(25);
    auto f = [](double x, double y) { return 1.0 + 2.0 * x - 3.0 * y + 0.5 * x * y; };
    for (std::int64_t j = 0; j < 5; ++j)
        for (std::int64_t i = 0; i < 5; ++i) sol.values[sol.index({i, j})] = f(0.25 * i, 0.25 * j);
    for (const Point<2>& x : {Point<2>{0.1, 0.9}, Point<2>{0.5, 0.5}, Point<2>{1.0, 1.0}, Point<2>{0.0, 0.33}})
        EXPECT_NEAR(interpolate<2>(sol, x), f(x[0], x[1]), 1e-14);
    EXPECT_THROW(interpolate<2>(sol, Point<2>{1.1, 0.0}), OutOfDomain);
}

TEST(Fdm, CacheRoundTrip) {
    const auto p = radial_2d(0.5);
    const auto sol = fdm_solve_2d(p, 1.0 / 32);
    const std::string path = ::testing::TempDir() + "grid.fdm";
    save_fdm<2>(path, sol);
    const auto back = load_fdm<2>(path, p.domain.lower);
    EXPECT_EQ(back.h, sol.h);
    EXPECT_EQ(back.extents, sol.extents);
    EXPECT_EQ(back.values, sol.values);
    EXPECT_THROW(load_fdm<1>(path), InvalidArgument);
    std::remove(path.c_str());
    EXPECT_THROW(load_fdm<2>(path), InvalidArgument);
}

TEST(Fdm, RejectsBadGrids) {
    EXPECT_THROW(fdm_solve_1d(sine_1d(), 0.3), InvalidArgument);
    EXPECT_THROW(fdm_solve_1d(sine_1d(), 0.0), InvalidArgument);
    FdmOptions small;
    small.max_nodes = 100;
    EXPECT_THROW(fdm_solve_2d(sine_2d(), 1.0 / 64, small), InvalidArgument);
}

TEST(Fdm, ProblemKey) {
    EXPECT_EQ(problem_key(two_scale_1d(0.05)), "two_scale_1d_eps=0.05");
    EXPECT_EQ(problem_key(poisson_boltzmann_2d()), "poisson_boltzmann_2d");
}
