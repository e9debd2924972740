#include <gtest/gtest.h>

#include <random>

#include "rrnn/rbfnet.hpp"

using namespace rrnn;

TEST(RandomInit, RangesAndCounts) {
    const auto nets = random_init<2>(RbfConfig{200, 3.0, 9, false}, 4);
    ASSERT_EQ(nets.size(), 4u);
    for (const auto& n : nets) {
        ASSERT_EQ(n.size(), 200);
        for (double s : n.shapes) {
            EXPECT_GE(s, 0.0);
            EXPECT_LE(s, 3.0);
        }
        for (const auto& c : n.centers)
            for (double v : c) {
                EXPECT_GE(v, -1.0);
                EXPECT_LE(v, 1.0);
            }
    }
    EXPECT_NE(nets[0].shapes, nets[1].shapes);
}

TEST(RandomInit, SeedReproducibility) {
    const auto a = random_init<1>(RbfConfig{50, 5.0, 42, false}, 3);
    const auto b = random_init<1>(RbfConfig{50, 5.0, 42, false}, 3);
    const auto c = random_init<1>(RbfConfig{50, 5.0, 43, false}, 3);
    for (std::size_t s = 0; s < 3; ++s) {
        EXPECT_EQ(a[s].shapes, b[s].shapes);
        EXPECT_EQ(a[s].centers, b[s].centers);
    }
    EXPECT_NE(a[0].shapes, c[0].shapes);
}

TEST(RandomInit, SharedBasis) {
    const auto nets = random_init<2>(RbfConfig{20, 2.0, 1, true}, 5);
    for (const auto& n : nets) {
        EXPECT_EQ(n.shapes, nets[0].shapes);
        EXPECT_EQ(n.centers, nets[0].centers);
    }
}

TEST(RandomInit, RejectsBadConfig) {
    EXPECT_THROW(random_init<1>(RbfConfig{0, 2.0, 0, false}, 1), InvalidArgument);
    EXPECT_THROW(random_init<1>(RbfConfig{10, 0.0, 0, false}, 1), InvalidArgument);
    EXPECT_THROW(random_init<1>(RbfConfig{10, -1.0, 0, false}, 1), InvalidArgument);
    EXPECT_THROW(random_init<1>(RbfConfig{10, 1.0, 0, false}, 0), InvalidArgument);
}

TEST(EvalBasis, ValuesAtCenters) {
    LocalRbfNet<2> net;
    net.centers = {{0.0, 0.0}, {0.5, -0.5}};
    net.shapes = {2.0, 1.0};
    const auto phi = eval_basis<2>(net, Point<2>{0.0, 0.0});
    EXPECT_DOUBLE_EQ(phi[0], 1.0);
    EXPECT_NEAR(phi[1], std::exp(-0.5), 1e-15);
    const auto g = eval_basis_grad<2>(net, Point<2>{0.0, 0.0});
    EXPECT_EQ(g(0, 0), 0.0);
    EXPECT_NEAR(g(1, 0), -2.0 * 1.0 * (0.0 - 0.5) * std::exp(-0.5), 1e-15);
}

TEST(EvalBasis, GradientMatchesCentralDifferences) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const double h = 1e-3;
    for (int trial = 0; trial < 100; ++trial) {
        const auto net = random_init<2>(RbfConfig{10, 10.0, static_cast<std::uint64_t>(trial), false}, 1)[0];
        const Point<2> x{u(rng), u(rng)};
        const auto g = eval_basis_grad<2>(net, x);
        for (int d = 0; d < 2; ++d) {
            auto at = [&](double t) {
                auto y = x;
                y[d] += t;
                return eval_basis<2>(net, y);
            };
            // Fourth-order central stencil.
            const Eigen::VectorXd fd = (at(-2 * h) - 8 * at(-h) + 8 * at(h) - at(2 * h)) / (12 * h);
            for (int i = 0; i < net.size(); ++i) {
                const double scale = std::max(std::abs(fd[i]), 1e-3);
                EXPECT_LE(std::abs(g(i, d) - fd[i]) / scale, 1e-7) << "trial " << trial;
            }
        }
    }
}

TEST(RrnnSolution, PhysicalGradientUsesChainRule) {
    RrnnSolution<2> sol;
    sol.partition = decompose<2>(Domain<2>{{0.0, 0.0}, {2.0, 1.0}}, {2, 4});
    sol.nets = random_init<2>(RbfConfig{15, 2.0, 3, false}, sol.partition.size());
    std::mt19937_64 rng(1);
    std::normal_distribution<double> n01;
    for (auto& n : sol.nets) {
        n.weights.resize(n.size());
        for (auto& w : n.weights) w = n01(rng);
    }
    const Point<2> x{1.3, 0.4};
    const int sub = sol.partition.locate(x);
    const auto g = sol.grad_on(sub, x);
    const double h = 1e-6;
    for (int d = 0; d < 2; ++d) {
        auto xp = x, xm = x;
        xp[d] += h;
        xm[d] -= h;
        const double fd = (sol.eval_on(sub, xp) - sol.eval_on(sub, xm)) / (2 * h);
        EXPECT_NEAR(g[d], fd, 1e-6 * (1 + std::abs(fd)));
    }
    EXPECT_EQ(sol.eval(x), sol.eval_on(sub, x));
    EXPECT_THROW(sol.eval(Point<2>{2.5, 0.0}), OutOfDomain);
}

TEST(RrnnSolution, RequiresWeights) {
    RrnnSolution<1> sol;
    sol.partition = decompose<1>(Domain<1>{}, {1});
    sol.nets = random_init<1>(RbfConfig{5, 1.0, 0, false}, 1);
    EXPECT_THROW(sol.eval(Point<1>{0.5}), ConsistencyError);
}

// Overdetermined, full column rank: the fit must match the normal equations.
TEST(ElmFit, MatchesNormalEquations) {
    const auto net = random_init<1>(RbfConfig{8, 2.0, 17, false}, 1)[0];
    std::vector<Sample<1>> samples;
    for (int k = 0; k < 60; ++k) {
        const double x = -1.0 + 2.0 * k / 59.0;
        samples.push_back({{x}, std::sin(2 * x) + 0.1 * x * x});
    }
    const auto fit = elm_fit<1>(net, samples);
    Eigen::MatrixXd a(60, 8);
    Eigen::VectorXd b(60);
    for (int r = 0; r < 60; ++r) {
        for (int i = 0; i < 8; ++i)
            a(r, i) = std::exp(-net.shapes[static_cast<std::size_t>(i)] *
                               std::pow(samples[static_cast<std::size_t>(r)].x[0] - net.centers[static_cast<std::size_t>(i)][0], 2));
        b[r] = samples[static_cast<std::size_t>(r)].u;
    }
    const Eigen::VectorXd w = (a.transpose() * a).ldlt().solve(a.transpose() * b);
    const Eigen::VectorXd grad = a.transpose() * (a * fit.weights - b);
    EXPECT_LE(grad.norm(), 1e-10 * (a.norm() * b.norm()));
    EXPECT_NEAR((a * fit.weights - b).norm(), (a * w - b).norm(), 1e-8);
    EXPECT_THROW(elm_fit<1>(net, std::span<const Sample<1>>{}), InvalidArgument);
}
