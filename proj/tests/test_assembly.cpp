#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

#include "rrnn/assembly.hpp"

using namespace rrnn;

namespace {

template <int Dim>
struct Setup {
    Partition<Dim> p;
    std::vector<LocalRbfNet<Dim>> nets;
    CollocationSet<Dim> colloc;
};

template <int Dim>
Setup<Dim> setup(std::array<int, Dim> counts, int neurons, double beta, std::uint64_t seed, int per = 10) {
    Setup<Dim> s;
    s.p = decompose<Dim>(Domain<Dim>{}, counts);
    s.nets = random_init<Dim>(RbfConfig{neurons, beta, seed, false}, s.p.size());
    s.colloc = sample_collocation<Dim>(s.p, per, per, seed + 1);
    return s;
}

// Composite Gauss-Legendre on [-1,1], used as an independent integrator.
double gauss_legendre_integral(const std::function<double(double)>& f, int panels = 200) {
    static const double xg[3] = {-0.7745966692414834, 0.0, 0.7745966692414834};
    static const double wg[3] = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
    double s = 0.0;
    const double h = 2.0 / panels;
    for (int k = 0; k < panels; ++k) {
        const double m = -1.0 + (k + 0.5) * h;
        for (int g = 0; g < 3; ++g) s += 0.5 * h * wg[g] * f(m + 0.5 * h * xg[g]);
    }
    return s;
}

} // namespace

TEST(Assembly, OneDimensionalSizes) {
    for (auto [eps, s] : {std::pair{0.05, 20}, {0.01, 100}}) {
        (void)eps;
        auto st = setup<1>({s}, 50, 5.0, 0);
        const auto sys = assemble_system<1>(st.p, st.nets, two_scale_1d(0.05), st.colloc, AssemblyOptions{});
        EXPECT_EQ(sys.rows(), 22 * s);
        EXPECT_EQ(sys.cols(), 50 * s);
        EXPECT_EQ(sys.pde.count, 20 * s);
        EXPECT_EQ(sys.boundary.count, 2);
        EXPECT_EQ(sys.continuity.count, 2 * (s - 1));
    }
}

TEST(Assembly, TwoDimensionalSizes) {
    const auto problem = two_scale_2d(0.5);
    for (auto mode : {ContinuityMode::full_gradient, ContinuityMode::normal_derivative}) {
        auto st = setup<2>({3, 2}, 20, 3.0, 1);
        AssemblyOptions opts{9, 10, mode, {}};
        const auto sys = assemble_system<2>(st.p, st.nets, problem, st.colloc, opts);
        const int edges = 2 * 2 + 3 * 1;
        const int per_point = mode == ContinuityMode::full_gradient ? 3 : 2;
        EXPECT_EQ(sys.pde.count, 6 * 81);
        EXPECT_EQ(sys.boundary.count, 2 * (3 + 2) * 10);
        EXPECT_EQ(sys.continuity.count, edges * 10 * per_point);
        EXPECT_EQ(sys.cols(), 6 * 20);
    }
}

TEST(Assembly, BlockStructure) {
    auto st = setup<1>({4}, 6, 2.0, 3);
    const auto problem = sine_1d();
    const auto sys = assemble_system<1>(st.p, st.nets, problem, st.colloc, AssemblyOptions{5, 20, {}, {}});
    // PDE rows of subdomain K only touch columns of K.
    for (int k = 0; k < 4; ++k)
        for (int t = 0; t < 5; ++t)
            for (int other = 0; other < 4; ++other)
                if (other != k) {
                    EXPECT_EQ(sys.matrix.row(sys.pde_row(k, t)).segment(sys.column(other, 0), 6).norm(), 0.0);
                }
    // Boundary rows are basis values of the owning subdomain.
    const auto& b0 = st.colloc.boundary[0];
    const auto phi = eval_basis<1>(st.nets[0], to_reference<1>(st.p.subdomain(0), b0.x));
    EXPECT_LE((sys.a_boundary().row(0).segment(0, 6).transpose() - phi).norm(), 1e-15);
    EXPECT_EQ(sys.b_boundary()[0], problem.dirichlet(b0.x));
    // Continuity: + on the left subdomain, - on the right, zero right-hand side.
    const auto& f = st.p.interfaces()[0];
    const auto& ip = st.colloc.interface[0];
    const auto left = eval_basis<1>(st.nets[static_cast<std::size_t>(f.left_id)], to_reference<1>(st.p.subdomain(f.left_id), ip.x));
    const auto right = eval_basis<1>(st.nets[static_cast<std::size_t>(f.right_id)], to_reference<1>(st.p.subdomain(f.right_id), ip.x));
    EXPECT_LE((sys.a_continuity().row(0).segment(sys.column(f.left_id, 0), 6).transpose() - left).norm(), 1e-15);
    EXPECT_LE((sys.a_continuity().row(0).segment(sys.column(f.right_id, 0), 6).transpose() + right).norm(), 1e-15);
    EXPECT_EQ(sys.b_continuity().norm(), 0.0);
}

// Each weak-form entry must equal the strong-form integral of
// -(A rho')' v + kappa rho v, computed independently in physical coordinates.
TEST(Assembly, WeakFormMatchesStrongForm1d) {
    auto st = setup<1>({3}, 8, 4.0, 5);
    ProblemSpec<1> problem = two_scale_1d(0.5);
    problem.reaction = [](const Point<1>& x) { return 1.0 + x[0]; };
    const auto [a, b] = assemble_pde_rows<1>(st.p, st.nets, problem, gauss_lobatto(80), 6);
    const double h = 1e-5;
    for (int k = 0; k < 3; ++k) {
        const auto& sub = st.p.subdomain(k);
        const auto& net = st.nets[static_cast<std::size_t>(k)];
        const double half = 0.5 * (sub.hi[0] - sub.lo[0]);
        for (int i = 0; i < net.size(); ++i) {
            auto rho = [&](double x) {
                const double r = 2.0 * (x - sub.lo[0]) / (sub.hi[0] - sub.lo[0]) - 1.0;
                const double c = net.centers[static_cast<std::size_t>(i)][0];
                return std::exp(-net.shapes[static_cast<std::size_t>(i)] * (r - c) * (r - c));
            };
            auto flux = [&](double x) { return problem.coefficient({x}) * (rho(x + h) - rho(x - h)) / (2 * h); };
            for (int t = 1; t <= 6; ++t) {
                const double strong = gauss_legendre_integral([&](double r) {
                    const double x = sub.lo[0] + (r + 1.0) * half;
                    const double div = (flux(x + h) - flux(x - h)) / (2 * h);
                    return half * (-div + problem.kappa({x}) * rho(x)) * test_function(t, r).value;
                });
                EXPECT_NEAR(a(k * 6 + t - 1, k * 8 + i), strong, 1e-4 * (1.0 + std::abs(strong)));
            }
        }
        for (int t = 1; t <= 6; ++t) {
            const double load = gauss_legendre_integral([&](double r) {
                return half * problem.source({sub.lo[0] + (r + 1.0) * half}) * test_function(t, r).value;
            });
            EXPECT_NEAR(b[k * 6 + t - 1], load, 1e-10 * (1.0 + std::abs(load)));
        }
    }
}

// The boundary integral dropped by integration by parts vanishes because the
// test functions vanish on every facet of the reference cube.
TEST(Assembly, DroppedSurfaceTermVanishes) {
    const auto rule = gauss_lobatto(40);
    std::mt19937_64 rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto net = random_init<2>(RbfConfig{30, 5.0, static_cast<std::uint64_t>(trial), false}, 1)[0];
        for (int row = 0; row < 81; ++row) {
            const auto k = TestFunctionSet<2>(9).index(row);
            double worst = 0.0;
            for (int axis = 0; axis < 2; ++axis)
                for (double side : {-1.0, 1.0}) {
                    // Integral over the facet {x_axis = side} of d_n rho_i * v for all i.
                    Eigen::VectorXd s = Eigen::VectorXd::Zero(net.size());
                    for (int q = 0; q < rule.order(); ++q) {
                        Point<2> x;
                        x[axis] = side;
                        x[1 - axis] = rule.nodes[static_cast<std::size_t>(q)];
                        const auto g = eval_basis_grad<2>(net, x);
                        s += rule.weights[static_cast<std::size_t>(q)] * side * test_function<2>(k, x).value * g.col(axis);
                    }
                    worst = std::max(worst, s.cwiseAbs().maxCoeff());
                }
            EXPECT_LE(worst, 1e-12);
        }
    }
    (void)rng;
}

TEST(Assembly, ManufacturedLinearSolution) {
    auto st = setup<1>({2}, 50, 2.0, 0);
    const auto problem = linear_1d();
    auto sys = assemble_system<1>(st.p, st.nets, problem, st.colloc, AssemblyOptions{});
    const auto ls = solve_min_norm(sys.matrix, sys.rhs);
    RrnnSolution<1> sol{st.p, st.nets, {}};
    for (int s = 0; s < 2; ++s) sol.nets[static_cast<std::size_t>(s)].weights = ls.weights.segment(s * 50, 50);
    double d2 = 0.0, r2 = 0.0;
    for (int k = 0; k <= 1000; ++k) {
        const double x = k / 1000.0;
        d2 += std::pow(sol.eval({x}) - x, 2);
        r2 += x * x;
    }
    EXPECT_LE(std::sqrt(d2 / r2), 1e-10);
}

TEST(Assembly, BlockWeightsScaleRows) {
    auto st = setup<1>({3}, 10, 2.0, 2);
    const auto problem = sine_1d();
    const auto plain = assemble_system<1>(st.p, st.nets, problem, st.colloc, AssemblyOptions{});
    const auto weighted = assemble_system<1>(st.p, st.nets, problem, st.colloc, AssemblyOptions{20, 80, {}, {1.0, 10.0, 0.5}});
    EXPECT_EQ(weighted.a_pde(), plain.a_pde());
    EXPECT_LE((weighted.a_boundary() - 10.0 * plain.a_boundary()).norm(), 1e-13);
    EXPECT_LE((weighted.b_boundary() - 10.0 * plain.b_boundary()).norm(), 1e-13);
    EXPECT_LE((weighted.a_continuity() - 0.5 * plain.a_continuity()).norm(), 1e-13);
}

TEST(Assembly, SeparateBlocksStackToSystem) {
    auto st = setup<2>({2, 2}, 12, 2.0, 4, 5);
    const auto problem = sine_2d();
    AssemblyOptions opts{4, 8, ContinuityMode::full_gradient, {}};
    const auto sys = assemble_system<2>(st.p, st.nets, problem, st.colloc, opts);
    const auto [ae, be] = assemble_pde_rows<2>(st.p, st.nets, problem, gauss_lobatto(8), 4);
    const auto [ab, bb] = assemble_boundary_rows<2>(st.colloc, st.p, st.nets, problem);
    const auto [ac, bc] = assemble_continuity_rows<2>(st.colloc, st.p, st.nets, opts.continuity);
    const auto [a, b] = stack(ae, be, ab, bb, ac, bc);
    EXPECT_EQ(a, sys.matrix);
    EXPECT_EQ(b, sys.rhs);
    EXPECT_THROW(stack(ae, be, ab.leftCols(3), bb, ac, bc), ConsistencyError);
}

TEST(Assembly, RejectsMismatchedNetworks) {
    auto st = setup<1>({3}, 10, 2.0, 2);
    st.nets.pop_back();
    EXPECT_THROW(assemble_system<1>(st.p, st.nets, sine_1d(), st.colloc, AssemblyOptions{}), ConsistencyError);
}

TEST(Assembly, NonFiniteCoefficientIsReported) {
    auto st = setup<1>({2}, 5, 2.0, 2);
    auto problem = sine_1d();
    problem.coefficient = [](const Point<1>& x) { return x[0] > 0.7 ? std::nan("") : 1.0; };
    EXPECT_THROW(assemble_system<1>(st.p, st.nets, problem, st.colloc, AssemblyOptions{}), AssemblyError);
}

TEST(Assembly, BinaryDump) {
    Eigen::MatrixXd a(2, 3);
    a << 1, 2, 3, 4, 5, 6;
    const Eigen::Vector2d b(7, 8);
    const std::string path = ::testing::TempDir() + "sys.bin";
    dump_system_binary(path, a, b);
    std::ifstream is(path, std::ios::binary);
    char tag[8];
    std::int64_t rows = 0, cols = 0;
    is.read(tag, 8);
    is.read(reinterpret_cast<char*>(&rows), 8);
    is.read(reinterpret_cast<char*>(&cols), 8);
    EXPECT_EQ(std::string(tag, 8), "RRNNMAT1");
    EXPECT_EQ(rows, 2);
    EXPECT_EQ(cols, 3);
    double v[8];
    is.read(reinterpret_cast<char*>(v), sizeof v);
    for (int k = 0; k < 8; ++k) EXPECT_EQ(v[k], k + 1.0);
    std::remove(path.c_str());
}
