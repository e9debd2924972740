#pragma once

// Assembly of the stacked least-squares system
//
//   [ A_pde        ]       [ b_pde        ]
//   [ A_boundary   ] w  =  [ b_boundary   ]
//   [ A_continuity ]       [ 0            ]
//
// Columns are grouped per subdomain (J columns each). PDE rows are the weak
// form tested against v_k on each subdomain; since every v_k vanishes on the
// subdomain boundary the surface flux term is identically zero and skipped.
// Boundary rows collocate the Dirichlet data; continuity rows collocate the
// jump of the value and of the gradient across interior facets.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rrnn/basis.hpp"
#include "rrnn/error.hpp"
#include "rrnn/partition.hpp"
#include "rrnn/problems.hpp"
#include "rrnn/rbfnet.hpp"

namespace rrnn {

enum class ContinuityMode {
    full_gradient,      ///< value + every gradient component (Dim + 1 rows per point)
    normal_derivative,  ///< value + normal derivative (2 rows per point)
};

struct BlockWeights {
    double pde = 1.0;
    double boundary = 1.0;
    double continuity = 1.0;
};

struct AssemblyOptions {
    int tests_per_axis = 20;  ///< Q
    int quad_order = 80;      ///< Gauss-Lobatto nodes per axis
    ContinuityMode continuity = ContinuityMode::full_gradient;
    BlockWeights weights{};
};

template <int Dim>
constexpr int continuity_rows_per_point(ContinuityMode mode) {
    return mode == ContinuityMode::full_gradient ? Dim + 1 : 2;
}

struct RowRange {
    Eigen::Index begin = 0;
    Eigen::Index count = 0;
};

/// The stacked system plus the bookkeeping needed to read blocks back out.
/// Column (K, i) is K * J + i; PDE row (K, k) is K * Q^Dim + k; continuity
/// rows come in groups of rows_per_point, one group per interface point.
struct BlockSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
    RowRange pde;
    RowRange boundary;
    RowRange continuity;
    int subdomains = 0;
    int neurons = 0;
    int tests = 0;  ///< Q^Dim rows per subdomain
    int rows_per_point = 0;

    Eigen::Index rows() const { return matrix.rows(); }
    Eigen::Index cols() const { return matrix.cols(); }
    Eigen::Index column(int sub, int neuron) const { return static_cast<Eigen::Index>(sub) * neurons + neuron; }
    Eigen::Index pde_row(int sub, int test) const { return pde.begin + static_cast<Eigen::Index>(sub) * tests + test; }

    auto a_pde() const { return matrix.middleRows(pde.begin, pde.count); }
    auto a_boundary() const { return matrix.middleRows(boundary.begin, boundary.count); }
    auto a_continuity() const { return matrix.middleRows(continuity.begin, continuity.count); }
    auto b_pde() const { return rhs.segment(pde.begin, pde.count); }
    auto b_boundary() const { return rhs.segment(boundary.begin, boundary.count); }
    auto b_continuity() const { return rhs.segment(continuity.begin, continuity.count); }
};

namespace detail {

/// Tensor-product quadrature points of the reference cube and the test
/// functions evaluated on them. Independent of the subdomain.
template <int Dim>
struct ReferenceQuadrature {
    std::vector<Point<Dim>> points;
    Eigen::VectorXd weights;
    Eigen::MatrixXd test;                   ///< points x Q^Dim
    std::array<Eigen::MatrixXd, Dim> dtest;  ///< reference derivatives

    ReferenceQuadrature(const QuadratureRule& rule, int q) {
        const TestTable1d table(rule, q);
        const TestFunctionSet<Dim> set(q);
        const int n1 = rule.order();
        int npts = 1;
        for (int d = 0; d < Dim; ++d) npts *= n1;
        points.resize(static_cast<std::size_t>(npts));
        weights.resize(npts);
        test.resize(npts, set.size());
        for (auto& m : dtest) m.resize(npts, set.size());

        for (int p = 0; p < npts; ++p) {
            std::array<std::size_t, Dim> node;
            int rest = p;
            double w = 1.0;
            for (int d = 0; d < Dim; ++d) {
                node[d] = static_cast<std::size_t>(rest % n1);
                rest /= n1;
                points[static_cast<std::size_t>(p)][d] = rule.nodes[node[d]];
                w *= rule.weights[node[d]];
            }
            weights[p] = w;
            for (int row = 0; row < set.size(); ++row) {
                const auto k = set.index(row);
                double v = 1.0;
                for (int d = 0; d < Dim; ++d) v *= table.v(node[d], k[d]);
                test(p, row) = v;
                for (int d = 0; d < Dim; ++d) {
                    double g = table.dv(node[d], k[d]);
                    for (int e = 0; e < Dim; ++e)
                        if (e != d) g *= table.v(node[e], k[e]);
                    dtest[d](p, row) = g;
                }
            }
        }
    }
};

template <int Dim>
void check_nets(const Partition<Dim>& p, const std::vector<LocalRbfNet<Dim>>& nets) {
    if (static_cast<int>(nets.size()) != p.size()) throw ConsistencyError("need exactly one network per subdomain");
    for (const auto& n : nets)
        if (n.size() != nets.front().size()) throw ConsistencyError("all subdomain networks must have the same size");
}

template <int Dim>
double finite_or_throw(double v, const char* what, const Point<Dim>& x) {
    if (!std::isfinite(v))
        throw AssemblyError(std::string("non-finite ") + what + " at " + format_point<Dim>(x));
    return v;
}

} // namespace detail

/// Weak-form rows: for subdomain K, test k and neuron i
///   sum_q w_q |J_K| [ A(x_q) sum_d (2/h_d)^2 d_d rho_i d_d v_k + kappa(x_q) rho_i v_k ]
/// with right-hand side sum_q w_q |J_K| f(x_q) v_k. `a_e` must arrive zeroed.
template <int Dim>
void assemble_pde_rows(const Partition<Dim>& p, const std::vector<LocalRbfNet<Dim>>& nets,
                       const ProblemSpec<Dim>& problem, const QuadratureRule& rule, int q,
                       Eigen::Ref<Eigen::MatrixXd> a_e, Eigen::Ref<Eigen::VectorXd> b_e) {
    detail::check_nets(p, nets);
    const detail::ReferenceQuadrature<Dim> ref(rule, q);
    const int tests = static_cast<int>(ref.test.cols());
    const int neurons = nets.front().size();
    if (a_e.rows() != static_cast<Eigen::Index>(p.size()) * tests ||
        a_e.cols() != static_cast<Eigen::Index>(p.size()) * neurons || b_e.size() != a_e.rows())
        throw ConsistencyError("PDE block has the wrong shape");

    const auto npts = static_cast<Eigen::Index>(ref.points.size());
    Eigen::MatrixXd rho(npts, neurons);
    std::array<Eigen::MatrixXd, Dim> drho;
    for (auto& m : drho) m.resize(npts, neurons);
    Eigen::VectorXd stiff(npts), mass(npts), load(npts);

    for (const auto& sub : p.subdomains()) {
        const auto& net = nets[static_cast<std::size_t>(sub.id)];
        const double jac = sub.jacobian();
        bool any_reaction = false;
        for (Eigen::Index k = 0; k < npts; ++k) {
            const auto& xr = ref.points[static_cast<std::size_t>(k)];
            const auto x = from_reference<Dim>(sub, xr);
            const double wj = ref.weights[k] * jac;
            stiff[k] = wj * detail::finite_or_throw<Dim>(problem.coefficient(x), "coefficient", x);
            mass[k] = wj * detail::finite_or_throw<Dim>(problem.kappa(x), "reaction", x);
            load[k] = wj * detail::finite_or_throw<Dim>(problem.source(x), "source", x);
            any_reaction = any_reaction || mass[k] != 0.0;
            for (int i = 0; i < neurons; ++i) {
                const auto& c = net.centers[static_cast<std::size_t>(i)];
                const double s = net.shapes[static_cast<std::size_t>(i)];
                const double r = std::exp(-s * squared_distance<Dim>(xr, c));
                rho(k, i) = r;
                for (int d = 0; d < Dim; ++d) drho[d](k, i) = -2.0 * s * (xr[d] - c[d]) * r;
            }
        }

        auto block = a_e.block(static_cast<Eigen::Index>(sub.id) * tests, static_cast<Eigen::Index>(sub.id) * neurons,
                               tests, neurons);
        for (int d = 0; d < Dim; ++d) {
            const double chain = 2.0 / (sub.hi[d] - sub.lo[d]);
            block.noalias() += ref.dtest[d].transpose() * ((chain * chain) * stiff).asDiagonal() * drho[d];
        }
        if (any_reaction) block.noalias() += ref.test.transpose() * mass.asDiagonal() * rho;
        b_e.segment(static_cast<Eigen::Index>(sub.id) * tests, tests).noalias() = ref.test.transpose() * load;
    }
}

template <int Dim>
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_pde_rows(const Partition<Dim>& p,
                                                              const std::vector<LocalRbfNet<Dim>>& nets,
                                                              const ProblemSpec<Dim>& problem,
                                                              const QuadratureRule& rule, int q) {
    const Eigen::Index tests = TestFunctionSet<Dim>(q).size();
    const Eigen::Index rows = p.size() * tests;
    const Eigen::Index cols = static_cast<Eigen::Index>(p.size()) * nets.at(0).size();
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(rows);
    assemble_pde_rows<Dim>(p, nets, problem, rule, q, a, b);
    return {std::move(a), std::move(b)};
}

/// One Dirichlet row per boundary collocation point. `a_b` must arrive zeroed.
template <int Dim>
void assemble_boundary_rows(const CollocationSet<Dim>& colloc, const Partition<Dim>& p,
                            const std::vector<LocalRbfNet<Dim>>& nets, const ProblemSpec<Dim>& problem,
                            Eigen::Ref<Eigen::MatrixXd> a_b, Eigen::Ref<Eigen::VectorXd> b_b) {
    detail::check_nets(p, nets);
    if (colloc.boundary.empty()) throw InvalidArgument("boundary collocation set is empty");
    const int neurons = nets.front().size();
    if (a_b.rows() != static_cast<Eigen::Index>(colloc.n_boundary()) ||
        a_b.cols() != static_cast<Eigen::Index>(p.size()) * neurons || b_b.size() != a_b.rows())
        throw ConsistencyError("boundary block has the wrong shape");

    std::vector<double> phi(static_cast<std::size_t>(neurons));
    for (Eigen::Index r = 0; r < a_b.rows(); ++r) {
        const auto& pt = colloc.boundary[static_cast<std::size_t>(r)];
        const auto xr = to_reference<Dim>(p.subdomain(pt.owner), pt.x);
        eval_basis<Dim>(nets[static_cast<std::size_t>(pt.owner)], xr, phi);
        const Eigen::Index col0 = static_cast<Eigen::Index>(pt.owner) * neurons;
        for (int i = 0; i < neurons; ++i) a_b(r, col0 + i) = phi[static_cast<std::size_t>(i)];
        b_b[r] = detail::finite_or_throw<Dim>(problem.dirichlet(pt.x), "boundary value", pt.x);
    }
}

template <int Dim>
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_boundary_rows(const CollocationSet<Dim>& colloc,
                                                                   const Partition<Dim>& p,
                                                                   const std::vector<LocalRbfNet<Dim>>& nets,
                                                                   const ProblemSpec<Dim>& problem) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(colloc.n_boundary()),
                                              static_cast<Eigen::Index>(p.size()) * nets.at(0).size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
    assemble_boundary_rows<Dim>(colloc, p, nets, problem, a, b);
    return {std::move(a), std::move(b)};
}

/// Jump rows across interior facets: u+ - u- = 0 followed by the gradient
/// jump (all components, or only the facet-normal one). `a_c` must arrive zeroed.
template <int Dim>
void assemble_continuity_rows(const CollocationSet<Dim>& colloc, const Partition<Dim>& p,
                              const std::vector<LocalRbfNet<Dim>>& nets, ContinuityMode mode,
                              Eigen::Ref<Eigen::MatrixXd> a_c, Eigen::Ref<Eigen::VectorXd> b_c) {
    detail::check_nets(p, nets);
    const int neurons = nets.front().size();
    const int per_point = continuity_rows_per_point<Dim>(mode);
    if (a_c.rows() != static_cast<Eigen::Index>(colloc.n_interface()) * per_point ||
        a_c.cols() != static_cast<Eigen::Index>(p.size()) * neurons || b_c.size() != a_c.rows())
        throw ConsistencyError("continuity block has the wrong shape");

    b_c.setZero();
    for (std::size_t j = 0; j < colloc.interface.size(); ++j) {
        const auto& pt = colloc.interface[j];
        const auto& face = p.interfaces().at(static_cast<std::size_t>(pt.interface_id));
        const Eigen::Index row0 = static_cast<Eigen::Index>(j) * per_point;
        for (const auto& [sub_id, sign] : {std::pair{face.left_id, 1.0}, std::pair{face.right_id, -1.0}}) {
            const auto& sub = p.subdomain(sub_id);
            const auto& net = nets[static_cast<std::size_t>(sub_id)];
            const auto xr = to_reference<Dim>(sub, pt.x);
            const Eigen::Index col0 = static_cast<Eigen::Index>(sub_id) * neurons;
            const auto grad = eval_basis_grad<Dim>(net, xr);
            const Eigen::VectorXd phi = eval_basis<Dim>(net, xr);
            a_c.row(row0).segment(col0, neurons) = sign * phi.transpose();
            if (mode == ContinuityMode::full_gradient || Dim == 1) {
                for (int d = 0; d < Dim; ++d)
                    a_c.row(row0 + 1 + d).segment(col0, neurons) =
                        (sign * 2.0 / (sub.hi[d] - sub.lo[d])) * grad.col(d).transpose();
            } else {
                const int d = face.axis;
                a_c.row(row0 + 1).segment(col0, neurons) = (sign * 2.0 / (sub.hi[d] - sub.lo[d])) * grad.col(d).transpose();
            }
        }
    }
}

template <int Dim>
std::pair<Eigen::MatrixXd, Eigen::VectorXd> assemble_continuity_rows(const CollocationSet<Dim>& colloc,
                                                                     const Partition<Dim>& p,
                                                                     const std::vector<LocalRbfNet<Dim>>& nets,
                                                                     ContinuityMode mode) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(
        static_cast<Eigen::Index>(colloc.n_interface()) * continuity_rows_per_point<Dim>(mode),
        static_cast<Eigen::Index>(p.size()) * nets.at(0).size());
    Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
    assemble_continuity_rows<Dim>(colloc, p, nets, mode, a, b);
    return {std::move(a), std::move(b)};
}

/// Stacks separately assembled blocks as [A_e; A_b; A_c].
inline std::pair<Eigen::MatrixXd, Eigen::VectorXd> stack(const Eigen::MatrixXd& a_e, const Eigen::VectorXd& b_e,
                                                         const Eigen::MatrixXd& a_b, const Eigen::VectorXd& b_b,
                                                         const Eigen::MatrixXd& a_c, const Eigen::VectorXd& b_c) {
    const auto cols = a_e.cols();
    if (a_b.cols() != cols || (a_c.rows() > 0 && a_c.cols() != cols) || b_e.size() != a_e.rows() ||
        b_b.size() != a_b.rows() || b_c.size() != a_c.rows())
        throw ConsistencyError("block dimensions do not stack");
    Eigen::MatrixXd a(a_e.rows() + a_b.rows() + a_c.rows(), cols);
    Eigen::VectorXd b(a.rows());
    a << a_e, a_b, a_c;
    b << b_e, b_b, b_c;
    return {std::move(a), std::move(b)};
}

/// Builds the whole system in a single allocation (the blocks of the largest
/// configurations are gigabytes, so they are never held twice).
template <int Dim>
BlockSystem assemble_system(const Partition<Dim>& p, const std::vector<LocalRbfNet<Dim>>& nets,
                            const ProblemSpec<Dim>& problem, const CollocationSet<Dim>& colloc,
                            const AssemblyOptions& opts) {
    detail::check_nets(p, nets);
    const QuadratureRule rule = gauss_lobatto(opts.quad_order);
    BlockSystem sys;
    sys.subdomains = p.size();
    sys.neurons = nets.front().size();
    sys.tests = TestFunctionSet<Dim>(opts.tests_per_axis).size();
    sys.rows_per_point = colloc.interface.empty() ? 0 : continuity_rows_per_point<Dim>(opts.continuity);
    sys.pde = {0, static_cast<Eigen::Index>(sys.subdomains) * sys.tests};
    sys.boundary = {sys.pde.count, static_cast<Eigen::Index>(colloc.n_boundary())};
    sys.continuity = {sys.boundary.begin + sys.boundary.count,
                      static_cast<Eigen::Index>(colloc.n_interface()) * sys.rows_per_point};
    const Eigen::Index rows = sys.continuity.begin + sys.continuity.count;
    const Eigen::Index cols = static_cast<Eigen::Index>(sys.subdomains) * sys.neurons;
    sys.matrix = Eigen::MatrixXd::Zero(rows, cols);
    sys.rhs = Eigen::VectorXd::Zero(rows);

    assemble_pde_rows<Dim>(p, nets, problem, rule, opts.tests_per_axis, sys.matrix.middleRows(sys.pde.begin, sys.pde.count),
                           sys.rhs.segment(sys.pde.begin, sys.pde.count));
    assemble_boundary_rows<Dim>(colloc, p, nets, problem, sys.matrix.middleRows(sys.boundary.begin, sys.boundary.count),
                                sys.rhs.segment(sys.boundary.begin, sys.boundary.count));
    if (sys.continuity.count > 0)
        assemble_continuity_rows<Dim>(colloc, p, nets, opts.continuity,
                                      sys.matrix.middleRows(sys.continuity.begin, sys.continuity.count),
                                      sys.rhs.segment(sys.continuity.begin, sys.continuity.count));

    const auto scale = [&](const RowRange& r, double w) {
        if (w == 1.0) return;
        sys.matrix.middleRows(r.begin, r.count) *= w;
        sys.rhs.segment(r.begin, r.count) *= w;
    };
    scale(sys.pde, opts.weights.pde);
    scale(sys.boundary, opts.weights.boundary);
    scale(sys.continuity, opts.weights.continuity);
    return sys;
}

/// Writes (A, b) as raw binary: 8-byte tag "RRNNMAT1", int64 rows, int64 cols,
/// rows*cols row-major float64 entries of A, then rows float64 entries of b.
inline void dump_system_binary(const std::string& path, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
    const char tag[8] = {'R', 'R', 'N', 'N', 'M', 'A', 'T', '1'};
    const std::int64_t rows = a.rows(), cols = a.cols();
    os.write(tag, 8);
    os.write(reinterpret_cast<const char*>(&rows), sizeof rows);
    os.write(reinterpret_cast<const char*>(&cols), sizeof cols);
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> row_major = a;
    os.write(reinterpret_cast<const char*>(row_major.data()), static_cast<std::streamsize>(sizeof(double) * row_major.size()));
    os.write(reinterpret_cast<const char*>(b.data()), static_cast<std::streamsize>(sizeof(double) * b.size()));
}

/// Same content as CSV: one line per row, entries of A followed by b.
inline void dump_system_csv(const std::string& path, const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    std::ofstream os(path);
    if (!os) throw InvalidArgument("cannot open '" + path + "' for writing");
    os.precision(17);
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        for (Eigen::Index c = 0; c < a.cols(); ++c) os << a(r, c) << ',';
        os << b[r] << '\n';
    }
}

} // namespace rrnn
