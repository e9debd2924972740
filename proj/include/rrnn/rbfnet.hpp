#pragma once

// Per-subdomain Gaussian RBF networks. Centers and shape coefficients are drawn
// once at random and frozen; only the output weights are ever solved for.
//
//   rho_i(x) = exp(-sigma_i * |x - c_i|^2),  sigma_i ~ U[0, beta],  c_i ~ U[-1,1]^Dim
//
// Everything here lives in reference coordinates of the owning subdomain.

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "rrnn/error.hpp"
#include "rrnn/lstsq.hpp"
#include "rrnn/partition.hpp"

namespace rrnn {

struct RbfConfig {
    int neurons = 100;  ///< J, basis functions per subdomain
    double beta = 2.0;  ///< upper bound of the random shape coefficient
    std::uint64_t seed = 0;
    bool share_basis = false;  ///< reuse a single draw on every subdomain

    void validate() const {
        if (neurons < 1) throw InvalidArgument("number of neurons per subdomain must be positive");
        if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidArgument("shape bound beta must be positive");
    }
};

template <int Dim>
struct LocalRbfNet {
    std::vector<Point<Dim>> centers;
    std::vector<double> shapes;
    Eigen::VectorXd weights;  ///< empty until a solve assigns them

    int size() const { return static_cast<int>(centers.size()); }
};

template <int Dim>
LocalRbfNet<Dim> draw_net(int neurons, double beta, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> center(-1.0, 1.0);
    std::uniform_real_distribution<double> shape(0.0, beta);
    LocalRbfNet<Dim> net;
    net.centers.resize(static_cast<std::size_t>(neurons));
    net.shapes.resize(static_cast<std::size_t>(neurons));
    for (auto& c : net.centers)
        for (auto& v : c) v = center(rng);
    for (auto& s : net.shapes) s = shape(rng);
    return net;
}

/// One network per subdomain, reproducible from `cfg.seed`.
template <int Dim>
std::vector<LocalRbfNet<Dim>> random_init(const RbfConfig& cfg, int subdomains) {
    cfg.validate();
    if (subdomains < 1) throw InvalidArgument("need at least one subdomain");
    std::mt19937_64 rng(cfg.seed);
    std::vector<LocalRbfNet<Dim>> nets;
    nets.reserve(static_cast<std::size_t>(subdomains));
    if (cfg.share_basis) {
        const auto net = draw_net<Dim>(cfg.neurons, cfg.beta, rng);
        nets.assign(static_cast<std::size_t>(subdomains), net);
    } else {
        for (int s = 0; s < subdomains; ++s) nets.push_back(draw_net<Dim>(cfg.neurons, cfg.beta, rng));
    }
    return nets;
}

template <int Dim>
inline double squared_distance(const Point<Dim>& a, const Point<Dim>& b) {
    double r2 = 0.0;
    for (int d = 0; d < Dim; ++d) r2 += (a[d] - b[d]) * (a[d] - b[d]);
    return r2;
}

/// rho_i(x) for every neuron, written into `out` (length J).
template <int Dim>
void eval_basis(const LocalRbfNet<Dim>& net, const Point<Dim>& x, std::span<double> out) {
    const auto n = net.centers.size();
    for (std::size_t i = 0; i < n; ++i) out[i] = std::exp(-net.shapes[i] * squared_distance<Dim>(x, net.centers[i]));
}

template <int Dim>
Eigen::VectorXd eval_basis(const LocalRbfNet<Dim>& net, const Point<Dim>& x) {
    Eigen::VectorXd out(net.size());
    eval_basis<Dim>(net, x, std::span<double>(out.data(), static_cast<std::size_t>(out.size())));
    return out;
}

/// Reference-coordinate gradients, one row per neuron. Physical gradients need
/// the chain factor 2/h_d on axis d.
template <int Dim>
Eigen::Matrix<double, Eigen::Dynamic, Dim> eval_basis_grad(const LocalRbfNet<Dim>& net, const Point<Dim>& x) {
    Eigen::Matrix<double, Eigen::Dynamic, Dim> g(net.size(), Dim);
    for (int i = 0; i < net.size(); ++i) {
        const auto& c = net.centers[static_cast<std::size_t>(i)];
        const double s = net.shapes[static_cast<std::size_t>(i)];
        const double rho = std::exp(-s * squared_distance<Dim>(x, c));
        for (int d = 0; d < Dim; ++d) g(i, d) = -2.0 * s * (x[d] - c[d]) * rho;
    }
    return g;
}

/// Piecewise RBF approximation over a partition: one solved network per subdomain.
template <int Dim>
struct RrnnSolution {
    Partition<Dim> partition;
    std::vector<LocalRbfNet<Dim>> nets;
    RbfConfig config;

    double eval_on(int sub, const Point<Dim>& x) const {
        const auto& net = nets.at(static_cast<std::size_t>(sub));
        if (net.weights.size() != net.size()) throw ConsistencyError("network weights are not assigned");
        const auto xr = to_reference<Dim>(partition.subdomain(sub), x);
        double u = 0.0;
        for (int i = 0; i < net.size(); ++i)
            u += net.weights[i] *
                 std::exp(-net.shapes[static_cast<std::size_t>(i)] * squared_distance<Dim>(xr, net.centers[static_cast<std::size_t>(i)]));
        return u;
    }

    /// Physical gradient of the local network of `sub` at x.
    Point<Dim> grad_on(int sub, const Point<Dim>& x) const {
        const auto& net = nets.at(static_cast<std::size_t>(sub));
        const auto& box = partition.subdomain(sub);
        const auto xr = to_reference<Dim>(box, x);
        const Eigen::Matrix<double, 1, Dim> g = net.weights.transpose() * eval_basis_grad<Dim>(net, xr);
        Point<Dim> out;
        for (int d = 0; d < Dim; ++d) out[d] = g(d) * 2.0 / (box.hi[d] - box.lo[d]);
        return out;
    }

    /// u(x), taken from the lowest-id subdomain containing x.
    double eval(const Point<Dim>& x) const { return eval_on(partition.locate(x), x); }
};

template <int Dim>
double eval_solution(const RrnnSolution<Dim>& sol, const Point<Dim>& x) {
    return sol.eval(x);
}

template <int Dim>
struct Sample {
    Point<Dim> x{};  ///< reference coordinates
    double u = 0.0;
};

/// Minimal-norm least-squares output weights interpolating `samples` with
/// the frozen basis of `net` (the plain ELM collocation fit).
template <int Dim>
LstsqResult elm_fit(const LocalRbfNet<Dim>& net, std::span<const Sample<Dim>> samples, const LstsqOptions& opts = {}) {
    if (samples.empty()) throw InvalidArgument("ELM fit needs at least one sample");
    Eigen::MatrixXd a(static_cast<Eigen::Index>(samples.size()), net.size());
    Eigen::VectorXd b(a.rows());
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
        const auto& s = samples[static_cast<std::size_t>(r)];
        a.row(r) = eval_basis<Dim>(net, s.x).transpose();
        b[r] = s.u;
    }
    return solve_min_norm(a, b, opts);
}

} // namespace rrnn
