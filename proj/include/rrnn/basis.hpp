#pragma once

// Gauss-Lobatto-Legendre quadrature and the Legendre-difference test functions
// v_k = P_{k+1} - P_{k-1} on the reference cube. Every v_k vanishes at +-1,
// which is what lets the subdomain surface term drop out of the weak form.

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <utility>
#include <vector>

#include "rrnn/error.hpp"
#include "rrnn/partition.hpp"

namespace rrnn {

struct QuadratureRule {
    std::vector<double> nodes;
    std::vector<double> weights;

    int order() const { return static_cast<int>(nodes.size()); }
};

struct LegendreValue {
    double value = 0.0;
    double derivative = 0.0;
};

/// P_k(x) and P_k'(x) by the three-term recurrence.
inline LegendreValue legendre(int k, double x) {
    if (k < 0) throw InvalidArgument("Legendre degree must be non-negative");
    double p_prev = 1.0, p = x;      // P_0, P_1
    double dp_prev = 0.0, dp = 1.0;  // P_0', P_1'
    if (k == 0) return {1.0, 0.0};
    for (int n = 1; n < k; ++n) {
        const double p_next = ((2 * n + 1) * x * p - n * p_prev) / (n + 1);
        const double dp_next = dp_prev + (2 * n + 1) * p;
        p_prev = p;
        p = p_next;
        dp_prev = dp;
        dp = dp_next;
    }
    return {p, dp};
}

/// All of P_0..P_kmax and their derivatives at x.
inline void legendre_table(int kmax, double x, std::vector<LegendreValue>& out) {
    out.resize(static_cast<std::size_t>(kmax) + 1);
    out[0] = {1.0, 0.0};
    if (kmax == 0) return;
    out[1] = {x, 1.0};
    for (int n = 1; n < kmax; ++n) {
        const auto& a = out[static_cast<std::size_t>(n)];
        const auto& b = out[static_cast<std::size_t>(n) - 1];
        out[static_cast<std::size_t>(n) + 1] = {((2 * n + 1) * x * a.value - n * b.value) / (n + 1),
                                                b.derivative + (2 * n + 1) * a.value};
    }
}

/// n-point Gauss-Lobatto-Legendre rule on [-1,1]. Interior nodes are the roots
/// of P'_{n-1}, found by Newton from Chebyshev-Lobatto starting guesses.
inline QuadratureRule gauss_lobatto(int n) {
    if (n < 2) throw InvalidArgument("Gauss-Lobatto quadrature requires at least two nodes");
    const int N = n - 1;
    QuadratureRule rule;
    rule.nodes.assign(static_cast<std::size_t>(n), 0.0);
    rule.weights.assign(static_cast<std::size_t>(n), 0.0);
    rule.nodes.front() = -1.0;
    rule.nodes.back() = 1.0;

    // Solve only the upper half, mirror the rest so the rule is exactly symmetric.
    for (int j = 1; j <= N / 2; ++j) {
        double x = std::cos(std::numbers::pi * j / N);
        for (int it = 0; it < 100; ++it) {
            const auto [p, dp] = legendre(N, x);
            // (1 - x^2) P'' = 2x P' - N(N+1) P
            const double d2p = (2.0 * x * dp - N * (N + 1.0) * p) / (1.0 - x * x);
            const double step = dp / d2p;
            x -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        rule.nodes[static_cast<std::size_t>(N - j)] = x;
        rule.nodes[static_cast<std::size_t>(j)] = -x;
    }
    if (N % 2 == 0) rule.nodes[static_cast<std::size_t>(N / 2)] = 0.0;

    for (int j = 0; j <= N; ++j) {
        const double p = legendre(N, rule.nodes[static_cast<std::size_t>(j)]).value;
        rule.weights[static_cast<std::size_t>(j)] = 2.0 / (N * (N + 1.0) * p * p);
    }
    return rule;
}

/// 1D test function v_k = P_{k+1} - P_{k-1}, k >= 1.
inline LegendreValue test_function(int k, double x) {
    if (k < 1) throw InvalidArgument("test-function index must be at least 1");
    const auto hi = legendre(k + 1, x);
    const auto lo = legendre(k - 1, x);
    return {hi.value - lo.value, hi.derivative - lo.derivative};
}

template <int Dim>
struct TestValue {
    double value = 0.0;
    Point<Dim> gradient{};
};

/// Tensor-product test function prod_d v_{k_d}(x_d) with its reference gradient.
template <int Dim>
TestValue<Dim> test_function(const std::array<int, Dim>& k, const Point<Dim>& x) {
    std::array<LegendreValue, Dim> f;
    for (int d = 0; d < Dim; ++d) f[d] = test_function(k[d], x[d]);
    TestValue<Dim> out;
    out.value = 1.0;
    for (int d = 0; d < Dim; ++d) out.value *= f[d].value;
    for (int d = 0; d < Dim; ++d) {
        double g = f[d].derivative;
        for (int e = 0; e < Dim; ++e)
            if (e != d) g *= f[e].value;
        out.gradient[d] = g;
    }
    return out;
}

/// Indexing of the Q^Dim test functions of one subdomain. The first axis runs fastest.
template <int Dim>
struct TestFunctionSet {
    int q = 1;  ///< test functions per axis

    explicit TestFunctionSet(int per_axis) : q(per_axis) {
        if (q < 1) throw InvalidArgument("need at least one test function per axis");
    }

    int size() const {
        int s = 1;
        for (int d = 0; d < Dim; ++d) s *= q;
        return s;
    }

    std::array<int, Dim> index(int row) const {
        std::array<int, Dim> k;
        for (int d = 0; d < Dim; ++d) {
            k[d] = row % q + 1;
            row /= q;
        }
        return k;
    }
};

/// Values and derivatives of v_1..v_Q at every node of a 1D rule, laid out [node][k-1].
struct TestTable1d {
    int q = 0;
    std::vector<double> value;
    std::vector<double> derivative;

    TestTable1d(const QuadratureRule& rule, int q_) : q(q_) {
        const auto n = static_cast<std::size_t>(rule.order());
        value.resize(n * static_cast<std::size_t>(q));
        derivative.resize(value.size());
        std::vector<LegendreValue> p;
        for (std::size_t i = 0; i < n; ++i) {
            legendre_table(q + 1, rule.nodes[i], p);
            for (int k = 1; k <= q; ++k) {
                const auto at = i * static_cast<std::size_t>(q) + static_cast<std::size_t>(k - 1);
                value[at] = p[static_cast<std::size_t>(k) + 1].value - p[static_cast<std::size_t>(k) - 1].value;
                derivative[at] =
                    p[static_cast<std::size_t>(k) + 1].derivative - p[static_cast<std::size_t>(k) - 1].derivative;
            }
        }
    }

    double v(std::size_t node, int k) const { return value[node * static_cast<std::size_t>(q) + static_cast<std::size_t>(k - 1)]; }
    double dv(std::size_t node, int k) const {
        return derivative[node * static_cast<std::size_t>(q) + static_cast<std::size_t>(k - 1)];
    }
};

} // namespace rrnn
