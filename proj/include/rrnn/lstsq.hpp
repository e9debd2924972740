#pragma once

// Minimal-norm dense least squares through LAPACK's rank-revealing drivers.

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <lapacke.h>

#include "rrnn/error.hpp"

namespace rrnn {

enum class LstsqMethod {
    svd,  ///< divide-and-conquer SVD (dgelsd)
    cod,  ///< complete orthogonal decomposition with column pivoting (dgelsy)
};

struct LstsqOptions {
    /// Relative singular-value cutoff; a negative value selects eps * max(N, M).
    double rcond = -1.0;
    LstsqMethod method = LstsqMethod::svd;
};

struct LstsqResult {
    Eigen::VectorXd weights;
    double residual_norm = 0.0;  ///< NaN when the matrix was consumed by the solve
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_min_retained = 0.0;
};

inline double default_rcond(Eigen::Index rows, Eigen::Index cols) {
    return std::numeric_limits<double>::epsilon() * static_cast<double>(std::max(rows, cols));
}

namespace detail {

/// dgelsd/dgelsy on the leading `cols` columns of a column-major buffer with leading dimension `rows`.
inline LstsqResult lapack_min_norm(double* a, Eigen::Index rows, Eigen::Index cols, const Eigen::VectorXd& b,
                                   double rcond, LstsqMethod method) {
    const auto ldb = std::max(rows, cols);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ldb);
    rhs.head(rows) = b;

    LstsqResult out;
    lapack_int rank = 0;
    lapack_int info = 0;
    if (method == LstsqMethod::svd) {
        std::vector<double> s(static_cast<std::size_t>(std::min(rows, cols)));
        info = LAPACKE_dgelsd(LAPACK_COL_MAJOR, static_cast<lapack_int>(rows), static_cast<lapack_int>(cols), 1, a,
                              static_cast<lapack_int>(rows), rhs.data(), static_cast<lapack_int>(ldb), s.data(), rcond,
                              &rank);
        if (info == 0 && !s.empty()) {
            out.sigma_max = s.front();
            out.sigma_min_retained = rank > 0 ? s[static_cast<std::size_t>(rank) - 1] : 0.0;
        }
    } else {
        std::vector<lapack_int> jpvt(static_cast<std::size_t>(cols), 0);
        info = LAPACKE_dgelsy(LAPACK_COL_MAJOR, static_cast<lapack_int>(rows), static_cast<lapack_int>(cols), 1, a,
                              static_cast<lapack_int>(rows), rhs.data(), static_cast<lapack_int>(ldb), jpvt.data(),
                              rcond, &rank);
        if (info == 0 && rank > 0) {
            // |T_11| and |T_rr| of the triangular factor bracket the retained spectrum.
            out.sigma_max = std::abs(a[0]);
            out.sigma_min_retained = std::abs(a[static_cast<std::size_t>(rank - 1) * static_cast<std::size_t>(rows + 1)]);
        }
    }
    if (info < 0) throw ConsistencyError("LAPACK rejected argument " + std::to_string(-info));
    if (info > 0) throw SolverError("least-squares factorization failed to converge (info=" + std::to_string(info) + ")");

    out.weights = rhs.head(cols);
    out.rank = static_cast<int>(rank);
    out.residual_norm = std::numeric_limits<double>::quiet_NaN();
    return out;
}

inline void check_input(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
    if (a.rows() < 1 || a.cols() < 1) throw InvalidArgument("least-squares matrix must be non-empty");
    if (b.size() != a.rows()) throw InvalidArgument("right-hand side length does not match the matrix");
    if (!a.allFinite() || !b.allFinite()) throw InvalidArgument("least-squares input contains non-finite entries");
}

} // namespace detail

/// Solves min ||Aw - b|| with minimal ||w||, overwriting `a`. The residual is
/// not available afterwards and is reported as NaN.
inline LstsqResult solve_min_norm_in_place(Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                           const LstsqOptions& opts = {}) {
    detail::check_input(a, b);
    const double rcond = opts.rcond < 0.0 ? default_rcond(a.rows(), a.cols()) : opts.rcond;
    return detail::lapack_min_norm(a.data(), a.rows(), a.cols(), b, rcond, opts.method);
}

/// Same problem for a matrix whose columns come in independent groups of
/// `block` (one group per subdomain). Each group is first replaced by its
/// local right singular vectors, dropping directions with singular value at or
/// below rcond * (largest local singular value); the minimal-norm solution
/// lies in the span of the kept vectors, so without truncation the result is
/// unchanged while the dense solve sees fewer columns. Overwrites `a`.
inline LstsqResult solve_min_norm_blocked_in_place(Eigen::MatrixXd& a, const Eigen::VectorXd& b, Eigen::Index block,
                                                   const LstsqOptions& opts = {}) {
    detail::check_input(a, b);
    if (block < 1 || a.cols() % block != 0) throw InvalidArgument("column block size must divide the column count");
    const double rcond = opts.rcond < 0.0 ? default_rcond(a.rows(), a.cols()) : opts.rcond;
    const Eigen::Index groups = a.cols() / block;

    struct Local {
        std::vector<Eigen::Index> rows;
        Eigen::MatrixXd v;
        Eigen::VectorXd s;
    };
    std::vector<Local> local(static_cast<std::size_t>(groups));
    double sigma_ref = 0.0;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto& L = local[static_cast<std::size_t>(g)];
        const auto cols = a.middleCols(g * block, block);
        for (Eigen::Index r = 0; r < a.rows(); ++r)
            if (cols.row(r).squaredNorm() > 0.0) L.rows.push_back(r);
        Eigen::MatrixXd sub(static_cast<Eigen::Index>(L.rows.size()), block);
        for (std::size_t i = 0; i < L.rows.size(); ++i) sub.row(static_cast<Eigen::Index>(i)) = cols.row(L.rows[i]);
        if (sub.rows() == 0) {
            L.s = Eigen::VectorXd::Zero(0);
            continue;
        }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(sub, Eigen::ComputeFullV);
        L.s = svd.singularValues();
        L.v = svd.matrixV();
        sigma_ref = std::max(sigma_ref, L.s.size() ? L.s[0] : 0.0);
    }

    // Compress group by group into the leading columns of `a`.
    std::vector<Eigen::Index> kept(static_cast<std::size_t>(groups), 0);
    Eigen::Index offset = 0;
    for (Eigen::Index g = 0; g < groups; ++g) {
        auto& L = local[static_cast<std::size_t>(g)];
        Eigen::Index r = 0;
        while (r < L.s.size() && L.s[r] > rcond * sigma_ref) ++r;
        L.v.conservativeResize(block, r);
        Eigen::MatrixXd reduced(static_cast<Eigen::Index>(L.rows.size()), r);
        for (std::size_t i = 0; i < L.rows.size(); ++i)
            reduced.row(static_cast<Eigen::Index>(i)) = a.row(L.rows[i]).segment(g * block, block) * L.v;
        a.middleCols(offset, (g + 1) * block - offset).setZero();
        for (std::size_t i = 0; i < L.rows.size(); ++i)
            a.row(L.rows[i]).segment(offset, r) = reduced.row(static_cast<Eigen::Index>(i));
        kept[static_cast<std::size_t>(g)] = r;
        offset += r;
    }
    if (offset == 0) throw SolverError("every column group is numerically zero");

    auto out = detail::lapack_min_norm(a.data(), a.rows(), offset, b, rcond, opts.method);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(a.cols());
    offset = 0;
    for (Eigen::Index g = 0; g < groups; ++g) {
        const auto r = kept[static_cast<std::size_t>(g)];
        if (r > 0) w.segment(g * block, block) = local[static_cast<std::size_t>(g)].v * out.weights.segment(offset, r);
        offset += r;
    }
    out.weights = std::move(w);
    return out;
}

/// Minimal-norm least-squares solution of A w = b.
inline LstsqResult solve_min_norm(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const LstsqOptions& opts = {}) {
    Eigen::MatrixXd work = a;
    auto out = solve_min_norm_in_place(work, b, opts);
    out.residual_norm = (a * out.weights - b).norm();
    return out;
}

} // namespace rrnn
