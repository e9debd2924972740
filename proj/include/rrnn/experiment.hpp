#pragma once

// End-to-end driver: build the partition and random networks, assemble and
// solve the least-squares system, then measure the error against an exact or
// finite-difference reference on a uniform test grid.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rrnn/assembly.hpp"
#include "rrnn/error.hpp"
#include "rrnn/fdm.hpp"
#include "rrnn/lstsq.hpp"
#include "rrnn/partition.hpp"
#include "rrnn/problems.hpp"
#include "rrnn/rbfnet.hpp"

namespace rrnn {

enum class ReferenceSource { automatic, exact, fdm };

struct RunConfig {
    ProblemRequest problem{"periodic_1d"};
    std::vector<int> counts{5};  ///< subdomains per axis; one entry is replicated over all axes
    int neurons = 100;
    int tests = 20;
    double beta = 2.0;
    std::uint64_t seed = 0;
    int quad_order = 80;
    int nbper = 10;
    int ncper = 10;
    double rcond = -1.0;
    LstsqMethod lstsq = LstsqMethod::svd;
    ContinuityMode continuity = ContinuityMode::full_gradient;
    BlockWeights weights{};
    bool share_basis = false;
    bool compress = false;  ///< reduce each subdomain's columns to its local row space before the dense solve
    int test_points = 0;  ///< per axis; 0 selects 10001 (1D) or 1001 (2D)
    ReferenceSource reference = ReferenceSource::automatic;
    double fdm_h = 0.0;  ///< 0 selects 1e-4 (1D) or 1/1024 (2D)
    std::string cache_dir;
    bool dims_only = false;  ///< assemble and report the system size without solving

    int dim() const { return problem_dim(problem.name); }

    template <int Dim>
    std::array<int, Dim> axis_counts() const {
        std::array<int, Dim> c;
        for (int d = 0; d < Dim; ++d) c[d] = counts.size() == 1 ? counts[0] : counts.at(static_cast<std::size_t>(d));
        return c;
    }

    int effective_test_points() const { return test_points > 0 ? test_points : (dim() == 1 ? 10001 : 1001); }
    double effective_fdm_h() const { return fdm_h > 0.0 ? fdm_h : (dim() == 1 ? 1e-4 : 1.0 / 1024.0); }

    void validate() const {
        const int d = dim();
        if (counts.empty() || (counts.size() != 1 && static_cast<int>(counts.size()) != d))
            throw InvalidArgument("subdomain counts must have one entry or one per axis");
        for (int c : counts)
            if (c < 1) throw InvalidArgument("subdomain counts must be positive");
        if (neurons < 1) throw InvalidArgument("J must be positive");
        if (tests < 1) throw InvalidArgument("Q must be positive");
        if (!(beta > 0.0)) throw InvalidArgument("beta must be positive");
        if (quad_order < 2) throw InvalidArgument("nq must be at least 2");
        if (nbper < 1 || ncper < 1) throw InvalidArgument("nbper and ncper must be positive");
        if (test_points < 0 || test_points == 1) throw InvalidArgument("test_points must be at least 2");
        if (fdm_h < 0.0) throw InvalidArgument("fdm_h must be positive");
    }
};

std::string counts_string(const std::vector<int>& counts, int dim);

/// Hyperparameters used for each problem when nothing else is given.
inline RunConfig defaults_for(const ProblemRequest& req) {
    RunConfig c;
    c.problem = req;
    const int dim = problem_dim(req.name);
    const auto per_eps = [](double eps) { return std::max(5, static_cast<int>(std::lround(1.0 / eps))); };
    const auto per_eps_2d = [](double eps) {
        if (std::abs(eps - 0.5) < 1e-12) return 5;
        if (std::abs(eps - 0.2) < 1e-12) return 8;
        if (std::abs(eps - 0.1) < 1e-12) return 10;
        return std::max(5, static_cast<int>(std::lround(1.0 / eps)));
    };
    if (dim == 2) {
        c.quad_order = 10;
        c.compress = true;
        c.lstsq = LstsqMethod::cod;
        c.neurons = 200;
        c.tests = 9;
    }
    if (req.name == "periodic_1d") {
        c.counts = {per_eps(req.eps)};
    } else if (req.name == "two_scale_1d") {
        c.neurons = 50;
        c.beta = 5.0;
        c.counts = {per_eps(req.eps)};
    } else if (req.name == "three_scale_1d") {
        c.neurons = 50;
        c.beta = 5.0;
        c.counts = {per_eps(req.eps2)};
    } else if (req.name == "linear_1d" || req.name == "sine_1d") {
        c.neurons = 50;
        c.counts = {2};
    } else if (req.name == "radial_2d") {
        c.beta = 1.0;
        c.tests = 10;
        c.counts = {per_eps_2d(req.eps)};
    } else if (req.name == "two_scale_2d") {
        c.beta = 3.0;
        c.counts = {per_eps_2d(req.eps)};
    } else if (req.name == "poisson_boltzmann_2d") {
        // The coefficient and source oscillate twice per subdomain; 10 points under-integrate them.
        c.quad_order = 16;
        c.counts = {10};
    } else if (req.name == "sine_2d") {
        c.neurons = 100;
        c.counts = {2};
    }
    return c;
}

// ---------------------------------------------------------------------------
// Error metrics

struct ErrorMetrics {
    double max_error = 0.0;  ///< |u_N - u|_inf / |u|_inf
    double rms_error = 0.0;  ///< |u_N - u|_2 / |u|_2
};

inline ErrorMetrics metrics(std::span<const double> approx, std::span<const double> ref) {
    if (approx.empty() || approx.size() != ref.size())
        throw InvalidArgument("metrics need two non-empty sample vectors of equal length");
    double dmax = 0.0, rmax = 0.0, d2 = 0.0, r2 = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        const double diff = approx[i] - ref[i];
        dmax = std::max(dmax, std::abs(diff));
        rmax = std::max(rmax, std::abs(ref[i]));
        d2 += diff * diff;
        r2 += ref[i] * ref[i];
    }
    if (rmax == 0.0) throw UndefinedMetric("relative error is undefined for a zero reference");
    return {dmax / rmax, std::sqrt(d2 / r2)};
}

// ---------------------------------------------------------------------------
// Reference solutions

/// Finite-difference reference, loaded from `cache_dir` when a matching grid
/// file exists and written there after a fresh solve.
template <int Dim>
FdmSolution<Dim> fdm_reference(const ProblemSpec<Dim>& problem, double h, const std::string& cache_dir,
                               const FdmOptions& opts = {}) {
    std::string path;
    if (!cache_dir.empty()) {
        std::ostringstream name;
        name << problem_key(problem) << "_h=" << std::setprecision(12) << h << ".fdm";
        path = (std::filesystem::path(cache_dir) / name.str()).string();
        if (std::filesystem::exists(path)) {
            auto sol = load_fdm<Dim>(path, problem.domain.lower);
            sol.problem = problem_key(problem);
            return sol;
        }
    }
    FdmSolution<Dim> sol;
    if constexpr (Dim == 1)
        sol = fdm_solve_1d(problem, h, opts);
    else
        sol = fdm_solve_2d(problem, h, opts);
    if (!path.empty()) {
        std::filesystem::create_directories(cache_dir);
        save_fdm<Dim>(path, sol);
    }
    return sol;
}

// ---------------------------------------------------------------------------
// Single run

struct Timings {
    double preprocess = 0.0;  ///< networks, collocation and assembly
    double optimize = 0.0;    ///< least-squares solve
    double test = 0.0;        ///< evaluation on the test grid and metrics
};

struct SolveReport {
    RunConfig config;
    Eigen::Index rows = 0;  ///< N
    Eigen::Index cols = 0;  ///< M
    double max_error = std::numeric_limits<double>::quiet_NaN();
    double rms_error = std::numeric_limits<double>::quiet_NaN();
    double residual_norm = std::numeric_limits<double>::quiet_NaN();
    double interface_jump = 0.0;  ///< max |u+ - u-| over interface collocation points
    int rank = 0;
    double sigma_max = 0.0;
    double sigma_min_retained = 0.0;
    Timings timings{};
    std::string reference;  ///< "exact" or "fdm(h=...)"
};

template <int Dim>
struct SolveResult {
    SolveReport report;
    ProblemSpec<Dim> problem;
    RrnnSolution<Dim> solution;
    CollocationSet<Dim> collocation;
    std::vector<Point<Dim>> test_points;
    std::vector<double> approx;
    std::vector<double> reference;
};

namespace detail {

inline double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <int Dim>
std::vector<Point<Dim>> uniform_grid(const Domain<Dim>& dom, int per_axis) {
    std::size_t total = 1;
    for (int d = 0; d < Dim; ++d) total *= static_cast<std::size_t>(per_axis);
    std::vector<Point<Dim>> pts(total);
    for (std::size_t k = 0; k < total; ++k) {
        std::size_t rest = k;
        for (int d = 0; d < Dim; ++d) {
            const auto i = rest % static_cast<std::size_t>(per_axis);
            rest /= static_cast<std::size_t>(per_axis);
            pts[k][d] = i + 1 == static_cast<std::size_t>(per_axis)
                            ? dom.upper[d]
                            : dom.lower[d] + (dom.upper[d] - dom.lower[d]) * static_cast<double>(i) / (per_axis - 1);
        }
    }
    return pts;
}

/// Runs `fn`, prefixing the message of any library error with the stage name.
template <typename Fn>
decltype(auto) staged(const char* stage, Fn&& fn) {
    const auto msg = [stage](const std::exception& e) { return std::string(stage) + ": " + e.what(); };
    try {
        return fn();
    } catch (const UndefinedMetric& e) {
        throw UndefinedMetric(msg(e));
    } catch (const AssemblyError& e) {
        throw AssemblyError(msg(e));
    } catch (const SolverError& e) {
        throw SolverError(msg(e));
    } catch (const NumericalError& e) {
        throw NumericalError(msg(e));
    } catch (const InvalidArgument& e) {
        throw InvalidArgument(msg(e));
    } catch (const OutOfDomain& e) {
        throw OutOfDomain(msg(e));
    } catch (const ConsistencyError& e) {
        throw ConsistencyError(msg(e));
    }
}

/// Collocation draws use a stream independent of the network draws.
inline std::uint64_t collocation_seed(std::uint64_t seed) { return seed ^ 0x9E3779B97F4A7C15ULL; }

} // namespace detail

template <int Dim>
double max_interface_jump(const RrnnSolution<Dim>& sol, const CollocationSet<Dim>& colloc) {
    double jump = 0.0;
    for (const auto& pt : colloc.interface) {
        const auto& face = sol.partition.interfaces().at(static_cast<std::size_t>(pt.interface_id));
        jump = std::max(jump, std::abs(sol.eval_on(face.left_id, pt.x) - sol.eval_on(face.right_id, pt.x)));
    }
    return jump;
}

template <int Dim>
SolveResult<Dim> solve(const RunConfig& cfg) {
    cfg.validate();
    if (cfg.dim() != Dim) throw InvalidArgument("configuration dimension mismatch");
    using clock = std::chrono::steady_clock;

    auto t0 = clock::now();
    SolveResult<Dim> out{.report = {}, .problem = make_problem<Dim>(cfg.problem), .solution = {}, .collocation = {},
                         .test_points = {}, .approx = {}, .reference = {}};
    out.report.config = cfg;
    const auto& problem = out.problem;

    RbfConfig rbf{cfg.neurons, cfg.beta, cfg.seed, cfg.share_basis};
    auto& sol = out.solution;
    AssemblyOptions aopts;
    aopts.tests_per_axis = cfg.tests;
    aopts.quad_order = cfg.quad_order;
    aopts.continuity = cfg.continuity;
    aopts.weights = cfg.weights;
    auto sys = detail::staged("pre-processing", [&] {
        sol.config = rbf;
        sol.partition = decompose<Dim>(problem.domain, cfg.axis_counts<Dim>());
        sol.nets = random_init<Dim>(rbf, sol.partition.size());
        out.collocation =
            sample_collocation<Dim>(sol.partition, cfg.nbper, cfg.ncper, detail::collocation_seed(cfg.seed));
        return assemble_system<Dim>(sol.partition, sol.nets, problem, out.collocation, aopts);
    });
    out.report.rows = sys.rows();
    out.report.cols = sys.cols();
    out.report.timings.preprocess = detail::seconds_since(t0);
    if (cfg.dims_only) return out;

    t0 = clock::now();
    const Eigen::VectorXd rhs = sys.rhs;
    const auto ls = detail::staged("optimization", [&] {
        const LstsqOptions lopts{cfg.rcond, cfg.lstsq};
        return cfg.compress ? solve_min_norm_blocked_in_place(sys.matrix, rhs, cfg.neurons, lopts)
                            : solve_min_norm_in_place(sys.matrix, rhs, lopts);
    });
    out.report.timings.optimize = detail::seconds_since(t0);
    sys.matrix.resize(0, 0);
    out.report.rank = ls.rank;
    out.report.sigma_max = ls.sigma_max;
    out.report.sigma_min_retained = ls.sigma_min_retained;
    for (int s = 0; s < sol.partition.size(); ++s)
        sol.nets[static_cast<std::size_t>(s)].weights =
            ls.weights.segment(static_cast<Eigen::Index>(s) * cfg.neurons, cfg.neurons);

    // The solve consumed the matrix; rebuild it for the residual.
    out.report.residual_norm = detail::staged("residual", [&] {
        const auto check = assemble_system<Dim>(sol.partition, sol.nets, problem, out.collocation, aopts);
        return (check.matrix * ls.weights - check.rhs).norm();
    });
    out.report.interface_jump = max_interface_jump<Dim>(sol, out.collocation);

    // Reference values are prepared outside the timed test phase.
    detail::staged("reference", [&] {
        out.test_points = detail::uniform_grid<Dim>(problem.domain, cfg.effective_test_points());
        out.reference.resize(out.test_points.size());
        ReferenceSource src = cfg.reference;
        if (src == ReferenceSource::automatic)
            src = problem.has_exact() ? ReferenceSource::exact : ReferenceSource::fdm;
        if (src == ReferenceSource::exact) {
            if (!problem.has_exact()) throw InvalidArgument("problem '" + problem.name + "' has no exact solution");
            for (std::size_t k = 0; k < out.test_points.size(); ++k) out.reference[k] = problem.exact(out.test_points[k]);
            out.report.reference = "exact";
        } else {
            const double h = cfg.effective_fdm_h();
            const auto fdm = fdm_reference<Dim>(problem, h, cfg.cache_dir);
            for (std::size_t k = 0; k < out.test_points.size(); ++k)
                out.reference[k] = interpolate<Dim>(fdm, out.test_points[k]);
            std::ostringstream os;
            os << "fdm(h=" << h << ")";
            out.report.reference = os.str();
        }
    });

    t0 = clock::now();
    const auto m = detail::staged("testing", [&] {
        out.approx.resize(out.test_points.size());
        for (std::size_t k = 0; k < out.test_points.size(); ++k) out.approx[k] = sol.eval(out.test_points[k]);
        return metrics(out.approx, out.reference);
    });
    out.report.max_error = m.max_error;
    out.report.rms_error = m.rms_error;
    out.report.timings.test = detail::seconds_since(t0);
    return out;
}

inline SolveReport run(const RunConfig& cfg) {
    return cfg.dim() == 1 ? solve<1>(cfg).report : solve<2>(cfg).report;
}

/// Writes "x[,y],u_approx,u_ref,abs_diff" rows for plotting.
template <int Dim>
void write_samples(std::ostream& os, const SolveResult<Dim>& r) {
    os << (Dim == 1 ? "x" : "x,y") << ",u_approx,u_ref,abs_diff\n";
    os << std::setprecision(17);
    for (std::size_t k = 0; k < r.test_points.size(); ++k) {
        for (int d = 0; d < Dim; ++d) os << r.test_points[k][d] << ',';
        os << r.approx[k] << ',' << r.reference[k] << ',' << std::abs(r.approx[k] - r.reference[k]) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Configuration parsing

namespace detail {

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double d = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return d;
    } catch (const std::exception&) {
        throw InvalidArgument("value of '" + key + "' is not a number: '" + v + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long long i = std::stoll(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return i;
    } catch (const std::exception&) {
        throw InvalidArgument("value of '" + key + "' is not an integer: '" + v + "'");
    }
}

inline bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InvalidArgument("value of '" + key + "' is not a boolean: '" + v + "'");
}

} // namespace detail

/// "5" or "5x5".
inline std::vector<int> parse_counts(const std::string& v) {
    std::vector<int> out;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, 'x')) out.push_back(static_cast<int>(detail::parse_integer("S", detail::trim(part))));
    if (out.empty() || out.size() > 2) throw InvalidArgument("subdomain counts must look like '5' or '5x5'");
    return out;
}

inline std::string counts_string(const std::vector<int>& counts, int dim) {
    std::ostringstream os;
    for (int d = 0; d < dim; ++d) {
        if (d) os << 'x';
        os << (counts.size() == 1 ? counts[0] : counts.at(static_cast<std::size_t>(d)));
    }
    return os.str();
}

/// Keys accepted in configuration files and as command-line flags.
inline const std::vector<std::string>& config_keys() {
    static const std::vector<std::string> keys = {
        "problem", "eps",        "eps1",           "eps2",       "S",     "J",          "Q",
        "beta",    "seed",       "nq",             "nbper",      "ncper", "rcond",      "lstsq",
        "continuity", "weight_pde", "weight_boundary", "weight_continuity", "share_basis", "compress", "test_points",
        "reference", "fdm_h",    "cache_dir",
    };
    return keys;
}

inline void apply_setting(RunConfig& c, const std::string& key, const std::string& raw) {
    const std::string v = detail::trim(raw);
    if (key == "problem") {
        problem_dim(v);
        c.problem.name = v;
    } else if (key == "eps") {
        c.problem.eps = detail::parse_double(key, v);
    } else if (key == "eps1") {
        c.problem.eps1 = detail::parse_double(key, v);
    } else if (key == "eps2") {
        c.problem.eps2 = detail::parse_double(key, v);
    } else if (key == "S") {
        c.counts = parse_counts(v);
    } else if (key == "J") {
        c.neurons = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "Q") {
        c.tests = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "beta") {
        c.beta = detail::parse_double(key, v);
    } else if (key == "seed") {
        const auto s = detail::parse_integer(key, v);
        if (s < 0) throw InvalidArgument("seed must be non-negative");
        c.seed = static_cast<std::uint64_t>(s);
    } else if (key == "nq") {
        c.quad_order = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "nbper") {
        c.nbper = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "ncper") {
        c.ncper = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "rcond") {
        c.rcond = detail::parse_double(key, v);
    } else if (key == "lstsq") {
        if (v == "svd")
            c.lstsq = LstsqMethod::svd;
        else if (v == "cod")
            c.lstsq = LstsqMethod::cod;
        else
            throw InvalidArgument("lstsq must be 'svd' or 'cod'");
    } else if (key == "continuity") {
        if (v == "3row" || v == "full")
            c.continuity = ContinuityMode::full_gradient;
        else if (v == "2row" || v == "normal")
            c.continuity = ContinuityMode::normal_derivative;
        else
            throw InvalidArgument("continuity must be '3row' or '2row'");
    } else if (key == "weight_pde") {
        c.weights.pde = detail::parse_double(key, v);
    } else if (key == "weight_boundary") {
        c.weights.boundary = detail::parse_double(key, v);
    } else if (key == "weight_continuity") {
        c.weights.continuity = detail::parse_double(key, v);
    } else if (key == "share_basis") {
        c.share_basis = detail::parse_bool(key, v);
    } else if (key == "compress") {
        c.compress = detail::parse_bool(key, v);
    } else if (key == "test_points") {
        c.test_points = static_cast<int>(detail::parse_integer(key, v));
    } else if (key == "reference") {
        if (v == "exact")
            c.reference = ReferenceSource::exact;
        else if (v == "fdm")
            c.reference = ReferenceSource::fdm;
        else if (v == "auto")
            c.reference = ReferenceSource::automatic;
        else
            throw InvalidArgument("reference must be 'exact', 'fdm' or 'auto'");
    } else if (key == "fdm_h") {
        c.fdm_h = detail::parse_double(key, v);
    } else if (key == "cache_dir") {
        c.cache_dir = v;
    } else {
        throw InvalidArgument("unknown configuration key '" + key + "'");
    }
}

/// Builds a configuration from key/value settings: the problem's defaults
/// first, then every explicit setting on top.
inline RunConfig make_config(const std::map<std::string, std::string>& settings) {
    ProblemRequest req{"periodic_1d"};
    auto get = [&](const char* k) -> std::optional<std::string> {
        auto it = settings.find(k);
        return it == settings.end() ? std::nullopt : std::optional<std::string>(detail::trim(it->second));
    };
    if (auto v = get("problem")) req.name = *v;
    if (auto v = get("eps")) req.eps = detail::parse_double("eps", *v);
    if (auto v = get("eps1")) req.eps1 = detail::parse_double("eps1", *v);
    if (auto v = get("eps2")) req.eps2 = detail::parse_double("eps2", *v);
    RunConfig c = defaults_for(req);
    for (const auto& [k, v] : settings) apply_setting(c, k, v);
    c.validate();
    return c;
}

/// Flat "key = value" document; '#' starts a comment.
inline std::map<std::string, std::string> read_settings(std::istream& is) {
    std::map<std::string, std::string> out;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InvalidArgument("line " + std::to_string(lineno) + ": expected 'key = value'");
        const auto key = detail::trim(line.substr(0, eq));
        if (std::find(config_keys().begin(), config_keys().end(), key) == config_keys().end())
            throw InvalidArgument("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        out[key] = detail::trim(line.substr(eq + 1));
    }
    return out;
}

// ---------------------------------------------------------------------------
// CSV reports

inline const char* csv_header() {
    return "problem,eps,eps1,eps2,S,J,Q,beta,nq,nbper,ncper,N,M,max_error,rms_error,t_pre,t_opt,t_test,seed";
}

namespace detail {

inline void write_config_columns(std::ostream& os, const RunConfig& c) {
    const auto& name = c.problem.name;
    const bool has_eps = name == "periodic_1d" || name == "two_scale_1d" || name == "radial_2d" || name == "two_scale_2d";
    const bool has_eps12 = name == "three_scale_1d";
    os << name << ',';
    if (has_eps) os << c.problem.eps;
    os << ',';
    if (has_eps12) os << c.problem.eps1;
    os << ',';
    if (has_eps12) os << c.problem.eps2;
    os << ',' << counts_string(c.counts, c.dim()) << ',' << c.neurons << ',' << c.tests << ',' << c.beta << ','
       << c.quad_order << ',' << c.nbper << ',' << c.ncper;
}

} // namespace detail

inline void write_csv_row(std::ostream& os, const SolveReport& r) {
    detail::write_config_columns(os, r.config);
    os << ',' << r.rows << ',' << r.cols << ',' << std::setprecision(6) << std::scientific << r.max_error << ','
       << r.rms_error << std::defaultfloat << std::fixed << std::setprecision(3) << ',' << r.timings.preprocess << ','
       << r.timings.optimize << ',' << r.timings.test << std::defaultfloat << std::setprecision(6) << ','
       << r.config.seed << '\n';
}

// ---------------------------------------------------------------------------
// Parameter sweeps

inline const std::vector<std::string>& sweep_axes() {
    static const std::vector<std::string> axes = {"J", "Q", "S", "beta", "seed"};
    return axes;
}

inline RunConfig with_axis_value(RunConfig c, const std::string& axis, double value) {
    if (axis == "J")
        c.neurons = static_cast<int>(std::lround(value));
    else if (axis == "Q")
        c.tests = static_cast<int>(std::lround(value));
    else if (axis == "S")
        c.counts = {static_cast<int>(std::lround(value))};
    else if (axis == "beta")
        c.beta = value;
    else if (axis == "seed")
        c.seed = static_cast<std::uint64_t>(std::llround(value));
    else
        throw InvalidArgument("unknown sweep axis '" + axis + "' (expected J, Q, S, beta or seed)");
    return c;
}

struct SweepRow {
    double value = 0.0;
    std::vector<SolveReport> runs;  ///< one per replicate seed
};

inline double median(std::vector<double> v) {
    if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

/// One run per value (times `replicates` consecutive seeds starting at base.seed).
inline std::vector<SweepRow> sweep(const RunConfig& base, const std::string& axis, const std::vector<double>& values,
                                   int replicates = 1,
                                   const std::function<void(const SolveReport&)>& on_run = {}) {
    if (std::find(sweep_axes().begin(), sweep_axes().end(), axis) == sweep_axes().end())
        throw InvalidArgument("unknown sweep axis '" + axis + "' (expected J, Q, S, beta or seed)");
    if (replicates < 1) throw InvalidArgument("replicates must be positive");
    if (values.empty()) throw InvalidArgument("sweep needs at least one value");
    std::vector<SweepRow> rows;
    for (double v : values) {
        SweepRow row{v, {}};
        const auto cfg = with_axis_value(base, axis, v);
        cfg.validate();
        for (int r = 0; r < replicates; ++r) {
            auto c = cfg;
            c.seed = cfg.seed + static_cast<std::uint64_t>(r);
            row.runs.push_back(run(c));
            if (on_run) on_run(row.runs.back());
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

inline void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    const bool replicated = !rows.empty() && rows.front().runs.size() > 1;
    if (!replicated) {
        os << csv_header() << '\n';
        for (const auto& r : rows) write_csv_row(os, r.runs.front());
        return;
    }
    os << "problem,eps,eps1,eps2,S,J,Q,beta,nq,nbper,ncper,N,M,max_error_median,max_error_min,max_error_max,"
          "rms_error_median,rms_error_min,rms_error_max,t_pre,t_opt,t_test,seed,replicates\n";
    for (const auto& r : rows) {
        std::vector<double> mx, rm, tp, to, tt;
        for (const auto& run : r.runs) {
            mx.push_back(run.max_error);
            rm.push_back(run.rms_error);
            tp.push_back(run.timings.preprocess);
            to.push_back(run.timings.optimize);
            tt.push_back(run.timings.test);
        }
        const auto& first = r.runs.front();
        detail::write_config_columns(os, first.config);
        os << ',' << first.rows << ',' << first.cols << std::scientific << std::setprecision(6) << ',' << median(mx)
           << ',' << *std::min_element(mx.begin(), mx.end()) << ',' << *std::max_element(mx.begin(), mx.end()) << ','
           << median(rm) << ',' << *std::min_element(rm.begin(), rm.end()) << ','
           << *std::max_element(rm.begin(), rm.end()) << std::defaultfloat << std::fixed << std::setprecision(3)
           << ',' << median(tp) << ',' << median(to) << ',' << median(tt) << std::defaultfloat
           << std::setprecision(6) << ',' << first.config.seed << ',' << r.runs.size() << '\n';
    }
}

// ---------------------------------------------------------------------------
// Published configuration batches

inline const std::vector<std::string>& table_ids() {
    static const std::vector<std::string> ids = {"table1",      "table2-rrnn",  "table4-rrnn", "table5-rrnn",
                                                 "table9-rrnn", "table10-rrnn", "table11-rrnn"};
    return ids;
}

inline std::vector<RunConfig> table_configs(const std::string& id, std::uint64_t seed = 0) {
    std::vector<RunConfig> out;
    auto add = [&](RunConfig c) {
        c.seed = seed;
        c.validate();
        out.push_back(std::move(c));
    };
    if (id == "table1") {
        for (auto [eps, s] : {std::pair{0.5, 5}, {0.1, 10}, {0.05, 20}, {0.01, 50}, {0.005, 100}}) {
            auto c = defaults_for({"periodic_1d", eps});
            c.counts = {s};
            c.neurons = 100;
            c.tests = 20;
            c.beta = 2.0;
            add(c);
        }
    } else if (id == "table2-rrnn") {
        for (double eps : {0.5, 0.1, 0.05, 0.01, 0.005}) add(defaults_for({"two_scale_1d", eps}));
    } else if (id == "table4-rrnn") {
        for (double eps : {0.05, 0.01, 0.005, 0.002}) add(defaults_for({"two_scale_1d", eps}));
    } else if (id == "table5-rrnn") {
        add(defaults_for({"three_scale_1d", 0.5, 0.1, 0.01}));
        add(defaults_for({"three_scale_1d", 0.5, 0.05, 0.005}));
    } else if (id == "table9-rrnn") {
        for (double eps : {0.5, 0.2, 0.1}) add(defaults_for({"radial_2d", eps}));
    } else if (id == "table10-rrnn") {
        for (double eps : {0.5, 0.2, 0.1}) add(defaults_for({"two_scale_2d", eps}));
    } else if (id == "table11-rrnn") {
        add(defaults_for({"poisson_boltzmann_2d"}));
    } else {
        throw InvalidArgument("unknown table id '" + id + "'");
    }
    return out;
}

} // namespace rrnn
