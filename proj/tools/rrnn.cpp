// Command-line experiment runner.
//
//   rrnn solve  [--config FILE] [--KEY VALUE ...] [--out FILE] [--samples FILE] [--dump-system FILE]
//   rrnn sweep  --axis J|Q|S|beta|seed --values V1,V2,... [--replicates N] [settings...]
//   rrnn table  ID [--seed N] [--out FILE] [--cache_dir DIR] [--dims-only]
//   rrnn oracle --problem NAME [--eps ...] [--fdm_h STEP] --cache_dir DIR
//
// Exit status: 0 on success, 1 for usage errors, 2 for numerical failures.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "rrnn/experiment.hpp"

namespace {

using namespace rrnn;

struct Settings {
    std::string config_file;
    std::map<std::string, std::string> flags;
    bool dims_only = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "key = value settings file")->check(CLI::ExistingFile);
        for (const auto& key : config_keys()) {
            std::string names = "--" + key;
            if (key.find('_') != std::string::npos) {
                std::string dashed = key;
                std::replace(dashed.begin(), dashed.end(), '_', '-');
                names += ",--" + dashed;
            }
            cmd->add_option_function<std::string>(names, [this, key](const std::string& v) { flags[key] = v; },
                                                  "override '" + key + "'");
        }
        cmd->add_flag("--dims-only", dims_only, "assemble and report N, M without solving");
    }

    RunConfig build() const {
        std::map<std::string, std::string> all;
        if (!config_file.empty()) {
            std::ifstream is(config_file);
            all = read_settings(is);
        }
        for (const auto& [k, v] : flags) all[k] = v;
        auto cfg = make_config(all);
        cfg.dims_only = dims_only;
        return cfg;
    }
};

/// stdout unless a path is given.
class Output {
public:
    explicit Output(const std::string& path) {
        if (path.empty()) return;
        file_ = std::make_unique<std::ofstream>(path);
        if (!*file_) throw InvalidArgument("cannot open '" + path + "' for writing");
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

private:
    std::unique_ptr<std::ofstream> file_;
};

void summarize(const SolveReport& r) {
    std::cerr << r.config.problem.name << " S=" << counts_string(r.config.counts, r.config.dim()) << " J=" << r.config.neurons
              << " Q=" << r.config.tests << " beta=" << r.config.beta << " seed=" << r.config.seed << ": N=" << r.rows
              << " M=" << r.cols;
    if (!r.config.dims_only)
        std::cerr << " rank=" << r.rank << " max=" << r.max_error << " rms=" << r.rms_error
                  << " residual=" << r.residual_norm << " jump=" << r.interface_jump << " ref=" << r.reference;
    std::cerr << '\n';
}

template <int Dim>
void dump_system(const RunConfig& cfg, const std::string& path) {
    const auto problem = make_problem<Dim>(cfg.problem);
    const auto part = decompose<Dim>(problem.domain, cfg.axis_counts<Dim>());
    const auto nets = random_init<Dim>(RbfConfig{cfg.neurons, cfg.beta, cfg.seed, cfg.share_basis}, part.size());
    const auto colloc = sample_collocation<Dim>(part, cfg.nbper, cfg.ncper, detail::collocation_seed(cfg.seed));
    const auto sys = assemble_system<Dim>(part, nets, problem, colloc,
                                          AssemblyOptions{cfg.tests, cfg.quad_order, cfg.continuity, cfg.weights});
    if (path.size() >= 4 && path.substr(path.size() - 4) == ".csv")
        dump_system_csv(path, sys.matrix, sys.rhs);
    else
        dump_system_binary(path, sys.matrix, sys.rhs);
}

template <int Dim>
SolveReport solve_and_dump(const RunConfig& cfg, const std::string& samples) {
    const auto result = solve<Dim>(cfg);
    if (!samples.empty() && !cfg.dims_only) {
        std::ofstream os(samples);
        if (!os) throw InvalidArgument("cannot open '" + samples + "' for writing");
        write_samples<Dim>(os, result);
    }
    return result.report;
}

std::vector<double> parse_values(const std::string& list) {
    std::vector<double> out;
    std::stringstream ss(list);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            out.push_back(std::stod(item));
        } catch (const std::exception&) {
            throw InvalidArgument("sweep value '" + item + "' is not a number");
        }
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Randomized RBF network solver for multiscale elliptic problems"};
    app.require_subcommand(1);

    Settings solve_settings, sweep_settings;
    std::string out_path, samples_path, system_path, axis, values, table_id, oracle_problem, cache_dir;
    int replicates = 1;
    std::uint64_t table_seed = 0;
    bool table_dims_only = false;
    double oracle_h = 0.0, oracle_eps = 0.5, oracle_eps1 = 0.1, oracle_eps2 = 0.01;

    auto* solve_cmd = app.add_subcommand("solve", "single run from a settings file and/or flags");
    solve_settings.attach(solve_cmd);
    solve_cmd->add_option("--out", out_path, "CSV report path (default stdout)");
    solve_cmd->add_option("--samples", samples_path, "write x, u_approx, u_ref, |diff| on the test grid");
    solve_cmd->add_option("--dump-system", system_path, "write the assembled (A, b); .csv for text, binary otherwise");

    auto* sweep_cmd = app.add_subcommand("sweep", "vary one parameter and report each run");
    sweep_settings.attach(sweep_cmd);
    sweep_cmd->add_option("--axis", axis, "J, Q, S, beta or seed")->required();
    sweep_cmd->add_option("--values", values, "comma-separated values")->required();
    sweep_cmd->add_option("--replicates", replicates, "consecutive seeds per value")->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--out", out_path, "CSV report path (default stdout)");

    auto* table_cmd = app.add_subcommand("table", "run a published configuration batch");
    table_cmd->add_option("id", table_id, "table1, table2-rrnn, table4-rrnn, table5-rrnn, table9-rrnn, table10-rrnn, table11-rrnn")
        ->required();
    table_cmd->add_option("--seed", table_seed, "network seed");
    table_cmd->add_option("--out", out_path, "CSV report path (default stdout)");
    table_cmd->add_option("--cache_dir,--cache-dir", cache_dir, "finite-difference reference cache");
    table_cmd->add_flag("--dims-only", table_dims_only, "assemble and report N, M without solving");

    auto* oracle_cmd = app.add_subcommand("oracle", "build and cache a finite-difference reference");
    oracle_cmd->add_option("--problem", oracle_problem, "problem name")->required();
    oracle_cmd->add_option("--eps", oracle_eps, "scale ratio");
    oracle_cmd->add_option("--eps1", oracle_eps1, "first scale ratio");
    oracle_cmd->add_option("--eps2", oracle_eps2, "second scale ratio");
    oracle_cmd->add_option("--fdm_h,--fdm-h", oracle_h, "grid step (default 1e-4 in 1D, 1/1024 in 2D)");
    oracle_cmd->add_option("--cache_dir,--cache-dir", cache_dir, "cache directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (*solve_cmd) {
            const auto cfg = solve_settings.build();
            if (!system_path.empty()) cfg.dim() == 1 ? dump_system<1>(cfg, system_path) : dump_system<2>(cfg, system_path);
            Output out(out_path);
            const auto report = cfg.dim() == 1 ? solve_and_dump<1>(cfg, samples_path) : solve_and_dump<2>(cfg, samples_path);
            summarize(report);
            out.stream() << csv_header() << '\n';
            write_csv_row(out.stream(), report);
        } else if (*sweep_cmd) {
            const auto base = sweep_settings.build();
            Output out(out_path);
            const auto rows = sweep(base, axis, parse_values(values), replicates, summarize);
            write_sweep_csv(out.stream(), rows);
        } else if (*table_cmd) {
            auto configs = table_configs(table_id, table_seed);
            Output out(out_path);
            out.stream() << csv_header() << '\n';
            for (auto& cfg : configs) {
                cfg.cache_dir = cache_dir;
                cfg.dims_only = table_dims_only;
                const auto report = run(cfg);
                summarize(report);
                write_csv_row(out.stream(), report);
                out.stream().flush();
            }
        } else if (*oracle_cmd) {
            const ProblemRequest req{oracle_problem, oracle_eps, oracle_eps1, oracle_eps2};
            RunConfig probe = defaults_for(req);
            probe.fdm_h = oracle_h;
            const double h = probe.effective_fdm_h();
            double residual = 0.0;
            if (probe.dim() == 1)
                residual = fdm_reference<1>(make_problem<1>(req), h, cache_dir).relative_residual;
            else
                residual = fdm_reference<2>(make_problem<2>(req), h, cache_dir).relative_residual;
            std::cout << oracle_problem << " h=" << h << " cached in " << cache_dir;
            if (residual > 0.0) std::cout << " relative_residual=" << residual;
            std::cout << '\n';
        }
    } catch (const InvalidArgument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
