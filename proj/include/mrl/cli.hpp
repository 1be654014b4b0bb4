#pragma once

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mrl/config.hpp"
#include "mrl/csv.hpp"
#include "mrl/diagnostics.hpp"
#include "mrl/donsker.hpp"
#include "mrl/exact.hpp"
#include "mrl/hurst.hpp"
#include "mrl/noise.hpp"
#include "mrl/report.hpp"

namespace mrl {

inline constexpr std::size_t kDefaultDimCap = 3;

namespace cli_detail {

struct CommonOpts {
    std::string config_path;
    std::string output_dir;
    long long threads = -1;
    std::uint64_t seed = 0;
    bool seed_set = false;
    bool allow_large = false;
};

inline void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config_path, "config file (flat dotted keys)")->required();
    sub->add_option("--output-dir", o.output_dir, "output directory, overrides the config");
    sub->add_option("--threads", o.threads, "worker thread cap (env MFRL_THREADS as fallback)");
    sub->add_option("--seed", o.seed, "master seed, overrides the config")
        ->each([&o](const std::string&) { o.seed_set = true; });
    sub->add_flag("--allow-large", o.allow_large,
                  "permit dimension above " + std::to_string(kDefaultDimCap) +
                      " after printing a cost estimate");
}

inline std::size_t resolve_thread_count(const CommonOpts& o, const Config& cfg) {
    if (o.threads >= 0) return static_cast<std::size_t>(o.threads);
    if (const char* env = std::getenv("MFRL_THREADS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end == env || *end != '\0')
            throw ConfigError("MFRL_THREADS", "expected a nonnegative integer");
        return static_cast<std::size_t>(v);
    }
    return static_cast<std::size_t>(cfg.get_uint_or("threads", 1));
}

inline std::string resolve_output_dir(const CommonOpts& o, const Config& cfg) {
    std::string dir = !o.output_dir.empty() ? o.output_dir
                                            : cfg.get_string_or("output_dir", ".");
    std::filesystem::create_directories(dir);
    return dir;
}

inline std::uint64_t resolve_seed(const CommonOpts& o, const Config& cfg) {
    if (o.seed_set) return o.seed;
    return cfg.get_uint_or("seed", 1);
}

inline void enforce_dim_cap(const HurstField& field, const EvalGrid& grid, std::size_t n,
                            bool allow_large, std::ostream& out) {
    const std::size_t d = field.dim();
    if (d <= kDefaultDimCap) return;
    if (!allow_large)
        throw ConfigError("hurst",
                          "dimension " + std::to_string(d) + " exceeds the default cap " +
                              std::to_string(kDefaultDimCap) + "; rerun with --allow-large");
    double noise_cost = 1.0, grid_cost = static_cast<double>(grid.size());
    for (std::size_t i = 0; i < d; ++i) noise_cost *= static_cast<double>(n);
    out << "cost estimate: ~" << noise_cost << " noise values per replicate, ~"
        << grid_cost * grid_cost << " covariance entries\n";
}

inline void check_format(const Config& cfg) {
    const std::string fmt = cfg.get_string_or("format", "csv");
    if (fmt != "csv") throw ConfigError("format", "only 'csv' is supported");
}

inline void print_report(const DiagnosticsReport& rep, std::ostream& out) {
    for (const auto& c : rep.checks) {
        out << (c.pass ? "PASS " : "FAIL ") << c.name << " observed="
            << format_g17(c.observed) << " threshold=" << format_g17(c.threshold);
        if (c.standard_error) out << " se=" << format_g17(*c.standard_error);
        out << "\n";
    }
}

inline void write_report_files(const DiagnosticsReport& rep, const std::string& dir,
                               const std::string& stem, std::ostream& out) {
    const std::string txt = dir + "/" + stem + ".txt";
    const std::string csv = dir + "/" + stem + ".csv";
    write_text_file(txt, rep.to_text());
    write_text_file(csv, rep.to_csv());
    out << "wrote " << txt << "\n";
    out << "wrote " << csv << "\n";
}

// The `check` subcommand's suite: Hurst validation, second- and fourth-order
// moment bounds, deterministic increment ratios, marginal normality, and the
// local regularity slope, all under one config digest.
inline DiagnosticsReport run_check_suite(const Config& cfg, const HurstField& field,
                                         std::size_t n, std::size_t reps,
                                         std::uint64_t seed, NoiseDist dist,
                                         std::size_t threads) {
    const std::size_t d = field.dim();
    if (reps < 1000) throw ConfigError("reps", "check needs at least 1000 replicates");
    const std::size_t vres = static_cast<std::size_t>(cfg.get_uint_or("check.resolution", 16));
    const double slack = cfg.get_real_or("check.slack", 0.1);

    DiagnosticsReport rep;
    rep.config_digest = cfg.digest();
    auto take = [&rep](const DiagnosticsReport& sub) {
        for (const auto& c : sub.checks) rep.append(c);
    };

    take(field.validate(vres, slack));

    const std::vector<TestFunction> ones(d, TestFunction::constant(1.0));
    take(check_moment_bound(ones, n, 2, std::min<std::size_t>(reps, 20000),
                            derive_seed(seed, SeedTag::trial, 0), dist, threads));
    take(check_moment_bound(ones, n, 4, reps, derive_seed(seed, SeedTag::trial, 1), dist,
                            threads));

    std::vector<std::pair<std::vector<double>, std::vector<double>>> pairs;
    const std::vector<double> t0(d, 0.9);
    for (std::size_t ax = 0; ax < d; ++ax)
        for (double h : {0.25, 0.125, 0.0625, 0.03125}) {
            auto s = t0;
            s[ax] -= h;
            pairs.emplace_back(t0, s);
        }
    take(increment_moment(field, n, pairs, 2, 0, derive_seed(seed, SeedTag::trial, 2), dist,
                          threads));

    take(ks_normality(field, n, t0, reps, derive_seed(seed, SeedTag::trial, 3), dist,
                      threads));

    if (cfg.get_bool_or("check.negative_control", false)) {
        DiagnosticsReport nc =
            ks_normality(HurstField::constant({0.5}), 1, {1.0}, reps,
                         derive_seed(seed, SeedTag::trial, 4), NoiseDist::Rademacher, threads);
        for (auto& c : nc.checks) {
            c.name = "ks.negative_control";
            rep.append(c);
        }
    }

    const std::vector<double> scales{0.05, 0.025, 0.01, 0.005, 0.0025, 0.001, 0.0005};
    take(holder_slope(field, CovSource::exact(), t0, scales, 0).report);

    return rep;
}

}  // namespace cli_detail

/// Entry point behind main(); takes argv[1..] and returns the process exit
/// code: 0 success, 1 failed checks or runtime failure, 2 config errors.
inline int run_cli(const std::vector<std::string>& args, std::ostream& out = std::cout,
                   std::ostream& err = std::cerr) {
    using cli_detail::CommonOpts;

    CLI::App app{"multifractional Riemann-Liouville sheet sampler and diagnostics"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string layout = "per-rep";
    std::uint64_t donsker_n = 0;
    double gap_tol = -1.0;

    CLI::App* sd = app.add_subcommand("sample-donsker", "sample the Donsker approximant");
    CLI::App* se = app.add_subcommand("sample-exact", "sample the limit field via Cholesky");
    CLI::App* sp = app.add_subcommand("sample-product", "sample the product-of-1D oracle");
    CLI::App* cov = app.add_subcommand("cov", "write analytic covariance matrices");
    CLI::App* chk = app.add_subcommand("check", "run the diagnostics suite");
    CLI::App* cvg = app.add_subcommand("converge", "finite-dimensional convergence sweep");
    for (CLI::App* sub : {sd, se, sp, cov, chk, cvg}) cli_detail::add_common(sub, opts);
    for (CLI::App* sub : {sd, se, sp})
        sub->add_option("--layout", layout, "per-rep (one file per replicate) or long")
            ->check(CLI::IsMember({"per-rep", "long"}));
    cov->add_option("--donsker-n", donsker_n,
                    "also write the Donsker covariance at this resolution and the gap");
    cov->add_option("--gap-tol", gap_tol, "fail (exit 1) if the max entrywise gap exceeds this");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("mrl");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        const Config cfg = Config::parse_file(opts.config_path);
        cli_detail::check_format(cfg);
        const HurstField field = hurst_field_from_config(cfg);
        const std::size_t d = field.dim();
        const std::size_t n = static_cast<std::size_t>(cfg.get_uint_or("n", 16));
        const std::size_t reps = static_cast<std::size_t>(cfg.get_uint_or("reps", 1));
        const std::uint64_t seed = cli_detail::resolve_seed(opts, cfg);
        const std::size_t threads = cli_detail::resolve_thread_count(opts, cfg);
        const NoiseDist dist = noise_dist_from_config(cfg);
        const std::string dir = cli_detail::resolve_output_dir(opts, cfg);

        auto write_samples = [&](const std::vector<SheetSample>& samples,
                                 const std::string& stem) {
            if (layout == "long") {
                const std::string path = dir + "/" + stem + ".csv";
                write_text_file(path, sheets_to_long_csv(samples));
                out << "wrote " << path << "\n";
            } else {
                for (std::size_t r = 0; r < samples.size(); ++r) {
                    const std::string path =
                        dir + "/" + stem + "_rep" + std::to_string(r) + ".csv";
                    write_text_file(path, sheet_to_csv(samples[r]));
                    out << "wrote " << path << "\n";
                }
            }
        };

        if (app.got_subcommand(sd)) {
            const EvalGrid grid = eval_grid_from_config(cfg, d);
            cli_detail::enforce_dim_cap(field, grid, n, opts.allow_large, out);
            std::vector<SheetSample> samples(static_cast<std::size_t>(reps));
            for (std::size_t r = 0; r < reps; ++r) {
                const NoiseField noise =
                    generate_noise(n, d, dist, derive_seed(seed, SeedTag::noise, r));
                samples[r] = sample_donsker_sheet(field, noise, grid, threads);
            }
            write_samples(samples, "sample_donsker");
            return 0;
        }

        if (app.got_subcommand(se)) {
            const EvalGrid grid = eval_grid_from_config(cfg, d);
            cli_detail::enforce_dim_cap(field, grid, n, opts.allow_large, out);
            const CovarianceMatrix cm = covariance_matrix(field, grid);
            out << "jitter_used=" << format_g17(cm.jitter_used) << "\n";
            write_samples(sample_exact(cm, seed, reps, threads), "sample_exact");
            return 0;
        }

        if (app.got_subcommand(sp)) {
            const EvalGrid grid = eval_grid_from_config(cfg, d);
            cli_detail::enforce_dim_cap(field, grid, n, opts.allow_large, out);
            const ProductOracleSampler sampler(field, grid);
            std::vector<SheetSample> samples;
            samples.reserve(reps);
            for (std::size_t r = 0; r < reps; ++r)
                samples.push_back(sampler.sample(derive_seed(seed, SeedTag::product_axis, r)));
            write_samples(samples, "sample_product");
            return 0;
        }

        if (app.got_subcommand(cov)) {
            const EvalGrid grid = eval_grid_from_config(cfg, d);
            cli_detail::enforce_dim_cap(field, grid, n, opts.allow_large, out);
            const CovarianceMatrix cm = covariance_matrix(field, grid, kCovGridCap, false);
            const std::string exact_path = dir + "/cov_exact.csv";
            write_text_file(exact_path, covariance_to_csv(cm));
            out << "wrote " << exact_path << "\n";
            if (donsker_n > 0) {
                const std::size_t P = grid.size();
                Eigen::MatrixXd dn(static_cast<Eigen::Index>(P), static_cast<Eigen::Index>(P));
                for (std::size_t p = 0; p < P; ++p) {
                    const auto tp = grid.point(p);
                    for (std::size_t q = p; q < P; ++q) {
                        const double v = donsker_covariance(
                            field, static_cast<std::size_t>(donsker_n), tp, grid.point(q));
                        dn(static_cast<Eigen::Index>(p), static_cast<Eigen::Index>(q)) = v;
                        dn(static_cast<Eigen::Index>(q), static_cast<Eigen::Index>(p)) = v;
                    }
                }
                const Eigen::MatrixXd gap = (dn - cm.cov).cwiseAbs();
                const double max_gap = gap.maxCoeff();
                const std::string dn_path = dir + "/cov_donsker.csv";
                const std::string gap_path = dir + "/cov_gap.csv";
                write_text_file(dn_path, matrix_to_csv(dn));
                write_text_file(gap_path, matrix_to_csv(gap));
                out << "wrote " << dn_path << "\n";
                out << "wrote " << gap_path << "\n";
                out << "max_gap=" << format_g17(max_gap) << "\n";
                if (gap_tol >= 0.0 && max_gap > gap_tol) {
                    err << "FAIL max covariance gap " << format_g17(max_gap)
                        << " exceeds tolerance " << format_g17(gap_tol) << "\n";
                    return 1;
                }
            }
            return 0;
        }

        if (app.got_subcommand(chk)) {
            const DiagnosticsReport rep =
                cli_detail::run_check_suite(cfg, field, n, reps, seed, dist, threads);
            cli_detail::print_report(rep, out);
            cli_detail::write_report_files(rep, dir, "report", out);
            return rep.all_pass() ? 0 : 1;
        }

        if (app.got_subcommand(cvg)) {
            const std::vector<std::size_t> n_list = cfg.get_uint_list("n_list");
            const FddSpec spec = fdd_spec_from_config(cfg, d);
            const double rel_tol = cfg.get_real_or("converge.rel_tol", 0.02);
            const std::size_t ks_reps = static_cast<std::size_t>(cfg.get_uint_or("reps", 0));
            const DiagnosticsReport rep = fdd_convergence(field, spec, n_list, ks_reps, seed,
                                                          rel_tol, dist, threads);
            cli_detail::print_report(rep, out);
            cli_detail::write_report_files(rep, dir, "converge_report", out);
            std::ostringstream table;
            table << "n,gap\n";
            for (const auto& c : rep.checks)
                if (c.name.rfind("fdd.gap.n", 0) == 0)
                    table << c.name.substr(9) << ',' << format_g17(c.observed) << "\n";
            const std::string table_path = dir + "/converge.csv";
            write_text_file(table_path, table.str());
            out << "wrote " << table_path << "\n";
            return rep.all_pass() ? 0 : 1;
        }

        err << "error: no subcommand selected\n";
        return 2;
    } catch (const ConfigError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const BudgetError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const ArgumentError& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace mrl
