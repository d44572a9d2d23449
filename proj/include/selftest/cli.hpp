#pragma once

// Command-line front end: certification, trade-off curves, the counterexample
// family, the block reduction of observable pairs, and the constant search,
// with CSV/JSON output suitable for regenerating the figures.

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "selftest/bell.hpp"
#include "selftest/certifier.hpp"
#include "selftest/errors.hpp"
#include "selftest/matops.hpp"
#include "selftest/optimizer.hpp"
#include "selftest/tradeoff.hpp"
#include "selftest/version.hpp"

namespace selftest::cli {

using nlohmann::json;

enum class OutputFormat { Csv, Json };

inline const char* format_name(OutputFormat f) { return f == OutputFormat::Csv ? "csv" : "json"; }

struct RunConfig {
    std::string command;
    Scenario scenario = Scenario::Chsh;
    std::optional<BoundConstants> constants;
    int grid_n = 201;
    double tolerance = 1e-9;
    bool rigorous = false;
    std::uint64_t seed = 42;
    std::string output_path;
    OutputFormat format = OutputFormat::Json;

    friend bool operator==(const RunConfig& a, const RunConfig& b) {
        return a.command == b.command && a.scenario == b.scenario &&
               a.constants.has_value() == b.constants.has_value() &&
               (!a.constants || (*a.constants == *b.constants)) && a.grid_n == b.grid_n &&
               a.tolerance == b.tolerance && a.rigorous == b.rigorous && a.seed == b.seed &&
               a.output_path == b.output_path && a.format == b.format;
    }
};

inline Scenario parse_scenario(const std::string& name) {
    if (name == "chsh") return Scenario::Chsh;
    if (name == "mermin") return Scenario::Mermin;
    throw InvalidRange("unknown scenario '" + name + "'");
}

// Certification report as JSON; the config fields ride along so a report can
// be parsed back into the (RunConfig, CertificateReport) pair that made it.
inline json report_to_json(const RunConfig& config, const CertificateReport& report,
                           double runtime_seconds) {
    json j;
    j["command"] = config.command;
    j["scenario"] = scenario_name(report.scenario);
    j["s"] = report.constants.s;
    j["mu"] = report.constants.mu;
    j["grid_points_per_angle"] = report.grid_points_per_angle;
    j["tolerance"] = report.tolerance;
    j["min_eigenvalue"] = report.min_eigenvalue;
    j["argmin_angles"] = report.argmin_angles;
    if (report.continuum_margin) {
        j["continuum_margin"] = *report.continuum_margin;
    } else {
        j["continuum_margin"] = nullptr;
    }
    j["certified"] = report.certified;
    j["rigorous"] = config.rigorous;
    j["seed"] = config.seed;
    j["output_path"] = config.output_path;
    j["format"] = format_name(config.format);
    j["runtime_seconds"] = runtime_seconds;
    j["artifact_version"] = kVersion;
    return j;
}

inline std::pair<RunConfig, CertificateReport> parse_report(const json& j) {
    RunConfig config;
    config.command = j.at("command").get<std::string>();
    config.scenario = parse_scenario(j.at("scenario").get<std::string>());
    config.constants = BoundConstants{j.at("s").get<double>(), j.at("mu").get<double>()};
    config.grid_n = j.at("grid_points_per_angle").get<int>();
    config.tolerance = j.at("tolerance").get<double>();
    config.rigorous = j.at("rigorous").get<bool>();
    config.seed = j.at("seed").get<std::uint64_t>();
    config.output_path = j.at("output_path").get<std::string>();
    config.format =
        j.at("format").get<std::string>() == "csv" ? OutputFormat::Csv : OutputFormat::Json;

    CertificateReport report;
    report.scenario = config.scenario;
    report.constants = *config.constants;
    report.grid_points_per_angle = config.grid_n;
    report.tolerance = config.tolerance;
    report.min_eigenvalue = j.at("min_eigenvalue").get<double>();
    report.argmin_angles = j.at("argmin_angles").get<std::vector<double>>();
    if (!j.at("continuum_margin").is_null()) {
        report.continuum_margin = j.at("continuum_margin").get<double>();
    }
    report.certified = j.at("certified").get<bool>();
    return {config, report};
}

namespace detail {

inline std::string format_double(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

struct CurveRow {
    double beta, trivial, lower, upper;
    std::optional<double> exact;
};

inline std::vector<CurveRow> figure_rows(Scenario sc, int points) {
    if (points < 2) throw InvalidRange("need at least 2 points");
    const BoundConstants k = default_constants(sc);
    const double lo = beta_classical(sc), hi = beta_quantum(sc);
    std::vector<CurveRow> rows;
    rows.reserve(points);
    for (int i = 0; i < points; ++i) {
        const double beta =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(points - 1);
        CurveRow row{};
        row.beta = beta;
        row.trivial = kLambdaMax;
        row.lower = linear_lower_bound(sc, beta, k);
        if (sc == Scenario::Chsh) {
            row.upper = upper_bound_curve(beta, lo, hi, kLambdaMax);
        } else {
            const auto exact = mermin_exact_curve(beta);
            row.upper = exact.second;
            row.exact = exact.first;
        }
        rows.push_back(row);
    }
    return rows;
}

inline void write_curve_csv(Scenario sc, int points, std::ostream& out) {
    const auto rows = figure_rows(sc, points);
    out << "beta,trivial_bound,this_work_lower,upper_bound";
    if (sc == Scenario::Mermin) out << ",exact";
    out << "\n";
    for (const auto& row : rows) {
        out << format_double(row.beta) << ',' << format_double(row.trivial) << ','
            << format_double(row.lower) << ',' << format_double(row.upper);
        if (row.exact) out << ',' << format_double(*row.exact);
        out << "\n";
    }
}

inline json curve_json(Scenario sc, int points) {
    const auto rows = figure_rows(sc, points);
    json j;
    j["scenario"] = scenario_name(sc);
    j["beta_classical"] = beta_classical(sc);
    j["beta_quantum"] = beta_quantum(sc);
    j["lambda_max"] = kLambdaMax;
    j["artifact_version"] = kVersion;
    json pts = json::array();
    for (const auto& row : rows) {
        json p;
        p["beta"] = row.beta;
        p["trivial_bound"] = row.trivial;
        p["this_work_lower"] = row.lower;
        p["upper_bound"] = row.upper;
        if (row.exact) p["exact"] = *row.exact;
        pts.push_back(p);
    }
    j["points"] = pts;
    return j;
}

inline ComplexMatrix matrix_from_json(const json& j) {
    const auto real = j.at("real").get<std::vector<std::vector<double>>>();
    std::vector<std::vector<double>> imag;
    if (j.contains("imag")) {
        imag = j.at("imag").get<std::vector<std::vector<double>>>();
    }
    const std::size_t n = real.size();
    ComplexMatrix m(n, n);
    for (std::size_t r = 0; r < n; ++r) {
        if (real[r].size() != n || (!imag.empty() && imag[r].size() != n)) {
            throw DimensionMismatch("observable matrix is not square");
        }
        for (std::size_t c = 0; c < n; ++c) {
            m(r, c) = cplx(real[r][c], imag.empty() ? 0.0 : imag[r][c]);
        }
    }
    return m;
}

inline json matrix_to_json(const ComplexMatrix& m) {
    json real = json::array(), imag = json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        json re_row = json::array(), im_row = json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) {
            re_row.push_back(std::real(m(r, c)));
            im_row.push_back(std::imag(m(r, c)));
        }
        real.push_back(re_row);
        imag.push_back(im_row);
    }
    return json{{"real", real}, {"imag", imag}};
}

inline Objective parse_objective(const std::string& text) {
    if (text == "threshold") return Objective::min_threshold();
    const std::string prefix = "bound-at:";
    if (text.rfind(prefix, 0) == 0) {
        return Objective::max_bound_at(std::stod(text.substr(prefix.size())));
    }
    throw InvalidRange("objective must be 'threshold' or 'bound-at:BETA'");
}

inline std::size_t resolve_threads(std::optional<std::size_t> flag) {
    if (flag) return *flag;
    if (const char* env = std::getenv("SELFTEST_THREADS")) {
        try {
            return static_cast<std::size_t>(std::stoul(env));
        } catch (const std::exception&) {
            throw InvalidRange("SELFTEST_THREADS is not a number");
        }
    }
    return 0;  // auto
}

}  // namespace detail

// CSV figure data for the chsh / mermin comparison plots.
inline void emit_figure_data(Scenario sc, int points, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw IOError("cannot open '" + path + "' for writing");
    detail::write_curve_csv(sc, points, out);
    out.flush();
    if (!out) throw IOError("failed while writing '" + path + "'");
}

// Entry point shared by the binary and the tests.  Returns 0 on success, 1 on
// certification failure or I/O or data errors, 2 on usage errors.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Numerical certificates for CHSH/Mermin self-testing bounds"};
    app.require_subcommand(1);

    std::optional<std::size_t> threads_flag;
    app.add_option("--threads", threads_flag, "worker threads (0 = auto)");

    // certify
    auto* certify_cmd = app.add_subcommand("certify", "grid-certify K >= s W + mu 1");
    std::string certify_scenario;
    certify_cmd->add_option("scenario", certify_scenario, "chsh or mermin")
        ->required()
        ->check(CLI::IsMember({"chsh", "mermin"}));
    std::optional<double> opt_s, opt_mu;
    certify_cmd->add_option("--s", opt_s, "slope of the linear bound");
    certify_cmd->add_option("--mu", opt_mu, "offset of the linear bound");
    std::optional<int> certify_grid;
    certify_cmd->add_option("--grid", certify_grid, "grid points per angle");
    double certify_tol = 1e-9;
    certify_cmd->add_option("--tol", certify_tol, "certification tolerance");
    bool rigorous = false;
    certify_cmd->add_flag("--rigorous", rigorous, "report the Lipschitz continuum margin");

    // curve
    auto* curve_cmd = app.add_subcommand("curve", "emit trade-off curve data");
    std::string curve_scenario;
    curve_cmd->add_option("scenario", curve_scenario, "chsh or mermin")
        ->required()
        ->check(CLI::IsMember({"chsh", "mermin"}));
    int curve_points = 201;
    curve_cmd->add_option("--points", curve_points, "number of beta samples");
    std::string curve_out;
    curve_cmd->add_option("--out", curve_out, "output path (default: stdout)");
    std::string curve_format = "json";
    curve_cmd->add_option("--format", curve_format, "csv or json")
        ->check(CLI::IsMember({"csv", "json"}));

    // counterexample
    auto* ce_cmd = app.add_subcommand("counterexample", "flagged family beating the upper bound");
    double nu = 0.5;
    ce_cmd->add_option("--nu", nu, "weight of the entangled branch, in (0, 1)");
    std::uint64_t seed = 42;
    ce_cmd->add_option("--seed", seed, "seed for the stabilizer-unitary search");

    // jordan
    auto* jordan_cmd = app.add_subcommand("jordan", "block-reduce a pair of binary observables");
    std::string jordan_in;
    jordan_cmd->add_option("--in", jordan_in, "JSON file with observables a0, a1")->required();

    // optimize
    auto* opt_cmd = app.add_subcommand("optimize", "search (s, mu) for an objective");
    std::string opt_scenario;
    opt_cmd->add_option("scenario", opt_scenario, "chsh or mermin")
        ->required()
        ->check(CLI::IsMember({"chsh", "mermin"}));
    std::string objective_str = "threshold";
    opt_cmd->add_option("--objective", objective_str, "threshold or bound-at:BETA");
    double s_min = 0.3, s_max = 1.2;
    opt_cmd->add_option("--s-min", s_min, "scan start");
    opt_cmd->add_option("--s-max", s_max, "scan end");
    std::optional<int> opt_steps;
    opt_cmd->add_option("--steps", opt_steps, "scan steps");
    std::optional<int> opt_grid;
    opt_cmd->add_option("--grid", opt_grid, "grid points per angle");

    try {
        std::vector<const char*> argv;
        argv.reserve(args.size() + 1);
        argv.push_back("selftest");
        for (const auto& a : args) argv.push_back(a.c_str());
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    try {
        const std::size_t threads = detail::resolve_threads(threads_flag);

        if (*certify_cmd) {
            RunConfig config;
            config.command = "certify";
            config.scenario = parse_scenario(certify_scenario);
            config.grid_n =
                certify_grid.value_or(config.scenario == Scenario::Chsh ? 201 : 101);
            config.tolerance = certify_tol;
            config.rigorous = rigorous;
            BoundConstants k = default_constants(config.scenario);
            if (opt_s) k.s = *opt_s;
            if (opt_mu) k.mu = *opt_mu;
            config.constants = k;

            const auto start = std::chrono::steady_clock::now();
            const CertificateReport report =
                certify(config.scenario, k, config.grid_n, config.tolerance, config.rigorous,
                        threads);
            const double runtime =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
            out << report_to_json(config, report, runtime).dump(2) << "\n";
            return report.certified ? 0 : 1;
        }

        if (*curve_cmd) {
            const Scenario sc = parse_scenario(curve_scenario);
            const OutputFormat fmt =
                curve_format == "csv" ? OutputFormat::Csv : OutputFormat::Json;
            if (!curve_out.empty()) {
                if (fmt == OutputFormat::Csv) {
                    emit_figure_data(sc, curve_points, curve_out);
                } else {
                    std::ofstream f(curve_out);
                    if (!f) throw IOError("cannot open '" + curve_out + "' for writing");
                    f << detail::curve_json(sc, curve_points).dump(2) << "\n";
                    if (!f) throw IOError("failed while writing '" + curve_out + "'");
                }
            } else {
                if (fmt == OutputFormat::Csv) {
                    detail::write_curve_csv(sc, curve_points, out);
                } else {
                    out << detail::curve_json(sc, curve_points).dump(2) << "\n";
                }
            }
            return 0;
        }

        if (*ce_cmd) {
            const CounterexampleFamily family = counterexample(nu);
            const CounterexampleGap gap = counterexample_gap(nu);
            const UnitarySearchResult search = counterexample_unitary_search(10000, seed);
            json j;
            j["nu"] = nu;
            j["bell_value"] = counterexample_bell_value(family);
            j["upper_bound"] = gap.upper_bound_value;
            j["forced_fidelity"] = gap.forced_fidelity;
            j["search"] = {{"samples", search.samples},
                           {"seed", seed},
                           {"max_fidelity", search.max_fidelity},
                           {"min_fidelity", search.min_fidelity}};
            j["artifact_version"] = kVersion;
            out << j.dump(2) << "\n";
            return 0;
        }

        if (*jordan_cmd) {
            std::ifstream f(jordan_in);
            if (!f) throw IOError("cannot open '" + jordan_in + "'");
            json input = json::parse(f);
            const HermitianOperator a0(detail::matrix_from_json(input.at("a0")));
            const HermitianOperator a1(detail::matrix_from_json(input.at("a1")));
            const JordanBlocks blocks = jordan_decompose(a0, a1);
            json j;
            j["block_angles"] = blocks.block_angles;
            j["padded_dims"] = blocks.padded_dims;
            j["basis"] = detail::matrix_to_json(blocks.basis);
            j["artifact_version"] = kVersion;
            out << j.dump(2) << "\n";
            return 0;
        }

        if (*opt_cmd) {
            const Scenario sc = parse_scenario(opt_scenario);
            const Objective objective = detail::parse_objective(objective_str);
            const int steps = opt_steps.value_or(sc == Scenario::Chsh ? 181 : 21);
            const int grid = opt_grid.value_or(sc == Scenario::Chsh ? 201 : 21);
            const EnvelopeResult result =
                optimize_constants(sc, objective, s_min, s_max, steps, grid, threads);
            json j;
            j["scenario"] = scenario_name(sc);
            j["objective"] = objective_name(result.objective);
            j["s_min"] = s_min;
            j["s_max"] = s_max;
            j["steps"] = steps;
            j["grid_points_per_angle"] = grid;
            j["slopes"] = result.slopes;
            j["offsets"] = result.offsets;
            j["best"] = {{"s", result.best.s}, {"mu", result.best.mu}};
            j["best_objective_value"] = result.best_objective_value;
            if (sc == Scenario::Chsh && objective.kind == Objective::Kind::MinThreshold) {
                j["prior_threshold"] = kPriorChshThreshold;
            }
            j["artifact_version"] = kVersion;
            out << j.dump(2) << "\n";
            return 0;
        }
    } catch (const IOError& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const InvalidGrid& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const InvalidRange& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const ProbabilityOutOfRange& e) {
        err << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace selftest::cli
