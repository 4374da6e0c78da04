#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "stockflow/calibrate.hpp"
#include "stockflow/compare.hpp"
#include "stockflow/csv.hpp"
#include "stockflow/integrate.hpp"
#include "stockflow/modelfmt.hpp"
#include "stockflow/numfmt.hpp"
#include "stockflow/oilmarket.hpp"
#include "stockflow/svg.hpp"

namespace fs = std::filesystem;
using namespace stockflow;

namespace {

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_output(const std::optional<std::string>& out_path, const std::string& text) {
    if (!out_path) {
        std::cout << text;
        return;
    }
    std::ofstream out(*out_path, std::ios::binary);
    if (!out) {
        throw std::runtime_error("cannot write '" + *out_path + "'");
    }
    out << text;
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= csv.size()) {
        std::size_t comma = csv.find(',', start);
        if (comma == std::string::npos) comma = csv.size();
        if (comma > start) out.push_back(csv.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

int print_diagnostics(const std::vector<Diagnostic>& diags) {
    for (const auto& d : diags) std::cerr << d.to_string() << "\n";
    return 1;
}

// --- run -------------------------------------------------------------------

struct RunArgs {
    std::string model_path;
    std::string scenario_path;
    std::string integrator = "rk4";
    double dt = 0.0;        // 0 = take from scenario or default
    double horizon = 0.0;   // 0 = take from scenario
    std::string record;
    std::optional<std::string> out;
};

int cmd_run(const RunArgs& args) {
    ModelParse parsed = parse_model(read_file(args.model_path), args.model_path);
    if (!parsed.ok()) return print_diagnostics(parsed.diagnostics);

    ScenarioDoc doc;
    if (!args.scenario_path.empty()) {
        ScenarioParse sp = parse_scenario(read_file(args.scenario_path), args.scenario_path);
        if (!sp.ok()) return print_diagnostics(sp.diagnostics);
        doc = std::move(*sp.doc);
        if (doc.model_ref &&
            fs::path(*doc.model_ref).filename() != fs::path(args.model_path).filename()) {
            std::cerr << "warning: scenario references model '" << *doc.model_ref
                      << "' but running '" << args.model_path << "'\n";
        }
    }

    const double t0 = doc.grid.t0.value_or(0.0);
    const double dt = args.dt > 0.0 ? args.dt : doc.grid.dt_internal.value_or(0.0625);
    const double horizon = args.horizon > 0.0 ? args.horizon : doc.grid.horizon.value_or(0.0);
    if (!(horizon > 0.0)) {
        std::cerr << "error: no horizon given (use --horizon or a scenario grid)\n";
        return 1;
    }
    TimeGrid grid(t0, horizon, dt, doc.grid.dt_data.value_or(dt));

    OverlayResult ov = compile_overlay(*parsed.model, doc, grid);
    if (!ov.ok()) {
        for (const auto& e : ov.errors) std::cerr << "error: " << e << "\n";
        return 1;
    }

    const IntegratorKind kind =
        args.integrator == "euler" ? IntegratorKind::Euler : IntegratorKind::Rk4;
    const std::vector<std::string> record = split_list(args.record);
    Trajectory traj =
        simulate(*parsed.model, grid, kind, record, ov.overlay->empty() ? nullptr : &*ov.overlay);

    for (std::size_t i = 0; i < parsed.model->stocks().size(); ++i) {
        const auto& s = traj.series[i];
        const double lowest = *std::min_element(s.values.begin(), s.values.end());
        if (lowest < 0.0) {
            std::cerr << "warning: stock '" << s.name << "' went negative (min "
                      << format_number(lowest) << ")\n";
        }
    }

    write_output(args.out, trajectory_csv(traj));
    return 0;
}

// --- calibrate ---------------------------------------------------------------

int cmd_calibrate(const std::string& csv_path, const std::optional<std::string>& out) {
    QuarterlySeries data = ingest_quarterly(csv_path);
    PriceLawFit law = calibrate_price_law(data);

    std::string report;
    report += "alpha1," + format_number(law.fit.slope()) + "\n";
    report += "beta1," + format_number(law.fit.intercept()) + "\n";
    report += "r_squared," + format_number(law.fit.r_squared) + "\n";
    report += "residual_std," + format_number(law.fit.residual_std) + "\n";
    report += "samples," + std::to_string(law.fit.samples) + "\n";
    report += "\n";
    report += calibration_stats_csv(data);
    write_output(out, report);
    return 0;
}

// --- compare -----------------------------------------------------------------

bool looks_like_daily(const fs::path& path) {
    CsvTable t = read_csv(path);
    if (t.header.size() != 2) return false;
    if (t.header[0] == "date") return true;
    return t.header[0].size() == 10 && t.header[0][4] == '-';
}

int cmd_compare(const std::string& sim_path, const std::string& ref_path,
                const std::string& column, const std::optional<std::string>& out) {
    SampledSeries sim = read_series_csv(sim_path, column);
    SampledSeries ref = looks_like_daily(ref_path) ? ingest_daily_prices(ref_path)
                                                   : read_series_csv(ref_path, "");
    ComparisonReport report = compare_series(sim, ref);
    std::cout << comparison_summary(report) << "\n";
    if (out) write_output(out, comparison_csv(report));
    return 0;
}

// --- stats -------------------------------------------------------------------

int cmd_stats(const std::string& csv_path, const std::optional<std::string>& out) {
    CsvTable table = read_csv(csv_path);
    std::string report;
    if (table.header.size() == 4 && table.header[0] == "quarter") {
        report = calibration_stats_csv(ingest_quarterly(csv_path));
    } else {
        // Generic numeric table: one stats column per numeric CSV column.
        std::vector<std::string> names;
        std::vector<std::vector<double>> columns;
        for (std::size_t c = 0; c < table.header.size(); ++c) {
            std::vector<double> col;
            bool numeric = !table.rows.empty();
            for (const auto& row : table.rows) {
                try {
                    col.push_back(std::stod(row[c]));
                } catch (...) {
                    numeric = false;
                    break;
                }
            }
            if (numeric) {
                names.push_back(table.header[c]);
                columns.push_back(std::move(col));
            }
        }
        if (names.empty()) {
            std::cerr << "error: no numeric columns in '" << csv_path << "'\n";
            return 1;
        }
        report = stats_table_csv(names, columns);
    }
    write_output(out, report);
    return 0;
}

// --- plot --------------------------------------------------------------------

int cmd_plot(const std::string& csv_path, const std::string& columns,
             const std::string& out, const std::string& title) {
    CsvTable table = read_csv(csv_path);
    if (table.header.size() < 2 || table.rows.empty()) {
        std::cerr << "error: '" << csv_path << "' has nothing to plot\n";
        return 1;
    }
    std::vector<std::string> wanted = split_list(columns);
    if (wanted.empty()) {
        wanted.assign(table.header.begin() + 1, table.header.end());
    }

    std::vector<double> x;
    x.reserve(table.rows.size());
    for (const auto& row : table.rows) x.push_back(std::stod(row[0]));

    std::vector<ChartSeries> series;
    for (const auto& name : wanted) {
        const int c = table.column(name);
        if (c <= 0) {
            std::cerr << "error: no column named '" << name << "'\n";
            return 1;
        }
        ChartSeries s;
        s.label = name;
        s.x = x;
        for (const auto& row : table.rows) s.y.push_back(std::stod(row[static_cast<std::size_t>(c)]));
        series.push_back(std::move(s));
    }

    ChartOptions options;
    options.x_label = table.header[0];
    options.title = title;
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        std::cerr << "error: cannot write '" << out << "'\n";
        return 1;
    }
    f << render_line_chart(series, options);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"stockflow - stock-and-flow simulation toolkit"};
    app.require_subcommand(1);

    RunArgs run_args;
    std::optional<std::string> out_path;
    auto* run = app.add_subcommand("run", "simulate a model, optionally under a scenario");
    run->add_option("model", run_args.model_path, "model file (.sfm)")->required();
    run->add_option("--scenario", run_args.scenario_path, "scenario overlay file (.sfs)");
    run->add_option("--integrator", run_args.integrator, "integration method")
        ->check(CLI::IsMember({"euler", "rk4"}))
        ->capture_default_str();
    run->add_option("--dt", run_args.dt, "internal step in days (default 0.0625)");
    run->add_option("--horizon", run_args.horizon, "run length in days");
    run->add_option("--record", run_args.record, "extra series to record (comma-separated)");
    run->add_option("--out", run_args.out, "output CSV path (default stdout)");

    std::string calibrate_csv;
    auto* calibrate =
        app.add_subcommand("calibrate", "fit the price-change-rate law to quarterly data");
    calibrate->add_option("data", calibrate_csv, "quarterly CSV (quarter,demand,supply,price)")
        ->required();
    calibrate->add_option("--out", out_path, "report path (default stdout)");

    std::string sim_csv, ref_csv, compare_column;
    std::optional<std::string> compare_out;
    auto* compare = app.add_subcommand("compare", "compare a trajectory against reference data");
    compare->add_option("sim", sim_csv, "simulation CSV (from run)")->required();
    compare->add_option("ref", ref_csv, "reference CSV (trajectory-style or date,price)")
        ->required();
    compare->add_option("--column", compare_column, "simulation column (default: first)");
    compare->add_option("--out", compare_out, "write the report CSV here");

    std::string stats_csv;
    std::optional<std::string> stats_out;
    auto* stats = app.add_subcommand("stats", "descriptive statistics of CSV columns");
    stats->add_option("data", stats_csv, "input CSV")->required();
    stats->add_option("--out", stats_out, "output path (default stdout)");

    std::string plot_csv, plot_columns, plot_out, plot_title;
    auto* plot = app.add_subcommand("plot", "render CSV columns as an SVG line chart");
    plot->add_option("data", plot_csv, "input CSV (first column is the x axis)")->required();
    plot->add_option("--columns", plot_columns, "columns to draw (comma-separated; default all)");
    plot->add_option("--out", plot_out, "output SVG path")->required();
    plot->add_option("--title", plot_title, "chart title");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << e.what() << "\n\n" << app.help() << "\n";
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_args);
        if (calibrate->parsed()) return cmd_calibrate(calibrate_csv, out_path);
        if (compare->parsed()) return cmd_compare(sim_csv, ref_csv, compare_column, compare_out);
        if (stats->parsed()) return cmd_stats(stats_csv, stats_out);
        if (plot->parsed()) return cmd_plot(plot_csv, plot_columns, plot_out, plot_title);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
