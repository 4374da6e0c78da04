#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>

#include "stockflow/model.hpp"

namespace testutil {

inline std::filesystem::path source_dir() {
    return std::filesystem::path(STOCKFLOW_SOURCE_DIR);
}

inline std::filesystem::path fixture(const std::string& name) {
    return source_dir() / "models" / name;
}

inline std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void spit(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

/// Unique per-call scratch directory under the system temp dir.
class TempDir {
public:
    TempDir() {
        static std::mt19937_64 rng(std::random_device{}());
        path_ = std::filesystem::temp_directory_path() /
                ("stockflow_test_" + std::to_string(rng()));
        std::filesystem::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path_, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;

    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path file(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

struct CliResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the built CLI with the given argument string.
inline CliResult run_cli(const std::string& args, const TempDir& dir) {
    const auto out_file = dir.file("cli_stdout.txt");
    const auto err_file = dir.file("cli_stderr.txt");
    const std::string cmd = std::string(STOCKFLOW_CLI_PATH) + " " + args + " > " +
                            out_file.string() + " 2> " + err_file.string();
    const int status = std::system(cmd.c_str());
    CliResult result;
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    result.out = slurp(out_file);
    result.err = slurp(err_file);
    return result;
}

/// build_model wrapper that aborts the test on validation failure.
inline stockflow::Model must_build(stockflow::ModelDefs defs) {
    auto result = stockflow::build_model(std::move(defs));
    if (!result.ok()) {
        std::string msg = "model failed to build:";
        for (const auto& i : result.issues) msg += " [" + i.message + "]";
        throw std::runtime_error(msg);
    }
    return std::move(*result.model);
}

/// dy/dt = coeff * y, with y(0) = y0 (flow expression coeff * y).
inline stockflow::Model linear_decay_model(double coeff, double y0) {
    using namespace stockflow;
    ModelDefs defs;
    defs.constants.push_back({"c", coeff});
    defs.flows.push_back({"f", expr_var("c") * expr_var("y"), ""});
    StockDecl y;
    y.name = "y";
    y.initial = expr_number(y0);
    y.inflows = {"f"};
    defs.stocks.push_back(std::move(y));
    return must_build(std::move(defs));
}

/// dy/dt = t, y(0) = y0.
inline stockflow::Model time_rate_model(double y0) {
    using namespace stockflow;
    ModelDefs defs;
    defs.flows.push_back({"f", expr_time(), ""});
    StockDecl y;
    y.name = "y";
    y.initial = expr_number(y0);
    y.inflows = {"f"};
    defs.stocks.push_back(std::move(y));
    return must_build(std::move(defs));
}

} // namespace testutil
