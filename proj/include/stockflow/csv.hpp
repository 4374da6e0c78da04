#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "stockflow/calibrate.hpp"
#include "stockflow/integrate.hpp"

namespace stockflow {

class CsvError : public std::runtime_error {
public:
    CsvError(const std::string& message, long row = -1)
        : std::runtime_error(row >= 0 ? message + " (row " + std::to_string(row) + ")"
                                      : message),
          row_(row) {}
    [[nodiscard]] long row() const { return row_; }

private:
    long row_;
};

/// Raw rectangular CSV contents. Cells are kept as text; typed views are
/// produced by the ingestion helpers.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    [[nodiscard]] int column(std::string_view name) const; // -1 if absent
};

CsvTable read_csv(const std::filesystem::path& path);
CsvTable parse_csv(std::string_view text, std::string_view origin = "<input>");
void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Possibly non-uniform samples (daily market data skips weekends).
/// `t` is days since the first sample; `epoch` keeps its date label.
struct SampledSeries {
    std::string name;
    std::string units;
    std::string epoch;
    std::vector<double> t;      // strictly increasing
    std::vector<double> values;

    [[nodiscard]] std::size_t size() const { return t.size(); }
};

/// Reads a `date,price` file (ISO-8601 dates, header optional). Dates must
/// be strictly increasing; blank or non-numeric prices are an error — no
/// imputation.
SampledSeries ingest_daily_prices(const std::filesystem::path& path);

/// Reads a `quarter,demand,supply,price` file with labels like 2010Q1.
/// Quarters must be consecutive; all values finite, demand and supply
/// positive.
QuarterlySeries ingest_quarterly(const std::filesystem::path& path);

/// Trajectory as CSV text: `t,<var1>,<var2>,...`, one row per internal
/// step, shortest round-trip number formatting.
std::string trajectory_csv(const Trajectory& trajectory);

/// Loads one column of a trajectory-style CSV (first column is time).
SampledSeries read_series_csv(const std::filesystem::path& path,
                              std::string_view column = "");

} // namespace stockflow
