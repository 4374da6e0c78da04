#include "stockflow/csv.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <sstream>

#include "stockflow/numfmt.hpp"

namespace stockflow {

namespace {

std::vector<std::string> split_fields(std::string_view line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            out.emplace_back(line.substr(start));
            break;
        }
        out.emplace_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::optional<double> parse_double(std::string_view s) {
    // Trim surrounding spaces; from_chars wants the bare number.
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

// Days since the civil epoch for an ISO-8601 date, or nullopt.
std::optional<long> parse_date_days(std::string_view s) {
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto num = [&](std::size_t off, std::size_t len) -> std::optional<int> {
        int v = 0;
        auto [ptr, ec] = std::from_chars(s.data() + off, s.data() + off + len, v);
        if (ec != std::errc{} || ptr != s.data() + off + len) return std::nullopt;
        return v;
    };
    auto y = num(0, 4), m = num(5, 2), d = num(8, 2);
    if (!y || !m || !d) return std::nullopt;
    const std::chrono::year_month_day ymd{std::chrono::year(*y),
                                          std::chrono::month(static_cast<unsigned>(*m)),
                                          std::chrono::day(static_cast<unsigned>(*d))};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days(ymd).time_since_epoch().count();
}

std::optional<std::pair<int, int>> parse_quarter(std::string_view s) {
    if (s.size() != 6 || (s[4] != 'Q' && s[4] != 'q')) return std::nullopt;
    int year = 0, q = 0;
    auto [p1, e1] = std::from_chars(s.data(), s.data() + 4, year);
    auto [p2, e2] = std::from_chars(s.data() + 5, s.data() + 6, q);
    if (e1 != std::errc{} || e2 != std::errc{} || q < 1 || q > 4) return std::nullopt;
    return std::make_pair(year, q);
}

} // namespace

int CsvTable::column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
}

CsvTable parse_csv(std::string_view text, std::string_view origin) {
    CsvTable table;
    std::size_t pos = 0;
    long line_no = 0;
    while (pos <= text.size()) {
        std::size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string_view line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) {
            if (pos > text.size()) break;
            continue;
        }
        auto fields = split_fields(line);
        if (table.header.empty()) {
            table.header = std::move(fields);
        } else {
            if (fields.size() != table.header.size()) {
                throw CsvError(std::string(origin) + ": ragged row (" +
                                   std::to_string(fields.size()) + " fields, expected " +
                                   std::to_string(table.header.size()) + ")",
                               line_no);
            }
            table.rows.push_back(std::move(fields));
        }
        if (nl == text.size()) break;
    }
    if (table.header.empty()) {
        throw CsvError(std::string(origin) + ": empty file");
    }
    return table;
}

CsvTable read_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw CsvError("cannot open '" + path.string() + "'");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_csv(ss.str(), path.string());
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw CsvError("cannot write '" + path.string() + "'");
    }
    auto emit_row = [&](const std::vector<std::string>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            if (i) out << ',';
            out << row[i];
        }
        out << '\n';
    };
    emit_row(table.header);
    for (const auto& row : table.rows) emit_row(row);
}

SampledSeries ingest_daily_prices(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() != 2) {
        throw CsvError(path.string() + ": expected two columns (date,price)");
    }
    // Headerless files are accepted: the first line is data when its second
    // field is numeric.
    if (parse_double(table.header[1])) {
        table.rows.insert(table.rows.begin(), table.header);
        table.header = {"date", "price"};
    }
    if (table.rows.empty()) {
        throw CsvError(path.string() + ": no data rows");
    }

    SampledSeries series;
    series.name = "price";
    series.units = "USD";
    long epoch_days = 0;
    long prev_days = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const long row_no = static_cast<long>(i) + 2; // header is row 1
        const auto& row = table.rows[i];
        auto days = parse_date_days(row[0]);
        if (!days) {
            throw CsvError(path.string() + ": invalid date '" + row[0] + "'", row_no);
        }
        auto value = parse_double(row[1]);
        if (!value || !std::isfinite(*value)) {
            throw CsvError(path.string() + ": missing or non-numeric price '" + row[1] + "'",
                           row_no);
        }
        if (i == 0) {
            epoch_days = *days;
            series.epoch = row[0];
        } else if (*days <= prev_days) {
            throw CsvError(path.string() + ": dates must be strictly increasing ('" +
                               row[0] + "')",
                           row_no);
        }
        prev_days = *days;
        series.t.push_back(static_cast<double>(*days - epoch_days));
        series.values.push_back(*value);
    }
    return series;
}

QuarterlySeries ingest_quarterly(const std::filesystem::path& path) {
    CsvTable table = read_csv(path);
    if (table.header.size() != 4) {
        throw CsvError(path.string() + ": expected four columns (quarter,demand,supply,price)");
    }
    if (parse_quarter(table.header[0])) { // headerless
        table.rows.insert(table.rows.begin(), table.header);
        table.header = {"quarter", "demand", "supply", "price"};
    }
    if (table.rows.empty()) {
        throw CsvError(path.string() + ": no data rows");
    }

    QuarterlySeries q;
    int prev_key = 0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const long row_no = static_cast<long>(i) + 2;
        const auto& row = table.rows[i];
        auto quarter = parse_quarter(row[0]);
        if (!quarter) {
            throw CsvError(path.string() + ": invalid quarter label '" + row[0] + "'", row_no);
        }
        const int key = quarter->first * 4 + (quarter->second - 1);
        if (i > 0 && key != prev_key + 1) {
            throw CsvError(path.string() + ": quarters must be consecutive ('" + row[0] + "')",
                           row_no);
        }
        prev_key = key;

        auto d = parse_double(row[1]), s = parse_double(row[2]), p = parse_double(row[3]);
        if (!d || !s || !p || !std::isfinite(*d) || !std::isfinite(*s) || !std::isfinite(*p)) {
            throw CsvError(path.string() + ": missing or non-numeric value", row_no);
        }
        if (!(*d > 0.0) || !(*s > 0.0)) {
            throw CsvError(path.string() + ": demand and supply must be > 0", row_no);
        }
        q.quarters.push_back(row[0]);
        q.demand.push_back(*d);
        q.supply.push_back(*s);
        q.price.push_back(*p);
    }
    return q;
}

std::string trajectory_csv(const Trajectory& trajectory) {
    std::string out = "t";
    for (const auto& s : trajectory.series) out += "," + s.name;
    out += "\n";
    const std::size_t samples = trajectory.grid.step_count() + 1;
    for (std::size_t k = 0; k < samples; ++k) {
        out += format_number(trajectory.grid.time_at(k));
        for (const auto& s : trajectory.series) {
            out += "," + format_number(s.values[k]);
        }
        out += "\n";
    }
    return out;
}

SampledSeries read_series_csv(const std::filesystem::path& path,
                              std::string_view column) {
    CsvTable table = read_csv(path);
    if (table.header.size() < 2) {
        throw CsvError(path.string() + ": expected a time column and a value column");
    }
    if (parse_double(table.header[0])) {
        throw CsvError(path.string() + ": expected a header row");
    }
    int col = 1;
    if (!column.empty()) {
        col = table.column(column);
        if (col < 0) {
            throw CsvError(path.string() + ": no column named '" + std::string(column) + "'");
        }
        if (col == 0) {
            throw CsvError(path.string() + ": '" + std::string(column) +
                           "' is the time column");
        }
    }

    SampledSeries series;
    series.name = table.header[static_cast<std::size_t>(col)];
    double prev_t = 0.0;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const long row_no = static_cast<long>(i) + 2;
        auto t = parse_double(table.rows[i][0]);
        auto v = parse_double(table.rows[i][static_cast<std::size_t>(col)]);
        if (!t || !v) {
            throw CsvError(path.string() + ": non-numeric cell", row_no);
        }
        if (i > 0 && *t <= prev_t) {
            throw CsvError(path.string() + ": time must be strictly increasing", row_no);
        }
        prev_t = *t;
        series.t.push_back(*t);
        series.values.push_back(*v);
    }
    if (series.t.empty()) {
        throw CsvError(path.string() + ": no data rows");
    }
    return series;
}

} // namespace stockflow
