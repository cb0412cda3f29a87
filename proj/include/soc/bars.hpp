#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "soc/series.hpp"

namespace soc {

using Timestamp = std::chrono::sys_seconds;  // exchange-local wall time

struct MinuteBar {
    Timestamp timestamp{};
    double open = 0.0;
    double high = 0.0;
    double low = 0.0;
    double close = 0.0;
    std::uint64_t volume = 0;

    friend bool operator==(const MinuteBar&, const MinuteBar&) = default;
};

/// Input column roles. Skip ignores a column (e.g. ticker, period).
enum class Column { Date, Time, DateTime, Open, High, Low, Close, Volume, Skip };

struct ColumnMap {
    std::vector<Column> columns{Column::Date, Column::Time, Column::Open, Column::High,
                                Column::Low,  Column::Close, Column::Volume};
    char delimiter = 0;           // 0: detect ',' or ';' from the first line
    bool has_header = true;

    /// Parses names like "date,time,open,high,low,close,volume" ("skip" or "-" to ignore).
    static ColumnMap parse(const std::string& spec);
    /// <TICKER>,<PER>,<DATE>,<TIME>,<OPEN>,<HIGH>,<LOW>,<CLOSE>,<VOL> layout.
    static ColumnMap finam();
};

struct RowError {
    std::size_t line = 0;
    std::string kind;     // ParseError or ValidationError
    std::string message;
};

struct IngestReport {
    std::vector<MinuteBar> bars;
    std::vector<RowError> errors;
    std::size_t rows = 0;  // data rows seen; rows == bars.size() + errors.size()
};

/// Lenient pass: every data row ends up as a bar or a located error.
IngestReport parse_minutes(std::istream& in, const ColumnMap& map);

/// Strict ingestion: throws ParseError / ValidationError naming the first bad line.
std::vector<MinuteBar> ingest_minutes(const std::filesystem::path& path, const ColumnMap& map = {});
std::vector<MinuteBar> ingest_minutes(std::istream& in, const ColumnMap& map = {});

/// Normalized store: header "date,time,open,high,low,close,volume", shortest
/// round-trip decimal for prices. ingest_minutes(default map) reads it back.
void export_minutes(std::ostream& out, const std::vector<MinuteBar>& bars);

enum class GapPolicy { Ignore, SkipSessionBreaks };

/// Exactly `length` close-to-close log returns starting at bar `offset`.
/// SkipSessionBreaks drops returns spanning a calendar-day change and reads
/// further bars to make up the count. Throws InputError on overrun.
ReturnsSeries historical_returns(const std::vector<MinuteBar>& bars, std::size_t offset,
                                 std::size_t length, GapPolicy policy = GapPolicy::Ignore,
                                 std::string source = "bars");

std::string format_timestamp(Timestamp t);

}  // namespace soc
