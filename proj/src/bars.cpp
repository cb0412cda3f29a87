#include "soc/bars.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <string_view>

#include "soc/error.hpp"

namespace soc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        out.push_back(trim(line.substr(start, pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

bool all_digits(std::string_view s) {
    return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

int to_int(std::string_view s) {
    int v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw std::invalid_argument("integer");
    return v;
}

std::optional<std::chrono::sys_days> parse_date(std::string_view s) {
    int y, m, d;
    try {
        if (s.size() == 8 && all_digits(s)) {
            y = to_int(s.substr(0, 4));
            m = to_int(s.substr(4, 2));
            d = to_int(s.substr(6, 2));
        } else if (s.size() == 10 && (s[4] == '-' || s[4] == '/' || s[4] == '.') && s[7] == s[4]) {
            y = to_int(s.substr(0, 4));
            m = to_int(s.substr(5, 2));
            d = to_int(s.substr(8, 2));
        } else {
            return std::nullopt;
        }
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
                                          std::chrono::day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

// HHMMSS, HHMM, HH:MM or HH:MM:SS.
std::optional<std::chrono::seconds> parse_time(std::string_view s) {
    int h = 0, mi = 0, se = 0;
    try {
        if (all_digits(s) && (s.size() == 6 || s.size() == 4)) {
            h = to_int(s.substr(0, 2));
            mi = to_int(s.substr(2, 2));
            if (s.size() == 6) se = to_int(s.substr(4, 2));
        } else if ((s.size() == 5 || s.size() == 8) && s[2] == ':') {
            h = to_int(s.substr(0, 2));
            mi = to_int(s.substr(3, 2));
            if (s.size() == 8) {
                if (s[5] != ':') return std::nullopt;
                se = to_int(s.substr(6, 2));
            }
        } else {
            return std::nullopt;
        }
    } catch (const std::invalid_argument&) {
        return std::nullopt;
    }
    if (h > 23 || mi > 59 || se > 60) return std::nullopt;
    return std::chrono::hours{h} + std::chrono::minutes{mi} + std::chrono::seconds{se};
}

std::optional<double> parse_price(std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<std::uint64_t> parse_volume(std::string_view s) {
    std::uint64_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec == std::errc() && p == s.data() + s.size()) return v;
    // Some feeds write volume as a float ("1200.0").
    const auto d = parse_price(s);
    if (d && *d >= 0.0 && *d == std::floor(*d) && *d < 1.8e19) return static_cast<std::uint64_t>(*d);
    return std::nullopt;
}

bool looks_like_header(const std::vector<std::string_view>& fields) {
    for (auto f : fields) {
        for (char c : f) {
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '<') return true;
        }
    }
    return false;
}

struct RowOutcome {
    std::optional<MinuteBar> bar;
    RowError error;
};

RowOutcome parse_row(std::string_view line, std::size_t line_no, const ColumnMap& map, char delim) {
    RowOutcome out;
    auto fail = [&](std::string kind, std::string msg) {
        out.error = {line_no, std::move(kind), std::move(msg)};
        return out;
    };
    const auto fields = split(line, delim);
    if (fields.size() != map.columns.size())
        return fail("ParseError", "expected " + std::to_string(map.columns.size()) + " fields, got " +
                                      std::to_string(fields.size()));
    std::optional<std::chrono::sys_days> date;
    std::optional<std::chrono::seconds> time;
    MinuteBar bar;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        const auto f = fields[i];
        switch (map.columns[i]) {
            case Column::Date:
                date = parse_date(f);
                if (!date) return fail("ParseError", "bad date '" + std::string(f) + "'");
                break;
            case Column::Time:
                time = parse_time(f);
                if (!time) return fail("ParseError", "bad time '" + std::string(f) + "'");
                break;
            case Column::DateTime: {
                const auto sep = f.find_first_of(" T");
                if (sep == std::string_view::npos) return fail("ParseError", "bad datetime '" + std::string(f) + "'");
                date = parse_date(f.substr(0, sep));
                time = parse_time(trim(f.substr(sep + 1)));
                if (!date || !time) return fail("ParseError", "bad datetime '" + std::string(f) + "'");
                break;
            }
            case Column::Open:
            case Column::High:
            case Column::Low:
            case Column::Close: {
                const auto v = parse_price(f);
                if (!v) return fail("ParseError", "bad price '" + std::string(f) + "'");
                double& slot = map.columns[i] == Column::Open   ? bar.open
                               : map.columns[i] == Column::High ? bar.high
                               : map.columns[i] == Column::Low  ? bar.low
                                                                : bar.close;
                slot = *v;
                break;
            }
            case Column::Volume: {
                const auto v = parse_volume(f);
                if (!v) return fail("ParseError", "bad volume '" + std::string(f) + "'");
                bar.volume = *v;
                break;
            }
            case Column::Skip:
                break;
        }
    }
    if (!date) return fail("ParseError", "row has no date");
    // A close-only layout describes the bar by its close.
    for (auto [col, slot] : {std::pair{Column::Open, &bar.open}, {Column::High, &bar.high}, {Column::Low, &bar.low}})
        if (std::find(map.columns.begin(), map.columns.end(), col) == map.columns.end()) *slot = bar.close;
    bar.timestamp = Timestamp{*date} + time.value_or(std::chrono::seconds{0});
    if (!(bar.open > 0.0) || !(bar.high > 0.0) || !(bar.low > 0.0) || !(bar.close > 0.0))
        return fail("ValidationError", "prices must be positive");
    if (!(bar.low <= bar.open && bar.low <= bar.close && bar.open <= bar.high && bar.close <= bar.high))
        return fail("ValidationError", "expected low <= open, close <= high");
    out.bar = bar;
    return out;
}

[[noreturn]] void raise(const RowError& e) {
    if (e.kind == "ValidationError") throw ValidationError(e.line, e.message);
    throw ParseError(e.line, e.message);
}

}  // namespace

ColumnMap ColumnMap::parse(const std::string& spec) {
    ColumnMap map;
    map.columns.clear();
    std::stringstream ss(spec);
    std::string name;
    while (std::getline(ss, name, ',')) {
        const std::string n = lower(trim(name));
        if (n == "date") map.columns.push_back(Column::Date);
        else if (n == "time") map.columns.push_back(Column::Time);
        else if (n == "datetime") map.columns.push_back(Column::DateTime);
        else if (n == "open") map.columns.push_back(Column::Open);
        else if (n == "high") map.columns.push_back(Column::High);
        else if (n == "low") map.columns.push_back(Column::Low);
        else if (n == "close") map.columns.push_back(Column::Close);
        else if (n == "volume" || n == "vol") map.columns.push_back(Column::Volume);
        else if (n == "skip" || n == "-") map.columns.push_back(Column::Skip);
        else throw ConfigError("unknown column name '" + n + "'");
    }
    const auto count = [&](Column c) { return std::count(map.columns.begin(), map.columns.end(), c); };
    if (count(Column::Close) != 1) throw ConfigError("column map needs exactly one close column");
    if (count(Column::Date) + count(Column::DateTime) != 1)
        throw ConfigError("column map needs exactly one date or datetime column");
    return map;
}

ColumnMap ColumnMap::finam() {
    ColumnMap map;
    map.columns = {Column::Skip, Column::Skip, Column::Date, Column::Time, Column::Open,
                   Column::High, Column::Low,  Column::Close, Column::Volume};
    map.delimiter = 0;
    map.has_header = true;
    return map;
}

IngestReport parse_minutes(std::istream& in, const ColumnMap& map) {
    IngestReport report;
    std::string line;
    std::size_t line_no = 0;
    char delim = map.delimiter;
    bool first_content = true;
    std::optional<Timestamp> last;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (trim(line).empty()) continue;
        if (first_content) {
            first_content = false;
            if (delim == 0) delim = line.find(';') != std::string::npos ? ';' : ',';
            if (map.has_header && looks_like_header(split(line, delim))) continue;
        }
        ++report.rows;
        RowOutcome row = parse_row(line, line_no, map, delim);
        if (row.bar && last && !(row.bar->timestamp > *last)) {
            row.error = {line_no, "ValidationError",
                         "timestamp " + format_timestamp(row.bar->timestamp) + " not after previous bar"};
            row.bar.reset();
        }
        if (row.bar) {
            last = row.bar->timestamp;
            report.bars.push_back(*row.bar);
        } else {
            report.errors.push_back(std::move(row.error));
        }
    }
    return report;
}

std::vector<MinuteBar> ingest_minutes(std::istream& in, const ColumnMap& map) {
    IngestReport report = parse_minutes(in, map);
    if (!report.errors.empty()) raise(report.errors.front());
    return std::move(report.bars);
}

std::vector<MinuteBar> ingest_minutes(const std::filesystem::path& path, const ColumnMap& map) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    return ingest_minutes(in, map);
}

std::string format_timestamp(Timestamp t) {
    const auto days = std::chrono::floor<std::chrono::days>(t);
    const std::chrono::year_month_day ymd{days};
    const std::chrono::hh_mm_ss hms{t - days};
    char buf[64];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u %02ld:%02ld:%02ld", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()),
                  static_cast<long>(hms.hours().count()), static_cast<long>(hms.minutes().count()),
                  static_cast<long>(hms.seconds().count()));
    return buf;
}

namespace {

std::string shortest(double v) {
    std::array<char, 64> buf{};
    auto [p, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), p);
}

}  // namespace

void export_minutes(std::ostream& out, const std::vector<MinuteBar>& bars) {
    out << "date,time,open,high,low,close,volume\n";
    for (const auto& b : bars) {
        const std::string ts = format_timestamp(b.timestamp);
        out << ts.substr(0, 10) << ',' << ts.substr(11) << ',' << shortest(b.open) << ','
            << shortest(b.high) << ',' << shortest(b.low) << ',' << shortest(b.close) << ',' << b.volume
            << '\n';
    }
}

ReturnsSeries historical_returns(const std::vector<MinuteBar>& bars, std::size_t offset,
                                 std::size_t length, GapPolicy policy, std::string source) {
    if (length == 0) throw InputError("historical_returns: window length must be >= 1");
    std::vector<double> r;
    r.reserve(length);
    std::size_t i = offset + 1;
    for (; i < bars.size() && r.size() < length; ++i) {
        if (policy == GapPolicy::SkipSessionBreaks) {
            const auto d0 = std::chrono::floor<std::chrono::days>(bars[i - 1].timestamp);
            const auto d1 = std::chrono::floor<std::chrono::days>(bars[i].timestamp);
            if (d0 != d1) continue;
        }
        r.push_back(std::log(bars[i].close / bars[i - 1].close));
    }
    if (r.size() < length)
        throw InputError("historical_returns: window [" + std::to_string(offset) + ", +" +
                         std::to_string(length) + "] overruns " + std::to_string(bars.size()) + " bars");
    return ReturnsSeries::historical(std::move(r), std::move(source), offset);
}

}  // namespace soc
