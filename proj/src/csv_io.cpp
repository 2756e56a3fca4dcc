#include "nilmtree/csv_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

#include "nilmtree/errors.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

// missing cell marker while assembling columns
constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();

std::optional<double> parse_value(const std::string& raw) {
    std::string t = trim(raw);
    if (t.empty()) return std::nullopt;
    double v = 0.0;
    auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (res.ec != std::errc{} || res.ptr != t.data() + t.size()) return std::nullopt;
    if (!std::isfinite(v) || v < 0.0) return std::nullopt;
    return v;
}

struct RawColumn {
    std::string device_id;
    std::vector<double> values;  // NaN = missing
};

// Forward-fills missing runs. Runs longer than max_fill (or with no
// preceding valid sample) become zeros and are reported as unreliable.
void fill_gaps(std::vector<RawColumn>& cols, std::size_t n, std::size_t max_fill,
               std::vector<SampleRange>& unreliable) {
    std::vector<char> bad(n, 0);
    for (auto& col : cols) {
        std::size_t i = 0;
        while (i < n) {
            if (!std::isnan(col.values[i])) {
                ++i;
                continue;
            }
            std::size_t j = i;
            while (j < n && std::isnan(col.values[j])) ++j;
            bool fillable = i > 0 && (j - i) <= max_fill;
            double fill = fillable ? col.values[i - 1] : 0.0;
            for (std::size_t t = i; t < j; ++t) col.values[t] = fill;
            if (!fillable)
                for (std::size_t t = i; t < j; ++t) bad[t] = 1;
            i = j;
        }
    }
    std::size_t i = 0;
    while (i < n) {
        if (!bad[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && bad[j]) ++j;
        unreliable.emplace_back(i, j);
        i = j;
    }
}

struct TimedRows {
    std::int64_t start = 0;
    std::int64_t interval = 1;
    std::size_t count = 0;
};

// Places parsed rows on a uniform grid. The grid step comes from the
// first two rows; later rows must land on the grid, skipped grid points
// become missing cells in every column.
TimedRows grid_place(const std::vector<std::pair<std::int64_t, std::vector<std::optional<double>>>>& rows,
                     std::vector<RawColumn>& cols, const std::string& origin) {
    if (rows.size() < 2) throw DataError(origin + ": need at least 2 parseable rows");
    std::int64_t start = rows.front().first;
    std::int64_t interval = rows[1].first - rows[0].first;
    if (interval <= 0) throw DataError(origin + ": timestamps not strictly increasing");
    std::int64_t last = rows.back().first;
    if ((last - start) % interval != 0)
        throw DataError(origin + ": timestamps do not sit on a uniform grid");
    std::size_t n = static_cast<std::size_t>((last - start) / interval) + 1;
    for (auto& c : cols) c.values.assign(n, kMissing);
    std::int64_t prev = start - interval;
    for (const auto& [ts, vals] : rows) {
        if (ts <= prev) throw DataError(origin + ": timestamps not strictly increasing");
        if ((ts - start) % interval != 0)
            throw DataError(origin + ": timestamp " + std::to_string(ts) + " off the " +
                            std::to_string(interval) + "s grid");
        prev = ts;
        std::size_t idx = static_cast<std::size_t>((ts - start) / interval);
        for (std::size_t c = 0; c < cols.size(); ++c)
            if (vals[c]) cols[c].values[idx] = *vals[c];
    }
    return TimedRows{start, interval, n};
}

HouseData assemble(std::vector<RawColumn> cols, std::optional<std::size_t> mains_idx,
                   const TimedRows& grid, std::size_t max_fill) {
    HouseData house;
    fill_gaps(cols, grid.count, max_fill, house.unreliable);
    for (std::size_t c = 0; c < cols.size(); ++c) {
        auto series = make_series(cols[c].device_id, grid.start, grid.interval,
                                  std::move(cols[c].values));
        if (mains_idx && *mains_idx == c)
            house.mains = std::move(series);
        else
            house.devices.push_back(std::move(series));
    }
    validate_house(house);
    return house;
}

HouseData load_single_csv(const std::string& path, const CsvSchema* schema, std::size_t max_fill) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    auto header = split_csv_line(line);
    for (auto& h : header) h = trim(h);

    CsvSchema inferred;
    if (!schema) {
        if (header.size() < 2) throw DataError(path + ": need a timestamp column and a channel");
        inferred.timestamp_col = header.front();
        for (std::size_t i = 1; i < header.size(); ++i) {
            if (header[i] == "mains")
                inferred.mains_col = header[i];
            else
                inferred.device_cols.emplace_back(header[i], header[i]);
        }
        schema = &inferred;
    }

    auto col_of = [&](const std::string& name) -> std::size_t {
        auto it = std::find(header.begin(), header.end(), name);
        if (it == header.end()) throw DataError(path + ": missing column '" + name + "'");
        return static_cast<std::size_t>(it - header.begin());
    };

    std::size_t ts_col = col_of(schema->timestamp_col);
    std::vector<std::size_t> value_cols;
    std::vector<RawColumn> cols;
    for (const auto& [col, id] : schema->device_cols) {
        value_cols.push_back(col_of(col));
        cols.push_back(RawColumn{id, {}});
    }
    std::optional<std::size_t> mains_idx;
    if (schema->mains_col) {
        value_cols.push_back(col_of(*schema->mains_col));
        mains_idx = cols.size();
        cols.push_back(RawColumn{"mains", {}});
    }
    if (cols.empty()) throw DataError(path + ": schema names no channels");

    std::vector<std::pair<std::int64_t, std::vector<std::optional<double>>>> rows;
    while (std::getline(in, line)) {
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line);
        if (fields.size() < header.size()) fields.resize(header.size());
        auto ts = parse_timestamp(trim(fields[ts_col]));
        if (!ts) continue;  // row rejected
        std::vector<std::optional<double>> vals;
        vals.reserve(value_cols.size());
        for (std::size_t c : value_cols) vals.push_back(parse_value(fields[c]));
        rows.emplace_back(*ts, std::move(vals));
    }
    auto grid = grid_place(rows, cols, path);
    return assemble(std::move(cols), mains_idx, grid, max_fill);
}

// Directory layout: one two-column CSV per device. Files must agree on
// grid start/step/length; mains.csv maps to the mains channel.
HouseData load_directory(const std::string& dir, std::size_t max_fill) {
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && entry.path().extension() == ".csv")
            files.push_back(entry.path());
    if (files.empty()) throw DataError(dir + ": no .csv files");
    std::sort(files.begin(), files.end());

    HouseData house;
    std::optional<TimedRows> ref_grid;
    std::vector<RawColumn> all_cols;
    std::optional<std::size_t> mains_idx;
    for (const auto& f : files) {
        std::ifstream in(f);
        if (!in) throw DataError("cannot open " + f.string());
        std::string line;
        if (!std::getline(in, line)) throw DataError(f.string() + ": empty file");
        auto header = split_csv_line(line);
        if (header.size() < 2) throw DataError(f.string() + ": need timestamp,value columns");
        std::vector<std::pair<std::int64_t, std::vector<std::optional<double>>>> rows;
        while (std::getline(in, line)) {
            if (trim(line).empty()) continue;
            auto fields = split_csv_line(line);
            if (fields.size() < 2) fields.resize(2);
            auto ts = parse_timestamp(trim(fields[0]));
            if (!ts) continue;
            rows.emplace_back(*ts, std::vector<std::optional<double>>{parse_value(fields[1])});
        }
        std::vector<RawColumn> one{RawColumn{f.stem().string(), {}}};
        auto grid = grid_place(rows, one, f.string());
        if (!ref_grid) {
            ref_grid = grid;
        } else if (grid.start != ref_grid->start || grid.interval != ref_grid->interval ||
                   grid.count != ref_grid->count) {
            throw DataError(f.string() + ": grid disagrees with other device files");
        }
        if (one.front().device_id == "mains") mains_idx = all_cols.size();
        all_cols.push_back(std::move(one.front()));
    }
    return assemble(std::move(all_cols), mains_idx, *ref_grid, max_fill);
}

}  // namespace

std::optional<std::int64_t> parse_timestamp(const std::string& text) {
    if (text.empty()) return std::nullopt;
    // epoch seconds first
    {
        std::int64_t v = 0;
        auto res = std::from_chars(text.data(), text.data() + text.size(), v);
        if (res.ec == std::errc{} && res.ptr == text.data() + text.size()) return v;
    }
    // ISO-8601, UTC assumed
    std::tm tm{};
    int y, mo, d, h, mi, s;
    char sep;
    if (std::sscanf(text.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h, &mi, &s) == 7 &&
        (sep == 'T' || sep == ' ')) {
        // timegm would silently normalize out-of-range fields
        if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 || mi > 59 ||
            s < 0 || s > 60)
            return std::nullopt;
        tm.tm_year = y - 1900;
        tm.tm_mon = mo - 1;
        tm.tm_mday = d;
        tm.tm_hour = h;
        tm.tm_min = mi;
        tm.tm_sec = s;
        std::time_t t = timegm(&tm);
        if (t == static_cast<std::time_t>(-1)) return std::nullopt;
        return static_cast<std::int64_t>(t);
    }
    return std::nullopt;
}

CsvSchema load_schema(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open schema " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError("schema " + path + ": " + e.what());
    }
    CsvSchema s;
    if (!j.contains("timestamp") || !j["timestamp"].is_string())
        throw DataError("schema " + path + ": missing 'timestamp'");
    s.timestamp_col = j["timestamp"].get<std::string>();
    if (!j.contains("devices")) throw DataError("schema " + path + ": missing 'devices'");
    const auto& dev = j["devices"];
    if (dev.is_object()) {
        for (auto it = dev.begin(); it != dev.end(); ++it)
            s.device_cols.emplace_back(it.key(), it.value().get<std::string>());
    } else if (dev.is_array()) {
        for (const auto& c : dev) s.device_cols.emplace_back(c.get<std::string>(), c.get<std::string>());
    } else {
        throw DataError("schema " + path + ": 'devices' must be an object or array");
    }
    if (j.contains("mains")) s.mains_col = j["mains"].get<std::string>();
    return s;
}

void save_schema(const CsvSchema& schema, const std::string& path) {
    json dev = json::object();
    for (const auto& [col, id] : schema.device_cols) dev[col] = id;
    json j{{"timestamp", schema.timestamp_col}, {"devices", dev}};
    if (schema.mains_col) j["mains"] = *schema.mains_col;
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << j.dump(2) << '\n';
}

HouseData load_house(const std::string& path, const CsvSchema* schema, std::size_t max_fill) {
    fs::path p(path);
    if (fs::is_directory(p)) return load_directory(path, max_fill);
    if (!fs::exists(p)) throw DataError("no such file: " + path);
    return load_single_csv(path, schema, max_fill);
}

void save_house_csv(const HouseData& house, const std::string& path) {
    validate_house(house);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "timestamp";
    for (const auto& d : house.devices) out << ',' << d.device_id;
    if (house.mains) out << ",mains";
    out << '\n';
    const auto& ref = house.devices.front();
    for (std::size_t i = 0; i < ref.size(); ++i) {
        out << ref.start_time + static_cast<std::int64_t>(i) * ref.interval;
        for (const auto& d : house.devices) out << ',' << format_double(d.values[i]);
        if (house.mains) out << ',' << format_double(house.mains->values[i]);
        out << '\n';
    }
}

}  // namespace nilmtree
