#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nilmtree/series.hpp"

namespace nilmtree {

// Column mapping for a one-file-per-house CSV. When no schema file is
// given the loader infers one: first column is the timestamp, a column
// named "mains" (case-sensitive) is the mains channel, everything else
// is a device channel named after its column.
struct CsvSchema {
    std::string timestamp_col;
    std::vector<std::pair<std::string, std::string>> device_cols;  // column -> device id
    std::optional<std::string> mains_col;
};

// Reads a schema JSON: {"timestamp": col, "devices": {col: id, ...} | [col, ...],
// "mains": col?}. Throws DataError on malformed input.
CsvSchema load_schema(const std::string& path);
void save_schema(const CsvSchema& schema, const std::string& path);

// Accepts epoch seconds or ISO-8601 (YYYY-MM-DD[T ]hh:mm:ss, optional
// trailing Z; treated as UTC). Returns nullopt when unparseable.
std::optional<std::int64_t> parse_timestamp(const std::string& text);

// Loads a house. `path` may be
//  - a CSV file: header row + timestamp column + one column per channel,
//  - a directory: one <device>.csv per device (timestamp,value columns),
//    a mains.csv becoming the mains channel.
// Rows with unparseable timestamps are skipped. Unparseable, negative or
// non-finite value cells count as missing; missing runs of up to
// `max_fill` samples are forward-filled, longer runs are filled too but
// reported in HouseData::unreliable so training can skip them.
HouseData load_house(const std::string& path, const CsvSchema* schema = nullptr,
                     std::size_t max_fill = 5);

// Writes timestamp + device columns (+ mains) as one CSV with header.
void save_house_csv(const HouseData& house, const std::string& path);

}  // namespace nilmtree
