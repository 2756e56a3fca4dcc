#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace nilmtree {

// Uniformly sampled power channel. Values are Watts, finite and >= 0;
// the constructor helpers enforce that, so downstream code can assume it.
struct PowerSeries {
    std::string device_id;
    std::int64_t start_time = 0;  // epoch seconds of values[0]
    std::int64_t interval = 1;    // seconds per sample, > 0
    std::vector<double> values;

    std::size_t size() const { return values.size(); }
};

// Validates invariants and throws DataError on violation.
PowerSeries make_series(std::string device_id, std::int64_t start_time, std::int64_t interval,
                        std::vector<double> values);

// Half-open sample index range [begin, end) that should not feed training.
// Produced by the CSV loader for gaps too long to forward-fill.
using SampleRange = std::pair<std::size_t, std::size_t>;

// One house: per-device channels sharing start/interval/length, an
// optional mains channel on the same grid, and sample ranges whose
// values were synthesized across long gaps.
struct HouseData {
    std::vector<PowerSeries> devices;
    std::optional<PowerSeries> mains;
    std::vector<SampleRange> unreliable;

    std::size_t sample_count() const { return devices.empty() ? 0 : devices.front().size(); }
    const PowerSeries& device(const std::string& id) const;
    int device_index(const std::string& id) const;  // -1 when absent
};

// Alignment check across devices + mains; throws DataError.
void validate_house(const HouseData& house);

// Mean-pools groups of ratio = target/interval samples (energy-preserving
// for uniform sampling); the trailing partial group is dropped. target
// must be a positive integer multiple of the current interval.
PowerSeries resample(const PowerSeries& s, std::int64_t target_interval);
HouseData resample(const HouseData& house, std::int64_t target_interval);

// Temporal prefix/suffix split; train gets floor(fraction * T) samples.
// fraction must lie in (0,1) and both parts must be non-empty.
std::pair<HouseData, HouseData> split_train_test(const HouseData& house, double fraction);
std::pair<PowerSeries, PowerSeries> split_train_test(const PowerSeries& s, double fraction);

// Column-major stack of sliding windows.
struct WindowMatrix {
    std::size_t w = 0;
    std::size_t stride = 1;
    std::vector<std::vector<double>> cols;  // each of length w

    std::size_t count() const { return cols.size(); }
};

// Windows starting at 0, stride, 2*stride, ... while the full window fits.
// w in [1, s.size()] and stride >= 1 required.
WindowMatrix windows(const PowerSeries& s, std::size_t w, std::size_t stride = 1);

// Elementwise sum of the selected device channels. ids must be non-empty
// and name existing devices; the result id joins the member ids with '+'
// in house order.
PowerSeries pseudo_signal(const HouseData& house, const std::vector<std::string>& ids);
PowerSeries pseudo_signal(const HouseData& house, const std::vector<int>& indices);

// Device-channel sum over all devices (closed-world aggregate).
PowerSeries aggregate_sum(const HouseData& house);

}  // namespace nilmtree
