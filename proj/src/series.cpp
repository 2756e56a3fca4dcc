#include "nilmtree/series.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>

#include "nilmtree/errors.hpp"
#include "nilmtree/kernels.hpp"

namespace nilmtree {

PowerSeries make_series(std::string device_id, std::int64_t start_time, std::int64_t interval,
                        std::vector<double> values) {
    if (interval <= 0) throw DataError("series '" + device_id + "': interval must be positive");
    if (values.empty()) throw DataError("series '" + device_id + "': no samples");
    for (double v : values) {
        if (!std::isfinite(v)) throw DataError("series '" + device_id + "': non-finite sample");
        if (v < 0.0) throw DataError("series '" + device_id + "': negative sample");
    }
    return PowerSeries{std::move(device_id), start_time, interval, std::move(values)};
}

const PowerSeries& HouseData::device(const std::string& id) const {
    for (const auto& d : devices)
        if (d.device_id == id) return d;
    throw DataError("unknown device: " + id);
}

int HouseData::device_index(const std::string& id) const {
    for (std::size_t i = 0; i < devices.size(); ++i)
        if (devices[i].device_id == id) return static_cast<int>(i);
    return -1;
}

void validate_house(const HouseData& house) {
    if (house.devices.empty()) throw DataError("house has no device channels");
    const auto& ref = house.devices.front();
    auto check = [&](const PowerSeries& s) {
        if (s.size() != ref.size() || s.start_time != ref.start_time || s.interval != ref.interval)
            throw DataError("channel '" + s.device_id + "' misaligned with '" + ref.device_id + "'");
    };
    for (const auto& d : house.devices) check(d);
    if (house.mains) check(*house.mains);
    for (std::size_t i = 0; i < house.devices.size(); ++i)
        for (std::size_t j = i + 1; j < house.devices.size(); ++j)
            if (house.devices[i].device_id == house.devices[j].device_id)
                throw DataError("duplicate device id: " + house.devices[i].device_id);
    for (auto [b, e] : house.unreliable)
        if (b >= e || e > ref.size()) throw DataError("unreliable range out of bounds");
}

PowerSeries resample(const PowerSeries& s, std::int64_t target_interval) {
    if (target_interval <= 0) throw DataError("resample: target interval must be positive");
    if (target_interval % s.interval != 0)
        throw DataError("resample: target interval is not an integer multiple of " +
                        std::to_string(s.interval) + "s");
    std::size_t ratio = static_cast<std::size_t>(target_interval / s.interval);
    if (ratio == 1) return s;
    std::size_t groups = s.size() / ratio;  // trailing partial group dropped
    if (groups == 0) throw DataError("resample: series shorter than one output sample");
    std::vector<double> out(groups);
    for (std::size_t g = 0; g < groups; ++g) {
        double acc = 0.0;
        for (std::size_t i = 0; i < ratio; ++i) acc += s.values[g * ratio + i];
        out[g] = acc / static_cast<double>(ratio);
    }
    return PowerSeries{s.device_id, s.start_time, target_interval, std::move(out)};
}

HouseData resample(const HouseData& house, std::int64_t target_interval) {
    validate_house(house);
    std::size_t ratio = 1;
    HouseData out;
    for (const auto& d : house.devices) {
        out.devices.push_back(resample(d, target_interval));
        ratio = static_cast<std::size_t>(target_interval / d.interval);
    }
    if (house.mains) out.mains = resample(*house.mains, target_interval);
    std::size_t n = out.sample_count();
    for (auto [b, e] : house.unreliable) {
        // any overlap marks the pooled sample
        std::size_t ob = b / ratio;
        std::size_t oe = (e + ratio - 1) / ratio;
        if (ob >= n) continue;
        if (oe > n) oe = n;
        out.unreliable.emplace_back(ob, oe);
    }
    return out;
}

std::pair<PowerSeries, PowerSeries> split_train_test(const PowerSeries& s, double fraction) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw DataError("split: fraction must lie strictly between 0 and 1");
    std::size_t n_train = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(s.size())));
    if (n_train == 0 || n_train >= s.size())
        throw DataError("split: fraction " + std::to_string(fraction) + " leaves an empty part");
    PowerSeries train{s.device_id, s.start_time, s.interval,
                      {s.values.begin(), s.values.begin() + static_cast<std::ptrdiff_t>(n_train)}};
    PowerSeries test{s.device_id,
                     s.start_time + static_cast<std::int64_t>(n_train) * s.interval, s.interval,
                     {s.values.begin() + static_cast<std::ptrdiff_t>(n_train), s.values.end()}};
    return {std::move(train), std::move(test)};
}

std::pair<HouseData, HouseData> split_train_test(const HouseData& house, double fraction) {
    validate_house(house);
    HouseData train, test;
    std::size_t n_train = 0;
    for (const auto& d : house.devices) {
        auto [tr, te] = split_train_test(d, fraction);
        n_train = tr.size();
        train.devices.push_back(std::move(tr));
        test.devices.push_back(std::move(te));
    }
    if (house.mains) {
        auto [tr, te] = split_train_test(*house.mains, fraction);
        train.mains = std::move(tr);
        test.mains = std::move(te);
    }
    for (auto [b, e] : house.unreliable) {
        if (b < n_train) train.unreliable.emplace_back(b, e < n_train ? e : n_train);
        if (e > n_train)
            test.unreliable.emplace_back(b > n_train ? b - n_train : 0, e - n_train);
    }
    return {std::move(train), std::move(test)};
}

WindowMatrix windows(const PowerSeries& s, std::size_t w, std::size_t stride) {
    if (w < 1) throw DataError("windows: w must be >= 1");
    if (stride < 1) throw DataError("windows: stride must be >= 1");
    if (w > s.size())
        throw DataError("windows: w=" + std::to_string(w) + " exceeds series length " +
                        std::to_string(s.size()));
    WindowMatrix m;
    m.w = w;
    m.stride = stride;
    for (std::size_t start = 0; start + w <= s.size(); start += stride) {
        m.cols.emplace_back(s.values.begin() + static_cast<std::ptrdiff_t>(start),
                            s.values.begin() + static_cast<std::ptrdiff_t>(start + w));
    }
    return m;
}

PowerSeries pseudo_signal(const HouseData& house, const std::vector<int>& raw_indices) {
    if (raw_indices.empty()) throw DataError("pseudo_signal: empty device set");
    // canonicalize: the id of a pseudo-device names the set, not the request order
    std::vector<int> indices = raw_indices;
    std::sort(indices.begin(), indices.end());
    indices.erase(std::unique(indices.begin(), indices.end()), indices.end());
    std::vector<double> acc;
    std::string id;
    for (int idx : indices) {
        if (idx < 0 || static_cast<std::size_t>(idx) >= house.devices.size())
            throw DataError("pseudo_signal: device index out of range");
        const auto& d = house.devices[static_cast<std::size_t>(idx)];
        if (acc.empty()) {
            acc = d.values;
            id = d.device_id;
        } else {
            if (d.size() != acc.size()) throw DataError("pseudo_signal: misaligned channels");
            kernels::active().accumulate(acc.data(), d.values.data(), acc.size());
            id += "+" + d.device_id;
        }
    }
    const auto& ref = house.devices[static_cast<std::size_t>(indices.front())];
    return PowerSeries{std::move(id), ref.start_time, ref.interval, std::move(acc)};
}

PowerSeries pseudo_signal(const HouseData& house, const std::vector<std::string>& ids) {
    std::vector<int> idx;
    idx.reserve(ids.size());
    for (const auto& id : ids) {
        int i = house.device_index(id);
        if (i < 0) throw DataError("pseudo_signal: unknown device " + id);
        idx.push_back(i);
    }
    return pseudo_signal(house, idx);
}

PowerSeries aggregate_sum(const HouseData& house) {
    validate_house(house);
    std::vector<int> all(house.devices.size());
    for (std::size_t i = 0; i < all.size(); ++i) all[i] = static_cast<int>(i);
    auto s = pseudo_signal(house, all);
    s.device_id = "aggregate";
    return s;
}

}  // namespace nilmtree
