#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilmtree/series.hpp"
#include "nilmtree/solver.hpp"
#include "nilmtree/tree.hpp"

namespace nilmtree {

enum class Backend { exhaustive, admm };

Backend backend_from_string(const std::string& s);
std::string to_string(Backend b);

struct DecodeConfig {
    Backend backend = Backend::exhaustive;
    AdmmConfig admm;
    int threads = 1;
    std::string solver_dump;  // directory for per-solve dumps; empty = off
};

// One node solve within a window decode.
struct NodeDecode {
    DeviceMask set = 0;
    double objective = 0.0;
    bool converged = true;  // always true for the exhaustive backend
};

struct WindowDecode {
    std::size_t start = 0;          // first sample index covered by this window
    std::size_t fresh = 0;          // trailing samples actually written (== w except
                                    // for the final overlapping window)
    std::vector<NodeDecode> nodes;  // exactly one entry per internal node
};

struct DisaggregationResult {
    std::vector<PowerSeries> estimates;  // tree.devices order, aligned with the aggregate
    std::vector<WindowDecode> windows;
};

// Decodes one w-sample window: the root owns y, every internal node
// splits its assigned signal between its children's dictionaries, the
// chosen powerlet becomes the child's assigned signal, and each leaf's
// assigned powerlet is that device's estimate. Output is indexed like
// tree.devices. `diag` (optional) receives one entry per internal node.
std::vector<Powerlet> decode_window(const DecompositionTree& tree, const std::vector<double>& y,
                                    const DecodeConfig& cfg, std::uint64_t window_seed,
                                    std::vector<NodeDecode>* diag = nullptr);

// Single-level joint baseline: one powerlet per device, all devices in
// one node, full cartesian scan with lexicographic tie-breaks. Used for
// comparison studies; cost grows with the product of dictionary sizes.
std::vector<Powerlet> flat_decode_window(const std::vector<const SubDictionary*>& dicts,
                                         const std::vector<double>& y);

// Tiles the aggregate with non-overlapping w-windows; a trailing
// remainder is covered by one final window ending at T whose already
// decoded samples are discarded. aggregate.size() >= w required.
DisaggregationResult disaggregate(const DecompositionTree& tree, const PowerSeries& aggregate,
                                  const DecodeConfig& cfg);

// Estimates CSV: timestamp, aggregate, truth_<dev>..., est_<dev>...
// `truth` must carry a channel for every tree device on the same grid.
void write_estimates_csv(const DisaggregationResult& result, const PowerSeries& aggregate,
                         const HouseData& truth, const std::string& path);

struct EstimatesTable {
    std::vector<std::int64_t> timestamps;
    std::vector<double> aggregate;
    std::vector<std::string> devices;
    std::vector<std::vector<double>> truth;      // per device
    std::vector<std::vector<double>> estimates;  // per device
};
EstimatesTable read_estimates_csv(const std::string& path);

}  // namespace nilmtree
