#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilmtree/series.hpp"

namespace nilmtree {

// One operating-mode signature: w consecutive Watt readings.
using Powerlet = std::vector<double>;

// Per-(pseudo)device powerlet set. powerlets[0] is always the reserved
// all-zero "off" powerlet; the rest are pairwise distinct w-vectors.
struct SubDictionary {
    std::string owner;
    std::size_t w = 0;
    std::vector<Powerlet> powerlets;

    std::size_t size() const { return powerlets.size(); }
};

void validate_subdictionary(const SubDictionary& d);

struct PowerletParams {
    std::size_t w = 15;
    std::size_t k = 40;
    std::uint64_t seed = 1;
    std::size_t stride = 1;           // sliding-window step during collection
    std::size_t max_windows = 2000;   // post-dedup cap (even subsample) for clustering
    double off_threshold = 1.0;       // window is "off" when every entry < this
    double dedup_quantum = 0.1;       // Watts; rounding grid for duplicate detection
};

// L1 k-medoids over the given vectors. Returns the selected medoid
// indices in ascending order. Exact subset enumeration when the search
// space is tiny (lexicographically first optimum, so ties break toward
// the lowest indices); otherwise greedy farthest-point seeding + best
// single-swap refinement, one swap per round. Requires 1 <= k <= n.
std::vector<std::size_t> k_medoids(const std::vector<Powerlet>& vectors, std::size_t k,
                                   std::uint64_t seed);

// Total L1 cost of assigning every vector to its nearest medoid.
double medoid_assignment_cost(const std::vector<Powerlet>& vectors,
                              const std::vector<std::size_t>& medoids);

// Collects stride-spaced windows, deduplicates them on a 0.1 W grid,
// drops all-off windows (every entry below off_threshold) and windows
// overlapping `skip` ranges, then clusters the remainder. The result
// holds the zero powerlet plus at most k medoids, so size <= k+1.
SubDictionary extract_powerlets(const PowerSeries& series, const PowerletParams& params,
                                const std::vector<SampleRange>& skip = {});

// Smallest pairwise L1 distance between the two powerlet sets. Both
// dictionaries contain the zero powerlet, so this is 0 by construction;
// kept for completeness and for callers with raw column sets.
double dissimilarity(const SubDictionary& a, const SubDictionary& b);

// Same, restricted to non-reserved (index >= 1) powerlets. This is the
// quantity tree construction maximizes. 0 when either side has none.
double nonzero_dissimilarity(const SubDictionary& a, const SubDictionary& b);

// Text format: header line "owner,w,N" then N rows of w comma-separated
// Watt values, one powerlet per row.
void save_subdictionary(const SubDictionary& d, const std::string& path);
SubDictionary load_subdictionary(const std::string& path);

}  // namespace nilmtree
