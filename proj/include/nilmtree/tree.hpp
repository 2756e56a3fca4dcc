#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "nilmtree/powerlet.hpp"
#include "nilmtree/series.hpp"

namespace nilmtree {

// Device subsets are bitmasks over the training house's device order.
using DeviceMask = std::uint32_t;

inline int mask_count(DeviceMask m) { return __builtin_popcount(m); }
std::vector<int> mask_indices(DeviceMask m);

// Lazily extracts and caches one SubDictionary per device subset. The
// same physical subset is requested many times while candidate splits
// are scored, so the cache is the difference between minutes and hours.
// Thread-safe.
class PowerletProvider {
public:
    PowerletProvider(const HouseData* train, PowerletParams params);

    const SubDictionary& dict(DeviceMask set);
    const HouseData& house() const { return *train_; }
    const PowerletParams& params() const { return params_; }
    int device_count() const { return static_cast<int>(train_->devices.size()); }
    DeviceMask full_mask() const { return (DeviceMask(1) << device_count()) - 1; }

private:
    const HouseData* train_;
    PowerletParams params_;
    std::mutex mu_;
    std::map<DeviceMask, std::unique_ptr<SubDictionary>> cache_;
};

struct TreeNode {
    DeviceMask set = 0;
    std::unique_ptr<TreeNode> left, right;
    // dictionaries of the two children's pseudo-devices; internal nodes only
    std::unique_ptr<SubDictionary> left_dict, right_dict;

    bool leaf() const { return !left; }
};

enum class SplitMethod { gddm_equisized, gddm_1vr, dpddm };

SplitMethod split_method_from_string(const std::string& s);
std::string to_string(SplitMethod m);

struct TreeParams {
    SplitMethod method = SplitMethod::gddm_equisized;
    double alpha = 2.0;          // dpddm set-size exponent
    std::uint64_t seed = 1;
    int restarts = 5;            // equisized split restarts
    int dpddm_max_devices = 16;  // subset-DP cap
};

// Outcome of one balanced split search, kept for diagnostics: accepted
// swaps must show strictly increasing dissimilarity.
struct SplitLog {
    DeviceMask set = 0;
    DeviceMask s1 = 0, s2 = 0;
    double dissim = 0.0;
    int swaps = 0;                        // accepted swaps in the winning restart
    std::vector<double> accepted_dissims;  // winning restart, initial value first
};

// Balanced two-way partition maximizing nonzero powerlet dissimilarity.
// |s1| = ceil(|set|/2). Local search over single swaps from a seeded
// random start; converged output admits no improving swap.
SplitLog gddm_equisized_split(DeviceMask set, PowerletProvider& provider, std::uint64_t seed,
                              int restarts = 5);

// Peels the device whose subdictionary is most dissimilar from the rest:
// s1 = {argmax}, s2 = remainder. Ties break toward the lowest index.
SplitLog gddm_1vr_split(DeviceMask set, PowerletProvider& provider);

// Exact subset DP over balanced binary decompositions, maximizing
// sum over internal nodes of |S|^alpha * dissimilarity(children).
// Returns the optimal tree (no dictionaries attached) and its score.
struct DpddmResult {
    std::unique_ptr<TreeNode> root;
    double score = 0.0;
};
DpddmResult dpddm(DeviceMask set, double alpha, PowerletProvider& provider,
                  int max_devices = 16);

struct DecompositionTree {
    std::vector<std::string> devices;  // index space of the masks
    SplitMethod method = SplitMethod::gddm_equisized;
    PowerletParams powerlet_params;
    TreeParams tree_params;
    std::unique_ptr<TreeNode> root;
    std::vector<SplitLog> split_log;  // gddm methods only

    int device_count() const { return static_cast<int>(devices.size()); }
    std::vector<std::string> node_names(const TreeNode& n) const;
    std::size_t leaf_count() const;
    std::size_t node_count() const;
};

// Builds the full tree for `train` and attaches child dictionaries to
// every internal node. Needs at least 2 devices.
DecompositionTree build_tree(const HouseData& train, const PowerletParams& pl,
                             const TreeParams& tp);

// Model directory layout: tree.json + dicts/n<id>_{left,right}.csv.
void save_tree(const DecompositionTree& tree, const std::string& model_dir);
DecompositionTree load_tree(const std::string& model_dir);

// Graphviz rendering; deterministic preorder node ids.
std::string tree_to_dot(const DecompositionTree& tree);

}  // namespace nilmtree
