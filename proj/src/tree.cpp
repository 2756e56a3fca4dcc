#include "nilmtree/tree.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <random>

#include <json.hpp>

#include "nilmtree/errors.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

namespace fs = std::filesystem;
using nlohmann::json;

std::vector<int> mask_indices(DeviceMask m) {
    std::vector<int> out;
    for (int i = 0; m != 0; ++i, m >>= 1)
        if (m & 1u) out.push_back(i);
    return out;
}

PowerletProvider::PowerletProvider(const HouseData* train, PowerletParams params)
    : train_(train), params_(params) {
    validate_house(*train);
    if (train_->devices.size() > 31) throw DataError("more than 31 device channels");
}

const SubDictionary& PowerletProvider::dict(DeviceMask set) {
    if (set == 0) throw DataError("dictionary requested for the empty device set");
    {
        std::lock_guard<std::mutex> lock(mu_);
        auto it = cache_.find(set);
        if (it != cache_.end()) return *it->second;
    }
    PowerSeries signal = pseudo_signal(*train_, mask_indices(set));
    auto dict = std::make_unique<SubDictionary>(
        extract_powerlets(signal, params_, train_->unreliable));
    std::lock_guard<std::mutex> lock(mu_);
    auto [it, inserted] = cache_.emplace(set, std::move(dict));
    return *it->second;
}

namespace {

// Shared scorer for the split searches: min pairwise L1 between the two
// pseudo-devices' non-reserved powerlets, memoized per unordered pair.
class PairDissim {
public:
    explicit PairDissim(PowerletProvider& p) : provider_(p) {}

    double operator()(DeviceMask a, DeviceMask b) {
        std::uint64_t key = a < b ? (std::uint64_t(a) << 32) | b : (std::uint64_t(b) << 32) | a;
        auto it = cache_.find(key);
        if (it != cache_.end()) return it->second;
        double d = nonzero_dissimilarity(provider_.dict(a), provider_.dict(b));
        cache_.emplace(key, d);
        return d;
    }

private:
    PowerletProvider& provider_;
    std::map<std::uint64_t, double> cache_;
};

DeviceMask bit(int i) { return DeviceMask(1) << i; }

}  // namespace

SplitLog gddm_equisized_split(DeviceMask set, PowerletProvider& provider, std::uint64_t seed,
                              int restarts) {
    auto devs = mask_indices(set);
    const std::size_t l = devs.size();
    if (l < 2) throw DataError("equisized split needs at least 2 devices");
    if (restarts < 1) restarts = 1;
    const std::size_t n1 = (l + 1) / 2;  // first subset keeps the extra device
    PairDissim dis(provider);

    if (l == 2) {  // the only balanced split; swaps would merely mirror it
        SplitLog log;
        log.set = set;
        log.s1 = bit(devs[0]);
        log.s2 = bit(devs[1]);
        log.dissim = dis(log.s1, log.s2);
        log.accepted_dissims.push_back(log.dissim);
        return log;
    }

    SplitLog best;
    bool have_best = false;
    for (int r = 0; r < restarts; ++r) {
        std::vector<int> order = devs;
        std::mt19937_64 rng(mix64(seed, static_cast<std::uint64_t>(r)));
        std::shuffle(order.begin(), order.end(), rng);
        DeviceMask s1 = 0;
        for (std::size_t i = 0; i < n1; ++i) s1 |= bit(order[i]);
        DeviceMask s2 = set ^ s1;

        SplitLog log;
        log.set = set;
        double cur = dis(s1, s2);
        log.accepted_dissims.push_back(cur);

        const int hard_cap = static_cast<int>(4 * l + 8);
        for (int iter = 0; iter < hard_cap; ++iter) {
            // d1: device whose expulsion from s1 gains the most
            int d1 = -1;
            double best_cm1 = -std::numeric_limits<double>::infinity();
            for (int i : devs) {
                if (!(s1 & bit(i))) continue;
                double cm = dis(s1 & ~bit(i), s2 | bit(i));
                if (cm > best_cm1) {
                    best_cm1 = cm;
                    d1 = i;
                }
            }
            // d2: best device to send back, d1 itself allowed (undo)
            DeviceMask t1 = s1 & ~bit(d1), t2 = s2 | bit(d1);
            int d2 = -1;
            double best_cm2 = -std::numeric_limits<double>::infinity();
            for (int j : devs) {
                if (!(t2 & bit(j))) continue;
                double cm = dis(t1 | bit(j), t2 & ~bit(j));
                if (cm > best_cm2) {
                    best_cm2 = cm;
                    d2 = j;
                }
            }
            DeviceMask c1 = t1 | bit(d2), c2 = t2 & ~bit(d2);
            double cand = dis(c1, c2);
            if (!(cand > cur)) {
                // Greedy proposal failed. Scan every single exchange so a
                // converged node is genuinely swap-optimal; the greedy
                // pass can back itself into reverting its own move.
                cand = cur;
                for (int a : devs) {
                    if (!(s1 & bit(a))) continue;
                    for (int b : devs) {
                        if (!(s2 & bit(b))) continue;
                        DeviceMask e1 = (s1 & ~bit(a)) | bit(b);
                        DeviceMask e2 = (s2 & ~bit(b)) | bit(a);
                        double d = dis(e1, e2);
                        if (d > cand) {
                            cand = d;
                            c1 = e1;
                            c2 = e2;
                        }
                    }
                }
                if (!(cand > cur)) break;  // no improving swap: converged
            }
            s1 = c1;
            s2 = c2;
            cur = cand;
            ++log.swaps;
            log.accepted_dissims.push_back(cur);
        }
        log.s1 = s1;
        log.s2 = s2;
        log.dissim = cur;
        if (!have_best || log.dissim > best.dissim) {
            best = std::move(log);
            have_best = true;
        }
    }
    return best;
}

SplitLog gddm_1vr_split(DeviceMask set, PowerletProvider& provider) {
    auto devs = mask_indices(set);
    if (devs.size() < 2) throw DataError("1-vs-rest split needs at least 2 devices");
    PairDissim dis(provider);
    int pick = -1;
    double best = -std::numeric_limits<double>::infinity();
    for (int d : devs) {
        double cm = dis(bit(d), set & ~bit(d));
        if (cm > best) {  // strict: ties keep the lowest device index
            best = cm;
            pick = d;
        }
    }
    SplitLog log;
    log.set = set;
    log.s1 = bit(pick);
    log.s2 = set & ~bit(pick);
    log.dissim = best;
    return log;
}

DpddmResult dpddm(DeviceMask set, double alpha, PowerletProvider& provider, int max_devices) {
    int l = mask_count(set);
    if (l < 2) throw DataError("dpddm needs at least 2 devices");
    if (l > max_devices)
        throw DataError("dpddm: " + std::to_string(l) + " devices exceeds cap of " +
                        std::to_string(max_devices));
    PairDissim dis(provider);

    struct Entry {
        double score;
        DeviceMask left;
    };
    std::map<DeviceMask, Entry> memo;

    std::function<double(DeviceMask)> score = [&](DeviceMask m) -> double {
        if (mask_count(m) == 1) return 0.0;
        auto it = memo.find(m);
        if (it != memo.end()) return it->second.score;
        int sz = mask_count(m);
        int n1 = (sz + 1) / 2;
        DeviceMask low = m & (~m + 1);  // lowest set bit anchors even splits
        std::vector<DeviceMask> cands;
        for (DeviceMask s = m; s != 0; s = (s - 1) & m) {
            if (mask_count(s) != n1) continue;
            if (sz % 2 == 0 && !(s & low)) continue;
            cands.push_back(s);
        }
        std::sort(cands.begin(), cands.end());  // numeric order: deterministic argmax
        double best = -std::numeric_limits<double>::infinity();
        DeviceMask best_left = 0;
        double weight = std::pow(static_cast<double>(sz), alpha);
        for (DeviceMask s : cands) {
            DeviceMask comp = m ^ s;
            double v = score(s) + score(comp) + weight * dis(s, comp);
            if (v > best) {
                best = v;
                best_left = s;
            }
        }
        memo.emplace(m, Entry{best, best_left});
        return best;
    };

    DpddmResult res;
    res.score = score(set);
    std::function<std::unique_ptr<TreeNode>(DeviceMask)> build = [&](DeviceMask m) {
        auto node = std::make_unique<TreeNode>();
        node->set = m;
        if (mask_count(m) > 1) {
            DeviceMask left = memo.at(m).left;
            node->left = build(left);
            node->right = build(m ^ left);
        }
        return node;
    };
    res.root = build(set);
    return res;
}

std::vector<std::string> DecompositionTree::node_names(const TreeNode& n) const {
    std::vector<std::string> out;
    for (int i : mask_indices(n.set)) out.push_back(devices[static_cast<std::size_t>(i)]);
    return out;
}

std::size_t DecompositionTree::leaf_count() const {
    std::size_t n = 0;
    std::function<void(const TreeNode*)> walk = [&](const TreeNode* t) {
        if (!t) return;
        if (t->leaf()) ++n;
        walk(t->left.get());
        walk(t->right.get());
    };
    walk(root.get());
    return n;
}

std::size_t DecompositionTree::node_count() const {
    std::size_t n = 0;
    std::function<void(const TreeNode*)> walk = [&](const TreeNode* t) {
        if (!t) return;
        ++n;
        walk(t->left.get());
        walk(t->right.get());
    };
    walk(root.get());
    return n;
}

DecompositionTree build_tree(const HouseData& train, const PowerletParams& pl,
                             const TreeParams& tp) {
    validate_house(train);
    if (train.devices.size() < 2) throw DataError("tree construction needs at least 2 devices");
    PowerletProvider provider(&train, pl);

    DecompositionTree tree;
    for (const auto& d : train.devices) tree.devices.push_back(d.device_id);
    tree.method = tp.method;
    tree.powerlet_params = pl;
    tree.tree_params = tp;

    DeviceMask full = provider.full_mask();
    if (tp.method == SplitMethod::dpddm) {
        auto res = dpddm(full, tp.alpha, provider, tp.dpddm_max_devices);
        tree.root = std::move(res.root);
    } else {
        std::function<std::unique_ptr<TreeNode>(DeviceMask)> grow = [&](DeviceMask m) {
            auto node = std::make_unique<TreeNode>();
            node->set = m;
            if (mask_count(m) > 1) {
                SplitLog log = tp.method == SplitMethod::gddm_equisized
                                   ? gddm_equisized_split(m, provider, mix64(tp.seed, m),
                                                          tp.restarts)
                                   : gddm_1vr_split(m, provider);
                node->left = grow(log.s1);
                node->right = grow(log.s2);
                tree.split_log.push_back(std::move(log));
            }
            return node;
        };
        tree.root = grow(full);
    }

    // attach child pseudo-device dictionaries to internal nodes
    std::function<void(TreeNode*)> attach = [&](TreeNode* n) {
        if (!n || n->leaf()) return;
        n->left_dict = std::make_unique<SubDictionary>(provider.dict(n->left->set));
        n->right_dict = std::make_unique<SubDictionary>(provider.dict(n->right->set));
        attach(n->left.get());
        attach(n->right.get());
    };
    attach(tree.root.get());
    return tree;
}

namespace {

std::string method_json(SplitMethod m) { return to_string(m); }

json node_to_json(const DecompositionTree& tree, const TreeNode& n, int& counter,
                  std::vector<std::pair<std::string, const SubDictionary*>>& dict_files) {
    int id = counter++;
    json j;
    j["devices"] = tree.node_names(n);
    if (!n.leaf()) {
        std::string stem = "dicts/n" + std::to_string(id);
        j["left_dict_ref"] = stem + "_left.csv";
        j["right_dict_ref"] = stem + "_right.csv";
        dict_files.emplace_back(stem + "_left.csv", n.left_dict.get());
        dict_files.emplace_back(stem + "_right.csv", n.right_dict.get());
        j["left"] = node_to_json(tree, *n.left, counter, dict_files);
        j["right"] = node_to_json(tree, *n.right, counter, dict_files);
    }
    return j;
}

}  // namespace

SplitMethod split_method_from_string(const std::string& s) {
    if (s == "gddm-equi") return SplitMethod::gddm_equisized;
    if (s == "gddm-1vr") return SplitMethod::gddm_1vr;
    if (s == "dpddm") return SplitMethod::dpddm;
    throw ConfigError("unknown method: " + s + " (expected gddm-equi, gddm-1vr or dpddm)");
}

std::string to_string(SplitMethod m) {
    switch (m) {
        case SplitMethod::gddm_equisized: return "gddm-equi";
        case SplitMethod::gddm_1vr: return "gddm-1vr";
        case SplitMethod::dpddm: return "dpddm";
    }
    return "?";
}

void save_tree(const DecompositionTree& tree, const std::string& model_dir) {
    if (!tree.root) throw DataError("save_tree: empty tree");
    fs::create_directories(fs::path(model_dir) / "dicts");
    int counter = 0;
    std::vector<std::pair<std::string, const SubDictionary*>> dict_files;
    json root = node_to_json(tree, *tree.root, counter, dict_files);
    json j;
    j["devices"] = tree.devices;
    j["method"] = method_json(tree.method);
    j["params"] = {{"w", tree.powerlet_params.w},
                   {"k", tree.powerlet_params.k},
                   {"seed", tree.powerlet_params.seed},
                   {"stride", tree.powerlet_params.stride},
                   {"max_windows", tree.powerlet_params.max_windows},
                   {"off_threshold", tree.powerlet_params.off_threshold},
                   {"dedup_quantum", tree.powerlet_params.dedup_quantum},
                   {"alpha", tree.tree_params.alpha},
                   {"tree_seed", tree.tree_params.seed},
                   {"restarts", tree.tree_params.restarts}};
    j["root"] = root;

    for (const auto& [rel, dict] : dict_files) {
        if (!dict) throw DataError("save_tree: internal node without dictionaries");
        save_subdictionary(*dict, (fs::path(model_dir) / rel).string());
    }
    std::ofstream out(fs::path(model_dir) / "tree.json");
    if (!out) throw DataError("cannot write tree.json in " + model_dir);
    out << j.dump(2) << '\n';
}

namespace {

std::unique_ptr<TreeNode> node_from_json(const json& j, const DecompositionTree& tree,
                                         const std::string& model_dir) {
    auto node = std::make_unique<TreeNode>();
    if (!j.contains("devices") || !j["devices"].is_array())
        throw DataError("tree.json: node without device list");
    for (const auto& name : j["devices"]) {
        auto it = std::find(tree.devices.begin(), tree.devices.end(), name.get<std::string>());
        if (it == tree.devices.end())
            throw DataError("tree.json: node names unknown device " + name.get<std::string>());
        node->set |= bit(static_cast<int>(it - tree.devices.begin()));
    }
    bool has_left = j.contains("left");
    if (has_left != j.contains("right"))
        throw DataError("tree.json: node with exactly one child");
    if (has_left) {
        node->left = node_from_json(j["left"], tree, model_dir);
        node->right = node_from_json(j["right"], tree, model_dir);
        if ((node->left->set | node->right->set) != node->set ||
            (node->left->set & node->right->set) != 0)
            throw DataError("tree.json: children do not partition their parent");
        node->left_dict = std::make_unique<SubDictionary>(load_subdictionary(
            (fs::path(model_dir) / j.at("left_dict_ref").get<std::string>()).string()));
        node->right_dict = std::make_unique<SubDictionary>(load_subdictionary(
            (fs::path(model_dir) / j.at("right_dict_ref").get<std::string>()).string()));
    }
    return node;
}

}  // namespace

DecompositionTree load_tree(const std::string& model_dir) {
    std::ifstream in(fs::path(model_dir) / "tree.json");
    if (!in) throw DataError("cannot open tree.json in " + model_dir);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw DataError(std::string("tree.json: ") + e.what());
    }
    DecompositionTree tree;
    if (!j.contains("devices")) throw DataError("tree.json: missing device list");
    for (const auto& d : j["devices"]) tree.devices.push_back(d.get<std::string>());
    if (tree.devices.empty()) throw DataError("tree.json: no devices");
    tree.method = split_method_from_string(j.value("method", "gddm-equi"));
    if (j.contains("params")) {
        const auto& p = j["params"];
        tree.powerlet_params.w = p.value("w", std::size_t(15));
        tree.powerlet_params.k = p.value("k", std::size_t(40));
        tree.powerlet_params.seed = p.value("seed", std::uint64_t(1));
        tree.powerlet_params.stride = p.value("stride", std::size_t(1));
        tree.powerlet_params.max_windows = p.value("max_windows", std::size_t(2000));
        tree.powerlet_params.off_threshold = p.value("off_threshold", 1.0);
        tree.powerlet_params.dedup_quantum = p.value("dedup_quantum", 0.1);
        tree.tree_params.alpha = p.value("alpha", 2.0);
        tree.tree_params.seed = p.value("tree_seed", std::uint64_t(1));
        tree.tree_params.restarts = p.value("restarts", 5);
    }
    tree.tree_params.method = tree.method;
    if (!j.contains("root")) throw DataError("tree.json: missing root");
    tree.root = node_from_json(j["root"], tree, model_dir);

    DeviceMask full = (DeviceMask(1) << tree.devices.size()) - 1;
    if (tree.root->set != full) throw DataError("tree.json: root does not cover every device");
    std::size_t leaves = tree.leaf_count();
    if (leaves != tree.devices.size())
        throw DataError("tree.json: leaves do not biject onto devices");
    return tree;
}

std::string tree_to_dot(const DecompositionTree& tree) {
    if (!tree.root) throw DataError("tree_to_dot: empty tree");
    std::string out = "digraph decomposition {\n";
    int counter = 0;
    std::function<int(const TreeNode&)> walk = [&](const TreeNode& n) -> int {
        int id = counter++;
        auto names = tree.node_names(n);
        std::sort(names.begin(), names.end());
        std::string label;
        for (std::size_t i = 0; i < names.size(); ++i) {
            if (i) label += ", ";
            label += names[i];
        }
        out += "  n" + std::to_string(id) + " [label=\"" + label + "\", shape=" +
               (n.leaf() ? "ellipse" : "box") + "];\n";
        if (!n.leaf()) {
            int l = walk(*n.left);
            int r = walk(*n.right);
            out += "  n" + std::to_string(id) + " -> n" + std::to_string(l) + ";\n";
            out += "  n" + std::to_string(id) + " -> n" + std::to_string(r) + ";\n";
        }
        return id;
    };
    walk(*tree.root);
    out += "}\n";
    return out;
}

}  // namespace nilmtree
