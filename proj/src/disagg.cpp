#include "nilmtree/disagg.hpp"

#include <charconv>
#include <exception>
#include <filesystem>
#include <fstream>
#include <mutex>

#include "nilmtree/errors.hpp"
#include "nilmtree/kernels.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

namespace fs = std::filesystem;

Backend backend_from_string(const std::string& s) {
    if (s == "exhaustive") return Backend::exhaustive;
    if (s == "admm") return Backend::admm;
    throw ConfigError("unknown backend: " + s + " (expected exhaustive or admm)");
}

std::string to_string(Backend b) {
    return b == Backend::exhaustive ? "exhaustive" : "admm";
}

namespace {

void dump_solve(const std::string& dir, std::size_t start, DeviceMask set,
                const SelectionProblem& p, const SelectionSolution& sol) {
    fs::create_directories(dir);
    std::string name = "w" + std::to_string(start) + "_n" + std::to_string(set) + ".txt";
    std::ofstream out(fs::path(dir) / name);
    if (!out) return;  // dumps are best-effort diagnostics
    out << "y:";
    for (double v : p.y) out << ' ' << format_double(v);
    out << "\nblock1 (" << p.block1->size() << " cols):\n";
    for (const auto& c : *p.block1) {
        for (double v : c) out << ' ' << format_double(v);
        out << '\n';
    }
    out << "block2 (" << p.block2->size() << " cols):\n";
    for (const auto& c : *p.block2) {
        for (double v : c) out << ' ' << format_double(v);
        out << '\n';
    }
    out << "selected: " << sol.first << ' ' << sol.second << '\n';
    out << "objective: " << format_double(sol.objective) << '\n';
    if (sol.relaxation)
        out << "admm iterations: " << sol.relaxation->iterations
            << " converged: " << (sol.relaxation->converged ? 1 : 0) << '\n';
}

void decode_node(const TreeNode& node, const std::vector<double>& y, const DecodeConfig& cfg,
                 std::uint64_t window_seed, std::size_t window_start,
                 std::vector<Powerlet>& out, std::vector<NodeDecode>* diag) {
    if (node.leaf()) {
        out[static_cast<std::size_t>(mask_indices(node.set).front())] = y;
        return;
    }
    SelectionProblem p;
    p.block1 = &node.left_dict->powerlets;
    p.block2 = &node.right_dict->powerlets;
    p.y = y;

    SelectionSolution sol;
    if (cfg.backend == Backend::exhaustive) {
        sol = solve_exhaustive(p);
    } else {
        AdmmConfig ac = cfg.admm;
        ac.seed = mix64(window_seed, node.set);
        sol = solve_admm(p, ac);
    }
    if (diag)
        diag->push_back(NodeDecode{node.set, sol.objective,
                                   sol.relaxation ? sol.relaxation->converged : true});
    if (!cfg.solver_dump.empty()) dump_solve(cfg.solver_dump, window_start, node.set, p, sol);

    decode_node(*node.left, p.block1->at(sol.first), cfg, window_seed, window_start, out, diag);
    decode_node(*node.right, p.block2->at(sol.second), cfg, window_seed, window_start, out, diag);
}

}  // namespace

std::vector<Powerlet> decode_window(const DecompositionTree& tree, const std::vector<double>& y,
                                    const DecodeConfig& cfg, std::uint64_t window_seed,
                                    std::vector<NodeDecode>* diag) {
    if (!tree.root || tree.root->leaf()) throw DataError("decode: tree has no internal nodes");
    if (y.size() != tree.powerlet_params.w)
        throw DataError("decode: window length " + std::to_string(y.size()) +
                        " differs from model w=" + std::to_string(tree.powerlet_params.w));
    std::vector<Powerlet> out(tree.devices.size());
    decode_node(*tree.root, y, cfg, window_seed, 0, out, diag);
    return out;
}

std::vector<Powerlet> flat_decode_window(const std::vector<const SubDictionary*>& dicts,
                                         const std::vector<double>& y) {
    if (dicts.empty()) throw DataError("flat decode: no dictionaries");
    double combos = 1.0;
    for (const auto* d : dicts) {
        if (!d || d->powerlets.empty()) throw DataError("flat decode: empty dictionary");
        if (d->w != y.size()) throw DataError("flat decode: window length mismatch");
        combos *= static_cast<double>(d->powerlets.size());
    }
    if (combos > 5e7) throw DataError("flat decode: candidate space too large");

    const auto& ops = kernels::active();
    const std::size_t L = dicts.size();
    std::vector<std::size_t> idx(L, 0), best_idx(L, 0);
    std::vector<double> acc(y.size());
    double best_sq = std::numeric_limits<double>::infinity();
    while (true) {
        std::fill(acc.begin(), acc.end(), 0.0);
        for (std::size_t d = 0; d < L; ++d)
            ops.accumulate(acc.data(), dicts[d]->powerlets[idx[d]].data(), y.size());
        double sq = ops.squared_distance(y.data(), acc.data(), y.size());
        if (sq < best_sq) {  // strict: first (lexicographically smallest) tuple wins ties
            best_sq = sq;
            best_idx = idx;
        }
        // odometer, last block fastest: lexicographic visit order
        std::size_t d = L;
        while (d > 0) {
            --d;
            if (++idx[d] < dicts[d]->powerlets.size()) break;
            idx[d] = 0;
            if (d == 0) {
                std::vector<Powerlet> out(L);
                for (std::size_t q = 0; q < L; ++q) out[q] = dicts[q]->powerlets[best_idx[q]];
                return out;
            }
        }
    }
}

DisaggregationResult disaggregate(const DecompositionTree& tree, const PowerSeries& aggregate,
                                  const DecodeConfig& cfg) {
    if (!tree.root) throw DataError("disaggregate: empty tree");
    const std::size_t w = tree.powerlet_params.w;
    const std::size_t T = aggregate.size();
    if (T < w)
        throw DataError("disaggregate: aggregate has " + std::to_string(T) +
                        " samples, need at least w=" + std::to_string(w));

    struct Tile {
        std::size_t start;
        std::size_t fresh;
    };
    std::vector<Tile> tiles;
    for (std::size_t s = 0; s + w <= T; s += w) tiles.push_back({s, w});
    if (T % w != 0) tiles.push_back({T - w, T % w});  // trailing overlap, fresh tail only

    DisaggregationResult res;
    res.windows.resize(tiles.size());
    res.estimates.reserve(tree.devices.size());
    for (const auto& name : tree.devices)
        res.estimates.push_back(PowerSeries{name, aggregate.start_time, aggregate.interval,
                                            std::vector<double>(T, 0.0)});

    std::mutex err_mu;
    std::exception_ptr first_error;
    parallel_for(tiles.size(), cfg.threads, [&](std::size_t t) {
        try {
            const auto [start, fresh] = tiles[t];
            std::vector<double> y(aggregate.values.begin() + static_cast<std::ptrdiff_t>(start),
                                  aggregate.values.begin() + static_cast<std::ptrdiff_t>(start + w));
            std::vector<NodeDecode> diag;
            auto pieces = decode_window(tree, y, cfg, mix64(cfg.admm.seed, start), &diag);
            for (std::size_t d = 0; d < pieces.size(); ++d)
                for (std::size_t i = w - fresh; i < w; ++i)
                    res.estimates[d].values[start + i] = pieces[d][i];
            res.windows[t] = WindowDecode{start, fresh, std::move(diag)};
        } catch (...) {
            std::lock_guard<std::mutex> lock(err_mu);
            if (!first_error) first_error = std::current_exception();
        }
    });
    if (first_error) std::rethrow_exception(first_error);
    return res;
}

void write_estimates_csv(const DisaggregationResult& result, const PowerSeries& aggregate,
                         const HouseData& truth, const std::string& path) {
    const std::size_t T = aggregate.size();
    for (const auto& est : result.estimates) {
        if (est.size() != T) throw DataError("estimates misaligned with aggregate");
        const auto& tr = truth.device(est.device_id);
        if (tr.size() != T || tr.start_time != aggregate.start_time)
            throw DataError("truth channel '" + est.device_id + "' misaligned with aggregate");
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << "timestamp,aggregate";
    for (const auto& est : result.estimates) out << ",truth_" << est.device_id;
    for (const auto& est : result.estimates) out << ",est_" << est.device_id;
    out << '\n';
    for (std::size_t i = 0; i < T; ++i) {
        out << aggregate.start_time + static_cast<std::int64_t>(i) * aggregate.interval << ','
            << format_double(aggregate.values[i]);
        for (const auto& est : result.estimates)
            out << ',' << format_double(truth.device(est.device_id).values[i]);
        for (const auto& est : result.estimates) out << ',' << format_double(est.values[i]);
        out << '\n';
    }
}

EstimatesTable read_estimates_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    std::vector<std::string> header;
    {
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                header.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        header.push_back(cur);
    }
    if (header.size() < 4 || header[0] != "timestamp" || header[1] != "aggregate")
        throw DataError(path + ": not an estimates file");
    EstimatesTable tab;
    std::vector<int> truth_col, est_col;
    for (std::size_t c = 2; c < header.size(); ++c) {
        if (header[c].rfind("truth_", 0) == 0) {
            tab.devices.push_back(header[c].substr(6));
            truth_col.push_back(static_cast<int>(c));
        }
    }
    for (const auto& dev : tab.devices) {
        auto it = std::find(header.begin(), header.end(), "est_" + dev);
        if (it == header.end()) throw DataError(path + ": missing estimate column for " + dev);
        est_col.push_back(static_cast<int>(it - header.begin()));
    }
    if (tab.devices.empty()) throw DataError(path + ": no truth/estimate column pairs");
    tab.truth.resize(tab.devices.size());
    tab.estimates.resize(tab.devices.size());

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::string cur;
        for (char c : line) {
            if (c == ',') {
                f.push_back(cur);
                cur.clear();
            } else if (c != '\r') {
                cur += c;
            }
        }
        f.push_back(cur);
        if (f.size() != header.size()) throw DataError(path + ": ragged row");
        auto num = [&](const std::string& s) {
            double v = 0.0;
            auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw DataError(path + ": bad numeric field '" + s + "'");
            return v;
        };
        std::int64_t ts = 0;
        {
            auto res = std::from_chars(f[0].data(), f[0].data() + f[0].size(), ts);
            if (res.ec != std::errc{}) throw DataError(path + ": bad timestamp");
        }
        tab.timestamps.push_back(ts);
        tab.aggregate.push_back(num(f[1]));
        for (std::size_t d = 0; d < tab.devices.size(); ++d) {
            tab.truth[d].push_back(num(f[static_cast<std::size_t>(truth_col[d])]));
            tab.estimates[d].push_back(num(f[static_cast<std::size_t>(est_col[d])]));
        }
    }
    if (tab.timestamps.empty()) throw DataError(path + ": no data rows");
    return tab;
}

}  // namespace nilmtree
