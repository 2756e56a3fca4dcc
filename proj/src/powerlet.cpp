#include "nilmtree/powerlet.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

#include "nilmtree/errors.hpp"
#include "nilmtree/kernels.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double l1(const Powerlet& a, const Powerlet& b) {
    return kernels::active().l1_distance(a.data(), b.data(), a.size());
}

// n-choose-k with saturation, for the exact-enumeration gate.
std::uint64_t choose_capped(std::size_t n, std::size_t k, std::uint64_t cap) {
    if (k > n) return 0;
    std::uint64_t r = 1;
    for (std::size_t i = 1; i <= k; ++i) {
        r = r * (n - k + i) / i;
        if (r > cap) return cap + 1;
    }
    return r;
}

// Lexicographically first cost-minimal k-subset, by full enumeration.
std::vector<std::size_t> medoids_exact(const std::vector<std::vector<double>>& dist, std::size_t k) {
    std::size_t n = dist.size();
    std::vector<std::size_t> subset(k), best;
    for (std::size_t i = 0; i < k; ++i) subset[i] = i;
    double best_cost = kInf;
    while (true) {
        double cost = 0.0;
        for (std::size_t p = 0; p < n; ++p) {
            double d = kInf;
            for (std::size_t m : subset) d = std::min(d, dist[p][m]);
            cost += d;
        }
        if (cost < best_cost) {  // strict: first optimum in lex order wins
            best_cost = cost;
            best = subset;
        }
        // next combination
        std::size_t i = k;
        while (i > 0 && subset[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++subset[i - 1];
        for (std::size_t j = i; j < k; ++j) subset[j] = subset[j - 1] + 1;
    }
    return best;
}

// Greedy farthest-point seed + best single-swap refinement. One sweep
// over the points accumulates the cost deltas for replacing every
// current medoid with candidate h, so a full swap scan is O(n^2 + nk)
// per round instead of O(k n^2).
std::vector<std::size_t> medoids_pam(const std::vector<std::vector<double>>& dist, std::size_t k,
                                     std::uint64_t seed) {
    constexpr int kMaxRounds = 200;  // one accepted swap per round
    std::size_t n = dist.size();
    std::mt19937_64 rng(seed);
    std::vector<std::size_t> med;
    med.reserve(k);
    med.push_back(std::uniform_int_distribution<std::size_t>(0, n - 1)(rng));
    std::vector<char> is_med(n, 0);
    is_med[med[0]] = 1;
    std::vector<double> dmin(dist[med[0]]);
    while (med.size() < k) {
        std::size_t pick = n;
        double far = -1.0;
        for (std::size_t p = 0; p < n; ++p) {
            if (is_med[p]) continue;
            if (dmin[p] > far) {  // ties keep the lowest index
                far = dmin[p];
                pick = p;
            }
        }
        med.push_back(pick);
        is_med[pick] = 1;
        const double* row = dist[pick].data();
        for (std::size_t p = 0; p < n; ++p) dmin[p] = std::min(dmin[p], row[p]);
    }
    std::sort(med.begin(), med.end());

    std::vector<double> d1(n), d2(n);   // nearest / second-nearest medoid distance
    std::vector<std::size_t> n1(n, 0);  // index into med of the nearest medoid
    auto recache = [&] {
        for (std::size_t p = 0; p < n; ++p) {
            double a = kInf, b = kInf;
            std::size_t ai = 0;
            for (std::size_t mi = 0; mi < med.size(); ++mi) {
                double d = dist[p][med[mi]];
                if (d < a) {
                    b = a;
                    a = d;
                    ai = mi;
                } else if (d < b) {
                    b = d;
                }
            }
            d1[p] = a;
            d2[p] = b;
            n1[p] = ai;
        }
    };
    recache();

    std::vector<double> removal(k);
    for (int round = 0; round < kMaxRounds; ++round) {
        double best_delta = -1e-12;  // strictly improving swaps only
        std::size_t best_mi = n, best_h = n;
        for (std::size_t h = 0; h < n; ++h) {
            if (is_med[h]) continue;
            const double* row = dist[h].data();  // symmetric: row h = column h
            double shared = 0.0;                 // gain applying to any removal
            std::fill(removal.begin(), removal.end(), 0.0);
            for (std::size_t p = 0; p < n; ++p) {
                double dh = row[p];
                double common = dh < d1[p] ? dh - d1[p] : 0.0;
                shared += common;
                // removing p's own medoid re-homes p to h or its second-best
                removal[n1[p]] += std::min(dh, d2[p]) - d1[p] - common;
            }
            for (std::size_t mi = 0; mi < med.size(); ++mi) {
                double delta = shared + removal[mi];
                if (delta < best_delta) {
                    best_delta = delta;
                    best_mi = mi;
                    best_h = h;
                }
            }
        }
        if (best_mi == n) break;
        is_med[med[best_mi]] = 0;
        is_med[best_h] = 1;
        med[best_mi] = best_h;
        std::sort(med.begin(), med.end());
        recache();
    }
    return med;
}

std::int64_t quantize(double v, double quantum) {
    return static_cast<std::int64_t>(std::llround(v / quantum));
}

}  // namespace

std::vector<std::size_t> k_medoids(const std::vector<Powerlet>& vectors, std::size_t k,
                                   std::uint64_t seed) {
    std::size_t n = vectors.size();
    if (n == 0) throw DataError("k_medoids: no vectors");
    if (k < 1 || k > n) throw DataError("k_medoids: k must lie in [1, n]");
    for (const auto& v : vectors)
        if (v.size() != vectors.front().size()) throw DataError("k_medoids: ragged vectors");

    std::vector<std::vector<double>> dist(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) dist[i][j] = dist[j][i] = l1(vectors[i], vectors[j]);

    if (choose_capped(n, k, 512) <= 512) return medoids_exact(dist, k);
    return medoids_pam(dist, k, seed);
}

double medoid_assignment_cost(const std::vector<Powerlet>& vectors,
                              const std::vector<std::size_t>& medoids) {
    double cost = 0.0;
    for (const auto& v : vectors) {
        double d = kInf;
        for (std::size_t m : medoids) d = std::min(d, l1(v, vectors[m]));
        cost += d;
    }
    return cost;
}

void validate_subdictionary(const SubDictionary& d) {
    if (d.w == 0) throw DataError("subdictionary '" + d.owner + "': w must be >= 1");
    if (d.powerlets.empty()) throw DataError("subdictionary '" + d.owner + "': empty");
    for (const auto& p : d.powerlets) {
        if (p.size() != d.w) throw DataError("subdictionary '" + d.owner + "': ragged powerlet");
        for (double v : p)
            if (!std::isfinite(v) || v < 0.0)
                throw DataError("subdictionary '" + d.owner + "': bad powerlet value");
    }
    for (double v : d.powerlets.front())
        if (v != 0.0) throw DataError("subdictionary '" + d.owner + "': slot 0 must be the zero powerlet");
    for (std::size_t i = 1; i < d.powerlets.size(); ++i)
        if (std::all_of(d.powerlets[i].begin(), d.powerlets[i].end(),
                        [](double v) { return v == 0.0; }))
            throw DataError("subdictionary '" + d.owner + "': duplicate zero powerlet");
}

SubDictionary extract_powerlets(const PowerSeries& series, const PowerletParams& params,
                                const std::vector<SampleRange>& skip) {
    if (params.w < 1) throw DataError("extract_powerlets: w must be >= 1");
    if (params.k < 1) throw DataError("extract_powerlets: k must be >= 1");
    if (params.stride < 1) throw DataError("extract_powerlets: stride must be >= 1");
    if (params.dedup_quantum <= 0) throw DataError("extract_powerlets: dedup quantum must be > 0");
    WindowMatrix wm = windows(series, params.w, params.stride);

    auto overlaps_skip = [&](std::size_t start) {
        for (auto [b, e] : skip)
            if (start < e && b < start + params.w) return true;
        return false;
    };

    // first-occurrence dedup keyed on the rounded window
    std::unordered_map<std::string, std::size_t> seen;
    std::vector<Powerlet> distinct;
    std::vector<std::int64_t> key_buf(params.w);
    for (std::size_t c = 0; c < wm.count(); ++c) {
        if (overlaps_skip(c * params.stride)) continue;
        const auto& col = wm.cols[c];
        bool off = std::all_of(col.begin(), col.end(),
                               [&](double v) { return v < params.off_threshold; });
        if (off) continue;
        for (std::size_t i = 0; i < params.w; ++i) key_buf[i] = quantize(col[i], params.dedup_quantum);
        std::string key(reinterpret_cast<const char*>(key_buf.data()),
                        params.w * sizeof(std::int64_t));
        if (seen.emplace(std::move(key), distinct.size()).second) distinct.push_back(col);
    }

    SubDictionary dict;
    dict.owner = series.device_id;
    dict.w = params.w;
    dict.powerlets.push_back(Powerlet(params.w, 0.0));  // reserved off slot

    if (distinct.empty()) {
        validate_subdictionary(dict);  // constant-off input: off slot only
        return dict;
    }

    if (distinct.size() > params.max_windows && params.max_windows > 0) {
        // even deterministic subsample to bound the distance matrix
        std::vector<Powerlet> kept;
        kept.reserve(params.max_windows);
        std::size_t n = distinct.size();
        for (std::size_t i = 0; i < params.max_windows; ++i)
            kept.push_back(std::move(distinct[i * n / params.max_windows]));
        distinct = std::move(kept);
    }

    if (distinct.size() <= params.k) {
        for (auto& p : distinct) dict.powerlets.push_back(std::move(p));
        validate_subdictionary(dict);
        return dict;
    }

    auto medoids = k_medoids(distinct, params.k, params.seed);
    for (std::size_t m : medoids) dict.powerlets.push_back(distinct[m]);
    validate_subdictionary(dict);
    return dict;
}

namespace {

double min_pair_l1(const SubDictionary& a, const SubDictionary& b, std::size_t from) {
    if (a.w != b.w)
        throw DataError("dissimilarity: window length mismatch (" + std::to_string(a.w) + " vs " +
                        std::to_string(b.w) + ")");
    double best = kInf;
    for (std::size_t i = from; i < a.powerlets.size(); ++i)
        for (std::size_t j = from; j < b.powerlets.size(); ++j)
            best = std::min(best, l1(a.powerlets[i], b.powerlets[j]));
    return best == kInf ? 0.0 : best;
}

}  // namespace

double dissimilarity(const SubDictionary& a, const SubDictionary& b) {
    return min_pair_l1(a, b, 0);
}

double nonzero_dissimilarity(const SubDictionary& a, const SubDictionary& b) {
    return min_pair_l1(a, b, 1);
}

void save_subdictionary(const SubDictionary& d, const std::string& path) {
    validate_subdictionary(d);
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out << d.owner << ',' << d.w << ',' << d.powerlets.size() << '\n';
    for (const auto& p : d.powerlets) {
        for (std::size_t i = 0; i < p.size(); ++i) {
            if (i) out << ',';
            out << format_double(p[i]);
        }
        out << '\n';
    }
}

SubDictionary load_subdictionary(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    // header: owner,w,N -- owner may itself contain '+' joined ids
    auto last = line.rfind(',');
    auto second_last = last == std::string::npos ? std::string::npos : line.rfind(',', last - 1);
    if (second_last == std::string::npos) throw DataError(path + ": malformed header");
    SubDictionary d;
    d.owner = line.substr(0, second_last);
    std::size_t n_rows = 0;
    try {
        d.w = std::stoul(line.substr(second_last + 1, last - second_last - 1));
        n_rows = std::stoul(line.substr(last + 1));
    } catch (const std::exception&) {
        throw DataError(path + ": malformed header");
    }
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        Powerlet p;
        const char* ptr = line.data();
        const char* end = line.data() + line.size();
        while (ptr < end) {
            double v = 0.0;
            auto res = std::from_chars(ptr, end, v);
            if (res.ec != std::errc{}) throw DataError(path + ": bad value in powerlet row");
            p.push_back(v);
            ptr = res.ptr;
            if (ptr < end && *ptr == ',') ++ptr;
        }
        if (p.size() != d.w) throw DataError(path + ": powerlet row has wrong width");
        d.powerlets.push_back(std::move(p));
    }
    if (d.powerlets.size() != n_rows) throw DataError(path + ": row count disagrees with header");
    validate_subdictionary(d);
    return d;
}

}  // namespace nilmtree
