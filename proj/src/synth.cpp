#include "nilmtree/synth.hpp"

#include <algorithm>
#include <random>

#include "nilmtree/errors.hpp"

namespace nilmtree {

namespace {

void validate(const SynthConfig& cfg) {
    if (cfg.devices.empty()) throw ConfigError("synth: no devices configured");
    if (cfg.length < 2) throw ConfigError("synth: length must be >= 2");
    if (cfg.interval <= 0) throw ConfigError("synth: interval must be positive");
    if (cfg.noise_sd < 0) throw ConfigError("synth: noise_sd must be >= 0");
    for (const auto& d : cfg.devices) {
        if (d.name.empty()) throw ConfigError("synth: device without a name");
        if (d.levels.empty()) throw ConfigError("synth: device " + d.name + " has no levels");
        for (double lv : d.levels)
            if (lv < 0) throw ConfigError("synth: device " + d.name + " has a negative level");
        if (!d.dwell.empty() && d.dwell.size() != d.levels.size())
            throw ConfigError("synth: device " + d.name + " dwell/level size mismatch");
        for (double dw : d.dwell)
            if (dw < 0) throw ConfigError("synth: device " + d.name + " has a negative dwell");
    }
    auto find = [&](const std::string& n) {
        for (std::size_t i = 0; i < cfg.devices.size(); ++i)
            if (cfg.devices[i].name == n) return static_cast<int>(i);
        return -1;
    };
    for (const auto& c : cfg.couplings) {
        int s = find(c.src), d = find(c.dst);
        if (s < 0) throw ConfigError("synth: coupling source " + c.src + " unknown");
        if (d < 0) throw ConfigError("synth: coupling target " + c.dst + " unknown");
        if (s == d) throw ConfigError("synth: coupling " + c.src + " onto itself");
        if (c.src_mode >= cfg.devices[static_cast<std::size_t>(s)].levels.size() ||
            c.dst_mode >= cfg.devices[static_cast<std::size_t>(d)].levels.size())
            throw ConfigError("synth: coupling mode index out of range");
        if (!(c.p >= 0.0 && c.p <= 1.0)) throw ConfigError("synth: coupling p outside [0,1]");
    }
}

}  // namespace

HouseData synth_generate(const SynthConfig& cfg) {
    validate(cfg);
    const std::size_t D = cfg.devices.size();
    const std::size_t T = cfg.length;

    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    auto dev_index = [&](const std::string& n) {
        for (std::size_t i = 0; i < D; ++i)
            if (cfg.devices[i].name == n) return i;
        return D;  // unreachable after validate
    };

    std::vector<std::size_t> mode(D, 0);
    std::vector<int> held_by(D, -1);  // coupling index pinning the device, -1 = free
    std::vector<std::vector<std::size_t>> modes(D, std::vector<std::size_t>(T));

    auto leave_prob = [&](std::size_t d, std::size_t m) {
        const auto& dw = cfg.devices[d].dwell;
        double mean = dw.empty() ? 20.0 : dw[m];
        return mean <= 0.0 ? 0.0 : std::min(1.0, 1.0 / mean);
    };

    // entered[d] = true when device d changed into (or started in) its
    // current mode at this step; couplings key off entries.
    std::vector<char> entered(D, 1);

    for (std::size_t t = 0; t < T; ++t) {
        if (t > 0) {
            std::fill(entered.begin(), entered.end(), 0);
            for (std::size_t d = 0; d < D; ++d) {
                if (held_by[d] >= 0) continue;  // pinned, own dynamics suspended
                const auto& dev = cfg.devices[d];
                if (dev.levels.size() < 2) continue;
                if (unit(rng) < leave_prob(d, mode[d])) {
                    std::size_t pick =
                        static_cast<std::size_t>(unit(rng) * static_cast<double>(dev.levels.size() - 1));
                    if (pick >= dev.levels.size() - 1) pick = dev.levels.size() - 2;
                    std::size_t next = pick < mode[d] ? pick : pick + 1;  // uniform over others
                    mode[d] = next;
                    entered[d] = 1;
                }
            }
        }
        // release holds whose source left the trigger mode; a freshly released
        // device gets its own-dynamics draw this same step, so a hold never
        // outlives its source by a sample
        for (std::size_t ci = 0; ci < cfg.couplings.size(); ++ci) {
            const auto& c = cfg.couplings[ci];
            std::size_t dst = dev_index(c.dst);
            if (held_by[dst] == static_cast<int>(ci) &&
                mode[dev_index(c.src)] != c.src_mode) {
                held_by[dst] = -1;  // resumes own chain from the pinned mode
                const auto& dev = cfg.devices[dst];
                if (t > 0 && dev.levels.size() >= 2 && unit(rng) < leave_prob(dst, mode[dst])) {
                    std::size_t pick =
                        static_cast<std::size_t>(unit(rng) * static_cast<double>(dev.levels.size() - 1));
                    if (pick >= dev.levels.size() - 1) pick = dev.levels.size() - 2;
                    std::size_t next = pick < mode[dst] ? pick : pick + 1;
                    mode[dst] = next;
                    entered[dst] = 1;
                }
            }
        }
        // fire couplings on source entries, in config order; first active hold wins
        for (std::size_t ci = 0; ci < cfg.couplings.size(); ++ci) {
            const auto& c = cfg.couplings[ci];
            std::size_t src = dev_index(c.src), dst = dev_index(c.dst);
            if (!entered[src] || mode[src] != c.src_mode) continue;
            if (held_by[dst] >= 0) continue;
            if (c.p >= 1.0 || unit(rng) < c.p) {
                held_by[dst] = static_cast<int>(ci);
                if (mode[dst] != c.dst_mode) {
                    mode[dst] = c.dst_mode;
                    entered[dst] = 1;
                }
            }
        }
        for (std::size_t d = 0; d < D; ++d) modes[d][t] = mode[d];
    }

    HouseData house;
    for (std::size_t d = 0; d < D; ++d) {
        std::vector<double> vals(T);
        for (std::size_t t = 0; t < T; ++t) {
            double v = cfg.devices[d].levels[modes[d][t]];
            if (cfg.noise_sd > 0.0) v += cfg.noise_sd * gauss(rng);
            vals[t] = std::max(0.0, v);
        }
        house.devices.push_back(
            make_series(cfg.devices[d].name, cfg.start_time, cfg.interval, std::move(vals)));
    }
    std::vector<double> mains(T, 0.0);
    for (const auto& dev : house.devices)
        for (std::size_t t = 0; t < T; ++t) mains[t] += dev.values[t];
    house.mains = make_series("mains", cfg.start_time, cfg.interval, std::move(mains));
    validate_house(house);
    return house;
}

}  // namespace nilmtree
