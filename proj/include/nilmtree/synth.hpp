#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "nilmtree/series.hpp"

namespace nilmtree {

// Mode-level appliance model. Each device walks a Markov chain over its
// levels: leaving mode m is geometric with mean dwell[m] samples
// (dwell 0 = absorbing, the device only leaves when a coupling releases
// it), and the landing mode is uniform over the other modes.
struct SynthDevice {
    std::string name;
    std::vector<double> levels;  // Watts per mode, levels[0] is the start mode
    std::vector<double> dwell;   // mean dwell per mode in samples; empty = all 20
};

// When src enters src_mode, with probability p the target is pinned to
// dst_mode for as long as src stays there; on release the target resumes
// its own chain from dst_mode. Models co-occurring appliances (a hood
// that runs whenever the stove does).
struct SynthCoupling {
    std::string src;
    std::size_t src_mode = 0;
    std::string dst;
    std::size_t dst_mode = 0;
    double p = 1.0;
};

struct SynthConfig {
    std::vector<SynthDevice> devices;
    std::vector<SynthCoupling> couplings;
    std::size_t length = 2000;     // samples
    std::int64_t interval = 60;    // seconds
    std::int64_t start_time = 0;
    double noise_sd = 0.0;         // per-device additive noise, clamped at 0 W
    std::uint64_t seed = 1;
};

// Deterministic for a fixed config (single RNG stream, fixed draw
// order). mains is the exact sum of the generated device channels.
HouseData synth_generate(const SynthConfig& cfg);

}  // namespace nilmtree
