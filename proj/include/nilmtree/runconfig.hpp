#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "nilmtree/disagg.hpp"
#include "nilmtree/powerlet.hpp"
#include "nilmtree/synth.hpp"
#include "nilmtree/tree.hpp"

namespace nilmtree {

// One flat settings bag shared by every subcommand. Populated from defaults, then a
// key=value config file, then command-line overrides, in that order.
struct RunConfig {
    std::string data_path;
    std::string schema_path;
    std::string model_dir;
    std::string result_path;
    std::string out_path;
    std::size_t resample_s = 0;  // 0 = keep native resolution
    double fraction = 0.8;       // leading share of samples used for training
    std::string aggregate = "sum";  // decode input: sum of device channels, or the mains column
    PowerletParams powerlet;
    TreeParams tree;
    DecodeConfig decode;
    SynthConfig synth;
};

// Parses "key = value" lines ('#' starts a comment, blank lines ignored) and applies
// them onto cfg. Unknown keys are an error. See apply_setting for the key list.
void load_config_file(const std::string& path, RunConfig& cfg);

// Applies one setting; throws ConfigError for unknown keys or unparseable values.
void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value);

// The effective settings a trained model was built with, echoed into the model
// directory so later runs can check congruence without re-deriving anything.
std::map<std::string, std::string> manifest_of(const RunConfig& cfg);
void write_manifest(const std::string& path, const std::map<std::string, std::string>& kv);
std::map<std::string, std::string> read_manifest(const std::string& path);

double parse_double(const std::string& s, const std::string& what);
std::int64_t parse_int(const std::string& s, const std::string& what);

}  // namespace nilmtree
