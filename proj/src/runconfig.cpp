#include "nilmtree/runconfig.hpp"

#include <charconv>
#include <fstream>

#include "nilmtree/errors.hpp"
#include "nilmtree/util.hpp"

namespace nilmtree {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = s.find_first_not_of(" \t\r");
    if (a == std::string::npos) return "";
    std::size_t b = s.find_last_not_of(" \t\r");
    return s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (c == sep) {
            out.push_back(trim(cur));
            cur.clear();
        } else {
            cur += c;
        }
    }
    out.push_back(trim(cur));
    return out;
}

SynthDevice& synth_device(RunConfig& cfg, const std::string& name) {
    for (auto& d : cfg.synth.devices)
        if (d.name == name) return d;
    throw ConfigError("synth device '" + name + "' must be declared in synth.devices first");
}

// Coupling syntax: src:mode>dst:mode@p, e.g. stove:1>exhaust:1@0.9
SynthCoupling parse_coupling(const std::string& s) {
    auto at = s.find('@');
    auto gt = s.find('>');
    if (at == std::string::npos || gt == std::string::npos || gt > at)
        throw ConfigError("coupling '" + s + "' is not src:mode>dst:mode@p");
    auto side = [&](const std::string& part) -> std::pair<std::string, std::size_t> {
        auto colon = part.rfind(':');
        if (colon == std::string::npos)
            throw ConfigError("coupling endpoint '" + part + "' is not name:mode");
        return {trim(part.substr(0, colon)),
                static_cast<std::size_t>(parse_int(trim(part.substr(colon + 1)), "coupling mode"))};
    };
    SynthCoupling c;
    auto [sn, sm] = side(s.substr(0, gt));
    auto [dn, dm] = side(s.substr(gt + 1, at - gt - 1));
    c.src = sn;
    c.src_mode = sm;
    c.dst = dn;
    c.dst_mode = dm;
    c.p = parse_double(trim(s.substr(at + 1)), "coupling probability");
    if (c.p < 0.0 || c.p > 1.0) throw ConfigError("coupling probability must be in [0,1]");
    return c;
}

}  // namespace

double parse_double(const std::string& s, const std::string& what) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(what + ": bad number '" + s + "'");
    return v;
}

std::int64_t parse_int(const std::string& s, const std::string& what) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw ConfigError(what + ": bad integer '" + s + "'");
    return v;
}

void apply_setting(RunConfig& cfg, const std::string& key, const std::string& value) {
    auto u64 = [&](const char* what) {
        std::int64_t v = parse_int(value, what);
        if (v < 0) throw ConfigError(std::string(what) + " must be non-negative");
        return static_cast<std::size_t>(v);
    };
    if (key == "data.path") {
        cfg.data_path = value;
    } else if (key == "data.schema") {
        cfg.schema_path = value;
    } else if (key == "model") {
        cfg.model_dir = value;
    } else if (key == "result") {
        cfg.result_path = value;
    } else if (key == "out") {
        cfg.out_path = value;
    } else if (key == "resample_s") {
        cfg.resample_s = u64("resample_s");
    } else if (key == "fraction") {
        cfg.fraction = parse_double(value, "fraction");
    } else if (key == "aggregate") {
        if (value != "sum" && value != "mains")
            throw ConfigError("aggregate must be sum or mains, got '" + value + "'");
        cfg.aggregate = value;
    } else if (key == "w") {
        cfg.powerlet.w = u64("w");
        if (cfg.powerlet.w == 0) throw ConfigError("w must be positive");
    } else if (key == "k") {
        cfg.powerlet.k = u64("k");
        if (cfg.powerlet.k == 0) throw ConfigError("k must be positive");
    } else if (key == "seed") {
        auto s = static_cast<std::uint64_t>(parse_int(value, "seed"));
        cfg.powerlet.seed = s;
        cfg.tree.seed = s;
        cfg.decode.admm.seed = s;
    } else if (key == "method") {
        cfg.tree.method = split_method_from_string(value);
    } else if (key == "alpha") {
        cfg.tree.alpha = parse_double(value, "alpha");
    } else if (key == "restarts") {
        cfg.tree.restarts = u64("restarts");
        if (cfg.tree.restarts == 0) throw ConfigError("restarts must be positive");
    } else if (key == "dpddm_cap") {
        cfg.tree.dpddm_max_devices = u64("dpddm_cap");
    } else if (key == "backend") {
        cfg.decode.backend = backend_from_string(value);
    } else if (key == "threads") {
        std::size_t n = u64("threads");
        cfg.decode.threads = n == 0 ? default_thread_count() : static_cast<int>(n);
    } else if (key == "solver_dump") {
        cfg.decode.solver_dump = value;
    } else if (key == "powerlet.stride") {
        cfg.powerlet.stride = u64("powerlet.stride");
        if (cfg.powerlet.stride == 0) throw ConfigError("powerlet.stride must be positive");
    } else if (key == "powerlet.max_windows") {
        cfg.powerlet.max_windows = u64("powerlet.max_windows");
        if (cfg.powerlet.max_windows == 0) throw ConfigError("powerlet.max_windows must be positive");
    } else if (key == "powerlet.off_threshold") {
        cfg.powerlet.off_threshold = parse_double(value, "powerlet.off_threshold");
    } else if (key == "powerlet.dedup_quantum") {
        cfg.powerlet.dedup_quantum = parse_double(value, "powerlet.dedup_quantum");
        if (cfg.powerlet.dedup_quantum <= 0.0)
            throw ConfigError("powerlet.dedup_quantum must be positive");
    } else if (key == "admm.mu") {
        cfg.decode.admm.mu = parse_double(value, "admm.mu");
        if (cfg.decode.admm.mu <= 0.0) throw ConfigError("admm.mu must be positive");
    } else if (key == "admm.tol_primal") {
        cfg.decode.admm.tol_primal = parse_double(value, "admm.tol_primal");
    } else if (key == "admm.tol_dual") {
        cfg.decode.admm.tol_dual = parse_double(value, "admm.tol_dual");
    } else if (key == "admm.max_iter") {
        cfg.decode.admm.max_iter = u64("admm.max_iter");
    } else if (key == "admm.samples") {
        cfg.decode.admm.n_round_samples = u64("admm.samples");
        if (cfg.decode.admm.n_round_samples == 0)
            throw ConfigError("admm.samples must be positive");
    } else if (key == "admm.strict") {
        if (value == "true" || value == "1") {
            cfg.decode.admm.strict = true;
        } else if (value == "false" || value == "0") {
            cfg.decode.admm.strict = false;
        } else {
            throw ConfigError("admm.strict must be true or false");
        }
    } else if (key == "synth.length") {
        cfg.synth.length = u64("synth.length");
        if (cfg.synth.length == 0) throw ConfigError("synth.length must be positive");
    } else if (key == "synth.interval") {
        auto v = parse_int(value, "synth.interval");
        if (v <= 0) throw ConfigError("synth.interval must be positive");
        cfg.synth.interval = v;
    } else if (key == "synth.start") {
        cfg.synth.start_time = parse_int(value, "synth.start");
    } else if (key == "synth.noise_sd") {
        cfg.synth.noise_sd = parse_double(value, "synth.noise_sd");
        if (cfg.synth.noise_sd < 0.0) throw ConfigError("synth.noise_sd must be non-negative");
    } else if (key == "synth.seed") {
        cfg.synth.seed = static_cast<std::uint64_t>(parse_int(value, "synth.seed"));
    } else if (key == "synth.devices") {
        cfg.synth.devices.clear();
        for (const auto& name : split(value, ',')) {
            if (name.empty()) throw ConfigError("synth.devices has an empty name");
            cfg.synth.devices.push_back(SynthDevice{name, {0.0}, {}});
        }
    } else if (key.rfind("synth.device.", 0) == 0) {
        auto rest = key.substr(13);
        auto dot = rest.rfind('.');
        if (dot == std::string::npos)
            throw ConfigError("expected synth.device.<name>.levels or .dwell, got '" + key + "'");
        auto& dev = synth_device(cfg, rest.substr(0, dot));
        auto field = rest.substr(dot + 1);
        std::vector<double> vals;
        for (const auto& tok : split(value, ','))
            vals.push_back(parse_double(tok, key));
        if (field == "levels") {
            dev.levels = vals;
        } else if (field == "dwell") {
            dev.dwell = vals;
        } else {
            throw ConfigError("unknown synth device field '" + field + "'");
        }
    } else if (key.rfind("synth.coupling.", 0) == 0) {
        cfg.synth.couplings.push_back(parse_coupling(value));
    } else {
        throw ConfigError("unknown setting '" + key + "'");
    }
}

void load_config_file(const std::string& path, RunConfig& cfg) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(path + ":" + std::to_string(lineno) + ": expected key = value");
        try {
            apply_setting(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
        } catch (const ConfigError& e) {
            throw ConfigError(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
}

std::map<std::string, std::string> manifest_of(const RunConfig& cfg) {
    std::map<std::string, std::string> kv;
    kv["aggregate"] = cfg.aggregate;
    kv["alpha"] = format_double(cfg.tree.alpha);
    kv["backend"] = to_string(cfg.decode.backend);
    kv["fraction"] = format_double(cfg.fraction);
    kv["k"] = std::to_string(cfg.powerlet.k);
    kv["method"] = to_string(cfg.tree.method);
    kv["powerlet.dedup_quantum"] = format_double(cfg.powerlet.dedup_quantum);
    kv["powerlet.max_windows"] = std::to_string(cfg.powerlet.max_windows);
    kv["powerlet.off_threshold"] = format_double(cfg.powerlet.off_threshold);
    kv["powerlet.stride"] = std::to_string(cfg.powerlet.stride);
    kv["resample_s"] = std::to_string(cfg.resample_s);
    kv["restarts"] = std::to_string(cfg.tree.restarts);
    kv["seed"] = std::to_string(cfg.tree.seed);
    kv["w"] = std::to_string(cfg.powerlet.w);
    return kv;
}

void write_manifest(const std::string& path, const std::map<std::string, std::string>& kv) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    for (const auto& [k, v] : kv) out << k << " = " << v << '\n';
}

std::map<std::string, std::string> read_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::map<std::string, std::string> kv;
    std::string line;
    while (std::getline(in, line)) {
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw DataError(path + ": malformed manifest line");
        kv[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return kv;
}

}  // namespace nilmtree
