#include "comet/config.hpp"

#include "comet/error.hpp"
#include "comet/text.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>

namespace comet::config {

namespace {

std::string unquote(std::string v) {
    if (v.size() >= 2 && ((v.front() == '"' && v.back() == '"') ||
                          (v.front() == '\'' && v.back() == '\''))) {
        return v.substr(1, v.size() - 2);
    }
    return v;
}

double parse_double(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const double x = std::stod(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, key + ": expected a number, got '" + v + "'");
    }
}

std::uint64_t parse_u64(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const unsigned long long x = std::stoull(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return static_cast<std::uint64_t>(x);
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, key + ": expected an integer, got '" + v + "'");
    }
}

long parse_long(const std::string& key, const std::string& v) {
    try {
        std::size_t used = 0;
        const long x = std::stol(v, &used);
        if (used != v.size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorKind::ConfigInvalid, key + ": expected an integer, got '" + v + "'");
    }
}

} // namespace

void apply_key(PipelineConfig& cfg, const std::string& key, const std::string& raw) {
    const std::string v = unquote(raw);
    if (key == "posts") cfg.posts = v;
    else if (key == "posts_format") cfg.posts_format = v;
    else if (key == "lexicon") cfg.lexicon = v;
    else if (key == "annotations") cfg.annotations = v;
    else if (key == "allowlist") cfg.allowlist = v;
    else if (key == "sets_geojson") cfg.sets_geojson = v;
    else if (key == "beats_geojson") cfg.beats_geojson = v;
    else if (key == "arrests") cfg.arrests = v;
    else if (key == "mortality") cfg.mortality = v;
    else if (key == "ground_truth") cfg.ground_truth = v;
    else if (key == "out_dir") cfg.out_dir = v;
    else if (key == "threshold") {
        cfg.threshold = parse_double(key, v);
        if (!(cfg.threshold > 0.5 && cfg.threshold <= 1.0)) {
            throw Error(ErrorKind::ConfigInvalid, "threshold must lie in (0.5, 1.0]");
        }
    }
    else if (key == "min_mentions") cfg.min_mentions = parse_u64(key, v);
    else if (key == "min_affiliates") cfg.min_affiliates = parse_u64(key, v);
    else if (key == "louvain_resolution") cfg.louvain_resolution = parse_double(key, v);
    else if (key == "seed") cfg.seed = parse_u64(key, v);
    else if (key == "permutation_iterations") cfg.permutation_iterations = parse_u64(key, v);
    else if (key == "bootstrap_b") cfg.bootstrap_b = static_cast<int>(parse_long(key, v));
    else if (key == "crs") {
        cfg.crs = v;
        if (cfg.crs != "geographic_degrees" && cfg.crs != "projected_meters") {
            throw Error(ErrorKind::ConfigInvalid,
                        "crs must be geographic_degrees or projected_meters");
        }
    }
    else if (key == "ergm_decay") cfg.ergm_decay = parse_double(key, v);
    else if (key == "ergm_burn_in") cfg.ergm_burn_in = parse_long(key, v);
    else if (key == "ergm_samples") cfg.ergm_samples = static_cast<int>(parse_long(key, v));
    else if (key == "ergm_thin") cfg.ergm_thin = parse_long(key, v);
    else if (key == "ergm_rounds") cfg.ergm_rounds = static_cast<int>(parse_long(key, v));
    else if (key == "sensitivity_thresholds") {
        cfg.sensitivity_thresholds.clear();
        std::string cur;
        for (char c : v + ",") {
            if (c == ',') {
                const std::string item = text::trim(cur);
                if (!item.empty()) cfg.sensitivity_thresholds.push_back(parse_double(key, item));
                cur.clear();
            } else {
                cur += c;
            }
        }
    } else {
        throw Error(ErrorKind::ConfigInvalid, "unknown config key '" + key + "'");
    }
}

PipelineConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::IoError, "cannot open config file: " + path);
    PipelineConfig cfg;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        const std::size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = text::trim(line);
        if (line.empty()) continue;
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos) {
            throw Error(ErrorKind::ConfigInvalid,
                        path + " line " + std::to_string(row) + ": expected key = value");
        }
        const std::string key = text::trim(line.substr(0, eq));
        const std::string value = text::trim(line.substr(eq + 1));
        if (key.empty()) {
            throw Error(ErrorKind::ConfigInvalid,
                        path + " line " + std::to_string(row) + ": empty key");
        }
        apply_key(cfg, key, value);
    }
    if (!(cfg.threshold > 0.5 && cfg.threshold <= 1.0)) {
        throw Error(ErrorKind::ConfigInvalid, "threshold must lie in (0.5, 1.0]");
    }
    if (cfg.crs != "geographic_degrees" && cfg.crs != "projected_meters") {
        throw Error(ErrorKind::ConfigInvalid, "crs must be geographic_degrees or projected_meters");
    }
    return cfg;
}

void validate_paths(const PipelineConfig& cfg, const std::vector<std::string>& require) {
    const std::vector<std::pair<std::string, const std::string*>> all = {
        {"posts", &cfg.posts},           {"lexicon", &cfg.lexicon},
        {"annotations", &cfg.annotations}, {"allowlist", &cfg.allowlist},
        {"sets_geojson", &cfg.sets_geojson}, {"beats_geojson", &cfg.beats_geojson},
        {"arrests", &cfg.arrests},       {"mortality", &cfg.mortality},
        {"ground_truth", &cfg.ground_truth}};
    for (const auto& [key, value] : all) {
        const bool required = std::find(require.begin(), require.end(), key) != require.end();
        if (value->empty()) {
            if (required) {
                throw Error(ErrorKind::ConfigInvalid, "config key '" + key + "' is required");
            }
            continue;
        }
        if (!std::filesystem::exists(*value)) {
            throw Error(ErrorKind::ConfigInvalid,
                        "config key '" + key + "': file not found: " + *value);
        }
    }
}

} // namespace comet::config
