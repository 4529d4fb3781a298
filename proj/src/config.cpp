#include "nscr/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>

namespace nscr {

namespace {

std::string strip(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = strip(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& text) {
    double v = 0.0;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw InputError("config key '" + key + "': '" + text + "' is not a number");
    return v;
}

} // namespace

const std::vector<std::string>& known_config_keys() {
    static const std::vector<std::string> keys{
        "dataset", "test_dataset", "coder", "preset", "alpha", "beta", "rho", "tol", "max_iter",
        "lambda", "cv", "cv_folds", "alphas", "betas", "pca_dim", "n_per_class", "train_fraction",
        "trials", "seed", "output", "query_index", "coders", "queries", "include_precompute",
        // synthetic fixture generation
        "path", "classes", "ambient_dim", "subspace_dim", "samples_per_class", "noise"};
    return keys;
}

void Config::set(const std::string& key, const std::string& value) {
    const auto& keys = known_config_keys();
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
        std::string known;
        for (const auto& k : keys) known += (known.empty() ? "" : ", ") + k;
        throw InputError("unknown config key '" + key + "' (known: " + known + ")");
    }
    values_[key] = value;
}

void Config::merge(const Config& overrides) {
    for (const auto& [k, v] : overrides.values_) values_[k] = v;
}

Config Config::parse(std::istream& in, const std::string& source) {
    Config config;
    std::string line;
    int number = 0;
    while (std::getline(in, line)) {
        ++number;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = strip(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw InputError(source + ":" + std::to_string(number) + ": expected 'key = value'");
        const std::string key = strip(line.substr(0, eq));
        if (key.empty()) throw InputError(source + ":" + std::to_string(number) + ": empty key");
        config.set(key, strip(line.substr(eq + 1)));
    }
    return config;
}

Config Config::from_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open config file " + path.string());
    return parse(in, path.string());
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : to_double(key, it->second);
}

long Config::get_int(const std::string& key, long fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    long v = 0;
    const auto& text = it->second;
    const char* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, v);
    if (text.empty() || ec != std::errc() || ptr != end)
        throw InputError("config key '" + key + "': '" + text + "' is not an integer");
    return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    const auto& v = it->second;
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw InputError("config key '" + key + "': '" + v + "' is not a boolean");
}

std::vector<double> Config::get_doubles(const std::string& key, const std::vector<double>& fallback) const {
    auto it = values_.find(key);
    if (it == values_.end()) return fallback;
    std::vector<double> out;
    for (const auto& item : split_list(it->second)) out.push_back(to_double(key, item));
    return out;
}

std::vector<std::string> Config::get_strings(const std::string& key,
                                             const std::vector<std::string>& fallback) const {
    auto it = values_.find(key);
    return it == values_.end() ? fallback : split_list(it->second);
}

} // namespace nscr
