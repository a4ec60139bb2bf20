#pragma once

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "invreg/nnfun.hpp"
#include "invreg/numcore.hpp"
#include "invreg/oplearn.hpp"

namespace invreg {

// Flat `key = value` configuration: strings, numbers, and bracketed lists.
// '#' starts a comment.
class FlatConfig {
public:
    FlatConfig() = default;

    static FlatConfig parse(const std::string& text) {
        FlatConfig cfg;
        cfg.source_ = text;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            auto hash = line.find('#');
            if (hash != std::string::npos) line = line.substr(0, hash);
            auto eq = line.find('=');
            if (eq == std::string::npos) continue;
            std::string key = trim(line.substr(0, eq));
            std::string value = trim(line.substr(eq + 1));
            if (key.empty()) throw std::invalid_argument("FlatConfig: empty key");
            cfg.entries_[key] = value;
        }
        return cfg;
    }

    static FlatConfig from_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::invalid_argument("FlatConfig: cannot open " + path);
        std::ostringstream ss;
        ss << in.rdbuf();
        return parse(ss.str());
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    std::string get_string(const std::string& key, const std::string& fallback = "") const {
        auto it = entries_.find(key);
        return it == entries_.end() ? fallback : it->second;
    }

    double get_number(const std::string& key, double fallback) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        return parse_number(it->second, key);
    }

    int get_int(const std::string& key, int fallback) const {
        return static_cast<int>(get_number(key, fallback));
    }

    std::vector<double> get_list(const std::string& key, std::vector<double> fallback = {}) const {
        auto it = entries_.find(key);
        if (it == entries_.end()) return fallback;
        std::string v = it->second;
        if (v.size() < 2 || v.front() != '[' || v.back() != ']')
            throw std::invalid_argument("FlatConfig: list value expected for " + key);
        std::vector<double> out;
        std::string body = v.substr(1, v.size() - 2);
        std::istringstream items(body);
        std::string item;
        while (std::getline(items, item, ',')) {
            item = trim(item);
            if (item.empty()) continue;
            out.push_back(parse_number(item, key));
        }
        return out;
    }

    // FNV-1a over the raw config text
    std::uint64_t hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        for (unsigned char c : source_) {
            h ^= c;
            h *= 1099511628211ULL;
        }
        return h;
    }

private:
    static std::string trim(const std::string& s) {
        std::size_t b = s.find_first_not_of(" \t\r\n");
        if (b == std::string::npos) return "";
        std::size_t e = s.find_last_not_of(" \t\r\n");
        return s.substr(b, e - b + 1);
    }

    static double parse_number(const std::string& s, const std::string& key) {
        try {
            std::size_t used = 0;
            double v = std::stod(s, &used);
            if (used != s.size()) throw std::invalid_argument("trailing");
            return v;
        } catch (const std::exception&) {
            throw std::invalid_argument("FlatConfig: not a number for key " + key + ": " + s);
        }
    }

    std::map<std::string, std::string> entries_;
    std::string source_;
};

inline std::string hash_comment(std::uint64_t h) {
    std::ostringstream os;
    os << "# config_hash=" << std::hex << std::setw(16) << std::setfill('0') << h << "\n";
    return os.str();
}

inline void write_number(std::ostream& os, double v) {
    os << std::setprecision(17) << v;
}

inline void save_expert_set_csv(std::ostream& os, const ExpertSet& experts) {
    experts.validate();
    const std::size_t m = experts.inputs.front().size();
    const std::size_t n = experts.outputs.front().size();
    for (std::size_t i = 0; i < m; ++i) os << "x" << i << ",";
    for (std::size_t i = 0; i < n; ++i) os << "y" << i << (i + 1 < n ? "," : "\n");
    os << std::setprecision(17);
    for (std::size_t l = 0; l < experts.size(); ++l) {
        for (std::size_t i = 0; i < m; ++i) os << experts.inputs[l][i] << ",";
        for (std::size_t i = 0; i < n; ++i)
            os << experts.outputs[l][i] << (i + 1 < n ? "," : "\n");
    }
}

inline ExpertSet load_expert_set_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header)) throw std::invalid_argument("expert csv: empty file");
    std::size_t m = 0, n = 0;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ',')) {
            if (!col.empty() && col[0] == 'x') ++m;
            else if (!col.empty() && col[0] == 'y') ++n;
            else throw std::invalid_argument("expert csv: bad column name " + col);
        }
    }
    if (m == 0 || n == 0) throw std::invalid_argument("expert csv: need x and y columns");
    ExpertSet experts;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string item;
        Vec row;
        while (std::getline(ls, item, ',')) row.push_back(std::stod(item));
        if (row.size() != m + n) throw std::invalid_argument("expert csv: bad row width");
        experts.inputs.push_back(Vec(row.begin(), row.begin() + m));
        experts.outputs.push_back(Vec(row.begin() + m, row.end()));
    }
    experts.validate();
    return experts;
}

inline GridFunction1D load_grid_function_csv(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line.rfind("s,value", 0) != 0)
        throw std::invalid_argument("grid csv: expected 's,value' header");
    Vec values;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) throw std::invalid_argument("grid csv: bad row");
        values.push_back(std::stod(line.substr(comma + 1)));
    }
    if (values.size() < 3) throw std::invalid_argument("grid csv: too few rows");
    const int n = static_cast<int>(values.size()) - 1;
    return GridFunction1D(n, std::move(values));
}

inline void save_alnn_csv(std::ostream& os, const ALNNParams& p) {
    p.validate();
    os << "alpha,";
    for (int i = 0; i < p.input_dim; ++i) os << "w" << i << ",";
    os << "theta\n" << std::setprecision(17);
    for (int j = 0; j < p.neurons; ++j) {
        os << p.alpha(j) << ",";
        for (int i = 0; i < p.input_dim; ++i) os << p.weight(j, i) << ",";
        os << p.theta(j) << "\n";
    }
}

inline ALNNParams load_alnn_csv(std::istream& is) {
    std::string header;
    if (!std::getline(is, header) || header.rfind("alpha,", 0) != 0)
        throw std::invalid_argument("alnn csv: expected 'alpha,w...,theta' header");
    int m = 0;
    {
        std::istringstream hs(header);
        std::string col;
        while (std::getline(hs, col, ','))
            if (!col.empty() && col[0] == 'w') ++m;
    }
    if (m == 0) throw std::invalid_argument("alnn csv: no weight columns");
    std::vector<Vec> rows;
    std::string line;
    while (std::getline(is, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::istringstream ls(line);
        std::string item;
        Vec row;
        while (std::getline(ls, item, ',')) row.push_back(std::stod(item));
        if (row.size() != static_cast<std::size_t>(m) + 2)
            throw std::invalid_argument("alnn csv: bad row width");
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw std::invalid_argument("alnn csv: no neurons");
    ALNNParams p(m, static_cast<int>(rows.size()));
    for (int j = 0; j < p.neurons; ++j) {
        p.alpha(j) = rows[j][0];
        for (int i = 0; i < m; ++i) p.weight(j, i) = rows[j][1 + i];
        p.theta(j) = rows[j][m + 1];
    }
    return p;
}

}  // namespace invreg
