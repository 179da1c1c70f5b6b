#pragma once

#include "sbm/graph.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace sbm {

struct EdgeListOptions {
    bool one_based = false;
    int skip_header_lines = 0;
};

// One whitespace-separated pair per line; '#' starts a comment line.
// Reversed and duplicate pairs are fine (the graph construction
// symmetrizes and deduplicates), so loading a directed edge list yields
// its undirected symmetrization.
inline std::vector<std::pair<int, int>> load_edge_list(const std::string& path,
                                                       const EdgeListOptions& options = {}) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open edge list: " + path);
    std::vector<std::pair<int, int>> edges;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line_no <= options.skip_header_lines) continue;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        std::istringstream ls(line);
        long long u = 0, v = 0;
        if (!(ls >> u >> v)) {
            std::ostringstream os;
            os << path << ":" << line_no << ": expected two node indices";
            throw std::runtime_error(os.str());
        }
        if (options.one_based) {
            --u;
            --v;
        }
        edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
    }
    return edges;
}

// n < 0 infers the node count as max index + 1.
inline Graph load_graph(const std::string& path, int n = -1, const EdgeListOptions& options = {},
                        GraphBuildStats* stats = nullptr) {
    const auto edges = load_edge_list(path, options);
    if (n < 0) {
        int max_index = -1;
        for (const auto& [u, v] : edges) max_index = std::max({max_index, u, v});
        n = max_index + 1;
    }
    return Graph::from_edges(n, edges, stats);
}

inline void save_edge_list(const Graph& g, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write edge list: " + path);
    g.for_each_edge([&out](int u, int v) { out << u << " " << v << "\n"; });
    if (!out) throw std::runtime_error("write failed: " + path);
}

// Labels: either one integer per line, or CSV with a node,label pair per
// line (header row permitted). k < 0 infers k as the maximum label.
inline LabelVector load_labels(const std::string& path, int k = -1) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open label file: " + path);
    std::map<int, int> by_node;
    std::vector<int> plain;
    bool csv = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos || line[start] == '#') continue;
        if (line.find(',') != std::string::npos) {
            csv = true;
            std::istringstream ls(line);
            std::string node_field, label_field;
            std::getline(ls, node_field, ',');
            std::getline(ls, label_field);
            try {
                const int node = std::stoi(node_field);
                const int label = std::stoi(label_field);
                by_node[node] = label;
            } catch (const std::exception&) {
                if (line_no == 1) continue;  // header row
                throw std::runtime_error(path + ": malformed node,label row");
            }
        } else {
            plain.push_back(std::stoi(line));
        }
    }
    LabelVector labels;
    if (csv) {
        if (by_node.empty()) throw std::runtime_error(path + ": no labels found");
        const int n = by_node.rbegin()->first + 1;
        labels.values.assign(static_cast<size_t>(n), 0);
        for (const auto& [node, label] : by_node) {
            if (node < 0) throw std::runtime_error(path + ": negative node index");
            labels.values[static_cast<size_t>(node)] = label;
        }
    } else {
        labels.values = std::move(plain);
    }
    labels.k = k >= 0 ? k : *std::max_element(labels.values.begin(), labels.values.end());
    return labels;
}

inline void save_labels_csv(const LabelVector& labels, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write label file: " + path);
    out << "node,label\n";
    for (int u = 0; u < labels.size(); ++u) out << u << "," << labels[u] << "\n";
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline void save_embedding_csv(const Eigen::MatrixXd& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write embedding: " + path);
    out.precision(17);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        for (Eigen::Index j = 0; j < rows.cols(); ++j) {
            if (j) out << ",";
            out << rows(i, j);
        }
        out << "\n";
    }
    if (!out) throw std::runtime_error("write failed: " + path);
}

inline Eigen::MatrixXd load_embedding_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open embedding: " + path);
    std::vector<std::vector<double>> data;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::vector<double> row;
        std::istringstream ls(line);
        std::string field;
        while (std::getline(ls, field, ',')) row.push_back(std::stod(field));
        if (!data.empty() && row.size() != data.front().size())
            throw std::runtime_error(path + ": ragged embedding rows");
        data.push_back(std::move(row));
    }
    if (data.empty()) throw std::runtime_error(path + ": empty embedding");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(data.size()),
                      static_cast<Eigen::Index>(data.front().size()));
    for (size_t i = 0; i < data.size(); ++i)
        for (size_t j = 0; j < data.front().size(); ++j)
            m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = data[i][j];
    return m;
}

// Flat key-value parameter files: one `key value...` (or `key = value`)
// entry per line, '#' comments. Repeated keys append, which is how the
// rows of a connectivity matrix are written (one `B ...` line per row).
class KeyValueConfig {
public:
    static KeyValueConfig parse_file(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("cannot open config: " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return parse(buffer.str());
    }

    static KeyValueConfig parse(const std::string& text) {
        KeyValueConfig config;
        std::istringstream in(text);
        std::string line;
        while (std::getline(in, line)) {
            const auto hash = line.find('#');
            if (hash != std::string::npos) line.erase(hash);
            std::replace(line.begin(), line.end(), '=', ' ');
            std::replace(line.begin(), line.end(), ',', ' ');
            std::istringstream ls(line);
            std::string key;
            if (!(ls >> key)) continue;
            std::vector<std::string>& slot = config.entries_[key];
            std::string token;
            while (ls >> token) slot.push_back(token);
        }
        return config;
    }

    bool has(const std::string& key) const { return entries_.count(key) > 0; }

    double number(const std::string& key) const {
        const auto& v = values(key);
        if (v.size() != 1)
            throw std::runtime_error("config: key '" + key + "' wants exactly one value");
        return std::stod(v.front());
    }

    double number_or(const std::string& key, double fallback) const {
        return has(key) ? number(key) : fallback;
    }

    std::vector<double> numbers(const std::string& key) const {
        std::vector<double> out;
        for (const auto& token : values(key)) out.push_back(std::stod(token));
        return out;
    }

    const std::vector<std::string>& values(const std::string& key) const {
        const auto it = entries_.find(key);
        if (it == entries_.end()) throw std::runtime_error("config: missing key '" + key + "'");
        return it->second;
    }

private:
    std::map<std::string, std::vector<std::string>> entries_;
};

}  // namespace sbm
