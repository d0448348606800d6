#ifndef CASCADE_TESTS_ORACLES_HPP
#define CASCADE_TESTS_ORACLES_HPP

// Reference computations used only by tests. None of these share code with the
// library paths they check.

#include "cascade/metric.hpp"
#include "cascade/random.hpp"
#include "cascade/tree.hpp"

#include <algorithm>
#include <string>
#include <vector>

namespace oracle {

/// Full (|a|+1) x (|b|+1) edit-distance table.
inline unsigned edit_distance_table(const std::string& a, const std::string& b) {
    std::vector<std::vector<unsigned>> t(a.size() + 1, std::vector<unsigned>(b.size() + 1));
    for (std::size_t i = 0; i <= a.size(); ++i) t[i][0] = static_cast<unsigned>(i);
    for (std::size_t j = 0; j <= b.size(); ++j) t[0][j] = static_cast<unsigned>(j);
    for (std::size_t i = 1; i <= a.size(); ++i) {
        for (std::size_t j = 1; j <= b.size(); ++j) {
            t[i][j] = std::min({t[i - 1][j] + 1, t[i][j - 1] + 1, t[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0u : 1u)});
        }
    }
    return t[a.size()][b.size()];
}

inline std::string random_string(cascade::Rng& rng, std::size_t max_len, std::string_view alphabet = "ACGT") {
    std::string s(cascade::uniform_index(rng, max_len + 1), 'A');
    for (auto& c : s) c = alphabet[cascade::uniform_index(rng, alphabet.size())];
    return s;
}

inline cascade::EuclideanPoint point(std::initializer_list<double> coords) {
    return cascade::EuclideanPoint{std::vector<double>(coords)};
}

/// 1-d points at the given coordinates.
inline std::vector<cascade::EuclideanPoint> line_points(const std::vector<double>& xs) {
    std::vector<cascade::EuclideanPoint> out;
    for (double x : xs) out.push_back(point({x}));
    return out;
}

/// Objects of the subtree rooted at `node`, by walking child links.
template<typename Tree>
std::vector<std::uint32_t> subtree_objects(const Tree& tree, cascade::NodeIndex node) {
    std::vector<std::uint32_t> out;
    std::vector<cascade::NodeIndex> stack{node};
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        if (i == cascade::no_node) continue;
        out.push_back(tree.node(i).object);
        stack.push_back(tree.node(i).left);
        stack.push_back(tree.node(i).right);
    }
    return out;
}

/// Root-to-node path of node indices, by walking child links from the root.
template<typename Tree>
std::vector<std::vector<cascade::NodeIndex>> root_paths(const Tree& tree) {
    std::vector<std::vector<cascade::NodeIndex>> paths(tree.nodes().size());
    if (tree.empty()) return paths;
    std::vector<cascade::NodeIndex> stack{tree.root()};
    paths[tree.root()] = {tree.root()};
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (auto c : {tree.node(i).left, tree.node(i).right}) {
            if (c == cascade::no_node) continue;
            paths[c] = paths[i];
            paths[c].push_back(c);
            stack.push_back(c);
        }
    }
    return paths;
}

} // namespace oracle

#endif
