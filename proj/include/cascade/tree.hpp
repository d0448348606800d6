#ifndef CASCADE_TREE_HPP
#define CASCADE_TREE_HPP

#include "metric.hpp"
#include "random.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

/**
 * @file tree.hpp
 *
 * @brief Cascaded metric tree layout and construction.
 *
 * Every node holds one data object `p` and a list of distance intervals. Interval 0
 * spans the distances from `p` to the rest of its subtree. Interval `l >= 1` spans the
 * distances from the object of the `l`-th ancestor (1 = parent) to every object in the
 * subtree, `p` included. A query that has already computed its distance to an ancestor
 * can therefore test that ancestor's interval at this node without another metric call.
 *
 * The number of ancestral levels kept per node is capped by the cascade limit:
 * 0 keeps none (a conventional metric tree), 1 keeps only the parent, and
 * `unbounded_cascade` keeps the whole root path.
 */

namespace cascade {

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex no_node = std::numeric_limits<NodeIndex>::max();
inline constexpr std::size_t unbounded_cascade = std::numeric_limits<std::size_t>::max();

struct DistanceInterval {
    double near = std::numeric_limits<double>::infinity();
    double far = -std::numeric_limits<double>::infinity();

    /// Sentinel for a leaf's own (empty) subtree; any pruning distance against it is +inf.
    static constexpr DistanceInterval empty() { return {}; }
    bool is_empty() const { return near > far; }

    bool operator==(const DistanceInterval&) const = default;
};

/**
 * Nodes live in a preorder arena, so the subtree rooted at node `i` occupies the
 * contiguous index range `[i, i + count)`.
 */
struct CmtNode {
    std::uint32_t object = 0; ///< Index into the tree's object list.
    std::uint32_t count = 0;  ///< Objects in this subtree, including `object`.
    NodeIndex left = no_node;
    NodeIndex right = no_node;
    std::uint32_t depth = 0;
    std::uint32_t first_interval = 0;
    std::uint32_t interval_count = 0; ///< min(depth, cascade_limit) + 1

    bool is_leaf() const { return left == no_node && right == no_node; }
    bool operator==(const CmtNode&) const = default;
};

struct BuildConfig {
    std::size_t cascade_limit = unbounded_cascade;
    std::uint64_t seed = 0;
};

class BuildError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline std::string cascade_label(std::size_t limit) {
    return limit == unbounded_cascade ? "inf" : std::to_string(limit);
}

/// Number of ancestral intervals a node at `depth` stores.
inline std::size_t ancestral_levels(std::size_t depth, std::size_t cascade_limit) {
    return std::min(depth, cascade_limit);
}

template<typename Object, typename M>
    requires Metric<M, Object>
class CmtTree {
public:
    using object_type = Object;
    using metric_type = M;

    CmtTree() = default;

    /**
     * Assembles a tree from already-laid-out parts. Used by the builder and by
     * deserialization; the parts are trusted, run `validate_tree` to check them.
     */
    CmtTree(std::vector<Object> objects,
            std::vector<CmtNode> nodes,
            std::vector<DistanceInterval> intervals,
            M metric,
            std::size_t cascade_limit,
            std::uint64_t seed,
            std::uint64_t build_distance_calls)
        : objects_(std::move(objects)),
          nodes_(std::move(nodes)),
          intervals_(std::move(intervals)),
          metric_(std::move(metric)),
          cascade_limit_(cascade_limit),
          seed_(seed),
          build_distance_calls_(build_distance_calls) {
        for (const auto& n : nodes_) {
            height_ = std::max<std::size_t>(height_, n.depth);
        }
    }

    std::size_t size() const { return objects_.size(); }
    bool empty() const { return nodes_.empty(); }
    NodeIndex root() const { return nodes_.empty() ? no_node : 0; }

    /// Longest root-to-leaf path, in edges. 0 for a single node or an empty tree.
    std::size_t height() const { return height_; }

    std::size_t cascade_limit() const { return cascade_limit_; }
    std::uint64_t seed() const { return seed_; }
    std::uint64_t build_distance_calls() const { return build_distance_calls_; }
    const M& metric() const { return metric_; }

    const std::vector<Object>& objects() const { return objects_; }
    std::span<const CmtNode> nodes() const { return nodes_; }
    std::span<const DistanceInterval> all_intervals() const { return intervals_; }

    const CmtNode& node(NodeIndex i) const { return nodes_[i]; }
    const Object& node_object(NodeIndex i) const { return objects_[nodes_[i].object]; }

    std::span<const DistanceInterval> intervals(NodeIndex i) const {
        const auto& n = nodes_[i];
        return std::span<const DistanceInterval>(intervals_).subspan(n.first_interval, n.interval_count);
    }

    /// Write access to a stored interval, for fault injection in tests.
    DistanceInterval& mutable_interval(NodeIndex i, std::size_t level) {
        const auto& n = nodes_.at(i);
        if (level >= n.interval_count) {
            throw std::out_of_range("mutable_interval: level not stored at this node");
        }
        return intervals_[n.first_interval + level];
    }

private:
    std::vector<Object> objects_;
    std::vector<CmtNode> nodes_;
    std::vector<DistanceInterval> intervals_;
    M metric_{};
    std::size_t cascade_limit_ = unbounded_cascade;
    std::uint64_t seed_ = 0;
    std::uint64_t build_distance_calls_ = 0;
    std::size_t height_ = 0;
};

/// An object awaiting placement, with its distance to the current pivot.
struct PivotDistance {
    std::uint32_t object = 0;
    double distance = 0;
};

struct BomSplit {
    std::size_t left_size = 0;
    double median = 0;
};

/**
 * Balanced object median partition, in place. Afterwards the first
 * `floor(n/2)` entries form the left subset and the rest the right subset, and
 * no left distance exceeds any right distance. Entries tied at the median are
 * spread over both sides as needed to keep the sizes balanced. The returned
 * median is the element at sorted position `floor((n-1)/2)`.
 */
inline BomSplit partition_bom(std::span<PivotDistance> entries) {
    if (entries.empty()) {
        throw std::invalid_argument("partition_bom: no entries");
    }
    const std::size_t n = entries.size();
    const std::size_t left_size = n / 2;
    auto by_distance = [](const PivotDistance& a, const PivotDistance& b) { return a.distance < b.distance; };
    std::nth_element(entries.begin(), entries.begin() + left_size, entries.end(), by_distance);

    BomSplit split;
    split.left_size = left_size;
    const std::size_t median_pos = (n - 1) / 2;
    if (median_pos == left_size) {
        split.median = entries[left_size].distance;
    } else {
        split.median = std::max_element(entries.begin(), entries.begin() + left_size, by_distance)->distance;
    }
    return split;
}

/**
 * Ancestral distance intervals of a node at `depth`, from the build-time
 * ancestor distance vectors. `ancestor_distances[o][j]` is the distance from
 * object `o` to its ancestor at depth `j`. Entry `l - 1` of the result is the
 * interval for ancestor level `l`, taken over `pnode` and all of `cnodes`.
 * Makes no metric calls.
 */
inline std::vector<DistanceInterval> compute_adiv(const std::vector<std::vector<double>>& ancestor_distances,
                                                  std::uint32_t pnode,
                                                  std::span<const PivotDistance> cnodes,
                                                  std::size_t depth,
                                                  std::size_t cascade_limit) {
    const std::size_t levels = ancestral_levels(depth, cascade_limit);
    std::vector<DistanceInterval> out(levels);

    auto lookup = [&](std::uint32_t object, std::size_t slot) {
        if (object >= ancestor_distances.size() || slot >= ancestor_distances[object].size()) {
            throw std::logic_error("compute_adiv: missing ancestor distance for object " + std::to_string(object) +
                                   " at depth " + std::to_string(slot));
        }
        return ancestor_distances[object][slot];
    };

    for (std::size_t level = 1; level <= levels; ++level) {
        const std::size_t slot = depth - level;
        double near = lookup(pnode, slot);
        double far = near;
        for (const auto& c : cnodes) {
            double d = lookup(c.object, slot);
            near = std::min(near, d);
            far = std::max(far, d);
        }
        out[level - 1] = {near, far};
    }
    return out;
}

namespace detail {

template<typename Object, typename M>
class CmtBuilder {
public:
    CmtBuilder(const std::vector<Object>& objects, const M& metric, const BuildConfig& config)
        : objects_(objects), metric_(metric), config_(config), rng_(config.seed) {}

    void run() {
        if (objects_.size() >= no_node) {
            throw BuildError("build_cmt: too many objects");
        }
        const std::size_t n = objects_.size();
        nodes_.reserve(n);
        work_.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            work_[i].object = static_cast<std::uint32_t>(i);
        }
        if (config_.cascade_limit > 0) {
            ancestor_distances_.resize(n);
        }
        build(0, n, 0);
        ancestor_distances_.clear();
        ancestor_distances_.shrink_to_fit();
    }

    std::vector<CmtNode> nodes_;
    std::vector<DistanceInterval> intervals_;
    std::uint64_t calls_ = 0;

private:
    double evaluate(std::uint32_t a, std::uint32_t b) {
        double d;
        try {
            d = static_cast<double>(metric_(objects_[a], objects_[b]));
        } catch (const std::exception& e) {
            throw BuildError("build_cmt: metric failed on objects " + std::to_string(a) + " and " +
                             std::to_string(b) + ": " + e.what());
        }
        ++calls_;
        if (!(d >= 0) || !std::isfinite(d)) {
            throw BuildError("build_cmt: metric returned " + std::to_string(d) + " for objects " +
                             std::to_string(a) + " and " + std::to_string(b));
        }
        return d;
    }

    NodeIndex build(std::size_t begin, std::size_t end, std::uint32_t depth) {
        const std::size_t n = end - begin;
        if (n == 0) {
            return no_node;
        }

        const auto index = static_cast<NodeIndex>(nodes_.size());
        CmtNode node;
        node.depth = depth;
        node.count = static_cast<std::uint32_t>(n);
        node.first_interval = static_cast<std::uint32_t>(intervals_.size());
        node.interval_count = static_cast<std::uint32_t>(ancestral_levels(depth, config_.cascade_limit) + 1);
        nodes_.push_back(node);
        intervals_.resize(intervals_.size() + node.interval_count);

        std::swap(work_[begin], work_[begin + uniform_index(rng_, n)]);
        const std::uint32_t pivot = work_[begin].object;
        nodes_[index].object = pivot;

        std::span<PivotDistance> rest(work_.data() + begin + 1, n - 1);
        DistanceInterval own;
        for (auto& entry : rest) {
            entry.distance = evaluate(pivot, entry.object);
            own.near = std::min(own.near, entry.distance);
            own.far = std::max(own.far, entry.distance);
            if (!ancestor_distances_.empty()) {
                ancestor_distances_[entry.object].push_back(entry.distance);
            }
        }
        intervals_[node.first_interval] = own;

        if (!rest.empty()) {
            const BomSplit split = partition_bom(rest);
            const std::size_t mid = begin + 1 + split.left_size;
            NodeIndex left = build(begin + 1, mid, depth + 1);
            NodeIndex right = build(mid, end, depth + 1);
            nodes_[index].left = left;
            nodes_[index].right = right;
        }

        if (node.interval_count > 1) {
            // The subtree's objects sit in work_[begin + 1, end) again after the recursion.
            auto adiv = compute_adiv(ancestor_distances_, pivot, std::span<const PivotDistance>(rest), depth,
                                     config_.cascade_limit);
            std::copy(adiv.begin(), adiv.end(), intervals_.begin() + node.first_interval + 1);
        }
        return index;
    }

    const std::vector<Object>& objects_;
    const M& metric_;
    BuildConfig config_;
    Rng rng_;
    std::vector<PivotDistance> work_;
    std::vector<std::vector<double>> ancestor_distances_;
};

} // namespace detail

/**
 * @brief Builds a cascaded metric tree with random pivots and balanced object
 * median partitioning.
 *
 * Each recursion picks a pivot uniformly at random from the remaining objects,
 * measures its distance to all the others (the only metric calls made), splits
 * them into halves by median distance and recurses. The ancestral intervals are
 * filled bottom-up from the recorded distances. Distance calls are identical
 * for every cascade limit given the same objects and seed.
 *
 * An empty input yields an empty tree. Throws `BuildError` naming the object
 * pair if the metric throws or returns a negative or non-finite value.
 */
template<typename Object, typename M>
    requires Metric<M, Object>
CmtTree<Object, M> build_cmt(std::vector<Object> objects, M metric, const BuildConfig& config) {
    detail::CmtBuilder<Object, M> builder(objects, metric, config);
    builder.run();
    std::uint64_t calls = builder.calls_;
    return CmtTree<Object, M>(std::move(objects), std::move(builder.nodes_), std::move(builder.intervals_),
                              std::move(metric), config.cascade_limit, config.seed, calls);
}

struct Violation {
    NodeIndex node = no_node;
    std::size_t level = 0;
    std::string field; ///< "near", "far", "count", or a structural description
    double stored = 0;
    double expected = 0;
};

/**
 * Recomputes every stored interval and count with direct metric calls and
 * reports each disagreement. Distances from each node's object to its subtree
 * are computed once and reused for all descendant levels. Integer-valued
 * metrics are compared exactly, others with a relative tolerance of 1e-9.
 */
template<typename Object, typename M>
std::vector<Violation> validate_tree(const CmtTree<Object, M>& tree) {
    std::vector<Violation> out;
    const auto nodes = tree.nodes();
    const std::size_t n = nodes.size();
    if (n == 0) {
        if (tree.size() != 0) {
            out.push_back({no_node, 0, "size without nodes", static_cast<double>(tree.size()), 0});
        }
        return out;
    }
    if (n != tree.size() || nodes[0].count != n) {
        out.push_back({0, 0, "count", static_cast<double>(nodes[0].count), static_cast<double>(tree.size())});
        return out;
    }

    // Structure first: interval checks below rely on contiguous preorder subtrees.
    for (NodeIndex i = 0; i < n; ++i) {
        const auto& nd = nodes[i];
        std::uint64_t left_count = 0, right_count = 0;
        bool shape_ok = true;
        if (nd.left != no_node) {
            shape_ok &= nd.left == i + 1 && nd.left < n && nodes[nd.left].depth == nd.depth + 1;
            if (nd.left < n) left_count = nodes[nd.left].count;
        }
        if (nd.right != no_node) {
            shape_ok &= nd.right == i + 1 + left_count && nd.right < n && nodes[nd.right].depth == nd.depth + 1;
            if (nd.right < n) right_count = nodes[nd.right].count;
        }
        if (!shape_ok) {
            out.push_back({i, 0, "child layout", 0, 0});
        }
        if (nd.count != 1 + left_count + right_count || i + nd.count > n) {
            out.push_back({i, 0, "count", static_cast<double>(nd.count), static_cast<double>(1 + left_count + right_count)});
        }
        const std::size_t expected_levels = ancestral_levels(nd.depth, tree.cascade_limit()) + 1;
        if (nd.interval_count != expected_levels) {
            out.push_back({i, 0, "interval count", static_cast<double>(nd.interval_count),
                           static_cast<double>(expected_levels)});
        }
    }
    if (!out.empty()) {
        return out;
    }

    constexpr bool exact = metric_is_exact<M>();
    auto agrees = [](double stored, double expected) {
        if (stored == expected) return true;
        if (exact) return false;
        return std::abs(stored - expected) <= 1e-9 * std::max(1.0, std::abs(expected));
    };
    auto check = [&](NodeIndex node, std::size_t level, const DistanceInterval& stored, const DistanceInterval& expected) {
        if (expected.is_empty() || stored.is_empty()) {
            if (expected.is_empty() != stored.is_empty()) {
                out.push_back({node, level, "empty", stored.near, expected.near});
            }
            return;
        }
        if (!agrees(stored.near, expected.near)) out.push_back({node, level, "near", stored.near, expected.near});
        if (!agrees(stored.far, expected.far)) out.push_back({node, level, "far", stored.far, expected.far});
    };

    const auto& metric = tree.metric();
    std::vector<double> dist;
    for (NodeIndex a = 0; a < n; ++a) {
        const auto& anchor = nodes[a];
        const auto& anchor_object = tree.node_object(a);
        dist.assign(anchor.count, 0.0);
        for (std::uint32_t off = 1; off < anchor.count; ++off) {
            dist[off] = static_cast<double>(metric(anchor_object, tree.node_object(a + off)));
        }

        DistanceInterval own;
        for (std::uint32_t off = 1; off < anchor.count; ++off) {
            own.near = std::min(own.near, dist[off]);
            own.far = std::max(own.far, dist[off]);
        }
        check(a, 0, tree.intervals(a)[0], own);

        if (tree.cascade_limit() == 0) {
            continue;
        }
        for (std::uint32_t off = 1; off < anchor.count; ++off) {
            const NodeIndex v = a + off;
            const std::size_t level = nodes[v].depth - anchor.depth;
            if (level >= nodes[v].interval_count) {
                continue;
            }
            DistanceInterval expected;
            for (std::uint32_t j = off; j < off + nodes[v].count; ++j) {
                expected.near = std::min(expected.near, dist[j]);
                expected.far = std::max(expected.far, dist[j]);
            }
            check(v, level, tree.intervals(v)[level], expected);
        }
    }
    return out;
}

} // namespace cascade

#endif
