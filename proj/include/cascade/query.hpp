#ifndef CASCADE_QUERY_HPP
#define CASCADE_QUERY_HPP

#include "metric.hpp"
#include "tree.hpp"

#include <algorithm>
#include <cstdint>
#include <limits>
#include <numeric>
#include <queue>
#include <span>
#include <stdexcept>
#include <vector>

/**
 * @file query.hpp
 *
 * @brief Range, counting and k-nearest-neighbor queries over a `CmtTree`,
 * the pruning and collection bounds they rely on, and brute-force references.
 *
 * All mutable query state (ancestor distance stack, results, priority queue,
 * statistics) is local to one call, so any number of queries may share a tree.
 */

namespace cascade {

inline constexpr double infinite_radius = std::numeric_limits<double>::infinity();
inline constexpr std::size_t unlimited_k = std::numeric_limits<std::size_t>::max();

struct QueryStats {
    std::uint64_t distance_calls = 0;
    std::uint64_t nodes_visited = 0;
    std::uint64_t subtrees_collected = 0;
    std::uint64_t objects_collected = 0;

    QueryStats& operator+=(const QueryStats& other) {
        distance_calls += other.distance_calls;
        nodes_visited += other.nodes_visited;
        subtrees_collected += other.subtrees_collected;
        objects_collected += other.objects_collected;
        return *this;
    }
    bool operator==(const QueryStats&) const = default;
};

/**
 * One result entry. `object` indexes the tree's object list (or the dataset for
 * brute-force results). Entries gathered by collection carry the bound that
 * justified the collection rather than the exact distance, with `exact == false`.
 */
struct Neighbor {
    std::uint32_t object = 0;
    double distance = 0;
    bool exact = true;

    bool operator==(const Neighbor&) const = default;
};

using ResultSet = std::vector<Neighbor>;

enum class ChildOrder { left_first, right_first };

/// How far `d_pq` lies outside `interval`; 0 inside, +inf for the empty sentinel.
inline double pruning_distance(double d_pq, const DistanceInterval& interval) {
    if (d_pq < interval.near) {
        return interval.near - d_pq;
    }
    if (d_pq > interval.far) {
        return d_pq - interval.far;
    }
    return 0;
}

/**
 * Largest pruning distance over a node's ancestral intervals. `ancestors` holds
 * the query's distances to the objects on the root path, root first, so level
 * `l` pairs with `ancestors[size - l]`. Returns 0 when the node stores no
 * ancestral levels.
 */
inline double max_pruning_distance(std::span<const double> ancestors, std::span<const DistanceInterval> intervals) {
    double best = 0;
    for (std::size_t level = 1; level < intervals.size(); ++level) {
        best = std::max(best, pruning_distance(ancestors[ancestors.size() - level], intervals[level]));
    }
    return best;
}

/// Upper bound on d(q, x) for every x in the node's subtree, given d_pq = d(q, node object).
inline double collection_distance(double d_pq, const DistanceInterval& own) {
    return own.is_empty() ? d_pq : d_pq + own.far;
}

/**
 * Smallest ancestral collection bound, `min_l ancestors[l] + far[l]`; +inf when
 * the node stores no ancestral levels.
 */
inline double min_collection_distance(std::span<const double> ancestors, std::span<const DistanceInterval> intervals) {
    double best = infinite_radius;
    for (std::size_t level = 1; level < intervals.size(); ++level) {
        best = std::min(best, ancestors[ancestors.size() - level] + intervals[level].far);
    }
    return best;
}

namespace detail {

template<typename Object, typename M>
class RangeSearch {
public:
    RangeSearch(const CmtTree<Object, M>& tree, const Object& query, double radius, ChildOrder order)
        : tree_(tree), query_(query), radius_(radius), order_(order), counter_(tree.metric()) {
        if (!(radius >= 0)) {
            throw std::invalid_argument("range query: radius must be non-negative");
        }
    }

    void basic(NodeIndex i) {
        if (i == no_node) {
            return;
        }
        ++stats_.nodes_visited;
        const auto intervals = tree_.intervals(i);
        if (max_pruning_distance(stack_, intervals) > radius_) {
            return;
        }
        const double d = counter_(query_, tree_.node_object(i));
        if (d <= radius_) {
            results_.push_back({tree_.node(i).object, d, true});
        }
        if (pruning_distance(d, intervals[0]) <= radius_) {
            descend(i, d, [this](NodeIndex c) { basic(c); });
        }
    }

    /// With `materialize == false` only `count_` is maintained.
    template<bool materialize>
    void collect(NodeIndex i) {
        if (i == no_node) {
            return;
        }
        ++stats_.nodes_visited;
        const auto intervals = tree_.intervals(i);
        if (max_pruning_distance(stack_, intervals) > radius_) {
            return;
        }
        const double min_cd = min_collection_distance(stack_, intervals);
        if (min_cd <= radius_) {
            add_subtree<materialize>(i, min_cd);
            return;
        }
        const double d = counter_(query_, tree_.node_object(i));
        const double cd = collection_distance(d, intervals[0]);
        if (cd <= radius_) {
            add_subtree<materialize>(i, cd);
            return;
        }
        if (d <= radius_) {
            ++count_;
            if constexpr (materialize) {
                results_.push_back({tree_.node(i).object, d, true});
            }
        }
        if (pruning_distance(d, intervals[0]) <= radius_) {
            descend(i, d, [this](NodeIndex c) { collect<materialize>(c); });
        }
    }

    QueryStats stats() const {
        QueryStats s = stats_;
        s.distance_calls = counter_.calls();
        return s;
    }

    ResultSet results_;
    std::uint64_t count_ = 0;

private:
    template<typename Recurse>
    void descend(NodeIndex i, double d, Recurse&& recurse) {
        const auto& nd = tree_.node(i);
        stack_.push_back(d);
        if (order_ == ChildOrder::left_first) {
            recurse(nd.left);
            recurse(nd.right);
        } else {
            recurse(nd.right);
            recurse(nd.left);
        }
        stack_.pop_back();
    }

    template<bool materialize>
    void add_subtree(NodeIndex i, double bound) {
        const auto count = tree_.node(i).count;
        ++stats_.subtrees_collected;
        stats_.objects_collected += count;
        count_ += count;
        if constexpr (materialize) {
            for (NodeIndex j = i; j < i + count; ++j) {
                results_.push_back({tree_.node(j).object, bound, false});
            }
        }
    }

    const CmtTree<Object, M>& tree_;
    const Object& query_;
    double radius_;
    ChildOrder order_;
    CountingMetric<M> counter_;
    std::vector<double> stack_;
    QueryStats stats_;
};

} // namespace detail

/**
 * All objects within `radius` of `query`, each with its exact distance.
 * Subtrees are pruned by the ancestral intervals before the node's own
 * distance is computed and by the node's own interval afterwards.
 * `stats` is accumulated into, not reset.
 */
template<typename Object, typename M>
ResultSet basic_range_query(const CmtTree<Object, M>& tree, const Object& query, double radius, QueryStats& stats,
                            ChildOrder order = ChildOrder::left_first) {
    detail::RangeSearch<Object, M> search(tree, query, radius, order);
    search.basic(tree.root());
    stats += search.stats();
    return std::move(search.results_);
}

/**
 * Same membership as `basic_range_query`, but a subtree whose collection bound
 * (ancestral or own) is within `radius` is appended wholesale without further
 * metric calls. Collected entries hold that bound and `exact == false`.
 */
template<typename Object, typename M>
ResultSet collect_range_query(const CmtTree<Object, M>& tree, const Object& query, double radius, QueryStats& stats,
                              ChildOrder order = ChildOrder::left_first) {
    detail::RangeSearch<Object, M> search(tree, query, radius, order);
    search.template collect<true>(tree.root());
    stats += search.stats();
    return std::move(search.results_);
}

/// Size of the `collect_range_query` result, adding subtree counts instead of materializing them.
template<typename Object, typename M>
std::uint64_t counting_query(const CmtTree<Object, M>& tree, const Object& query, double radius, QueryStats& stats) {
    detail::RangeSearch<Object, M> search(tree, query, radius, ChildOrder::left_first);
    search.template collect<false>(tree.root());
    stats += search.stats();
    return search.count_;
}

/**
 * Replaces the bounds on collected entries with exact distances. Runs outside
 * the search traversal and returns the number of metric calls it made, which
 * are not part of any search statistic.
 */
template<typename Object, typename M>
std::uint64_t resolve_collected_distances(const CmtTree<Object, M>& tree, const Object& query, ResultSet& results) {
    CountingMetric<M> counter(tree.metric());
    for (auto& entry : results) {
        if (!entry.exact) {
            entry.distance = counter(query, tree.objects()[entry.object]);
            entry.exact = true;
        }
    }
    return counter.calls();
}

/**
 * Priority-queue record for best-first search. `parent` indexes the owning
 * query's entry arena; following it yields the query's distances to the node's
 * ancestors. `distance` is set when the entry is dequeued and evaluated.
 */
struct PqEntry {
    NodeIndex node = no_node;
    std::uint32_t parent = std::numeric_limits<std::uint32_t>::max();
    double distance = 0;
    double priority = 0;
};

namespace detail {

inline bool neighbor_less(const Neighbor& a, const Neighbor& b) {
    return a.distance < b.distance || (a.distance == b.distance && a.object < b.object);
}

/**
 * Lower bound on the distance from the query to anything below `child`, whose
 * parent is the already-evaluated entry `parent_entry`: the parent's own
 * pruning distance combined with every ancestral interval the child stores.
 */
template<typename Object, typename M>
double child_priority(const CmtTree<Object, M>& tree, const std::vector<PqEntry>& entries, std::uint32_t parent_entry,
                      NodeIndex child) {
    const auto& parent = entries[parent_entry];
    double best = pruning_distance(parent.distance, tree.intervals(parent.node)[0]);
    const auto intervals = tree.intervals(child);
    std::uint32_t e = parent_entry;
    for (std::size_t level = 1; level < intervals.size(); ++level) {
        best = std::max(best, pruning_distance(entries[e].distance, intervals[level]));
        e = entries[e].parent;
    }
    return best;
}

} // namespace detail

/**
 * @brief Best-first k-nearest-neighbor search, optionally bounded by radius.
 *
 * Returns the `k` objects nearest to `query` among those within `radius_bound`
 * (fewer if fewer qualify), sorted by distance and then object index. The
 * search radius starts at `radius_bound` and shrinks to the k-th held distance
 * once `k` candidates are held.
 *
 * Nodes are expanded in increasing order of their priority, the largest lower
 * bound available from the parent's interval and all stored ancestral
 * intervals. Entries are pruned both when pushed and again when popped, since
 * the radius may have shrunk meanwhile. Ties in priority pop in push order.
 * `nodes_visited` counts pops, including stale ones.
 */
template<typename Object, typename M>
ResultSet knn_query(const CmtTree<Object, M>& tree, const Object& query, std::size_t k, double radius_bound,
                    QueryStats& stats) {
    if (k == 0) {
        throw std::invalid_argument("knn_query: k must be at least 1");
    }
    if (!(radius_bound >= 0)) {
        throw std::invalid_argument("knn_query: radius bound must be non-negative");
    }
    ResultSet held;
    if (tree.empty()) {
        return held;
    }

    struct Queued {
        double priority;
        std::uint64_t sequence;
        std::uint32_t entry;
        bool operator>(const Queued& o) const {
            return priority > o.priority || (priority == o.priority && sequence > o.sequence);
        }
    };
    std::priority_queue<Queued, std::vector<Queued>, std::greater<>> queue;
    std::vector<PqEntry> entries;
    std::uint64_t sequence = 0;

    CountingMetric<M> counter(tree.metric());
    QueryStats local;
    double radius = radius_bound;

    auto push = [&](NodeIndex node, std::uint32_t parent, double priority) {
        entries.push_back({node, parent, 0, priority});
        queue.push({priority, sequence++, static_cast<std::uint32_t>(entries.size() - 1)});
    };
    push(tree.root(), std::numeric_limits<std::uint32_t>::max(), 0);

    // `held` is a max-heap on (distance, object).
    while (!queue.empty()) {
        const std::uint32_t e = queue.top().entry;
        queue.pop();
        ++local.nodes_visited;
        if (entries[e].priority > radius) {
            continue;
        }
        const NodeIndex node = entries[e].node;
        const double d = counter(query, tree.node_object(node));
        entries[e].distance = d;

        if (d <= radius) {
            held.push_back({tree.node(node).object, d, true});
            std::push_heap(held.begin(), held.end(), detail::neighbor_less);
            if (held.size() > k) {
                std::pop_heap(held.begin(), held.end(), detail::neighbor_less);
                held.pop_back();
            }
            if (held.size() == k) {
                radius = std::min(radius, held.front().distance);
            }
        }

        if (pruning_distance(d, tree.intervals(node)[0]) > radius) {
            continue;
        }
        for (NodeIndex child : {tree.node(node).left, tree.node(node).right}) {
            if (child == no_node) {
                continue;
            }
            const double priority = detail::child_priority(tree, entries, e, child);
            if (priority <= radius) {
                push(child, e, priority);
            }
        }
    }

    std::sort_heap(held.begin(), held.end(), detail::neighbor_less);
    local.distance_calls = counter.calls();
    stats += local;
    return held;
}

/// Linear scan reference for range queries, in dataset order.
template<typename Object, typename M>
ResultSet brute_force_range(std::span<const Object> objects, const M& metric, const Object& query, double radius) {
    ResultSet out;
    for (std::size_t i = 0; i < objects.size(); ++i) {
        const double d = static_cast<double>(metric(query, objects[i]));
        if (d <= radius) {
            out.push_back({static_cast<std::uint32_t>(i), d, true});
        }
    }
    return out;
}

/// Linear scan reference for bounded kNN; ties broken by dataset index.
template<typename Object, typename M>
ResultSet brute_force_knn(std::span<const Object> objects, const M& metric, const Object& query, std::size_t k,
                          double radius_bound) {
    ResultSet all = brute_force_range(objects, metric, query, radius_bound);
    std::sort(all.begin(), all.end(), detail::neighbor_less);
    if (all.size() > k) {
        all.resize(k);
    }
    return all;
}

/**
 * Distance calls of a collection-free range query issued with the radius of
 * the true k-th neighbor, divided by the distance calls of `knn_query` for
 * the same `k`. Values near 1 mean the kNN search spends about as much as a
 * range query that knew the answer's radius in advance.
 */
template<typename Object, typename M>
double range_optimality_ratio(const CmtTree<Object, M>& tree, const Object& query, std::size_t k,
                              QueryStats* knn_stats = nullptr, QueryStats* range_stats = nullptr) {
    QueryStats knn;
    const ResultSet neighbors = knn_query(tree, query, k, infinite_radius, knn);
    if (neighbors.empty()) {
        throw std::invalid_argument("range_optimality_ratio: empty tree");
    }
    QueryStats range;
    basic_range_query(tree, query, neighbors.back().distance, range);
    if (knn_stats) *knn_stats += knn;
    if (range_stats) *range_stats += range;
    return static_cast<double>(range.distance_calls) / static_cast<double>(knn.distance_calls);
}

} // namespace cascade

#endif
