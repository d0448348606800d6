#ifndef CASCADE_METRIC_HPP
#define CASCADE_METRIC_HPP

#include <concepts>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

/**
 * @file metric.hpp
 *
 * @brief Black-box metric abstraction, the two concrete metrics used by the
 * benchmarks, and a call-counting wrapper.
 */

namespace cascade {

/**
 * @brief Raised when a metric cannot be evaluated for a pair of objects.
 */
class MetricError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * @brief A metric over `Object` is any callable returning a non-negative real
 * distance that is symmetric, zero on identical objects, and obeys the
 * triangle inequality. None of these laws are checked at compile time.
 */
template<typename M, typename Object>
concept Metric = requires(const M& m, const Object& a, const Object& b) {
    { m(a, b) } -> std::convertible_to<double>;
};

struct EuclideanPoint {
    std::vector<double> coords;

    std::size_t dim() const { return coords.size(); }
    bool operator==(const EuclideanPoint&) const = default;
};

struct Sequence {
    std::string id;
    std::string symbols;

    bool operator==(const Sequence&) const = default;
};

/**
 * L2 distance. Throws `MetricError` when the dimensions differ.
 */
double euclidean_distance(const EuclideanPoint& a, const EuclideanPoint& b);

/**
 * Unit-cost edit distance (insertions, deletions, substitutions) computed by
 * the full two-row dynamic program. There is no banding or early exit, so
 * every call costs O(|a| * |b|).
 */
std::uint32_t levenshtein_distance(std::string_view a, std::string_view b);

inline std::uint32_t levenshtein_distance(const Sequence& a, const Sequence& b) {
    return levenshtein_distance(a.symbols, b.symbols);
}

struct EuclideanMetric {
    static constexpr std::uint32_t tag = 1;
    static constexpr bool exact = false;

    double operator()(const EuclideanPoint& a, const EuclideanPoint& b) const {
        return euclidean_distance(a, b);
    }
};

/// Levenshtein distance widened to double so both metrics share one engine.
struct LevenshteinMetric {
    static constexpr std::uint32_t tag = 2;
    static constexpr bool exact = true;

    double operator()(const Sequence& a, const Sequence& b) const {
        return static_cast<double>(levenshtein_distance(a, b));
    }
};

/// True for metrics whose values are integers, which are compared exactly.
template<typename M>
constexpr bool metric_is_exact() {
    if constexpr (requires { M::exact; }) {
        return M::exact;
    } else {
        return false;
    }
}

/**
 * @brief Wraps a metric and counts evaluations.
 *
 * The counter belongs to the wrapper, so one instance is meant to live for a
 * single query (or a single build) and be merged into run totals afterwards.
 * A call that throws does not increment the counter.
 */
template<typename Inner>
class CountingMetric {
public:
    explicit CountingMetric(const Inner& inner, std::uint64_t initial_calls = 0)
        : inner_(&inner), calls_(initial_calls) {}

    template<typename Object>
    double operator()(const Object& a, const Object& b) {
        double d = static_cast<double>((*inner_)(a, b));
        ++calls_;
        return d;
    }

    std::uint64_t calls() const { return calls_; }
    const Inner& inner() const { return *inner_; }

private:
    const Inner* inner_;
    std::uint64_t calls_;
};

} // namespace cascade

#endif
