#ifndef CASCADE_BENCH_HPP
#define CASCADE_BENCH_HPP

#include "data.hpp"
#include "tree.hpp"

#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file bench.hpp
 *
 * @brief Experiment driver behind the `cascade_bench` tool: builds trees for
 * each cascade setting, runs query batteries, and aggregates per-cell
 * statistics into CSV rows.
 */

namespace cascade {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A query result disagreed with the brute-force reference. `what()` holds the offending query.
class VerificationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    DatasetSpec dataset;
    std::vector<std::size_t> cascades{0, 1, unbounded_cascade};
    std::vector<double> radii;      ///< fractions of the estimated maximum pairwise distance
    std::vector<std::size_t> ks;
    std::vector<double> bound_pcts; ///< kNN radius bounds in percent; +inf = unbounded
    std::size_t queries = 100;
    std::uint64_t seed = 1;
    bool verify = false;
    bool timing = false;
    std::size_t query_edits = default_query_edits;
    std::string tree_path; ///< load this tree instead of building from `dataset`
};

struct Aggregate {
    double sum = 0;
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();
    std::size_t count = 0;

    void add(double v) {
        sum += v;
        min = v < min ? v : min;
        max = v > max ? v : max;
        ++count;
    }
    double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

/// One CSV row: a (command, cascade setting, radius / k / bound) cell over the query batch.
struct RunRecord {
    std::string command;
    std::string dataset;
    std::size_t n = 0;
    std::size_t dim = 0;
    std::size_t cascade = 0;
    std::optional<double> radius_frac;
    std::optional<double> radius;
    std::optional<std::size_t> k;
    std::optional<double> bound_pct;
    std::size_t queries = 0;
    Aggregate calls;
    Aggregate nodes;
    Aggregate collected;
    Aggregate result;
    std::optional<Aggregate> ratio;
    bool verified = false;
    Aggregate wall_ms;

    /// Mean result size divided by `n`.
    double result_fraction() const { return n ? result.mean() / static_cast<double>(n) : 0.0; }
};

struct BuildReport {
    std::size_t n = 0;
    std::size_t height = 0;
    std::uint64_t build_distance_calls = 0;
    std::size_t cascade = 0;
    std::size_t violations = 0;
};

/// Parses "0", "1", "inf" (also "unbounded").
std::size_t parse_cascade(const std::string& text);

/// Builds one tree from `config.dataset`, optionally saves it, and reports on it.
BuildReport run_build(const RunConfig& config, std::size_t cascade, const std::string& out_path = {},
                      bool validate = false);

std::vector<RunRecord> run_range(const RunConfig& config);
std::vector<RunRecord> run_knn(const RunConfig& config);
std::vector<RunRecord> run_optimality(const RunConfig& config);

/// Header plus one line per record; reals printed with 6 significant digits.
std::string to_csv(const std::vector<RunRecord>& records, bool timing = false);

} // namespace cascade

#endif
