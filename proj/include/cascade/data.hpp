#ifndef CASCADE_DATA_HPP
#define CASCADE_DATA_HPP

#include "metric.hpp"
#include "random.hpp"

#include <cstdint>
#include <filesystem>
#include <istream>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cascade {

class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class DatasetKind { uniform_points, fasta_file };

struct DatasetSpec {
    DatasetKind kind = DatasetKind::uniform_points;
    std::size_t n = 0;   ///< point count, or cap on sequences read (0 = no cap)
    std::size_t dim = 3; ///< points only
    std::uint64_t seed = 0;
    std::string path;    ///< fasta only
};

/// `n` points with coordinates i.i.d. uniform on [0, 1). Pure function of its arguments.
std::vector<EuclideanPoint> gen_uniform_points(std::size_t n, std::size_t dim, std::uint64_t seed);

struct FastaRecords {
    std::vector<Sequence> sequences;
    std::size_t skipped_empty = 0;
};

/**
 * Reads FASTA records. Header lines start with '>' and the id runs to the
 * first whitespace; sequence lines are concatenated with whitespace removed
 * and uppercased. Symbols must be letters or '*'. Records with no symbols are
 * skipped and counted. At most `cap` records are kept (0 = no cap).
 *
 * Throws `DataError` with a line number for sequence data before the first
 * header or for a symbol outside the alphabet.
 */
FastaRecords parse_fasta(std::istream& in, std::size_t cap = 0);

/// File variant; a missing file is a `DataError`.
FastaRecords parse_fasta(const std::filesystem::path& path, std::size_t cap = 0);

void write_fasta(std::ostream& out, std::span<const Sequence> sequences, std::size_t line_width = 60);

/// Value of CASCADE_INDEX_DATA_DIR, or "data" when unset.
std::filesystem::path data_dir();

/// `path` itself if it exists, otherwise the same relative path under `data_dir()`.
std::filesystem::path resolve_data_path(const std::filesystem::path& path);

/// Off-dataset point queries: fresh uniform points from a seed stream independent of dataset seeds.
std::vector<EuclideanPoint> sample_point_queries(std::size_t count, std::size_t dim, std::uint64_t seed);

inline constexpr std::size_t default_query_edits = 5;

/**
 * Sequence queries: randomly chosen dataset sequences, each altered by `edits`
 * random single-symbol substitutions, insertions or deletions over the
 * 20 standard amino-acid letters. Each query's id names its source.
 */
std::vector<Sequence> sample_sequence_queries(std::span<const Sequence> dataset, std::size_t count, std::uint64_t seed,
                                              std::size_t edits = default_query_edits);

/**
 * Synthetic protein-like dataset for when no real FASTA file is at hand.
 * Sequences come in families: a random ancestor (residue frequencies of
 * natural proteins, log-normal length with mean near 360) and a few mutated
 * descendants at varied divergence.
 */
std::vector<Sequence> generate_protein_families(std::size_t n, std::uint64_t seed);

/**
 * Estimate of the largest pairwise distance from `pairs` random pairs.
 */
template<typename Object, typename M>
double estimate_max_distance(std::span<const Object> objects, const M& metric, std::size_t pairs, std::uint64_t seed) {
    if (objects.size() < 2) {
        return 0;
    }
    Rng rng(mix_seed(seed, 0x3a));
    double best = 0;
    for (std::size_t i = 0; i < pairs; ++i) {
        const auto a = uniform_index(rng, objects.size());
        const auto b = uniform_index(rng, objects.size());
        best = std::max(best, static_cast<double>(metric(objects[a], objects[b])));
    }
    return best;
}

} // namespace cascade

#endif
