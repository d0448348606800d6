#include "cascade/data.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>

namespace cascade {

namespace {

constexpr std::string_view amino_acids = "ACDEFGHIKLMNPQRSTVWY";

// Background residue frequencies (percent) in natural proteins, same order as `amino_acids`.
constexpr std::array<double, 20> residue_weights{8.25, 1.37, 5.45, 6.75, 3.86, 7.07, 2.27, 5.96, 5.84, 9.66,
                                                 2.42, 4.06, 4.70, 3.93, 5.53, 6.56, 5.34, 6.87, 1.08, 2.92};

class ResidueSampler {
public:
    ResidueSampler() {
        double total = 0;
        for (std::size_t i = 0; i < residue_weights.size(); ++i) {
            total += residue_weights[i];
            cumulative_[i] = total;
        }
        for (auto& c : cumulative_) c /= total;
    }

    char operator()(Rng& rng) const {
        const double u = uniform01(rng);
        const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), u);
        const auto idx = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()), 19);
        return amino_acids[idx];
    }

private:
    std::array<double, 20> cumulative_{};
};

double standard_normal(Rng& rng) {
    // Box-Muller; 1 - u keeps the log argument in (0, 1].
    const double u1 = 1.0 - uniform01(rng);
    const double u2 = uniform01(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * 3.14159265358979323846 * u2);
}

void apply_random_edit(std::string& s, Rng& rng, const ResidueSampler& residue) {
    const auto kind = s.empty() ? 1 : uniform_index(rng, 3);
    if (kind == 0) {
        const auto pos = uniform_index(rng, s.size());
        char c = s[pos];
        while (c == s[pos]) {
            c = amino_acids[uniform_index(rng, amino_acids.size())];
        }
        s[pos] = c;
    } else if (kind == 1) {
        s.insert(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size() + 1)), residue(rng));
    } else if (s.size() > 1) {
        s.erase(s.begin() + static_cast<std::ptrdiff_t>(uniform_index(rng, s.size())));
    } else {
        s.push_back(residue(rng));
    }
}

bool is_symbol(char c) {
    return (c >= 'A' && c <= 'Z') || c == '*';
}

} // namespace

std::vector<EuclideanPoint> gen_uniform_points(std::size_t n, std::size_t dim, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<EuclideanPoint> points(n);
    for (auto& p : points) {
        p.coords.resize(dim);
        for (auto& c : p.coords) {
            c = uniform01(rng);
        }
    }
    return points;
}

FastaRecords parse_fasta(std::istream& in, std::size_t cap) {
    FastaRecords out;
    std::string line;
    std::size_t line_no = 0;
    bool open = false;
    Sequence current;

    auto finish = [&]() {
        if (!open) return;
        if (current.symbols.empty()) {
            ++out.skipped_empty;
        } else {
            out.sequences.push_back(std::move(current));
        }
        current = Sequence{};
        open = false;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line[0] == '>') {
            finish();
            if (cap != 0 && out.sequences.size() >= cap) {
                return out;
            }
            const auto start = line.find_first_not_of(" \t", 1);
            const auto stop = start == std::string::npos ? std::string::npos : line.find_first_of(" \t\r", start);
            current.id = start == std::string::npos ? "" : line.substr(start, stop - start);
            open = true;
            continue;
        }
        for (char raw : line) {
            if (std::isspace(static_cast<unsigned char>(raw))) continue;
            if (!open) {
                throw DataError("FASTA line " + std::to_string(line_no) + ": sequence data before any header");
            }
            const char c = static_cast<char>(std::toupper(static_cast<unsigned char>(raw)));
            if (!is_symbol(c)) {
                throw DataError("FASTA line " + std::to_string(line_no) + ": invalid symbol '" + std::string(1, raw) + "'");
            }
            current.symbols.push_back(c);
        }
    }
    finish();
    if (cap != 0 && out.sequences.size() > cap) {
        out.sequences.resize(cap);
    }
    return out;
}

FastaRecords parse_fasta(const std::filesystem::path& path, std::size_t cap) {
    std::ifstream in(path);
    if (!in) {
        throw DataError("cannot open FASTA file " + path.string());
    }
    return parse_fasta(in, cap);
}

void write_fasta(std::ostream& out, std::span<const Sequence> sequences, std::size_t line_width) {
    for (const auto& s : sequences) {
        out << '>' << s.id << '\n';
        for (std::size_t i = 0; i < s.symbols.size(); i += line_width) {
            out << s.symbols.substr(i, line_width) << '\n';
        }
    }
}

std::filesystem::path data_dir() {
    const char* env = std::getenv("CASCADE_INDEX_DATA_DIR");
    return env && *env ? std::filesystem::path(env) : std::filesystem::path("data");
}

std::filesystem::path resolve_data_path(const std::filesystem::path& path) {
    if (std::filesystem::exists(path) || path.is_absolute()) {
        return path;
    }
    return data_dir() / path;
}

std::vector<EuclideanPoint> sample_point_queries(std::size_t count, std::size_t dim, std::uint64_t seed) {
    return gen_uniform_points(count, dim, mix_seed(seed, 0x51));
}

std::vector<Sequence> sample_sequence_queries(std::span<const Sequence> dataset, std::size_t count, std::uint64_t seed,
                                              std::size_t edits) {
    if (dataset.empty()) {
        throw DataError("sample_sequence_queries: empty dataset");
    }
    Rng rng(mix_seed(seed, 0x52));
    ResidueSampler residue;
    std::vector<Sequence> queries;
    queries.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& source = dataset[uniform_index(rng, dataset.size())];
        Sequence q{"query" + std::to_string(i) + "|" + source.id, source.symbols};
        for (std::size_t e = 0; e < edits; ++e) {
            apply_random_edit(q.symbols, rng, residue);
        }
        queries.push_back(std::move(q));
    }
    return queries;
}

std::vector<Sequence> generate_protein_families(std::size_t n, std::uint64_t seed) {
    Rng rng(seed);
    ResidueSampler residue;
    // Log-normal lengths: mean exp(mu + sigma^2 / 2) = 360.
    constexpr double sigma = 0.55;
    const double mu = std::log(360.0) - sigma * sigma / 2;

    std::vector<Sequence> out;
    out.reserve(n);
    std::size_t family = 0;
    while (out.size() < n) {
        const double len = std::clamp(std::exp(mu + sigma * standard_normal(rng)), 30.0, 2000.0);
        std::string ancestor(static_cast<std::size_t>(len), 'A');
        for (auto& c : ancestor) c = residue(rng);

        const std::size_t members = 1 + uniform_index(rng, 6);
        for (std::size_t m = 0; m < members && out.size() < n; ++m) {
            std::string seq = ancestor;
            if (m > 0) {
                const double rate = 0.02 + 0.28 * uniform01(rng);
                const auto edits = static_cast<std::size_t>(rate * static_cast<double>(ancestor.size()));
                for (std::size_t e = 0; e < edits; ++e) apply_random_edit(seq, rng, residue);
            }
            out.push_back({"syn" + std::to_string(family) + "_" + std::to_string(m), std::move(seq)});
        }
        ++family;
    }
    return out;
}

} // namespace cascade
