// Benchmark and inspection tool for cascaded metric trees.
//
//   cascade_bench build      --dataset uniform --n 1024 --dim 3 --cascade inf --out tree.cmt
//   cascade_bench range      --dataset uniform --n 100000 --dim 10 --radii 0.05,0.1 --queries 100
//   cascade_bench knn        --dataset fasta --path sprot.fasta --cap 10000 --k 10 --bound-pct 2,inf
//   cascade_bench optimality --dataset uniform --n 100000 --k 100
//   cascade_bench synth-fasta --n 10000 --out synthetic.fasta
//
// Exit codes: 0 success, 1 verification failure, 2 configuration error, 3 I/O error.

#include "cascade/bench.hpp"
#include "cascade/data.hpp"
#include "cascade/serialize.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace {

constexpr int exit_verification = 1;
constexpr int exit_config = 2;
constexpr int exit_io = 3;

struct Options {
    std::string dataset = "uniform";
    std::size_t n = 1000;
    std::size_t dim = 3;
    std::string path;
    std::size_t cap = 0;
    std::uint64_t seed = 1;
    std::vector<std::string> cascades{"0", "1", "inf"};
    std::vector<double> radii;
    std::vector<std::size_t> ks;
    std::vector<std::string> bound_pcts;
    std::size_t queries = 100;
    std::size_t edits = cascade::default_query_edits;
    bool verify = false;
    bool timing = false;
    bool validate = false;
    std::string out;
    std::string tree;
};

void add_dataset_flags(CLI::App* cmd, Options& o) {
    cmd->add_option("--dataset", o.dataset, "uniform or fasta")->check(CLI::IsMember({"uniform", "fasta"}));
    cmd->add_option("--n", o.n, "number of uniform points");
    cmd->add_option("--dim", o.dim, "point dimension");
    cmd->add_option("--path", o.path, "FASTA file (relative paths also tried under $CASCADE_INDEX_DATA_DIR)");
    cmd->add_option("--cap", o.cap, "maximum sequences read from the FASTA file (0 = all)");
    cmd->add_option("--seed", o.seed, "seed for data, tree construction and queries");
    cmd->add_option("--cascade", o.cascades, "cascade settings: 0, 1, inf")->delimiter(',');
}

void add_query_flags(CLI::App* cmd, Options& o) {
    add_dataset_flags(cmd, o);
    cmd->add_option("--queries", o.queries, "queries per cell");
    cmd->add_option("--edits", o.edits, "random edits applied to each sequence query");
    cmd->add_flag("--verify", o.verify, "check every result against a linear scan");
    cmd->add_flag("--timing", o.timing, "add wall-time columns (not reproducible)");
    cmd->add_option("--out", o.out, "CSV output path (default stdout)");
    cmd->add_option("--tree", o.tree, "use a serialized tree instead of building one");
}

cascade::RunConfig to_config(const Options& o) {
    cascade::RunConfig c;
    c.dataset.kind = o.dataset == "fasta" ? cascade::DatasetKind::fasta_file : cascade::DatasetKind::uniform_points;
    c.dataset.n = c.dataset.kind == cascade::DatasetKind::fasta_file ? o.cap : o.n;
    c.dataset.dim = o.dim;
    c.dataset.seed = o.seed;
    c.dataset.path = o.path;
    c.cascades.clear();
    for (const auto& s : o.cascades) c.cascades.push_back(cascade::parse_cascade(s));
    c.radii = o.radii;
    c.ks = o.ks;
    for (const auto& s : o.bound_pcts) {
        if (s == "inf") {
            c.bound_pcts.push_back(std::numeric_limits<double>::infinity());
        } else {
            try {
                c.bound_pcts.push_back(std::stod(s));
            } catch (const std::exception&) {
                throw cascade::ConfigError("invalid --bound-pct value '" + s + "'");
            }
        }
    }
    c.queries = o.queries;
    c.seed = o.seed;
    c.verify = o.verify;
    c.timing = o.timing;
    c.query_edits = o.edits;
    c.tree_path = o.tree;
    return c;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(path);
    if (!out || !(out << text)) {
        throw cascade::DataError("cannot write " + path);
    }
}

std::string suffixed(const std::string& path, std::size_t cascade, bool many) {
    return many ? path + ".c" + cascade::cascade_label(cascade) : path;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cascaded metric tree benchmarks"};
    app.require_subcommand(1);
    Options o;

    auto* build = app.add_subcommand("build", "build trees and report construction cost");
    add_dataset_flags(build, o);
    build->add_option("--out", o.out, "write the serialized tree here (suffixed per cascade when several)");
    build->add_flag("--validate", o.validate, "recompute every interval and count");

    auto* range = app.add_subcommand("range", "range queries over a radius grid");
    add_query_flags(range, o);
    range->add_option("--radii", o.radii, "radii as fractions of the estimated max pairwise distance")
        ->delimiter(',')
        ->required();

    auto* knn = app.add_subcommand("knn", "k-nearest-neighbor queries over a k (and bound) grid");
    add_query_flags(knn, o);
    knn->add_option("--k", o.ks, "k values")->delimiter(',')->required();
    knn->add_option("--bound-pct", o.bound_pcts,
                    "radius bounds in percent (of query length for sequences, of max distance for points); inf = none")
        ->delimiter(',');

    auto* optimality = app.add_subcommand("optimality", "range-optimality ratio of kNN search");
    add_query_flags(optimality, o);
    optimality->add_option("--k", o.ks, "k values")->delimiter(',')->required();

    auto* synth = app.add_subcommand("synth-fasta", "write a synthetic protein-family FASTA file");
    synth->add_option("--n", o.n, "number of sequences");
    synth->add_option("--seed", o.seed, "generator seed");
    synth->add_option("--out", o.out, "output path (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if (*synth) {
            std::ostringstream text;
            const auto seqs = cascade::generate_protein_families(o.n, o.seed);
            cascade::write_fasta(text, seqs);
            emit(text.str(), o.out);
            return 0;
        }

        const cascade::RunConfig config = to_config(o);
        if (*build) {
            std::cout << "n,height,build_distance_calls,cascade" << (o.validate ? ",violations" : "") << '\n';
            for (std::size_t c : config.cascades) {
                const auto out_path = o.out.empty() ? std::string{} : suffixed(o.out, c, config.cascades.size() > 1);
                const auto report = cascade::run_build(config, c, out_path, o.validate);
                std::cout << report.n << ',' << report.height << ',' << report.build_distance_calls << ','
                          << cascade::cascade_label(report.cascade);
                if (o.validate) std::cout << ',' << report.violations;
                std::cout << '\n';
                if (report.violations != 0) return exit_verification;
            }
            return 0;
        }

        std::vector<cascade::RunRecord> records;
        if (*range) records = cascade::run_range(config);
        if (*knn) records = cascade::run_knn(config);
        if (*optimality) records = cascade::run_optimality(config);
        emit(cascade::to_csv(records, config.timing), o.out);
        return 0;
    } catch (const cascade::VerificationError& e) {
        std::cerr << "verification failed: " << e.what() << '\n';
        return exit_verification;
    } catch (const cascade::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return exit_config;
    } catch (const cascade::DataError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const cascade::FormatError& e) {
        std::cerr << "I/O error: " << e.what() << '\n';
        return exit_io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_config;
    }
}
