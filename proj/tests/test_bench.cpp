#include "cascade/bench.hpp"
#include "cascade/data.hpp"

#include <doctest.h>

#include <filesystem>
#include <fstream>

using namespace cascade;

namespace {

RunConfig uniform(std::size_t n, std::size_t dim, std::size_t queries = 20) {
    RunConfig c;
    c.dataset.kind = DatasetKind::uniform_points;
    c.dataset.n = n;
    c.dataset.dim = dim;
    c.dataset.seed = 5;
    c.queries = queries;
    c.seed = 5;
    return c;
}

} // namespace

TEST_CASE("build reports") {
    auto config = uniform(1024, 3);
    std::uint64_t calls = 0;
    for (std::size_t limit : {std::size_t{0}, std::size_t{1}, unbounded_cascade}) {
        auto report = run_build(config, limit, {}, true);
        CHECK(report.n == 1024);
        CHECK(report.height == 10);
        CHECK(report.violations == 0);
        CHECK(report.cascade == limit);
        if (calls == 0) calls = report.build_distance_calls;
        CHECK(report.build_distance_calls == calls);
    }
    CHECK(run_build(config, unbounded_cascade).build_distance_calls == calls);
}

TEST_CASE("range battery") {
    auto config = uniform(3000, 3);
    config.radii = {0.0, 0.05, 2.0};
    config.verify = true;
    auto records = run_range(config);
    REQUIRE(records.size() == 9);
    for (const auto& r : records) {
        CHECK(r.queries == 20);
        CHECK(r.calls.count == 20);
        if (*r.radius_frac == 0.0) CHECK(r.result.mean() == 0);
        if (*r.radius_frac == 2.0) {
            CHECK(r.calls.mean() == 1);
            CHECK(r.result.mean() == 3000);
        }
    }
    // records are grouped by cascade: 0, 1, inf
    CHECK(records[7].calls.mean() <= records[1].calls.mean());
    CHECK(records[7].calls.mean() <= records[4].calls.mean());
}

TEST_CASE("knn battery") {
    auto config = uniform(3000, 3);
    config.ks = {3000};
    auto full = run_knn(config);
    REQUIRE(full.size() == 3);
    for (const auto& r : full) {
        CHECK(r.calls.mean() == 3000);
        CHECK(r.result_fraction() == 1.0);
    }

    config.ks = {10};
    config.bound_pcts = {std::numeric_limits<double>::infinity(), 20, 10, 5, 2};
    config.cascades = {unbounded_cascade};
    config.verify = true;
    auto bounded = run_knn(config);
    REQUIRE(bounded.size() == 5);
    for (std::size_t i = 1; i < bounded.size(); ++i) {
        CHECK(bounded[i].calls.mean() <= bounded[i - 1].calls.mean());
    }
    CHECK_FALSE(bounded[0].bound_pct.has_value());
    CHECK(*bounded[1].bound_pct == 20);
}

TEST_CASE("knn battery ordering across cascade settings") {
    auto config = uniform(20000, 3, 30);
    config.ks = {10};
    auto records = run_knn(config);
    REQUIRE(records.size() == 3);
    CHECK(records[2].calls.mean() <= records[1].calls.mean());
    CHECK(records[1].calls.mean() <= records[0].calls.mean());
}

TEST_CASE("optimality battery") {
    auto config = uniform(500, 2, 5);
    config.ks = {500, 5};
    auto records = run_optimality(config);
    REQUIRE(records.size() == 6);
    for (const auto& r : records) {
        REQUIRE(r.ratio.has_value());
        if (*r.k == 500) CHECK(r.ratio->mean() == 1.0);
        CHECK(r.ratio->min > 0);
    }
}

TEST_CASE("csv output is reproducible and well formed") {
    auto config = uniform(2000, 3);
    config.radii = {0.1, 0.2};
    const auto a = to_csv(run_range(config));
    const auto b = to_csv(run_range(config));
    CHECK(a == b);
    const auto header = a.substr(0, a.find('\n'));
    CHECK(header.rfind("command,dataset,n,dim,cascade,radius_frac,radius,k,bound_pct,queries,calls_mean", 0) == 0);
    CHECK(std::count(a.begin(), a.end(), '\n') == 7);
    const auto first_row = a.substr(a.find('\n') + 1, a.find('\n', a.find('\n') + 1) - a.find('\n') - 1);
    CHECK(std::count(first_row.begin(), first_row.end(), ',') == std::count(header.begin(), header.end(), ','));

    const auto timed = to_csv(run_range(config), true);
    CHECK(timed.substr(0, timed.find('\n')).find("wall_ms_mean") != std::string::npos);
}

TEST_CASE("configuration errors") {
    auto config = uniform(100, 3);
    CHECK_THROWS_AS(run_range(config), ConfigError);
    CHECK_THROWS_AS(run_knn(config), ConfigError);
    config.ks = {0};
    CHECK_THROWS_AS(run_knn(config), ConfigError);
    config.ks = {1};
    config.queries = 0;
    CHECK_THROWS_AS(run_knn(config), ConfigError);
    CHECK(parse_cascade("inf") == unbounded_cascade);
    CHECK(parse_cascade("1") == 1);
    CHECK_THROWS_AS(parse_cascade("x1"), ConfigError);

    RunConfig fasta;
    fasta.dataset.kind = DatasetKind::fasta_file;
    fasta.ks = {1};
    CHECK_THROWS_AS(run_knn(fasta), ConfigError);
    fasta.dataset.path = "/nonexistent/none.fasta";
    CHECK_THROWS_AS(run_knn(fasta), DataError);
}

TEST_CASE("fasta datasets and saved trees") {
    const auto dir = std::filesystem::temp_directory_path() / "cascade_bench_test";
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "small.fasta");
        write_fasta(out, generate_protein_families(300, 4));
    }
    RunConfig config;
    config.dataset.kind = DatasetKind::fasta_file;
    config.dataset.path = (dir / "small.fasta").string();
    config.dataset.n = 200;
    config.ks = {5};
    config.bound_pcts = {5, std::numeric_limits<double>::infinity()};
    config.queries = 10;
    config.verify = true;
    auto records = run_knn(config);
    REQUIRE(records.size() == 6);
    CHECK(records[0].n == 200);
    CHECK(records[0].dataset == "fasta");

    const auto tree_path = (dir / "small.cmt").string();
    auto report = run_build(config, 1, tree_path);
    CHECK(report.n == 200);
    RunConfig from_file;
    from_file.tree_path = tree_path;
    from_file.radii = {0.1};
    from_file.queries = 5;
    from_file.verify = true;
    auto loaded = run_range(from_file);
    REQUIRE(loaded.size() == 1);
    CHECK(loaded[0].cascade == 1);
    CHECK(loaded[0].dataset == "fasta");
    std::filesystem::remove_all(dir);
}
