#include "cascade/bench.hpp"

#include "cascade/query.hpp"
#include "cascade/serialize.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace cascade {

namespace {

enum class Command { range, knn, optimality };

const char* command_name(Command c) {
    switch (c) {
    case Command::range: return "range";
    case Command::knn: return "knn";
    case Command::optimality: return "optimality";
    }
    return "";
}

constexpr std::uint64_t build_stream = 2;
constexpr std::uint64_t query_stream = 3;
constexpr std::size_t max_distance_pairs = 1000;

template<typename Object>
struct Traits;

template<>
struct Traits<EuclideanPoint> {
    using metric = EuclideanMetric;
    static constexpr const char* name = "uniform";

    static std::vector<EuclideanPoint> load(const DatasetSpec& spec) {
        if (spec.dim == 0) throw ConfigError("--dim must be at least 1");
        return gen_uniform_points(spec.n, spec.dim, spec.seed);
    }
    static std::vector<EuclideanPoint> queries(const std::vector<EuclideanPoint>& data, const RunConfig& config) {
        const std::size_t dim = data.empty() ? config.dataset.dim : data.front().dim();
        return sample_point_queries(config.queries, dim, mix_seed(config.seed, query_stream));
    }
    static std::size_t dim(const std::vector<EuclideanPoint>& data) { return data.empty() ? 0 : data.front().dim(); }
    /// Percent bounds scale with the dataset's distance range.
    static double bound_scale(const EuclideanPoint&, double max_distance) { return max_distance; }
    static std::string describe(const EuclideanPoint& q) {
        std::ostringstream out;
        out.precision(17);
        for (std::size_t i = 0; i < q.coords.size(); ++i) out << (i ? "," : "") << q.coords[i];
        return out.str();
    }
};

template<>
struct Traits<Sequence> {
    using metric = LevenshteinMetric;
    static constexpr const char* name = "fasta";

    static std::vector<Sequence> load(const DatasetSpec& spec) {
        if (spec.path.empty()) throw ConfigError("--path is required for --dataset fasta");
        return parse_fasta(resolve_data_path(spec.path), spec.n).sequences;
    }
    static std::vector<Sequence> queries(const std::vector<Sequence>& data, const RunConfig& config) {
        return sample_sequence_queries(data, config.queries, mix_seed(config.seed, query_stream), config.query_edits);
    }
    static std::size_t dim(const std::vector<Sequence>&) { return 0; }
    /// Percent bounds scale with the query's own length.
    static double bound_scale(const Sequence& q, double) { return static_cast<double>(q.symbols.size()); }
    static std::string describe(const Sequence& q) { return ">" + q.id + "\n" + q.symbols; }
};

template<typename Object>
using TreeOf = CmtTree<Object, typename Traits<Object>::metric>;

template<typename Object>
class Experiment {
public:
    using M = typename Traits<Object>::metric;

    explicit Experiment(const RunConfig& config) : config_(config) {
        if (!config.tree_path.empty()) {
            loaded_ = load_tree<Object, M>(config.tree_path);
            dataset_ = loaded_->objects();
            cascades_ = {loaded_->cascade_limit()};
        } else {
            dataset_ = Traits<Object>::load(config.dataset);
            cascades_ = config.cascades;
        }
        if (cascades_.empty()) throw ConfigError("no cascade settings given");
        if (config.queries == 0) throw ConfigError("--queries must be at least 1");
        queries_ = Traits<Object>::queries(dataset_, config);
        max_distance_ = estimate_max_distance<Object, M>(dataset_, M{}, max_distance_pairs, config.seed);
    }

    std::vector<RunRecord> run(Command command) {
        std::vector<RunRecord> out;
        for (std::size_t cascade : cascades_) {
            const TreeOf<Object> tree = tree_for(cascade);
            switch (command) {
            case Command::range: range_cells(tree, out); break;
            case Command::knn: knn_cells(tree, out); break;
            case Command::optimality: optimality_cells(tree, out); break;
            }
        }
        return out;
    }

    TreeOf<Object> tree_for(std::size_t cascade) const {
        if (loaded_) return *loaded_;
        return build_cmt(dataset_, M{}, BuildConfig{cascade, mix_seed(config_.seed, build_stream)});
    }

private:
    RunRecord blank(Command command, const TreeOf<Object>& tree) const {
        RunRecord r;
        r.command = command_name(command);
        r.dataset = Traits<Object>::name;
        r.n = dataset_.size();
        r.dim = Traits<Object>::dim(dataset_);
        r.cascade = tree.cascade_limit();
        r.queries = queries_.size();
        r.verified = config_.verify;
        return r;
    }

    [[noreturn]] void mismatch(const std::string& what, const Object& q, const std::string& params) const {
        throw VerificationError(what + " (" + params + ") for query:\n" + Traits<Object>::describe(q));
    }

    template<typename F>
    double timed(F&& f) const {
        const auto start = std::chrono::steady_clock::now();
        f();
        return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }

    void range_cells(const TreeOf<Object>& tree, std::vector<RunRecord>& out) const {
        if (config_.radii.empty()) throw ConfigError("range battery needs --radii");
        for (double frac : config_.radii) {
            if (!(frac >= 0)) throw ConfigError("radius fractions must be non-negative");
            RunRecord rec = blank(Command::range, tree);
            const double radius = frac * max_distance_;
            rec.radius_frac = frac;
            rec.radius = radius;
            for (const auto& q : queries_) {
                QueryStats stats;
                ResultSet result;
                rec.wall_ms.add(timed([&] { result = collect_range_query(tree, q, radius, stats); }));
                add_stats(rec, stats, result.size());
                if (config_.verify) verify_range(tree, q, radius, result);
            }
            out.push_back(std::move(rec));
        }
    }

    void verify_range(const TreeOf<Object>& tree, const Object& q, double radius, const ResultSet& result) const {
        const auto params = "radius=" + std::to_string(radius) + " cascade=" + cascade_label(tree.cascade_limit());
        auto ids = [](const ResultSet& rs) {
            std::vector<std::uint32_t> v;
            for (const auto& e : rs) v.push_back(e.object);
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto expected = ids(brute_force_range<Object, M>(dataset_, M{}, q, radius));
        if (ids(result) != expected) mismatch("range membership mismatch", q, params);
        QueryStats ignored;
        if (counting_query(tree, q, radius, ignored) != expected.size()) mismatch("count mismatch", q, params);
    }

    std::vector<double> bound_grid() const {
        return config_.bound_pcts.empty() ? std::vector<double>{infinite_radius} : config_.bound_pcts;
    }

    void knn_cells(const TreeOf<Object>& tree, std::vector<RunRecord>& out) const {
        if (config_.ks.empty()) throw ConfigError("knn battery needs --k");
        for (std::size_t k : config_.ks) {
            if (k == 0) throw ConfigError("k values must be at least 1");
            for (double pct : bound_grid()) {
                if (!(pct >= 0)) throw ConfigError("bound percentages must be non-negative");
                RunRecord rec = blank(Command::knn, tree);
                rec.k = k;
                Aggregate bound;
                if (std::isfinite(pct)) rec.bound_pct = pct;
                for (const auto& q : queries_) {
                    const double b = std::isfinite(pct) ? pct / 100.0 * Traits<Object>::bound_scale(q, max_distance_)
                                                        : infinite_radius;
                    bound.add(b);
                    QueryStats stats;
                    ResultSet result;
                    rec.wall_ms.add(timed([&] { result = knn_query(tree, q, k, b, stats); }));
                    add_stats(rec, stats, result.size());
                    if (config_.verify) verify_knn(tree, q, k, b, result);
                }
                if (std::isfinite(pct)) rec.radius = bound.mean();
                out.push_back(std::move(rec));
            }
        }
    }

    void verify_knn(const TreeOf<Object>& tree, const Object& q, std::size_t k, double b, const ResultSet& result) const {
        auto dists = [](const ResultSet& rs) {
            std::vector<double> v;
            for (const auto& e : rs) v.push_back(e.distance);
            std::sort(v.begin(), v.end());
            return v;
        };
        const auto expected = brute_force_knn<Object, M>(dataset_, M{}, q, k, b);
        if (dists(result) != dists(expected)) {
            mismatch("knn distance mismatch", q,
                     "k=" + std::to_string(k) + " bound=" + std::to_string(b) +
                         " cascade=" + cascade_label(tree.cascade_limit()));
        }
    }

    void optimality_cells(const TreeOf<Object>& tree, std::vector<RunRecord>& out) const {
        if (config_.ks.empty()) throw ConfigError("optimality battery needs --k");
        for (std::size_t k : config_.ks) {
            if (k == 0) throw ConfigError("k values must be at least 1");
            RunRecord rec = blank(Command::optimality, tree);
            rec.k = k;
            rec.ratio = Aggregate{};
            for (const auto& q : queries_) {
                QueryStats knn_stats;
                double ratio = 0;
                rec.wall_ms.add(timed([&] { ratio = range_optimality_ratio(tree, q, k, &knn_stats); }));
                rec.ratio->add(ratio);
                add_stats(rec, knn_stats, std::min<std::size_t>(k, dataset_.size()));
                if (config_.verify) {
                    QueryStats ignored;
                    verify_knn(tree, q, k, infinite_radius, knn_query(tree, q, k, infinite_radius, ignored));
                }
            }
            out.push_back(std::move(rec));
        }
    }

    static void add_stats(RunRecord& rec, const QueryStats& stats, std::size_t result_size) {
        rec.calls.add(static_cast<double>(stats.distance_calls));
        rec.nodes.add(static_cast<double>(stats.nodes_visited));
        rec.collected.add(static_cast<double>(stats.objects_collected));
        rec.result.add(static_cast<double>(result_size));
    }

    const RunConfig& config_;
    std::optional<TreeOf<Object>> loaded_;
    std::vector<Object> dataset_;
    std::vector<Object> queries_;
    std::vector<std::size_t> cascades_;
    double max_distance_ = 0;
};

bool uses_sequences(const RunConfig& config) {
    if (!config.tree_path.empty()) {
        return peek_metric_tag(config.tree_path) == LevenshteinMetric::tag;
    }
    return config.dataset.kind == DatasetKind::fasta_file;
}

std::vector<RunRecord> run_command(const RunConfig& config, Command command) {
    if (uses_sequences(config)) {
        return Experiment<Sequence>(config).run(command);
    }
    return Experiment<EuclideanPoint>(config).run(command);
}

template<typename Object>
BuildReport build_one(const RunConfig& config, std::size_t cascade, const std::string& out_path, bool validate) {
    using M = typename Traits<Object>::metric;
    auto tree = build_cmt(Traits<Object>::load(config.dataset), M{}, BuildConfig{cascade, mix_seed(config.seed, build_stream)});
    BuildReport report{tree.size(), tree.height(), tree.build_distance_calls(), tree.cascade_limit(), 0};
    if (validate) report.violations = validate_tree(tree).size();
    if (!out_path.empty()) save_tree(out_path, tree);
    return report;
}

std::string fmt_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

} // namespace

std::size_t parse_cascade(const std::string& text) {
    if (text == "inf" || text == "unbounded") return unbounded_cascade;
    try {
        std::size_t pos = 0;
        const unsigned long long v = std::stoull(text, &pos);
        if (pos != text.size()) throw ConfigError("");
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("invalid cascade setting '" + text + "' (expected 0, 1, ... or inf)");
    }
}

BuildReport run_build(const RunConfig& config, std::size_t cascade, const std::string& out_path, bool validate) {
    if (config.dataset.kind == DatasetKind::fasta_file) {
        return build_one<Sequence>(config, cascade, out_path, validate);
    }
    return build_one<EuclideanPoint>(config, cascade, out_path, validate);
}

std::vector<RunRecord> run_range(const RunConfig& config) { return run_command(config, Command::range); }
std::vector<RunRecord> run_knn(const RunConfig& config) { return run_command(config, Command::knn); }
std::vector<RunRecord> run_optimality(const RunConfig& config) { return run_command(config, Command::optimality); }

std::string to_csv(const std::vector<RunRecord>& records, bool timing) {
    std::ostringstream out;
    out << "command,dataset,n,dim,cascade,radius_frac,radius,k,bound_pct,queries,"
           "calls_mean,calls_min,calls_max,nodes_mean,nodes_min,nodes_max,"
           "collected_mean,collected_min,collected_max,result_mean,result_min,result_max,result_fraction,"
           "ratio_mean,ratio_min,ratio_max,verified";
    if (timing) out << ",wall_ms_mean,wall_ms_min,wall_ms_max";
    out << '\n';

    auto opt = [](const auto& v) -> std::string {
        if (!v) return "";
        if constexpr (std::is_floating_point_v<std::decay_t<decltype(*v)>>) {
            return fmt_real(*v);
        } else {
            return std::to_string(*v);
        }
    };
    auto agg = [](const Aggregate& a) {
        return fmt_real(a.mean()) + "," + fmt_real(a.min) + "," + fmt_real(a.max);
    };

    for (const auto& r : records) {
        out << r.command << ',' << r.dataset << ',' << r.n << ',' << (r.dim ? std::to_string(r.dim) : "") << ','
            << cascade_label(r.cascade) << ',' << opt(r.radius_frac) << ',' << opt(r.radius) << ',' << opt(r.k) << ','
            << opt(r.bound_pct) << ',' << r.queries << ',' << agg(r.calls) << ',' << agg(r.nodes) << ','
            << agg(r.collected) << ',' << agg(r.result) << ',' << fmt_real(r.result_fraction()) << ','
            << (r.ratio ? agg(*r.ratio) : std::string(",,")) << ',' << (r.verified ? "ok" : "");
        if (timing) out << ',' << agg(r.wall_ms);
        out << '\n';
    }
    return out.str();
}

} // namespace cascade
