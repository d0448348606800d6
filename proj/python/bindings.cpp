#include <pybind11/pybind11.h>
#include <pybind11/operators.h>
#include <pybind11/stl.h>

#include "cascade/data.hpp"
#include "cascade/query.hpp"
#include "cascade/serialize.hpp"
#include "cascade/tree.hpp"

#include <optional>

namespace py = pybind11;
using namespace cascade;

namespace {

using Hit = std::tuple<std::uint32_t, double, bool>;

std::vector<Hit> to_hits(const ResultSet& rs) {
    std::vector<Hit> out;
    out.reserve(rs.size());
    for (const auto& e : rs) out.emplace_back(e.object, e.distance, e.exact);
    return out;
}

std::size_t to_limit(std::optional<std::size_t> limit) {
    return limit ? *limit : unbounded_cascade;
}

EuclideanPoint to_point(const std::vector<double>& coords) {
    return EuclideanPoint{coords};
}

Sequence to_sequence(const std::string& symbols) {
    return Sequence{"", symbols};
}

// Python-facing objects: lists of floats for points, str for sequences.
template<typename Object, typename M, typename PyObject, typename Convert>
void bind_tree(py::module_& m, const char* name, Convert convert) {
    using Tree = CmtTree<Object, M>;
    py::class_<Tree>(m, name)
        .def(py::init([convert](const std::vector<PyObject>& objects, std::optional<std::size_t> cascade_limit,
                                std::uint64_t seed) {
                 std::vector<Object> converted;
                 converted.reserve(objects.size());
                 for (const auto& o : objects) converted.push_back(convert(o));
                 return build_cmt(std::move(converted), M{}, BuildConfig{to_limit(cascade_limit), seed});
             }),
             py::arg("objects"), py::arg("cascade_limit") = py::none(), py::arg("seed") = 0,
             "Build a tree. cascade_limit=None keeps every ancestral level, 0 none, 1 the parent only.")
        .def("__len__", &Tree::size)
        .def_property_readonly("height", &Tree::height)
        .def_property_readonly("build_distance_calls", &Tree::build_distance_calls)
        .def_property_readonly("cascade_limit", [](const Tree& t) -> std::optional<std::size_t> {
            if (t.cascade_limit() == unbounded_cascade) return std::nullopt;
            return t.cascade_limit();
        })
        .def(
            "range_query",
            [convert](const Tree& t, const PyObject& q, double r, bool collect) {
                QueryStats stats;
                const Object query = convert(q);
                auto rs = collect ? collect_range_query(t, query, r, stats) : basic_range_query(t, query, r, stats);
                return std::make_pair(to_hits(rs), stats);
            },
            py::arg("query"), py::arg("radius"), py::arg("collect") = true,
            "Objects within radius as (index, distance, exact) tuples, plus query statistics.")
        .def(
            "count",
            [convert](const Tree& t, const PyObject& q, double r) {
                QueryStats stats;
                auto n = counting_query(t, convert(q), r, stats);
                return std::make_pair(n, stats);
            },
            py::arg("query"), py::arg("radius"))
        .def(
            "knn",
            [convert](const Tree& t, const PyObject& q, std::size_t k, double bound) {
                QueryStats stats;
                auto rs = knn_query(t, convert(q), k, bound, stats);
                return std::make_pair(to_hits(rs), stats);
            },
            py::arg("query"), py::arg("k"), py::arg("bound") = infinite_radius)
        .def(
            "optimality_ratio",
            [convert](const Tree& t, const PyObject& q, std::size_t k) { return range_optimality_ratio(t, convert(q), k); },
            py::arg("query"), py::arg("k"))
        .def("validate", [](const Tree& t) { return validate_tree(t).size(); },
             "Number of stored intervals or counts that disagree with direct recomputation.")
        .def("save", [](const Tree& t, const std::string& path) { save_tree(path, t); })
        .def_static("load", [](const std::string& path) { return load_tree<Object, M>(path); });
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Cascaded metric trees for range, counting and k-nearest-neighbor search";

    py::register_exception<MetricError>(m, "MetricError", PyExc_ValueError);
    py::register_exception<BuildError>(m, "BuildError", PyExc_ValueError);
    py::register_exception<DataError>(m, "DataError", PyExc_OSError);
    py::register_exception<FormatError>(m, "FormatError", PyExc_OSError);

    py::class_<QueryStats>(m, "QueryStats")
        .def_readonly("distance_calls", &QueryStats::distance_calls)
        .def_readonly("nodes_visited", &QueryStats::nodes_visited)
        .def_readonly("subtrees_collected", &QueryStats::subtrees_collected)
        .def_readonly("objects_collected", &QueryStats::objects_collected)
        .def(py::self == py::self)
        .def("__repr__", [](const QueryStats& s) {
            return "QueryStats(distance_calls=" + std::to_string(s.distance_calls) +
                   ", nodes_visited=" + std::to_string(s.nodes_visited) +
                   ", subtrees_collected=" + std::to_string(s.subtrees_collected) +
                   ", objects_collected=" + std::to_string(s.objects_collected) + ")";
        });

    m.def("euclidean_distance", [](const std::vector<double>& a, const std::vector<double>& b) {
        return euclidean_distance(to_point(a), to_point(b));
    });
    m.def("levenshtein_distance", [](const std::string& a, const std::string& b) { return levenshtein_distance(a, b); });

    bind_tree<EuclideanPoint, EuclideanMetric, std::vector<double>>(m, "PointTree", to_point);
    bind_tree<Sequence, LevenshteinMetric, std::string>(m, "SequenceTree", to_sequence);

    m.def(
        "gen_uniform_points",
        [](std::size_t n, std::size_t dim, std::uint64_t seed) {
            std::vector<std::vector<double>> out;
            for (auto& p : gen_uniform_points(n, dim, seed)) out.push_back(std::move(p.coords));
            return out;
        },
        py::arg("n"), py::arg("dim"), py::arg("seed"));
    m.def(
        "parse_fasta",
        [](const std::string& path, std::size_t cap) {
            std::vector<std::pair<std::string, std::string>> out;
            for (auto& s : parse_fasta(std::filesystem::path(path), cap).sequences) out.emplace_back(s.id, s.symbols);
            return out;
        },
        py::arg("path"), py::arg("cap") = 0, "List of (id, sequence) pairs.");
    m.attr("unbounded") = py::none();
}
