#ifndef CASCADE_SERIALIZE_HPP
#define CASCADE_SERIALIZE_HPP

#include "metric.hpp"
#include "tree.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

/**
 * @file serialize.hpp
 *
 * @brief Versioned little-endian binary format for built trees.
 *
 * Layout:
 *   magic "CMTREE\0\0" | u32 version | u32 metric tag | u64 size | u64 cascade limit
 *   (all ones = unbounded) | u64 seed | u64 build distance calls
 * followed by `size` node records in preorder:
 *   u32 object index | u8 child flags (1 = left, 2 = right) | u32 interval count |
 *   interval count x (f64 near, f64 far) | object payload
 * Point payload is u32 dimension then f64 coordinates. Sequence payload is
 * u32 id length, id bytes, u32 symbol length, symbol bytes.
 *
 * Doubles are stored by bit pattern, so serialize -> deserialize -> serialize
 * reproduces the same bytes.
 */

namespace cascade {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr std::array<char, 8> tree_file_magic{'C', 'M', 'T', 'R', 'E', 'E', '\0', '\0'};
inline constexpr std::uint32_t tree_file_version = 1;

namespace wire {

template<typename T>
void put(std::ostream& out, T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    std::array<unsigned char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), sizeof(T));
}

template<typename T>
T get(std::istream& in) {
    std::array<unsigned char, sizeof(T)> bytes;
    if (!in.read(reinterpret_cast<char*>(bytes.data()), sizeof(T))) {
        throw FormatError("tree file truncated");
    }
    if constexpr (std::endian::native == std::endian::big) {
        std::reverse(bytes.begin(), bytes.end());
    }
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void put_string(std::ostream& out, const std::string& s) {
    put<std::uint32_t>(out, static_cast<std::uint32_t>(s.size()));
    out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

inline std::string get_string(std::istream& in) {
    const auto n = get<std::uint32_t>(in);
    std::string s(n, '\0');
    if (n > 0 && !in.read(s.data(), n)) {
        throw FormatError("tree file truncated inside a string");
    }
    return s;
}

} // namespace wire

template<typename Object>
struct ObjectCodec;

template<>
struct ObjectCodec<EuclideanPoint> {
    static void write(std::ostream& out, const EuclideanPoint& p) {
        wire::put<std::uint32_t>(out, static_cast<std::uint32_t>(p.coords.size()));
        for (double c : p.coords) wire::put(out, c);
    }
    static EuclideanPoint read(std::istream& in) {
        EuclideanPoint p;
        p.coords.resize(wire::get<std::uint32_t>(in));
        for (auto& c : p.coords) c = wire::get<double>(in);
        return p;
    }
};

template<>
struct ObjectCodec<Sequence> {
    static void write(std::ostream& out, const Sequence& s) {
        wire::put_string(out, s.id);
        wire::put_string(out, s.symbols);
    }
    static Sequence read(std::istream& in) {
        Sequence s;
        s.id = wire::get_string(in);
        s.symbols = wire::get_string(in);
        return s;
    }
};

template<typename Object, typename M>
void write_tree(std::ostream& out, const CmtTree<Object, M>& tree) {
    out.write(tree_file_magic.data(), tree_file_magic.size());
    wire::put<std::uint32_t>(out, tree_file_version);
    wire::put<std::uint32_t>(out, M::tag);
    wire::put<std::uint64_t>(out, tree.size());
    wire::put<std::uint64_t>(out, tree.cascade_limit() == unbounded_cascade ? ~std::uint64_t{0}
                                                                            : static_cast<std::uint64_t>(tree.cascade_limit()));
    wire::put<std::uint64_t>(out, tree.seed());
    wire::put<std::uint64_t>(out, tree.build_distance_calls());

    for (NodeIndex i = 0; i < tree.nodes().size(); ++i) {
        const auto& nd = tree.node(i);
        wire::put<std::uint32_t>(out, nd.object);
        wire::put<std::uint8_t>(out, static_cast<std::uint8_t>((nd.left != no_node ? 1 : 0) | (nd.right != no_node ? 2 : 0)));
        wire::put<std::uint32_t>(out, nd.interval_count);
        for (const auto& iv : tree.intervals(i)) {
            wire::put(out, iv.near);
            wire::put(out, iv.far);
        }
        ObjectCodec<Object>::write(out, tree.objects()[nd.object]);
    }
    if (!out) {
        throw FormatError("failed writing tree");
    }
}

/**
 * Reads a tree written by `write_tree`. Checks the header against `M` and the
 * shape of the node records; interval contents are taken as stored.
 */
template<typename Object, typename M>
CmtTree<Object, M> read_tree(std::istream& in, M metric = M{}) {
    std::array<char, 8> magic{};
    if (!in.read(magic.data(), magic.size()) || magic != tree_file_magic) {
        throw FormatError("not a tree file (bad magic)");
    }
    const auto version = wire::get<std::uint32_t>(in);
    if (version != tree_file_version) {
        throw FormatError("unsupported tree file version " + std::to_string(version));
    }
    const auto tag = wire::get<std::uint32_t>(in);
    if (tag != M::tag) {
        throw FormatError("tree file metric tag " + std::to_string(tag) + " does not match " + std::to_string(M::tag));
    }
    const auto size = wire::get<std::uint64_t>(in);
    if (size >= no_node) {
        throw FormatError("tree file size out of range");
    }
    const auto raw_limit = wire::get<std::uint64_t>(in);
    const std::size_t limit = raw_limit == ~std::uint64_t{0} ? unbounded_cascade : static_cast<std::size_t>(raw_limit);
    const auto seed = wire::get<std::uint64_t>(in);
    const auto calls = wire::get<std::uint64_t>(in);

    std::vector<Object> objects(size);
    std::vector<bool> seen(size, false);
    std::vector<CmtNode> nodes(size);
    std::vector<std::uint8_t> flags(size);
    std::vector<DistanceInterval> intervals;

    for (std::size_t i = 0; i < size; ++i) {
        auto& nd = nodes[i];
        nd.object = wire::get<std::uint32_t>(in);
        if (nd.object >= size || seen[nd.object]) {
            throw FormatError("tree file node " + std::to_string(i) + " has a bad object index");
        }
        seen[nd.object] = true;
        flags[i] = wire::get<std::uint8_t>(in);
        nd.interval_count = wire::get<std::uint32_t>(in);
        if (nd.interval_count == 0 || nd.interval_count > 64) {
            throw FormatError("tree file node " + std::to_string(i) + " has a bad interval count");
        }
        nd.first_interval = static_cast<std::uint32_t>(intervals.size());
        for (std::uint32_t l = 0; l < nd.interval_count; ++l) {
            DistanceInterval iv;
            iv.near = wire::get<double>(in);
            iv.far = wire::get<double>(in);
            intervals.push_back(iv);
        }
        objects[nd.object] = ObjectCodec<Object>::read(in);
    }

    // Rebuild links, depths and counts from the preorder flags.
    std::size_t next = 0;
    auto link = [&](auto&& self, std::uint32_t depth) -> NodeIndex {
        if (next >= size) {
            throw FormatError("tree file preorder is inconsistent");
        }
        const auto i = static_cast<NodeIndex>(next++);
        nodes[i].depth = depth;
        if (flags[i] & 1) nodes[i].left = self(self, depth + 1);
        if (flags[i] & 2) nodes[i].right = self(self, depth + 1);
        nodes[i].count = static_cast<std::uint32_t>(next - i);
        return i;
    };
    if (size > 0) {
        link(link, 0);
        if (next != size) {
            throw FormatError("tree file preorder is inconsistent");
        }
    }
    return CmtTree<Object, M>(std::move(objects), std::move(nodes), std::move(intervals), std::move(metric), limit,
                              seed, calls);
}

template<typename Object, typename M>
void save_tree(const std::string& path, const CmtTree<Object, M>& tree) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw FormatError("cannot open " + path + " for writing");
    }
    write_tree(out, tree);
}

template<typename Object, typename M>
CmtTree<Object, M> load_tree(const std::string& path, M metric = M{}) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw FormatError("cannot open " + path);
    }
    try {
        return read_tree<Object, M>(in, std::move(metric));
    } catch (const FormatError& e) {
        throw FormatError(path + ": " + e.what());
    }
}

/// Metric tag recorded in a tree file header, without reading the rest.
inline std::uint32_t peek_metric_tag(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::array<char, 8> magic{};
    if (!in || !in.read(magic.data(), magic.size()) || magic != tree_file_magic) {
        throw FormatError(path + ": not a tree file");
    }
    wire::get<std::uint32_t>(in);
    return wire::get<std::uint32_t>(in);
}

} // namespace cascade

#endif
