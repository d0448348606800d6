#include "cascade/metric.hpp"

#include <algorithm>
#include <cmath>

namespace cascade {

double euclidean_distance(const EuclideanPoint& a, const EuclideanPoint& b) {
    if (a.coords.size() != b.coords.size()) {
        throw MetricError("euclidean_distance: dimension mismatch (" + std::to_string(a.coords.size()) +
                          " vs " + std::to_string(b.coords.size()) + ")");
    }
    double sum = 0;
    for (std::size_t i = 0; i < a.coords.size(); ++i) {
        double diff = a.coords[i] - b.coords[i];
        sum += diff * diff;
    }
    return std::sqrt(sum);
}

std::uint32_t levenshtein_distance(std::string_view a, std::string_view b) {
    if (a.size() < b.size()) {
        std::swap(a, b);
    }
    if (b.empty()) {
        return static_cast<std::uint32_t>(a.size());
    }

    // Rows run over the shorter string.
    std::vector<std::uint32_t> prev(b.size() + 1), curr(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) {
        prev[j] = static_cast<std::uint32_t>(j);
    }

    for (std::size_t i = 1; i <= a.size(); ++i) {
        curr[0] = static_cast<std::uint32_t>(i);
        const char ai = a[i - 1];
        for (std::size_t j = 1; j <= b.size(); ++j) {
            std::uint32_t subst = prev[j - 1] + (ai != b[j - 1]);
            std::uint32_t indel = std::min(prev[j], curr[j - 1]) + 1;
            curr[j] = std::min(subst, indel);
        }
        std::swap(prev, curr);
    }
    return prev[b.size()];
}

} // namespace cascade
