#include "faceattr/cooccurrence.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>

#include "faceattr/error.hpp"
#include "faceattr/image.hpp"

namespace faceattr::audit {

CooccurrenceMetric parse_metric(const std::string& text) {
    if (text == "jaccard") return CooccurrenceMetric::jaccard;
    if (text == "conditional") return CooccurrenceMetric::conditional;
    throw ArgumentError("metric must be jaccard or conditional, got '" + text + "'");
}

std::string to_string(CooccurrenceMetric metric) {
    return metric == CooccurrenceMetric::jaccard ? "jaccard" : "conditional";
}

CooccurrenceMatrix cooccurrence(const AttributeTable& table, CooccurrenceMetric metric) {
    if (table.empty()) throw ArgumentError("cooccurrence: table has no records");
    const std::size_t f = table.attribute_count(), n = table.size();
    const std::size_t words = (n + 63) / 64;

    // One positive-label bitset per attribute.
    std::vector<std::vector<std::uint64_t>> bits(f, std::vector<std::uint64_t>(words, 0));
    for (std::size_t r = 0; r < n; ++r) {
        const auto& labels = table.records()[r].labels;
        for (std::size_t a = 0; a < f; ++a)
            if (labels[a] == 1) bits[a][r / 64] |= std::uint64_t{1} << (r % 64);
    }
    std::vector<std::size_t> positives(f, 0);
    for (std::size_t a = 0; a < f; ++a)
        for (auto w : bits[a]) positives[a] += static_cast<std::size_t>(std::popcount(w));

    CooccurrenceMatrix m;
    m.names = table.names();
    m.metric = metric;
    m.values.assign(f * f, 0.0);
    m.empty_attribute.resize(f);
    for (std::size_t a = 0; a < f; ++a) m.empty_attribute[a] = positives[a] == 0;

    for (std::size_t i = 0; i < f; ++i) {
        for (std::size_t j = i; j < f; ++j) {
            std::size_t both = 0;
            for (std::size_t w = 0; w < words; ++w) both += static_cast<std::size_t>(std::popcount(bits[i][w] & bits[j][w]));
            if (metric == CooccurrenceMetric::jaccard) {
                const std::size_t either = positives[i] + positives[j] - both;
                const double v = i == j ? 1.0 : (either ? static_cast<double>(both) / static_cast<double>(either) : 0.0);
                m.values[i * f + j] = m.values[j * f + i] = v;
            } else {
                m.values[i * f + j] = positives[i] ? static_cast<double>(both) / static_cast<double>(positives[i]) : 0.0;
                m.values[j * f + i] = positives[j] ? static_cast<double>(both) / static_cast<double>(positives[j]) : 0.0;
            }
        }
    }
    return m;
}

double max_off_diagonal(const CooccurrenceMatrix& m, std::size_t i) {
    double best = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j)
        if (j != i) best = std::max(best, m.at(i, j));
    return best;
}

double pairwise_percentile(const CooccurrenceMatrix& m, double percentile) {
    std::vector<double> vals;
    for (std::size_t i = 0; i < m.size(); ++i)
        for (std::size_t j = i + 1; j < m.size(); ++j) vals.push_back(m.at(i, j));
    if (vals.empty()) throw ArgumentError("pairwise_percentile: need at least two attributes");
    if (!(percentile > 0.0 && percentile <= 100.0)) throw ArgumentError("percentile must be in (0, 100]");
    std::sort(vals.begin(), vals.end());
    const auto rank = static_cast<std::size_t>(std::ceil(percentile / 100.0 * static_cast<double>(vals.size())));
    return vals[std::max<std::size_t>(rank, 1) - 1];
}

void write_cooccurrence_csv(std::ostream& out, const CooccurrenceMatrix& m) {
    out << "attribute";
    for (const auto& n : m.names) out << ',' << n;
    out << '\n';
    char buf[32];
    for (std::size_t i = 0; i < m.size(); ++i) {
        out << m.names[i];
        for (std::size_t j = 0; j < m.size(); ++j) {
            std::snprintf(buf, sizeof buf, ",%.6f", m.at(i, j));
            out << buf;
        }
        out << '\n';
    }
}

void write_cooccurrence_pgm(const std::string& path, const CooccurrenceMatrix& m, std::size_t cell,
                            const std::string& comments) {
    if (cell == 0) throw ArgumentError("heatmap cell size must be positive");
    const std::size_t side = m.size() * cell;
    Tensor img({1, side, side});
    for (std::size_t y = 0; y < side; ++y)
        for (std::size_t x = 0; x < side; ++x) img.at(0, y, x) = static_cast<float>(m.at(y / cell, x / cell));
    write_pnm(path, img, comments);
}

} // namespace faceattr::audit
