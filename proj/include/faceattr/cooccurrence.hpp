#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "faceattr/attributes.hpp"

namespace faceattr::audit {

enum class CooccurrenceMetric {
    jaccard,      ///< |i and j| / |i or j| over positive labels (symmetric)
    conditional,  ///< P(j = +1 | i = +1) (row-conditional, asymmetric)
};

CooccurrenceMetric parse_metric(const std::string& text);
std::string to_string(CooccurrenceMetric metric);

struct CooccurrenceMatrix {
    std::vector<std::string> names;
    CooccurrenceMetric metric = CooccurrenceMetric::jaccard;
    std::vector<double> values;  ///< row-major F x F
    /// Attributes with no positive label; their off-diagonal entries are 0
    /// by convention.
    std::vector<bool> empty_attribute;

    std::size_t size() const { return names.size(); }
    double at(std::size_t i, std::size_t j) const { return values[i * names.size() + j]; }
};

/// Throws ArgumentError on an empty table.
CooccurrenceMatrix cooccurrence(const AttributeTable& table, CooccurrenceMetric metric);

/// Largest entry in row `i` excluding the diagonal.
double max_off_diagonal(const CooccurrenceMatrix& m, std::size_t i);

/// Nearest-rank percentile (0..100] of the off-diagonal entries of the upper
/// triangle.
double pairwise_percentile(const CooccurrenceMatrix& m, double percentile);

/// CSV with a header row and one row per attribute.
void write_cooccurrence_csv(std::ostream& out, const CooccurrenceMatrix& m);

/// Grayscale heatmap, white = 1. Each cell is `cell` x `cell` pixels.
void write_cooccurrence_pgm(const std::string& path, const CooccurrenceMatrix& m, std::size_t cell = 8,
                            const std::string& comments = "");

} // namespace faceattr::audit
