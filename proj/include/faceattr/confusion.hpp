#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "faceattr/evaluation.hpp"

namespace faceattr::audit {

struct ConfusionEntry {
    std::string image_id;
    double confidence = 0.0;  ///< probability of the predicted class
};

struct ConfusionReport {
    std::string target_attribute;
    double threshold = 0.5;
    std::size_t true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;
    /// Most confident errors first.
    std::vector<ConfusionEntry> false_positives, false_negatives;

    std::size_t total() const { return true_positive + false_positive + true_negative + false_negative; }
};

/// A record is predicted positive iff prob_positive > threshold.
ConfusionReport confusion_report(std::span<const PredictionRecord> records, double threshold = 0.5,
                                 const std::string& target_attribute = "");

/// Cell counts, then one row per misclassified image.
void write_confusion_csv(std::ostream& out, const ConfusionReport& report);

struct NoiseCandidate {
    std::string image_id;
    double confidence = 0.0;  ///< probability of the predicted (disagreeing) class
    int predicted = 0;
    int labeled = 0;
};

/// The top_k most confident model/label disagreements, nonincreasing by
/// confidence (stable on ties). Throws ArgumentError if top_k <= 0.
std::vector<NoiseCandidate> mine_label_noise(std::span<const PredictionRecord> records, long long top_k,
                                             double threshold = 0.5);

void write_noise_csv(std::ostream& out, const std::vector<NoiseCandidate>& candidates);

} // namespace faceattr::audit
