#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

namespace faceattr {

/// Class 1 is the attribute's +1 label, class 0 its -1 label.
inline int class_of_label(int label) { return label == 1 ? 1 : 0; }

/// argmax over two probabilities, ties to class 0.
inline int predicted_class(double prob_negative, double prob_positive) {
    return prob_positive > prob_negative ? 1 : 0;
}

struct PredictionRecord {
    std::string image_id;
    int true_class = 0;
    int predicted_class = 0;
    double prob_positive = 0.0;

    friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct EvalResult {
    double accuracy = 0.0;
    std::size_t true_positive = 0, false_positive = 0, true_negative = 0, false_negative = 0;
    std::vector<PredictionRecord> records;

    std::size_t total() const { return records.size(); }
};

/// Tallies per-image records. Throws ArgumentError on an empty list.
EvalResult summarize_predictions(std::vector<PredictionRecord> records);

/// CSV rows "image_id,true,predicted,prob_positive" with a column header.
void write_eval_rows(std::ostream& out, const std::vector<PredictionRecord>& records);

/// Reads rows written by write_eval_rows; lines starting with '#' and the
/// column header are skipped.
std::vector<PredictionRecord> read_eval_rows(std::istream& in);
std::vector<PredictionRecord> load_eval_file(const std::string& path);

} // namespace faceattr
