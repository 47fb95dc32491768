#include "faceattr/confusion.hpp"

#include <algorithm>
#include <cstdio>
#include <ostream>

#include "faceattr/error.hpp"

namespace faceattr::audit {

namespace {

int classify(double prob_positive, double threshold) { return prob_positive > threshold ? 1 : 0; }

double confidence_of(double prob_positive, int predicted) { return predicted ? prob_positive : 1.0 - prob_positive; }

void check_threshold(double threshold) {
    if (!(threshold >= 0.0 && threshold <= 1.0)) throw ArgumentError("threshold must lie in [0, 1]");
}

} // namespace

ConfusionReport confusion_report(std::span<const PredictionRecord> records, double threshold,
                                 const std::string& target_attribute) {
    check_threshold(threshold);
    ConfusionReport r;
    r.target_attribute = target_attribute;
    r.threshold = threshold;
    for (const auto& rec : records) {
        const int p = classify(rec.prob_positive, threshold);
        const double conf = confidence_of(rec.prob_positive, p);
        if (p == 1 && rec.true_class == 1) {
            ++r.true_positive;
        } else if (p == 1) {
            ++r.false_positive;
            r.false_positives.push_back({rec.image_id, conf});
        } else if (rec.true_class == 1) {
            ++r.false_negative;
            r.false_negatives.push_back({rec.image_id, conf});
        } else {
            ++r.true_negative;
        }
    }
    const auto by_conf = [](const ConfusionEntry& a, const ConfusionEntry& b) { return a.confidence > b.confidence; };
    std::stable_sort(r.false_positives.begin(), r.false_positives.end(), by_conf);
    std::stable_sort(r.false_negatives.begin(), r.false_negatives.end(), by_conf);
    return r;
}

void write_confusion_csv(std::ostream& out, const ConfusionReport& report) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", report.threshold);
    out << "# target=" << report.target_attribute << " threshold=" << buf << '\n';
    out << "cell,count\n";
    out << "true_positive," << report.true_positive << '\n';
    out << "false_positive," << report.false_positive << '\n';
    out << "true_negative," << report.true_negative << '\n';
    out << "false_negative," << report.false_negative << '\n';
    out << "\nerror,image_id,confidence\n";
    for (const auto& [kind, list] : {std::pair{"false_positive", &report.false_positives},
                                     std::pair{"false_negative", &report.false_negatives}}) {
        for (const auto& e : *list) {
            std::snprintf(buf, sizeof buf, "%.9f", e.confidence);
            out << kind << ',' << e.image_id << ',' << buf << '\n';
        }
    }
}

std::vector<NoiseCandidate> mine_label_noise(std::span<const PredictionRecord> records, long long top_k,
                                             double threshold) {
    if (top_k <= 0) throw ArgumentError("top_k must be positive, got " + std::to_string(top_k));
    check_threshold(threshold);
    std::vector<NoiseCandidate> out;
    for (const auto& rec : records) {
        const int p = classify(rec.prob_positive, threshold);
        if (p == rec.true_class) continue;
        out.push_back({rec.image_id, confidence_of(rec.prob_positive, p), p, rec.true_class});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const NoiseCandidate& a, const NoiseCandidate& b) { return a.confidence > b.confidence; });
    if (out.size() > static_cast<std::size_t>(top_k)) out.resize(static_cast<std::size_t>(top_k));
    return out;
}

void write_noise_csv(std::ostream& out, const std::vector<NoiseCandidate>& candidates) {
    out << "rank,image_id,confidence,predicted,labeled\n";
    char buf[32];
    std::size_t rank = 1;
    for (const auto& c : candidates) {
        std::snprintf(buf, sizeof buf, "%.9f", c.confidence);
        out << rank++ << ',' << c.image_id << ',' << buf << ',' << (c.predicted ? "+1" : "-1") << ','
            << (c.labeled ? "+1" : "-1") << '\n';
    }
}

} // namespace faceattr::audit
