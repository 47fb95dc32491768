#include "faceattr/evaluation.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "faceattr/error.hpp"
#include "faceattr/text.hpp"

namespace faceattr {

EvalResult summarize_predictions(std::vector<PredictionRecord> records) {
    if (records.empty()) throw ArgumentError("evaluation requires a non-empty test set");
    EvalResult result;
    for (const auto& r : records) {
        if (r.true_class == 1) (r.predicted_class == 1 ? result.true_positive : result.false_negative)++;
        else (r.predicted_class == 1 ? result.false_positive : result.true_negative)++;
    }
    result.accuracy = static_cast<double>(result.true_positive + result.true_negative) /
                      static_cast<double>(records.size());
    result.records = std::move(records);
    return result;
}

void write_eval_rows(std::ostream& out, const std::vector<PredictionRecord>& records) {
    out << "image_id,true,predicted,prob_positive\n";
    char buf[40];
    for (const auto& r : records) {
        std::snprintf(buf, sizeof buf, "%.9f", r.prob_positive);
        out << r.image_id << ',' << r.true_class << ',' << r.predicted_class << ',' << buf << '\n';
    }
}

std::vector<PredictionRecord> read_eval_rows(std::istream& in) {
    std::vector<PredictionRecord> records;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view = trim(line);
        if (view.empty() || view.front() == '#' || view.starts_with("image_id,")) continue;
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = view.find(',', start);
            fields.push_back(view.substr(start, comma == std::string_view::npos ? comma : comma - start));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        if (fields.size() != 4) throw ParseError("expected 4 comma-separated fields", line_no);
        PredictionRecord r;
        r.image_id = std::string(fields[0]);
        try {
            r.true_class = static_cast<int>(parse_integer(fields[1]));
            r.predicted_class = static_cast<int>(parse_integer(fields[2]));
            r.prob_positive = parse_real(fields[3]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no);
        }
        if ((r.true_class != 0 && r.true_class != 1) || (r.predicted_class != 0 && r.predicted_class != 1)) {
            throw ParseError("classes must be 0 or 1", line_no);
        }
        if (!(r.prob_positive >= 0.0 && r.prob_positive <= 1.0)) {
            throw ParseError("probability outside [0,1]", line_no);
        }
        records.push_back(std::move(r));
    }
    return records;
}

std::vector<PredictionRecord> load_eval_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open evaluation file");
    try {
        return read_eval_rows(in);
    } catch (const ParseError& e) {
        throw IoError(path, e.what());
    }
}

} // namespace faceattr
