#include "faceattr/embeddings.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>

#include "faceattr/error.hpp"
#include "faceattr/text.hpp"

namespace faceattr {

EmbeddingTable::EmbeddingTable(std::size_t dim) : dim_(dim) {}

void EmbeddingTable::add(std::string image_id, std::vector<float> vector) {
    if (vector.size() != dim_) {
        throw ArgumentError("embedding for '" + image_id + "' has " + std::to_string(vector.size()) +
                            " values, expected " + std::to_string(dim_));
    }
    for (float v : vector)
        if (!std::isfinite(v)) throw ArgumentError("embedding for '" + image_id + "' has a non-finite value");
    auto [it, inserted] = index_.emplace(image_id, ids_.size());
    if (!inserted) throw ArgumentError("duplicate embedding id '" + image_id + "'");
    ids_.push_back(std::move(image_id));
    vectors_.push_back(std::move(vector));
}

std::size_t EmbeddingTable::find(std::string_view image_id) const {
    auto it = index_.find(std::string(image_id));
    return it == index_.end() ? npos : it->second;
}

EmbeddingTable parse_embeddings(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    auto next_line = [&] {
        if (!std::getline(in, line)) return false;
        ++line_no;
        return true;
    };
    if (!next_line()) throw ParseError("missing 'count dim' header", 1);
    auto header = split_whitespace(line);
    if (header.size() != 2) throw ParseError("header must be 'count dim'", line_no);
    long long count = 0, dim = 0;
    try {
        count = parse_integer(header[0]);
        dim = parse_integer(header[1]);
    } catch (const std::invalid_argument& e) {
        throw ParseError(e.what(), line_no);
    }
    if (count < 0 || dim <= 0) throw ParseError("count must be >= 0 and dim > 0", line_no);

    EmbeddingTable table(static_cast<std::size_t>(dim));
    std::vector<float> values;
    while (next_line()) {
        auto tokens = split_whitespace(line);
        if (tokens.empty()) continue;
        if (tokens.size() != static_cast<std::size_t>(dim) + 1) {
            throw ParseError("expected image id and " + std::to_string(dim) + " values, found " +
                                 std::to_string(tokens.size() - 1) + " values",
                             line_no);
        }
        values.clear();
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            double v;
            try {
                v = parse_real(tokens[i]);
            } catch (const std::invalid_argument& e) {
                throw ParseError(e.what(), line_no);
            }
            if (!std::isfinite(v) || !std::isfinite(static_cast<float>(v))) {
                throw ParseError("non-finite value '" + std::string(tokens[i]) + "'", line_no);
            }
            values.push_back(static_cast<float>(v));
        }
        if (static_cast<long long>(table.size()) == count) {
            throw ParseError("more rows than the declared count " + std::to_string(count), line_no);
        }
        std::string id(tokens[0]);
        if (table.find(id) != EmbeddingTable::npos) throw ParseError("duplicate id '" + id + "'", line_no);
        table.add(std::move(id), values);
    }
    if (static_cast<long long>(table.size()) != count) {
        throw ParseError("declared " + std::to_string(count) + " rows but found " + std::to_string(table.size()),
                         line_no);
    }
    return table;
}

EmbeddingTable load_embeddings(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open embedding file");
    try {
        return parse_embeddings(in);
    } catch (const ParseError& e) {
        throw IoError(path, e.what());
    }
}

void write_embeddings(std::ostream& out, const EmbeddingTable& table) {
    out << table.size() << ' ' << table.dim() << '\n';
    char buf[32];
    for (std::size_t r = 0; r < table.size(); ++r) {
        out << table.ids()[r];
        for (float v : table.vector(r)) {
            std::snprintf(buf, sizeof buf, " %.9g", static_cast<double>(v));
            out << buf;
        }
        out << '\n';
    }
}

} // namespace faceattr
