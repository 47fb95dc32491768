#include "faceattr/attributes.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "faceattr/error.hpp"
#include "faceattr/text.hpp"

namespace faceattr {

AttributeTable::AttributeTable(std::vector<std::string> names) : names_(std::move(names)) {}

void AttributeTable::add(AttributeRecord record) {
    if (record.labels.size() != names_.size()) {
        throw ArgumentError("record '" + record.image_id + "' has " + std::to_string(record.labels.size()) +
                            " labels, table has " + std::to_string(names_.size()) + " attributes");
    }
    for (Label v : record.labels) {
        if (v != 1 && v != -1) {
            throw ArgumentError("record '" + record.image_id + "' has label " + std::to_string(v) +
                                ", expected 1 or -1");
        }
    }
    auto [it, inserted] = index_.emplace(record.image_id, records_.size());
    if (!inserted) throw ArgumentError("duplicate image id '" + record.image_id + "'");
    records_.push_back(std::move(record));
}

std::optional<std::size_t> AttributeTable::find_attribute(std::string_view name) const {
    for (std::size_t i = 0; i < names_.size(); ++i)
        if (names_[i] == name) return i;
    std::optional<std::size_t> match;
    const std::string lowered = to_lower(name);
    for (std::size_t i = 0; i < names_.size(); ++i) {
        if (to_lower(names_[i]) == lowered) {
            if (match) return std::nullopt;
            match = i;
        }
    }
    return match;
}

std::size_t AttributeTable::attribute_index(std::string_view name) const {
    if (auto idx = find_attribute(name)) return *idx;
    std::string known;
    for (const auto& n : names_) known += (known.empty() ? "" : ", ") + n;
    throw ArgumentError("unknown attribute '" + std::string(name) + "' (known: " + known + ")");
}

const AttributeRecord* AttributeTable::find(std::string_view image_id) const {
    auto it = index_.find(std::string(image_id));
    return it == index_.end() ? nullptr : &records_[it->second];
}

std::size_t AttributeTable::positive_count(std::size_t attribute) const {
    std::size_t n = 0;
    for (const auto& r : records_) n += r.labels.at(attribute) == 1;
    return n;
}

AttributeTable parse_attribute_file(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;

    auto next_line = [&]() -> bool {
        if (!std::getline(in, line)) return false;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        return true;
    };

    if (!next_line()) throw ParseError("missing record count line", 1);
    long long declared = 0;
    {
        auto tokens = split_whitespace(line);
        if (tokens.size() != 1) throw ParseError("expected a single record count", line_no);
        try {
            declared = parse_integer(tokens[0]);
        } catch (const std::invalid_argument& e) {
            throw ParseError(e.what(), line_no);
        }
        if (declared < 0) throw ParseError("negative record count", line_no);
    }

    if (!next_line()) throw ParseError("missing attribute name line", 2);
    std::vector<std::string> names;
    for (auto tok : split_whitespace(line)) names.emplace_back(tok);
    if (names.empty()) throw ParseError("no attribute names", line_no);

    AttributeTable table(names);
    std::vector<Label> labels;
    while (next_line()) {
        auto tokens = split_whitespace(line);
        if (tokens.empty()) continue;
        if (tokens.size() != names.size() + 1) {
            throw ParseError("expected image id and " + std::to_string(names.size()) + " labels, found " +
                                 std::to_string(tokens.size()) + " fields",
                             line_no);
        }
        labels.clear();
        for (std::size_t i = 1; i < tokens.size(); ++i) {
            if (tokens[i] == "1" || tokens[i] == "+1") labels.push_back(1);
            else if (tokens[i] == "-1") labels.push_back(-1);
            else
                throw ParseError("label '" + std::string(tokens[i]) + "' for " + names[i - 1] +
                                     " is not 1 or -1",
                                 line_no);
        }
        std::string id(tokens[0]);
        if (table.contains(id)) throw ParseError("duplicate image id '" + id + "'", line_no);
        if (static_cast<long long>(table.size()) == declared) {
            throw ParseError("more records than the declared count " + std::to_string(declared), line_no);
        }
        table.add({std::move(id), labels});
    }
    if (static_cast<long long>(table.size()) != declared) {
        throw ParseError("declared " + std::to_string(declared) + " records but found " +
                             std::to_string(table.size()),
                         line_no);
    }
    return table;
}

AttributeTable load_attribute_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError(path, "cannot open attribute file");
    try {
        return parse_attribute_file(in);
    } catch (const ParseError& e) {
        throw IoError(path, e.what());
    }
}

void write_attribute_file(std::ostream& out, const AttributeTable& table) {
    out << table.size() << '\n';
    for (std::size_t i = 0; i < table.names().size(); ++i) out << (i ? " " : "") << table.names()[i];
    out << '\n';
    for (const auto& r : table.records()) {
        out << r.image_id;
        for (Label v : r.labels) out << ' ' << (v == 1 ? "1" : "-1");
        out << '\n';
    }
}

} // namespace faceattr
