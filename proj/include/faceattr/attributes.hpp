#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace faceattr {

/// Labels are stored as +1 / -1 exactly as in the CelebA list file.
using Label = std::int8_t;

struct AttributeRecord {
    std::string image_id;
    std::vector<Label> labels;

    friend bool operator==(const AttributeRecord&, const AttributeRecord&) = default;
};

/// Per-image binary labels for F named attributes.
class AttributeTable {
public:
    AttributeTable() = default;
    explicit AttributeTable(std::vector<std::string> names);

    /// Appends a record; rejects wrong length, non +-1 values and duplicate ids.
    void add(AttributeRecord record);

    const std::vector<std::string>& names() const noexcept { return names_; }
    const std::vector<AttributeRecord>& records() const noexcept { return records_; }
    std::size_t attribute_count() const noexcept { return names_.size(); }
    std::size_t size() const noexcept { return records_.size(); }
    bool empty() const noexcept { return records_.empty(); }

    /// Exact name match first, then a unique case-insensitive match.
    std::optional<std::size_t> find_attribute(std::string_view name) const;
    /// As find_attribute but throws ArgumentError listing the known names.
    std::size_t attribute_index(std::string_view name) const;

    const AttributeRecord* find(std::string_view image_id) const;
    bool contains(std::string_view image_id) const { return find(image_id) != nullptr; }

    std::size_t positive_count(std::size_t attribute) const;

    /// Copy restricted to records whose id satisfies `keep`, order preserved.
    template <typename Pred>
    AttributeTable filtered(Pred keep) const {
        AttributeTable out(names_);
        for (const auto& r : records_)
            if (keep(r)) out.add(r);
        return out;
    }

    friend bool operator==(const AttributeTable& a, const AttributeTable& b) {
        return a.names_ == b.names_ && a.records_ == b.records_;
    }

private:
    std::vector<std::string> names_;
    std::vector<AttributeRecord> records_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Parses the CelebA `list_attr_celeba.txt` layout: a record count line, a
/// line of attribute names, then one `image_id v1 .. vF` row per record.
/// Throws ParseError with a 1-based line number.
AttributeTable parse_attribute_file(std::istream& in);
AttributeTable load_attribute_file(const std::string& path);

void write_attribute_file(std::ostream& out, const AttributeTable& table);

} // namespace faceattr
