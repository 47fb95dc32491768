#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace faceattr {

/// Fixed-length feature vectors keyed by image id, produced by an external
/// pretrained extractor (penultimate-layer activations).
class EmbeddingTable {
public:
    EmbeddingTable() = default;
    explicit EmbeddingTable(std::size_t dim);

    void add(std::string image_id, std::vector<float> vector);

    std::size_t dim() const noexcept { return dim_; }
    std::size_t size() const noexcept { return ids_.size(); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<float>& vector(std::size_t row) const { return vectors_.at(row); }

    /// Row index of `image_id`, or npos.
    std::size_t find(std::string_view image_id) const;
    static constexpr std::size_t npos = static_cast<std::size_t>(-1);

private:
    std::size_t dim_ = 0;
    std::vector<std::string> ids_;
    std::vector<std::vector<float>> vectors_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// Text format: header "count dim", then `count` rows "image_id v1 .. v_dim".
/// LF or CRLF. Throws ParseError naming the offending line.
EmbeddingTable parse_embeddings(std::istream& in);
EmbeddingTable load_embeddings(const std::string& path);

void write_embeddings(std::ostream& out, const EmbeddingTable& table);

} // namespace faceattr
