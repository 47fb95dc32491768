#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "faceattr/attributes.hpp"

namespace faceattr {

/// Which partitions get exactly n/2 positives.
enum class Balance { none, train, both };

Balance parse_balance(const std::string& text);
std::string to_string(Balance balance);

struct Split {
    std::vector<std::string> train_ids;
    std::vector<std::string> test_ids;
    std::uint64_t seed = 0;
    std::string target_attribute;
    Balance balance = Balance::train;
};

/// Deterministic train/test draw. Balanced partitions take ceil(n/2)
/// negatives and floor(n/2) positives; the train partition is drawn first and
/// the test partition from what remains. Throws ArgumentError reporting the
/// available count per class when the table is too small.
Split make_split(const AttributeTable& table, const std::string& target_attribute, std::size_t n_train,
                 std::size_t n_test, std::uint64_t seed, Balance balance);

} // namespace faceattr
