#include "faceattr/split.hpp"

#include <algorithm>
#include <unordered_set>

#include "faceattr/error.hpp"
#include "faceattr/rng.hpp"

namespace faceattr {

Balance parse_balance(const std::string& text) {
    if (text == "none") return Balance::none;
    if (text == "train") return Balance::train;
    if (text == "both") return Balance::both;
    throw ArgumentError("balance must be none, train or both, got '" + text + "'");
}

std::string to_string(Balance balance) {
    switch (balance) {
    case Balance::none: return "none";
    case Balance::train: return "train";
    case Balance::both: return "both";
    }
    return "?";
}

namespace {

struct Pools {
    std::vector<std::size_t> positives, negatives;
    std::size_t pos_next = 0, neg_next = 0;

    std::size_t pos_left() const { return positives.size() - pos_next; }
    std::size_t neg_left() const { return negatives.size() - neg_next; }
};

[[noreturn]] void insufficient(const std::string& what, const Pools& pools, std::size_t need_pos,
                               std::size_t need_neg) {
    throw ArgumentError("insufficient records for " + what + ": need " + std::to_string(need_pos) +
                        " positive and " + std::to_string(need_neg) + " negative, available " +
                        std::to_string(pools.pos_left()) + " positive and " + std::to_string(pools.neg_left()) +
                        " negative");
}

} // namespace

Split make_split(const AttributeTable& table, const std::string& target_attribute, std::size_t n_train,
                 std::size_t n_test, std::uint64_t seed, Balance balance) {
    const std::size_t attr = table.attribute_index(target_attribute);
    if (n_train == 0) throw ArgumentError("make_split: training partition must be non-empty");

    Pools pools;
    for (std::size_t i = 0; i < table.size(); ++i)
        (table.records()[i].labels[attr] == 1 ? pools.positives : pools.negatives).push_back(i);

    const std::size_t total = table.size();
    if (n_train + n_test > total) {
        throw ArgumentError("make_split: requested " + std::to_string(n_train) + " train + " +
                            std::to_string(n_test) + " test but the table has " + std::to_string(total) +
                            " records (" + std::to_string(pools.positives.size()) + " positive, " +
                            std::to_string(pools.negatives.size()) + " negative)");
    }

    Rng rng = Rng::substream(seed, "split");
    rng.shuffle(pools.positives);
    rng.shuffle(pools.negatives);
    std::vector<bool> used(total, false);

    auto draw_balanced = [&](std::size_t n, const std::string& what) {
        const std::size_t need_pos = n / 2, need_neg = n - n / 2;
        if (pools.pos_left() < need_pos || pools.neg_left() < need_neg) insufficient(what, pools, need_pos, need_neg);
        std::vector<std::size_t> picked;
        for (std::size_t i = 0; i < need_pos; ++i) picked.push_back(pools.positives[pools.pos_next++]);
        for (std::size_t i = 0; i < need_neg; ++i) picked.push_back(pools.negatives[pools.neg_next++]);
        rng.shuffle(picked);
        return picked;
    };

    auto draw_random = [&](std::size_t n) {
        std::vector<std::size_t> remaining;
        for (std::size_t i = 0; i < total; ++i)
            if (!used[i]) remaining.push_back(i);
        rng.shuffle(remaining);
        remaining.resize(n);
        return remaining;
    };

    auto to_ids = [&](const std::vector<std::size_t>& rows) {
        std::vector<std::string> ids;
        ids.reserve(rows.size());
        for (std::size_t r : rows) {
            used[r] = true;
            ids.push_back(table.records()[r].image_id);
        }
        return ids;
    };

    Split split;
    split.seed = seed;
    split.target_attribute = table.names()[attr];
    split.balance = balance;
    split.train_ids = to_ids(balance == Balance::none ? draw_random(n_train) : draw_balanced(n_train, "training"));
    if (balance == Balance::both) {
        split.test_ids = to_ids(draw_balanced(n_test, "test"));
    } else {
        // Positives consumed by a balanced train draw are already marked used.
        split.test_ids = to_ids(draw_random(n_test));
    }
    return split;
}

} // namespace faceattr
