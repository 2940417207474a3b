#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace actloss {

// Cascade (pairwise) accumulator. Leaf partial sums are pushed in index
// order and merged like a binary counter, so the reduction tree depends
// only on the number of leaves, never on scheduling.
template <typename T>
class PairwiseAccumulator {
public:
    explicit PairwiseAccumulator(T zero) : zero_(std::move(zero)) {}

    void push(T leaf)
    {
        std::size_t level = 0;
        while (!stack_.empty() && stack_.back().second == level) {
            leaf = std::move(stack_.back().first) + leaf;
            stack_.pop_back();
            ++level;
        }
        stack_.emplace_back(std::move(leaf), level);
    }

    T finish()
    {
        if (stack_.empty())
            return zero_;
        T total = std::move(stack_.back().first);
        stack_.pop_back();
        while (!stack_.empty()) {
            total = std::move(stack_.back().first) + total;
            stack_.pop_back();
        }
        return total;
    }

private:
    T zero_;
    std::vector<std::pair<T, std::size_t>> stack_;
};

inline constexpr std::size_t kLeafBlock = 32;

/// Sum `leaf(begin, end)` over consecutive blocks of `kLeafBlock` indices.
template <typename T, typename Leaf>
T pairwise_blocks(std::size_t count, T zero, Leaf&& leaf)
{
    PairwiseAccumulator<T> acc(std::move(zero));
    for (std::size_t b = 0; b < count; b += kLeafBlock) {
        const std::size_t e = b + kLeafBlock < count ? b + kLeafBlock : count;
        acc.push(leaf(b, e));
    }
    return acc.finish();
}

/// Pairwise sum of scalar terms term(k), k in [0, count).
template <typename Term>
double pairwise_sum(std::size_t count, Term&& term)
{
    return pairwise_blocks(count, 0.0, [&](std::size_t b, std::size_t e) {
        double s = 0.0;
        for (std::size_t k = b; k < e; ++k)
            s += term(k);
        return s;
    });
}

} // namespace actloss
