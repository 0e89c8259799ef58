#pragma once

#include <bit>
#include <cstdint>
#include <functional>
#include <vector>

namespace acap {

/// Fixed-capacity set of small non-negative integers, stored as a bitset.
class NodeSet {
public:
  NodeSet() = default;
  explicit NodeSet(int capacity) : words_((capacity + 63) / 64, 0) {}

  void insert(int i) { words_[i >> 6] |= std::uint64_t{1} << (i & 63); }
  void erase(int i) { words_[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
  bool contains(int i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }

  int count() const {
    int c = 0;
    for (auto w : words_)
      c += std::popcount(w);
    return c;
  }

  NodeSet &operator|=(const NodeSet &o) {
    for (std::size_t i = 0; i < words_.size(); ++i)
      words_[i] |= o.words_[i];
    return *this;
  }

  bool operator==(const NodeSet &) const = default;

  /// Members in increasing order.
  std::vector<int> members() const {
    std::vector<int> out;
    for (std::size_t w = 0; w < words_.size(); ++w) {
      std::uint64_t bits = words_[w];
      while (bits) {
        out.push_back(static_cast<int>(w * 64) + std::countr_zero(bits));
        bits &= bits - 1;
      }
    }
    return out;
  }

  /// Lexicographic order of the sorted member lists.
  bool lex_less(const NodeSet &o) const {
    for (std::size_t w = 0; w < words_.size(); ++w) {
      const std::uint64_t diff = words_[w] ^ o.words_[w];
      if (!diff)
        continue;
      const int bit = std::countr_zero(diff);
      const bool mine = (words_[w] >> bit) & 1u;
      // The owner of the first differing id is smaller unless the other list ends there.
      const NodeSet &other = mine ? o : *this;
      const bool other_continues = other.has_member_above(static_cast<int>(w * 64) + bit);
      return mine ? other_continues : !other_continues;
    }
    return false;
  }

  std::size_t hash() const {
    std::size_t h = 1469598103934665603ull;
    for (auto w : words_)
      h = (h ^ std::hash<std::uint64_t>()(w)) * 1099511628211ull;
    return h;
  }

private:
  bool has_member_above(int i) const {
    const std::size_t w = static_cast<std::size_t>(i >> 6);
    const int b = i & 63;
    if (b < 63 && (words_[w] >> (b + 1)))
      return true;
    for (std::size_t k = w + 1; k < words_.size(); ++k)
      if (words_[k])
        return true;
    return false;
  }

  std::vector<std::uint64_t> words_;
};

} // namespace acap
