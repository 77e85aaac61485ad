#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace grammine {

/// Position of one byte of the traced input.
struct TaintTag {
  std::size_t offset = 0;
  auto operator<=>(const TaintTag&) const = default;
};

/// Inclusive run of offsets.
struct OffsetRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
  bool operator==(const OffsetRange&) const = default;
};

/// Set of taint tags, kept as sorted, disjoint, non-adjacent runs.
class TaintSet {
 public:
  TaintSet() = default;

  static TaintSet of(std::size_t offset);
  static TaintSet span(std::size_t lo, std::size_t hi);

  void insert(std::size_t offset) { insert_range(offset, offset); }
  void insert_range(std::size_t lo, std::size_t hi);
  void merge(const TaintSet& other);

  bool empty() const { return runs_.empty(); }
  bool contains(std::size_t offset) const;
  /// True iff the offsets form one gap-free range. The empty set is not consecutive.
  bool is_consecutive() const { return runs_.size() == 1; }
  std::size_t min() const { return runs_.front().lo; }
  std::size_t max() const { return runs_.back().hi; }
  std::size_t count() const;

  const std::vector<OffsetRange>& runs() const { return runs_; }
  std::vector<TaintTag> tags() const;

  bool operator==(const TaintSet&) const = default;

 private:
  std::vector<OffsetRange> runs_;
};

TaintSet union_taint(const TaintSet& a, const TaintSet& b);

/// A byte together with the input offset it was copied from, if any.
struct TracedChar {
  char value = 0;
  std::optional<std::size_t> origin;

  TaintSet taint() const { return origin ? TaintSet::of(*origin) : TaintSet{}; }
};

/// Byte string whose bytes remember their input offsets.
///
/// Copies, substrings and concatenations keep per-byte origins, so the taint
/// of any derived string is exactly the set of input bytes it was built from.
class TracedString {
 public:
  TracedString() = default;

  static TracedString from_input(std::string_view bytes);
  static TracedString literal(std::string_view bytes);

  std::size_t size() const { return bytes_.size(); }
  bool empty() const { return bytes_.empty(); }

  TracedChar at(std::size_t i) const { return {bytes_.at(i), origin_.at(i)}; }
  TracedString substr(std::size_t pos, std::size_t len = std::string::npos) const;
  void push_back(TracedChar c);
  TracedString& operator+=(const TracedString& other);
  friend TracedString operator+(TracedString a, const TracedString& b) { return a += b; }

  /// Raw payload. Reading it does not record anything.
  const std::string& bytes() const { return bytes_; }
  TaintSet taint() const;

 private:
  std::string bytes_;
  std::vector<std::optional<std::size_t>> origin_;
};

/// Scalar decoded from tainted bytes.
template <typename T>
struct Traced {
  T value{};
  TaintSet taint;
};

}  // namespace grammine
