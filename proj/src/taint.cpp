#include "grammine/taint.hpp"

#include <algorithm>

namespace grammine {

TaintSet TaintSet::of(std::size_t offset) {
  TaintSet s;
  s.insert(offset);
  return s;
}

TaintSet TaintSet::span(std::size_t lo, std::size_t hi) {
  TaintSet s;
  s.insert_range(lo, hi);
  return s;
}

void TaintSet::insert_range(std::size_t lo, std::size_t hi) {
  if (lo > hi) throw std::invalid_argument("TaintSet::insert_range: lo > hi");
  // Find the first run that could touch [lo, hi].
  auto it = std::lower_bound(runs_.begin(), runs_.end(), lo,
                             [](const OffsetRange& r, std::size_t v) { return r.hi + 1 < v; });
  auto last = it;
  while (last != runs_.end() && last->lo <= hi + 1) {
    lo = std::min(lo, last->lo);
    hi = std::max(hi, last->hi);
    ++last;
  }
  it = runs_.erase(it, last);
  runs_.insert(it, OffsetRange{lo, hi});
}

void TaintSet::merge(const TaintSet& other) {
  if (other.runs_.empty()) return;
  if (runs_.empty()) {
    runs_ = other.runs_;
    return;
  }
  std::vector<OffsetRange> out;
  out.reserve(runs_.size() + other.runs_.size());
  auto a = runs_.begin();
  auto b = other.runs_.begin();
  auto push = [&out](OffsetRange r) {
    if (!out.empty() && r.lo <= out.back().hi + 1) {
      out.back().hi = std::max(out.back().hi, r.hi);
    } else {
      out.push_back(r);
    }
  };
  while (a != runs_.end() || b != other.runs_.end()) {
    if (b == other.runs_.end() || (a != runs_.end() && a->lo <= b->lo)) {
      push(*a++);
    } else {
      push(*b++);
    }
  }
  runs_ = std::move(out);
}

bool TaintSet::contains(std::size_t offset) const {
  auto it = std::lower_bound(runs_.begin(), runs_.end(), offset,
                             [](const OffsetRange& r, std::size_t v) { return r.hi < v; });
  return it != runs_.end() && it->lo <= offset;
}

std::size_t TaintSet::count() const {
  std::size_t n = 0;
  for (const auto& r : runs_) n += r.hi - r.lo + 1;
  return n;
}

std::vector<TaintTag> TaintSet::tags() const {
  std::vector<TaintTag> out;
  for (const auto& r : runs_)
    for (std::size_t k = r.lo; k <= r.hi; ++k) out.push_back({k});
  return out;
}

TaintSet union_taint(const TaintSet& a, const TaintSet& b) {
  TaintSet out = a;
  out.merge(b);
  return out;
}

TracedString TracedString::from_input(std::string_view bytes) {
  TracedString s;
  s.bytes_.assign(bytes);
  s.origin_.reserve(bytes.size());
  for (std::size_t i = 0; i < bytes.size(); ++i) s.origin_.emplace_back(i);
  return s;
}

TracedString TracedString::literal(std::string_view bytes) {
  TracedString s;
  s.bytes_.assign(bytes);
  s.origin_.assign(bytes.size(), std::nullopt);
  return s;
}

TracedString TracedString::substr(std::size_t pos, std::size_t len) const {
  if (pos > bytes_.size()) throw std::out_of_range("TracedString::substr");
  len = std::min(len, bytes_.size() - pos);
  TracedString s;
  s.bytes_ = bytes_.substr(pos, len);
  s.origin_.assign(origin_.begin() + static_cast<std::ptrdiff_t>(pos),
                   origin_.begin() + static_cast<std::ptrdiff_t>(pos + len));
  return s;
}

void TracedString::push_back(TracedChar c) {
  bytes_.push_back(c.value);
  origin_.push_back(c.origin);
}

TracedString& TracedString::operator+=(const TracedString& other) {
  bytes_ += other.bytes_;
  origin_.insert(origin_.end(), other.origin_.begin(), other.origin_.end());
  return *this;
}

TaintSet TracedString::taint() const {
  TaintSet s;
  for (const auto& o : origin_)
    if (o) s.insert(*o);
  return s;
}

}  // namespace grammine
