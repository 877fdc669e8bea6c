#include "kexlab/palette.hpp"

#include "kexlab/errors.hpp"

#include <algorithm>

namespace kexlab {

Palette::Palette(std::vector<Rational> values) : values_(std::move(values)) {
  if (values_.empty()) throw Error(Errc::InvalidArgument, "palette must not be empty");
  std::sort(values_.begin(), values_.end());
  if (std::adjacent_find(values_.begin(), values_.end()) != values_.end())
    throw Error(Errc::InvalidArgument, "palette values must be distinct");
}

Palette Palette::resistances(std::vector<Rational> values) {
  Palette p(std::move(values));
  if (p.values_.front() <= 0)
    throw Error(Errc::InvalidArgument, "resistance palette values must be positive");
  return p;
}

Palette Palette::range(std::uint64_t count) {
  std::vector<Rational> v;
  v.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) v.emplace_back(i);
  return Palette(std::move(v));
}

unsigned Palette::bit_width() const noexcept {
  unsigned w = 0;
  while ((std::size_t{1} << w) < values_.size()) ++w;
  return w;
}

std::optional<std::size_t> Palette::index_of(const Rational& value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value);
  if (it == values_.end() || *it != value) return std::nullopt;
  return static_cast<std::size_t>(it - values_.begin());
}

std::size_t Palette::nearest_index(const Rational& value) const {
  auto it = std::lower_bound(values_.begin(), values_.end(), value);
  if (it == values_.begin()) return 0;
  if (it == values_.end()) return values_.size() - 1;
  auto hi = static_cast<std::size_t>(it - values_.begin());
  std::size_t lo = hi - 1;
  return (value - values_[lo] <= values_[hi] - value) ? lo : hi;
}

Rational Palette::min_spacing() const {
  if (values_.size() < 2) return 0;
  Rational best = values_[1] - values_[0];
  for (std::size_t i = 2; i < values_.size(); ++i) best = std::min<Rational>(best, values_[i] - values_[i - 1]);
  return best;
}

void BitString::append(std::uint64_t value, unsigned width) {
  for (unsigned i = width; i-- > 0;) bits_.push_back(((value >> i) & 1U) != 0);
}

void BitString::append(const BitString& other) { bits_.insert(bits_.end(), other.bits_.begin(), other.bits_.end()); }

std::string BitString::to_string() const {
  std::string s;
  s.reserve(bits_.size());
  for (bool b : bits_) s.push_back(b ? '1' : '0');
  return s;
}

BitString BitString::from_string(const std::string& text) {
  BitString out;
  for (char c : text) {
    if (c != '0' && c != '1') throw Error(Errc::InvalidArgument, "bit string may contain only 0 and 1");
    out.bits_.push_back(c == '1');
  }
  return out;
}

}  // namespace kexlab
