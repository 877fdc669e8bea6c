#pragma once

#include "kexlab/rational.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kexlab {

// Public, finite set of admissible secret values. Sorted ascending, no
// duplicates. The drawn value is secret; the palette itself is not.
class Palette {
 public:
  // Sorts the input. Throws Error(InvalidArgument) on an empty set or a
  // duplicate value.
  explicit Palette(std::vector<Rational> values);

  // Throws Error(InvalidArgument) unless every value is > 0.
  static Palette resistances(std::vector<Rational> values);

  // {0, 1, ..., count - 1}.
  static Palette range(std::uint64_t count);

  const std::vector<Rational>& values() const noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }
  const Rational& operator[](std::size_t i) const { return values_[i]; }

  // ceil(log2(size())); 0 for a single-value palette.
  unsigned bit_width() const noexcept;

  std::optional<std::size_t> index_of(const Rational& value) const;
  bool contains(const Rational& value) const { return index_of(value).has_value(); }

  // Index of the closest value; ties resolve to the lower index.
  std::size_t nearest_index(const Rational& value) const;

  // Smallest gap between adjacent values; 0 for a single-value palette.
  Rational min_spacing() const;
  Rational spread() const { return values_.back() - values_.front(); }

  friend bool operator==(const Palette&, const Palette&) = default;

 private:
  std::vector<Rational> values_;
};

// Bit string in transmission order.
class BitString {
 public:
  void append(std::uint64_t value, unsigned width);  // big-endian, fixed width
  void append(const BitString& other);

  std::size_t size() const noexcept { return bits_.size(); }
  bool empty() const noexcept { return bits_.empty(); }
  bool operator[](std::size_t i) const { return bits_[i]; }
  std::string to_string() const;
  static BitString from_string(const std::string& text);

  friend bool operator==(const BitString&, const BitString&) = default;

 private:
  std::vector<bool> bits_;
};

// All public palettes of one experiment.
struct PaletteSet {
  Palette p_s;
  Palette p_a;
  Palette p_b;
  Palette p_ua;
  Palette p_ub;
};

}  // namespace kexlab
