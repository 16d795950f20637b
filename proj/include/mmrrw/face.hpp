#pragma once

#include <compare>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace mmrrw {

// Hard cap on the dimension: faces live in a 32-bit mask and steps are
// packed base-3 into 64 bits.
inline constexpr int kMaxDim = 20;

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Subset of coordinates {0..d-1}. Printed 1-based ("1,3"), "" for the empty face.
class Face {
 public:
  constexpr Face() = default;
  constexpr explicit Face(std::uint32_t mask) : mask_(mask) {}

  static Face full(int d) { return Face(d >= 32 ? ~0u : ((1u << d) - 1u)); }
  static Face of(std::initializer_list<int> zero_based);
  static Face from_members(std::span<const int> zero_based);
  // Parses a 1-based key; throws ModelError on malformed input or index > d.
  static Face parse(std::string_view key, int d);

  std::uint32_t mask() const { return mask_; }
  bool empty() const { return mask_ == 0; }
  bool contains(int l) const { return (mask_ >> l) & 1u; }
  int size() const { return __builtin_popcount(mask_); }
  bool subset_of(Face o) const { return (mask_ & ~o.mask_) == 0; }
  bool intersects(Face o) const { return (mask_ & o.mask_) != 0; }

  Face with(int l) const { return Face(mask_ | (1u << l)); }
  Face without(int l) const { return Face(mask_ & ~(1u << l)); }
  Face operator|(Face o) const { return Face(mask_ | o.mask_); }
  Face operator&(Face o) const { return Face(mask_ & o.mask_); }
  Face minus(Face o) const { return Face(mask_ & ~o.mask_); }

  std::vector<int> members() const;
  std::string key() const;

  auto operator<=>(const Face&) const = default;

 private:
  std::uint32_t mask_ = 0;
};

// φ(x) = {l : x_l > 0}
Face face_of(std::span<const int> x);

// All faces of {0..d-1} ordered by size descending, then lexicographically by
// ascending member list.
std::vector<Face> faces_by_size_desc(int d);
// Lexicographic comparison of member lists ({1,2} < {1,3} < {2,3}).
bool lex_less(Face a, Face b);

// Steps z ∈ {-1,0,1}^d packed as sum (z_l+1) 3^l.
using Step = std::vector<int>;
std::uint64_t encode_step(std::span<const int> z);
Step decode_step(std::uint64_t code, int d);

}  // namespace mmrrw
