#pragma once

// Product basis of a single field mode and A identical N-level atoms in the
// symmetric (occupation-number) representation, split into sectors of the
// conserved excitation number
//
//   Nhat = a^dag a + sum_j mu_j (m_{j+1} - m_j) / 2,   mu_j = j (N - j).
//
// Nhat takes half-integer values, so sector labels are stored as doubled
// integers and compared exactly.

#include <compare>
#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace effham {

/// Exact half-integer, stored as twice its value.
class HalfInteger {
 public:
  constexpr HalfInteger() = default;
  static constexpr HalfInteger from_twice(long twice) { return HalfInteger(twice); }
  static constexpr HalfInteger from_int(long v) { return HalfInteger(2 * v); }
  /// Parses "2", "-1.5", "5/2". Throws Error if the value is not a half-integer.
  static HalfInteger parse(const std::string& text);
  /// Nearest half-integer to `v`; throws if `v` is not within 1e-9 of one.
  static HalfInteger from_double(double v);

  constexpr long twice() const { return twice_; }
  constexpr double value() const { return 0.5 * static_cast<double>(twice_); }
  constexpr bool is_integer() const { return twice_ % 2 == 0; }
  std::string str() const;

  constexpr auto operator<=>(const HalfInteger&) const = default;
  constexpr HalfInteger operator+(HalfInteger o) const { return HalfInteger(twice_ + o.twice_); }
  constexpr HalfInteger operator-(HalfInteger o) const { return HalfInteger(twice_ - o.twice_); }

 private:
  constexpr explicit HalfInteger(long twice) : twice_(twice) {}
  long twice_ = 0;
};

/// |n> (x) |m_1 ... m_N>: photon number and level occupations summed over atoms.
struct BasisState {
  int photons = 0;
  std::vector<int> occupations;

  int atoms() const;
  int levels() const { return static_cast<int>(occupations.size()); }
  std::string str() const;

  auto operator<=>(const BasisState&) const = default;
};

/// Nhat eigenvalue of `state` for an N-level system.
HalfInteger excitation_number(const BasisState& state, int levels);

/// Ordered list of basis states with an index lookup and a tag that
/// identifies it for operator compatibility checks.
class StateSpace {
 public:
  StateSpace() = default;
  StateSpace(int levels, int atoms, std::vector<BasisState> states, std::string tag);

  std::size_t size() const { return states_.size(); }
  bool empty() const { return states_.empty(); }
  const BasisState& operator[](std::size_t i) const { return states_[i]; }
  const std::vector<BasisState>& states() const { return states_; }
  auto begin() const { return states_.begin(); }
  auto end() const { return states_.end(); }

  std::optional<std::size_t> find(const BasisState& s) const;
  /// Like find() but throws when the state is absent.
  std::size_t index_of(const BasisState& s) const;

  int levels() const { return levels_; }
  int atoms() const { return atoms_; }
  const std::string& tag() const { return tag_; }

 private:
  int levels_ = 0;
  int atoms_ = 0;
  std::vector<BasisState> states_;
  std::map<BasisState, std::size_t> index_;
  std::string tag_;
};

struct SectorBasis {
  HalfInteger excitation;
  StateSpace space;
};

/// All sectors with excitation between the minimum and `max_excitation`,
/// plus the concatenated space they span (block-diagonal layout).
class FullBasis {
 public:
  FullBasis(int levels, int atoms, HalfInteger max_excitation, std::vector<SectorBasis> sectors);

  int levels() const { return levels_; }
  int atoms() const { return atoms_; }
  HalfInteger max_excitation() const { return max_excitation_; }
  const std::vector<SectorBasis>& sectors() const { return sectors_; }
  const StateSpace& space() const { return flat_; }
  std::size_t total_states() const { return flat_.size(); }
  /// Offset of sector `k` inside space().
  std::size_t offset(std::size_t k) const { return offsets_[k]; }
  /// Index of the sector with the given excitation, if present.
  std::optional<std::size_t> sector_index(HalfInteger excitation) const;

 private:
  int levels_;
  int atoms_;
  HalfInteger max_excitation_;
  std::vector<SectorBasis> sectors_;
  std::vector<std::size_t> offsets_;
  StateSpace flat_;
};

/// Occupation vectors of `total` atoms over `parts` levels, lexicographic order.
std::vector<std::vector<int>> compositions(int total, int parts);

/// Smallest Nhat eigenvalue: no photons, every atom in level 1.
HalfInteger minimal_excitation(int levels, int atoms);

SectorBasis build_sector(int levels, int atoms, HalfInteger excitation);

FullBasis build_full_basis(int levels, int atoms, HalfInteger max_excitation);

/// Every occupation vector at photon numbers [min_photons, max_photons].
/// This space is closed under the atomic operators S^{ij}; it is where the
/// u(N) relations are checked.
StateSpace product_space(int levels, int atoms, int min_photons, int max_photons);

}  // namespace effham
