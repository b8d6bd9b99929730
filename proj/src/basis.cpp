#include "effham/basis.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "hilbert-basis";

void check_shape(int levels, int atoms) {
  if (levels < 2) throw Error(kModule, "need at least 2 levels, got " + std::to_string(levels));
  if (atoms < 1) throw Error(kModule, "need at least 1 atom, got " + std::to_string(atoms));
}

void compose_into(int remaining, int parts, std::vector<int>& current,
                  std::vector<std::vector<int>>& out) {
  if (parts == 1) {
    current.push_back(remaining);
    out.push_back(current);
    current.pop_back();
    return;
  }
  for (int k = 0; k <= remaining; ++k) {
    current.push_back(k);
    compose_into(remaining - k, parts - 1, current, out);
    current.pop_back();
  }
}

// 2 * sum_k m_k (k - 1), the doubled atomic excitation above the all-ground state.
long doubled_atomic_energy(const std::vector<int>& occ) {
  long s = 0;
  for (std::size_t k = 0; k < occ.size(); ++k) s += 2L * static_cast<long>(k) * occ[k];
  return s;
}

}  // namespace

HalfInteger HalfInteger::parse(const std::string& text) {
  const auto slash = text.find('/');
  if (slash != std::string::npos) {
    const std::string num = text.substr(0, slash);
    const std::string den = text.substr(slash + 1);
    std::size_t used = 0;
    long p = 0;
    long q = 0;
    try {
      p = std::stol(num, &used);
      if (used != num.size()) throw std::invalid_argument(num);
      q = std::stol(den, &used);
      if (used != den.size()) throw std::invalid_argument(den);
    } catch (const std::logic_error&) {
      throw Error(kModule, "cannot parse half-integer '" + text + "'");
    }
    if (q == 1) return from_int(p);
    if (q == 2) return from_twice(p);
    throw Error(kModule, "'" + text + "' is not a half-integer");
  }
  std::size_t used = 0;
  double v = 0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    throw Error(kModule, "cannot parse half-integer '" + text + "'");
  }
  if (used != text.size()) throw Error(kModule, "cannot parse half-integer '" + text + "'");
  return from_double(v);
}

HalfInteger HalfInteger::from_double(double v) {
  const double twice = 2.0 * v;
  const double rounded = std::round(twice);
  if (!std::isfinite(v) || std::abs(twice - rounded) > 2e-9)
    throw Error(kModule, "value " + std::to_string(v) + " is not a half-integer");
  return from_twice(static_cast<long>(rounded));
}

std::string HalfInteger::str() const {
  if (is_integer()) return std::to_string(twice_ / 2);
  return std::to_string(twice_) + "/2";
}

int BasisState::atoms() const { return std::accumulate(occupations.begin(), occupations.end(), 0); }

std::string BasisState::str() const {
  std::ostringstream os;
  os << "(n=" << photons << ";";
  for (std::size_t k = 0; k < occupations.size(); ++k) os << (k ? "," : "") << occupations[k];
  os << ")";
  return os.str();
}

HalfInteger excitation_number(const BasisState& state, int levels) {
  if (state.levels() != levels)
    throw Error(kModule, "occupation vector has length " + std::to_string(state.levels()) +
                             " but the model has " + std::to_string(levels) + " levels");
  // 2 Nhat = 2n + sum_j mu_j (m_{j+1} - m_j)
  long twice = 2L * state.photons;
  for (int j = 1; j < levels; ++j) {
    const long mu = static_cast<long>(j) * (levels - j);
    twice += mu * (state.occupations[j] - state.occupations[j - 1]);
  }
  return HalfInteger::from_twice(twice);
}

StateSpace::StateSpace(int levels, int atoms, std::vector<BasisState> states, std::string tag)
    : levels_(levels), atoms_(atoms), states_(std::move(states)), tag_(std::move(tag)) {
  for (std::size_t i = 0; i < states_.size(); ++i) {
    const auto& s = states_[i];
    if (s.levels() != levels_ || s.atoms() != atoms_ || s.photons < 0 ||
        std::any_of(s.occupations.begin(), s.occupations.end(), [](int m) { return m < 0; }))
      throw Error(kModule, "invalid state " + s.str() + " for N=" + std::to_string(levels_) +
                               ", A=" + std::to_string(atoms_));
    if (!index_.emplace(s, i).second) throw Error(kModule, "duplicate state " + s.str());
  }
}

std::optional<std::size_t> StateSpace::find(const BasisState& s) const {
  const auto it = index_.find(s);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::size_t StateSpace::index_of(const BasisState& s) const {
  if (auto i = find(s)) return *i;
  throw Error(kModule, "state " + s.str() + " is not in space " + tag_);
}

FullBasis::FullBasis(int levels, int atoms, HalfInteger max_excitation,
                     std::vector<SectorBasis> sectors)
    : levels_(levels), atoms_(atoms), max_excitation_(max_excitation), sectors_(std::move(sectors)) {
  std::vector<BasisState> all;
  for (const auto& sec : sectors_) {
    offsets_.push_back(all.size());
    all.insert(all.end(), sec.space.begin(), sec.space.end());
  }
  flat_ = StateSpace(levels, atoms, std::move(all),
                     "full[N=" + std::to_string(levels) + ",A=" + std::to_string(atoms) +
                         ",E<=" + max_excitation.str() + "]");
}

std::optional<std::size_t> FullBasis::sector_index(HalfInteger excitation) const {
  for (std::size_t k = 0; k < sectors_.size(); ++k)
    if (sectors_[k].excitation == excitation) return k;
  return std::nullopt;
}

std::vector<std::vector<int>> compositions(int total, int parts) {
  std::vector<std::vector<int>> out;
  if (total < 0 || parts < 1) return out;
  std::vector<int> current;
  compose_into(total, parts, current, out);
  std::sort(out.begin(), out.end());
  return out;
}

HalfInteger minimal_excitation(int levels, int atoms) {
  check_shape(levels, atoms);
  return HalfInteger::from_twice(-static_cast<long>(atoms) * (levels - 1));
}

SectorBasis build_sector(int levels, int atoms, HalfInteger excitation) {
  check_shape(levels, atoms);
  // 2 Nhat = 2n + 2 sum_k m_k (k-1) - A (N-1)
  const long offset = static_cast<long>(atoms) * (levels - 1);
  std::vector<BasisState> states;
  for (auto& occ : compositions(atoms, levels)) {
    const long twice_n = excitation.twice() + offset - doubled_atomic_energy(occ);
    if (twice_n < 0 || twice_n % 2 != 0) continue;
    states.push_back(BasisState{static_cast<int>(twice_n / 2), std::move(occ)});
  }
  std::sort(states.begin(), states.end());
  std::string tag = "sector[N=" + std::to_string(levels) + ",A=" + std::to_string(atoms) +
                    ",E=" + excitation.str() + "]";
  return SectorBasis{excitation, StateSpace(levels, atoms, std::move(states), std::move(tag))};
}

FullBasis build_full_basis(int levels, int atoms, HalfInteger max_excitation) {
  const HalfInteger lowest = minimal_excitation(levels, atoms);
  if (max_excitation < lowest)
    throw Error(kModule, "cutoff " + max_excitation.str() + " lies below the minimal excitation " +
                             lowest.str() + "; the basis would be empty");
  std::vector<SectorBasis> sectors;
  for (HalfInteger e = lowest; e <= max_excitation; e = e + HalfInteger::from_int(1)) {
    auto sec = build_sector(levels, atoms, e);
    if (!sec.space.empty()) sectors.push_back(std::move(sec));
  }
  return FullBasis(levels, atoms, max_excitation, std::move(sectors));
}

StateSpace product_space(int levels, int atoms, int min_photons, int max_photons) {
  check_shape(levels, atoms);
  if (min_photons < 0 || max_photons < min_photons)
    throw Error(kModule, "invalid photon range [" + std::to_string(min_photons) + ", " +
                             std::to_string(max_photons) + "]");
  std::vector<BasisState> states;
  const auto occs = compositions(atoms, levels);
  for (int n = min_photons; n <= max_photons; ++n)
    for (const auto& occ : occs) states.push_back(BasisState{n, occ});
  return StateSpace(levels, atoms, std::move(states),
                    "product[N=" + std::to_string(levels) + ",A=" + std::to_string(atoms) +
                        ",n=" + std::to_string(min_photons) + ".." + std::to_string(max_photons) +
                        "]");
}

}  // namespace effham
