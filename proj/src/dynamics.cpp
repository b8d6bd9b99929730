#include "effham/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "dynamics";

void require_dim(const Vector& v, Eigen::Index n, const char* what) {
  if (v.size() != n)
    throw Error(kModule, std::string(what) + ": state has dimension " + std::to_string(v.size()) +
                             ", expected " + std::to_string(n));
}

void require_normalized(const Vector& v, const char* what) {
  if (std::abs(v.norm() - 1.0) > 1e-10)
    throw Error(kModule, std::string(what) + ": initial state is not normalized (norm " +
                             std::to_string(v.norm()) + ")");
}

Vector projected(const Vector& v, const std::vector<bool>& mask) {
  Vector out = v;
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) out(static_cast<Eigen::Index>(i)) = 0;
  return out;
}

double periodogram(const std::vector<double>& t, const std::vector<double>& s, double omega) {
  cplx acc = 0;
  for (std::size_t k = 0; k < t.size(); ++k) acc += s[k] * std::exp(cplx(0, omega * t[k]));
  return std::norm(acc);
}

}  // namespace

TimeGrid TimeGrid::uniform(double t_end, int points) {
  if (points < 2 || !(t_end > 0)) throw Error(kModule, "uniform grid needs t_end > 0 and at least 2 points");
  TimeGrid g;
  g.times.resize(static_cast<std::size_t>(points));
  for (int k = 0; k < points; ++k) g.times[static_cast<std::size_t>(k)] = t_end * k / (points - 1);
  return g;
}

void TimeGrid::validate() const {
  for (std::size_t k = 0; k < times.size(); ++k) {
    if (!(times[k] >= 0) || !std::isfinite(times[k])) throw Error(kModule, "time grid has a negative or non-finite entry");
    if (k > 0 && !(times[k] > times[k - 1])) throw Error(kModule, "time grid is not strictly ascending");
  }
}

Propagator::Propagator(const Operator& h) : eig_(hermitian_eig(h)), tag_(h.basis_tag) {}

Vector Propagator::at(const Vector& psi0, double t) const {
  Vector c = eig_.vectors.adjoint() * psi0;
  for (Eigen::Index k = 0; k < c.size(); ++k) c(k) *= std::exp(cplx(0, -eig_.values(k) * t));
  return eig_.vectors * c;
}

std::vector<Vector> evolve(const Operator& h, const Vector& psi0, const TimeGrid& grid) {
  grid.validate();
  require_dim(psi0, h.dim(), "evolve");
  require_normalized(psi0, "evolve");
  const Propagator p(h);
  std::vector<Vector> out;
  out.reserve(grid.times.size());
  for (double t : grid.times) out.push_back(p.at(psi0, t));
  return out;
}

Vector basis_vector(const StateSpace& space, const BasisState& state) {
  Vector v = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  v(static_cast<Eigen::Index>(space.index_of(state))) = 1.0;
  return v;
}

FidelityReport fidelity_series(const Operator& h_exact, const Operator& h_eff, const Vector& psi0,
                               const TimeGrid& grid, const FidelityOptions& options) {
  require_same_basis(h_exact, h_eff, "fidelity_series");
  grid.validate();
  require_dim(psi0, h_exact.dim(), "fidelity_series");
  require_normalized(psi0, "fidelity_series");
  if (options.subspace && options.subspace->size() != static_cast<std::size_t>(h_exact.dim()))
    throw Error(kModule, "fidelity_series: subspace mask has the wrong size");
  const bool rotate = options.rotation && !options.bare;
  if (rotate) require_same_basis(h_exact, *options.rotation, "fidelity_series rotation");

  Vector phi0 = rotate ? Vector(options.rotation->matrix * psi0) : psi0;
  if (options.subspace) phi0 = projected(phi0, *options.subspace);
  if (phi0.norm() < 1e-12) throw Error(kModule, "fidelity_series: initial state has no weight in the effective subspace");
  phi0 /= phi0.norm();

  const Propagator exact(h_exact), eff(h_eff);
  FidelityReport rep;
  rep.times = grid.times;
  for (double t : grid.times) {
    Vector ref = exact.at(psi0, t);
    if (rotate) ref = options.rotation->matrix * ref;
    if (options.subspace && !options.bare) {
      ref = projected(ref, *options.subspace);
      const double w = ref.squaredNorm();
      rep.min_subspace_weight = std::min(rep.min_subspace_weight, w);
      if (w > 0) ref /= std::sqrt(w);
    }
    const double f = std::norm(ref.dot(eff.at(phi0, t)));
    rep.fidelity.push_back(f);
    rep.min_fidelity = std::min(rep.min_fidelity, f);
  }
  return rep;
}

std::vector<ObservableSample> observables(const std::vector<Vector>& states, const StateSpace& space) {
  const int n_levels = space.levels();
  std::vector<ObservableSample> out;
  out.reserve(states.size());
  for (const auto& psi : states) {
    require_dim(psi, static_cast<Eigen::Index>(space.size()), "observables");
    ObservableSample s;
    s.populations.assign(static_cast<std::size_t>(n_levels), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
      const double p = std::norm(psi(static_cast<Eigen::Index>(i)));
      const auto& b = space[i];
      s.photons += p * b.photons;
      for (int j = 0; j < n_levels; ++j) s.populations[static_cast<std::size_t>(j)] += p * b.occupations[static_cast<std::size_t>(j)];
      s.excitation += p * excitation_number(b, n_levels).value();
    }
    s.inversion = 0.5 * (s.populations.back() - s.populations.front());
    out.push_back(std::move(s));
  }
  return out;
}

EigenvalueComparison eigenvalue_compare(const Operator& h_exact, const Operator& h_eff,
                                        const std::optional<std::vector<bool>>& subspace,
                                        const std::optional<Operator>& rotation) {
  require_same_basis(h_exact, h_eff, "eigenvalue_compare");
  const Eigen::Index n = h_exact.dim();
  std::vector<Eigen::Index> keep;
  for (Eigen::Index i = 0; i < n; ++i)
    if (!subspace || (*subspace)[static_cast<std::size_t>(i)]) keep.push_back(i);
  if (subspace && subspace->size() != static_cast<std::size_t>(n))
    throw Error(kModule, "eigenvalue_compare: subspace mask has the wrong size");

  const auto m = static_cast<Eigen::Index>(keep.size());
  Matrix sub(m, m);
  for (Eigen::Index r = 0; r < m; ++r)
    for (Eigen::Index c = 0; c < m; ++c) sub(r, c) = h_eff.matrix(keep[static_cast<std::size_t>(r)], keep[static_cast<std::size_t>(c)]);
  const auto eff = hermitian_eig(Operator(sub, h_eff.basis_tag + "/subspace"));
  Matrix eff_vecs = Matrix::Zero(n, m);
  for (Eigen::Index r = 0; r < m; ++r) eff_vecs.row(keep[static_cast<std::size_t>(r)]) = eff.vectors.row(r);

  auto ex = hermitian_eig(h_exact);
  Matrix ex_vecs = ex.vectors;
  if (rotation) {
    require_same_basis(h_exact, *rotation, "eigenvalue_compare rotation");
    ex_vecs = rotation->matrix * ex_vecs;
  }
  const Eigen::MatrixXd ov = (ex_vecs.adjoint() * eff_vecs).cwiseAbs2();

  // Greedy assignment, largest overlap first.
  struct Cand { double o; Eigen::Index e, f; };
  std::vector<Cand> cands;
  for (Eigen::Index e = 0; e < n; ++e)
    for (Eigen::Index f = 0; f < m; ++f) cands.push_back({ov(e, f), e, f});
  std::stable_sort(cands.begin(), cands.end(), [](const Cand& a, const Cand& b) { return a.o > b.o; });
  std::vector<Eigen::Index> match(static_cast<std::size_t>(m), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (const auto& c : cands) {
    if (match[static_cast<std::size_t>(c.f)] >= 0 || used[static_cast<std::size_t>(c.e)]) continue;
    match[static_cast<std::size_t>(c.f)] = c.e;
    used[static_cast<std::size_t>(c.e)] = true;
  }

  EigenvalueComparison out;
  double sq = 0;
  std::ostringstream diag;
  for (Eigen::Index f = 0; f < m; ++f) {
    const Eigen::Index e = match[static_cast<std::size_t>(f)];
    const double o = ov(e, f);
    const double err = std::abs(ex.values(e) - eff.values(f));
    out.effective.push_back(eff.values(f));
    out.exact.push_back(ex.values(e));
    out.overlap.push_back(o);
    out.abs_error.push_back(err);
    out.max_error = std::max(out.max_error, err);
    sq += err * err;
    if (o < 0.5) {
      out.pairing_ok = false;
      diag << "effective level " << f << " (E = " << eff.values(f) << ") has overlap " << o
           << " < 0.5 with every unpaired exact level; ";
    }
  }
  out.rms_error = m ? std::sqrt(sq / static_cast<double>(m)) : 0.0;
  out.diagnostic = diag.str();
  return out;
}

std::pair<double, double> loglog_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw Error(kModule, "loglog_fit needs matching series of at least 2 points");
  const auto n = static_cast<double>(x.size());
  std::vector<double> lx, ly;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > 0) || !(y[k] > 0)) throw Error(kModule, "loglog_fit needs positive values");
    lx.push_back(std::log(x[k]));
    ly.push_back(std::log(y[k]));
  }
  const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxy = 0, sxx = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    sxy += (lx[k] - mx) * (ly[k] - my);
    sxx += (lx[k] - mx) * (lx[k] - mx);
  }
  if (sxx == 0) throw Error(kModule, "loglog_fit: x values are all equal");
  const double slope = sxy / sxx;
  double rss = 0;
  for (std::size_t k = 0; k < lx.size(); ++k) {
    const double r = ly[k] - (my + slope * (lx[k] - mx));
    rss += r * r;
  }
  return {slope, std::sqrt(rss / n)};
}

ScalingStudy scaling_study(const std::vector<double>& epsilons, const std::function<double(double)>& error_metric) {
  if (epsilons.size() < 3) throw Error(kModule, "scaling_study needs at least 3 epsilon values");
  for (std::size_t k = 0; k < epsilons.size(); ++k) {
    if (!(epsilons[k] > 0)) throw Error(kModule, "scaling_study: epsilon values must be positive");
    if (k > 0 && !(epsilons[k] < epsilons[k - 1])) throw Error(kModule, "scaling_study: epsilon values must descend");
  }
  ScalingStudy s;
  s.epsilons = epsilons;
  for (double e : epsilons) {
    const double err = error_metric(e);
    if (!(err > 0) || !std::isfinite(err)) {
      std::ostringstream os;
      os << "scaling_study: error " << err << " at eps = " << e << " is not positive";
      throw Error(kModule, os.str());
    }
    s.errors.push_back(err);
  }
  std::tie(s.fitted_exponent, s.residual_rms) = loglog_fit(s.epsilons, s.errors);
  s.flagged = std::abs(s.fitted_exponent) < 0.5;
  return s;
}

double dominant_frequency(const std::vector<double>& times, const std::vector<double>& signal, double omega_max) {
  if (times.size() != signal.size() || times.size() < 4) throw Error(kModule, "dominant_frequency needs matching series");
  if (!(omega_max > 0)) throw Error(kModule, "dominant_frequency needs omega_max > 0");
  const double mean = std::accumulate(signal.begin(), signal.end(), 0.0) / static_cast<double>(signal.size());
  std::vector<double> s(signal.size());
  std::transform(signal.begin(), signal.end(), s.begin(), [&](double v) { return v - mean; });
  const double span = times.back() - times.front();
  const double step = 2 * std::numbers::pi / span / 8;
  double best_w = step, best_p = -1;
  for (double w = step; w <= omega_max; w += step) {
    const double p = periodogram(times, s, w);
    if (p > best_p) {
      best_p = p;
      best_w = w;
    }
  }
  double lo = std::max(best_w - step, 1e-300), hi = std::min(best_w + step, omega_max);
  const double r = (std::sqrt(5.0) - 1) / 2;
  double a = hi - r * (hi - lo), b = lo + r * (hi - lo);
  double pa = periodogram(times, s, a), pb = periodogram(times, s, b);
  for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
    if (pa > pb) {
      hi = b;
      b = a;
      pb = pa;
      a = hi - r * (hi - lo);
      pa = periodogram(times, s, a);
    } else {
      lo = a;
      a = b;
      pa = pb;
      b = lo + r * (hi - lo);
      pb = periodogram(times, s, b);
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace effham
