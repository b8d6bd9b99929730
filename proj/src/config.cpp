#include "effham/config.hpp"

#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "effham/error.hpp"

namespace effham {

namespace {

constexpr const char* kModule = "cli-io";

const std::map<std::string, std::set<std::string>> kKeys{
    {"model",
     {"kind", "levels", "atoms", "g", "detunings", "frequencies", "omega_f", "max_excitation", "phi", "j",
      "roots", "coefficients", "scale", "m0", "dim", "delta"}},
    {"run",
     {"order", "resonance_tol", "max_steps", "seed", "samples", "t_end", "points", "epsilons",
      "initial_photons", "initial_level", "initial_index", "stark", "units"}},
};

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

struct Entry {
  std::string value;
  int line;
};

using Section = std::map<std::string, Entry>;

[[noreturn]] void fail_at(int line, const std::string& msg) {
  throw Error(kModule, "line " + std::to_string(line) + ": " + msg);
}

double to_double(const std::string& field, const Entry& e) {
  const std::string s = trim(e.value);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(e.line, field + ": '" + s + "' is not a number");
  if (!std::isfinite(v)) fail_at(e.line, field + ": value must be finite");
  return v;
}

long to_long(const std::string& field, const Entry& e) {
  const std::string s = trim(e.value);
  char* end = nullptr;
  errno = 0;
  const long v = std::strtol(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE)
    fail_at(e.line, field + ": '" + s + "' is not an integer");
  return v;
}

int to_int(const std::string& field, const Entry& e) {
  const long v = to_long(field, e);
  if (v < -1000000000L || v > 1000000000L) fail_at(e.line, field + ": integer out of range");
  return static_cast<int>(v);
}

std::vector<double> to_list(const std::string& field, const Entry& e) {
  std::vector<double> out;
  std::stringstream ss(e.value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(to_double(field, {item, e.line}));
  if (out.empty()) fail_at(e.line, field + ": empty list");
  return out;
}

const Entry* find(const Section& s, const std::string& key) {
  auto it = s.find(key);
  return it == s.end() ? nullptr : &it->second;
}

const Entry& require(const Section& s, const std::string& key) {
  if (const Entry* e = find(s, key)) return *e;
  throw Error(kModule, key + ": required");
}

void forbid(const Section& s, const std::string& key, const std::string& why) {
  if (const Entry* e = find(s, key)) fail_at(e->line, key + ": not used " + why);
}

CascadeModel parse_cascade(const Section& m) {
  for (const char* k : {"phi", "j", "roots", "coefficients", "scale", "m0", "dim", "delta"})
    forbid(m, k, "by kind = cascade");
  const int levels = to_int("levels", require(m, "levels"));
  const int atoms = find(m, "atoms") ? to_int("atoms", *find(m, "atoms")) : 1;
  if (levels < 2) throw Error(kModule, "levels: need at least 2");
  if (atoms < 1) throw Error(kModule, "atoms: need at least 1");
  const std::vector<double> g = to_list("g", require(m, "g"));
  if (g.size() != static_cast<std::size_t>(levels - 1))
    throw Error(kModule, "g: expected " + std::to_string(levels - 1) + " couplings, got " + std::to_string(g.size()));

  HalfInteger max_e = minimal_excitation(levels, atoms) + HalfInteger::from_int(4);
  if (const Entry* e = find(m, "max_excitation")) {
    try {
      max_e = HalfInteger::parse(trim(e->value));
    } catch (const Error& err) {
      fail_at(e->line, std::string("max_excitation: ") + err.what());
    }
  }

  const Entry* det = find(m, "detunings");
  const Entry* freq = find(m, "frequencies");
  if (det && freq) fail_at(freq->line, "frequencies: give either detunings or frequencies, not both");
  if (!det && !freq) throw Error(kModule, "detunings: required (or frequencies with omega_f)");
  if (det) {
    forbid(m, "omega_f", "with detunings");
    const auto d = to_list("detunings", *det);
    if (d.size() != static_cast<std::size_t>(levels))
      throw Error(kModule, "detunings: expected " + std::to_string(levels) + " values, got " + std::to_string(d.size()));
    if (d.front() != 0.0)
      throw Error(kModule, "detunings: Delta_1 must be 0 (detunings are measured from level 1), got " +
                               trim(det->value.substr(0, det->value.find(','))));
    return CascadeModel::from_detunings(levels, atoms, d, g, max_e);
  }
  const double omega_f = to_double("omega_f", require(m, "omega_f"));
  const auto w = to_list("frequencies", *freq);
  if (w.size() != static_cast<std::size_t>(levels))
    throw Error(kModule, "frequencies: expected " + std::to_string(levels) + " values, got " + std::to_string(w.size()));
  return CascadeModel::from_frequencies(levels, atoms, omega_f, w, g, max_e);
}

Su2ModelConfig parse_su2(const Section& m) {
  for (const char* k : {"levels", "atoms", "detunings", "frequencies", "omega_f", "max_excitation"})
    forbid(m, k, "by kind = deformed_su2");
  Su2ModelConfig c;
  if (const Entry* e = find(m, "phi")) c.phi = trim(e->value);
  if (c.phi != "spin" && c.phi != "boson" && c.phi != "roots" && c.phi != "polynomial")
    fail_at(find(m, "phi")->line, "phi: expected spin, boson, roots or polynomial");
  if (const Entry* e = find(m, "scale")) c.scale = to_double("scale", *e);
  if (c.phi == "spin") {
    c.j = to_double("j", require(m, "j"));
    if (c.j < 0 || std::abs(2 * c.j - std::round(2 * c.j)) > 1e-12) throw Error(kModule, "j: must be a nonnegative half-integer");
    c.m0 = -c.j;
    c.dim = static_cast<int>(std::lround(2 * c.j)) + 1;
  } else {
    forbid(m, "j", "unless phi = spin");
    if (c.phi == "roots") c.roots = to_list("roots", require(m, "roots"));
    if (c.phi == "polynomial") c.coefficients = to_list("coefficients", require(m, "coefficients"));
    c.m0 = to_double("m0", require(m, "m0"));
    c.dim = to_int("dim", require(m, "dim"));
  }
  if (const Entry* e = find(m, "m0")) c.m0 = to_double("m0", *e);
  if (const Entry* e = find(m, "dim")) c.dim = to_int("dim", *e);
  c.delta = to_double("delta", require(m, "delta"));
  c.g = to_double("g", require(m, "g"));
  c.hamiltonian();  // validates the module and the detuning
  return c;
}

}  // namespace

StructuralPolynomial Su2ModelConfig::structural_polynomial() const {
  if (phi == "spin") return StructuralPolynomial::spin(j);
  if (phi == "boson") return StructuralPolynomial::from_roots({0.0}, scale);
  if (phi == "roots") return StructuralPolynomial::from_roots(roots, scale);
  std::vector<double> c = coefficients;
  for (double& x : c) x *= scale;
  return StructuralPolynomial(c);
}

Su2Hamiltonian Su2ModelConfig::hamiltonian() const {
  Su2Hamiltonian h{delta, g, build_module(structural_polynomial(), m0, dim)};
  validate(h);
  return h;
}

Su2Hamiltonian Su2ModelConfig::hamiltonian_at(double eps) const {
  Su2Hamiltonian h = hamiltonian();
  h.delta = g / eps;
  validate(h);
  return h;
}

RunConfig parse_config(const std::string& text) {
  std::map<std::string, Section> sections;
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw, current;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') fail_at(line, "malformed section header '" + s + "'");
      current = trim(s.substr(1, s.size() - 2));
      if (!kKeys.count(current)) fail_at(line, "unknown section [" + current + "]");
      if (sections.count(current)) fail_at(line, "section [" + current + "] appears twice");
      sections[current];
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) fail_at(line, "expected 'key = value', got '" + s + "'");
    if (current.empty()) fail_at(line, "key outside of a section");
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!kKeys.at(current).count(key)) fail_at(line, "unknown key '" + key + "' in [" + current + "]");
    if (value.empty()) fail_at(line, key + ": empty value");
    auto& sec = sections[current];
    if (sec.count(key)) fail_at(line, key + ": duplicate key (first set on line " + std::to_string(sec[key].line) + ")");
    sec[key] = {value, line};
    cfg.echo.emplace_back(current + "." + key, value);
  }
  if (!sections.count("model")) throw Error(kModule, "[model]: required");
  const Section& m = sections["model"];
  const std::string kind = trim(require(m, "kind").value);
  if (kind == "cascade") {
    cfg.kind = ModelKind::cascade;
    cfg.cascade = parse_cascade(m);
  } else if (kind == "deformed_su2") {
    cfg.kind = ModelKind::deformed_su2;
    cfg.su2 = parse_su2(m);
  } else {
    fail_at(m.at("kind").line, "kind: expected cascade or deformed_su2, got '" + kind + "'");
  }

  const Section& r = sections["run"];
  RunParams& p = cfg.run;
  if (const Entry* e = find(r, "order")) p.order = to_int("order", *e);
  if (const Entry* e = find(r, "resonance_tol")) p.resonance_tol = to_double("resonance_tol", *e);
  if (const Entry* e = find(r, "max_steps")) p.max_steps = to_int("max_steps", *e);
  if (const Entry* e = find(r, "seed")) {
    const long v = to_long("seed", *e);
    if (v < 0) fail_at(e->line, "seed: must be nonnegative");
    p.seed = static_cast<std::uint64_t>(v);
  }
  if (const Entry* e = find(r, "samples")) p.samples = to_int("samples", *e);
  if (const Entry* e = find(r, "t_end")) p.t_end = to_double("t_end", *e);
  if (const Entry* e = find(r, "points")) p.points = to_int("points", *e);
  if (const Entry* e = find(r, "epsilons")) p.epsilons = to_list("epsilons", *e);
  if (const Entry* e = find(r, "initial_photons")) p.initial_photons = to_int("initial_photons", *e);
  if (const Entry* e = find(r, "initial_level")) p.initial_level = to_int("initial_level", *e);
  if (const Entry* e = find(r, "initial_index")) p.initial_index = to_int("initial_index", *e);
  if (const Entry* e = find(r, "units")) p.units = e->value;
  if (const Entry* e = find(r, "stark")) {
    if (e->value == "consistent") p.stark = StarkConvention::consistent;
    else if (e->value == "quoted") p.stark = StarkConvention::quoted;
    else fail_at(e->line, "stark: expected consistent or quoted");
  }
  if (p.order < 1) throw Error(kModule, "order: must be >= 1");
  if (p.max_steps < 1) throw Error(kModule, "max_steps: must be >= 1");
  if (p.samples < 0) throw Error(kModule, "samples: must be >= 0");
  if (p.points < 2) throw Error(kModule, "points: need at least 2");
  if (p.t_end < 0) throw Error(kModule, "t_end: must be >= 0");
  if (p.resonance_tol && *p.resonance_tol < 0) throw Error(kModule, "resonance_tol: must be >= 0");
  if (p.initial_photons < 0) throw Error(kModule, "initial_photons: must be >= 0");
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(kModule, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse_config(ss.str());
}

}  // namespace effham
