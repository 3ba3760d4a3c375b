#pragma once

/// @file config.hpp
/// @brief Sectioned key-value experiment configs.
///
/// Every key has a schema entry with a default; unknown sections and keys are
/// rejected. Lists are whitespace or comma separated. Scalars accept decimals
/// or "p/q". The resolved config (defaults filled in) can be echoed back.

#include "fiem/orbits.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace fiem {

/// Malformed config; message carries file:line and [section] key where known.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SchemaKey {
  std::string section, key, default_value, doc;
};

inline const std::vector<SchemaKey>& config_schema() {
  static const std::vector<SchemaKey> s = {
      {"run", "mode", "float", "float | rational (oracle and verify use exact arithmetic in rational mode)"},
      {"run", "threads", "1", "worker threads; output is identical for any value"},
      {"run", "out", "out", "output directory"},
      {"family", "perm", "", "final order of the intervals, 1-based (required)"},
      {"family", "kind", "linear", "linear | constant | callback"},
      {"family", "lambda0", "", "lengths at y = 0 (linear)"},
      {"family", "lambda1", "", "lengths at y = 1 (linear)"},
      {"family", "lambda", "", "lengths (constant)"},
      {"family", "callback", "", "named callback family (callback): smooth_blend"},
      {"family", "y_min", "0", "lower end of P"},
      {"family", "y_max", "1", "upper end of P"},
      {"family", "periodic_y", "false", "identify y_min with y_max (standard map)"},
      {"forcing", "terms", "1:1", "harmonic:amplitude list, f(x) = sum a sin(2 pi l x)"},
      {"map", "eps", "0", "perturbation size"},
      {"iterate", "seeds", "", "explicit seeds 'x y; x y; ...'"},
      {"iterate", "random_seeds", "0", "additional uniformly random seeds in [0,1) x P"},
      {"iterate", "rng_seed", "1", "seed of the random seed generator"},
      {"iterate", "steps", "1000", "iterations per seed"},
      {"symmetry", "i_max", "60", "export lines -i_max..i_max"},
      {"symmetry", "base_samples", "256", "initial samples per base branch"},
      {"symmetry", "y_res", "1e-6", "smallest y gap bisected when splitting branches"},
      {"symmetry", "max_gap", "0.01", "longest chord kept in a polyline"},
      {"symmetry", "tol_line", "1e-9", "symmetry-line residual tolerance"},
      {"symmetry", "tol_transversal", "1e-10", "transversality threshold"},
      {"symmetry", "dedupe", "1e-9", "intersection dedupe distance"},
      {"symmetry", "include_discontinuity_branch", "false", "keep x = 0 branch of Gamma_0 when it lies on a discontinuity"},
      {"symmetry", "pairs_max", "0", "emit intersections of line pairs with 0 < |j-k| <= pairs_max"},
      {"orbits", "q_max", "2", "largest period searched"},
      {"orbits", "scan_nx", "0", "grid Newton scan columns (0 disables)"},
      {"orbits", "scan_ny", "0", "grid Newton scan rows"},
      {"orbits", "predict", "true", "predict and confirm non-symmetric orbits per forcing harmonic"},
      {"orbits", "tol_orbit", "1e-10", "closure tolerance"},
      {"orbits", "tol_res", "1e-12", "parabolic band around residue 0 and 1"},
      {"orbits", "tol_bal", "1e-9", "balance tolerance"},
      {"orbits", "eps_floor", "1e-8", "floor for eps in the closure sum test"},
      {"orbits", "newton_max_iter", "50", "Newton iteration cap"},
      {"orbits", "newton_tol", "1e-12", "Newton step tolerance"},
      {"orbits", "det_tol", "1e-14", "singular Jacobian threshold"},
      {"orbits", "delta_seed", "1e-3", "base off-symmetry seed offset"},
      {"orbits", "seed_ladder", "7", "number of doublings of delta_seed tried"},
      {"orbits", "scan_samples", "2000", "samples per primary line when bracketing crossings"},
      {"orbits", "event_window", "5e-3", "eps window for combining pitchfork signals"},
      {"sweep", "eps_grid", "", "'start:stop:step' or explicit list"},
      {"sweep", "q", "2", "period of the tracked symmetric orbit"},
      {"sweep", "x0", "", "start orbit: symmetric orbit nearest (x0, y0) at the first eps"},
      {"sweep", "y0", "", "see x0; empty picks the first elliptic orbit"},
      {"oracle", "y", "1/2", "family parameter of the examined exchange map"},
      {"oracle", "q_max", "6", "largest period of periodic intervals"},
      {"oracle", "m_max", "6", "longest saddle connection"},
      {"verify", "samples", "1000", "random points per property"},
      {"verify", "rng_seed", "7", "seed of the property samplers"},
  };
  return s;
}

/// Decimal via strtod, "p/q" via exact division.
inline double parse_number(const std::string& s) {
  if (s.find('/') != std::string::npos) return static_cast<double>(parse_rational(s));
  std::size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("trailing characters in '" + s + "'");
  return v;
}

/// Parsed config: section -> key -> raw string, plus line numbers for diagnostics.
class Config {
 public:
  static Config parse(std::istream& is, const std::string& name = "<config>") {
    std::stringstream buf;
    buf << is.rdbuf();
    const std::string text = buf.str();
    Config c;
    c.name_ = name;
    boost::property_tree::ptree pt;
    try {
      std::istringstream in(text);
      boost::property_tree::ini_parser::read_ini(in, pt);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(name + ":" + std::to_string(e.line()) + ": " + e.message());
    }
    c.index_lines(text);
    for (const auto& [sec, node] : pt) {
      if (node.empty() && !node.data().empty())
        throw ConfigError(c.where(sec, "") + "key '" + sec + "' outside any section");
      for (const auto& [key, val] : node) {
        if (!c.known(sec, key)) {
          bool sec_known = std::any_of(config_schema().begin(), config_schema().end(),
                                       [&](const SchemaKey& k) { return k.section == sec; });
          throw ConfigError(c.where(sec, key) + (sec_known ? "unknown key '" + key + "' in [" + sec + "]"
                                                           : "unknown section [" + sec + "]"));
        }
        c.values_[sec][key] = collapse(val.data());
      }
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw ConfigError(path + ": cannot open config");
    return parse(is, path);
  }

  static Config from_string(const std::string& text) {
    std::istringstream is(text);
    return parse(is);
  }

  void set(const std::string& sec, const std::string& key, const std::string& v) {
    if (!known(sec, key)) throw ConfigError("unknown key [" + sec + "] " + key);
    values_[sec][key] = v;
  }

  bool has(const std::string& sec, const std::string& key) const {
    auto s = values_.find(sec);
    return s != values_.end() && s->second.count(key) && !s->second.at(key).empty();
  }

  std::string str(const std::string& sec, const std::string& key) const {
    if (has(sec, key)) return values_.at(sec).at(key);
    for (const auto& k : config_schema())
      if (k.section == sec && k.key == key) return k.default_value;
    throw ConfigError("unknown key [" + sec + "] " + key);
  }

  double real(const std::string& sec, const std::string& key) const {
    const std::string s = str(sec, key);
    try {
      return parse_number(s);
    } catch (const std::exception&) {
    }
    throw ConfigError(where(sec, key) + "expected a number, got '" + s + "'");
  }

  long integer(const std::string& sec, const std::string& key) const {
    const std::string s = str(sec, key);
    try {
      std::size_t pos = 0;
      long v = std::stol(s, &pos);
      if (pos == s.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError(where(sec, key) + "expected an integer, got '" + s + "'");
  }

  bool boolean(const std::string& sec, const std::string& key) const {
    const std::string s = str(sec, key);
    if (s == "true" || s == "1" || s == "yes") return true;
    if (s == "false" || s == "0" || s == "no") return false;
    throw ConfigError(where(sec, key) + "expected true or false, got '" + s + "'");
  }

  std::vector<std::string> list(const std::string& sec, const std::string& key) const {
    std::string s = str(sec, key);
    std::replace(s.begin(), s.end(), ',', ' ');
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string t; is >> t;) out.push_back(t);
    return out;
  }

  std::vector<Rational> rationals(const std::string& sec, const std::string& key) const {
    std::vector<Rational> out;
    for (const auto& t : list(sec, key)) {
      try {
        out.push_back(parse_rational(t));
      } catch (const std::exception&) {
        throw ConfigError(where(sec, key) + "'" + t + "' is not a decimal or p/q value");
      }
    }
    return out;
  }

  /// "file:line: [section] key: " prefix.
  std::string where(const std::string& sec, const std::string& key) const {
    std::string s = name_;
    auto it = lines_.find(sec + "\n" + key);
    if (it != lines_.end()) s += ":" + std::to_string(it->second);
    s += ": ";
    if (!key.empty()) s += "[" + sec + "] " + key + ": ";
    return s;
  }

  /// Canonical text: every schema key in schema order, defaults filled in.
  /// [run] out and threads are left out; they do not change any result.
  std::string resolved() const {
    std::ostringstream os;
    std::string sec;
    for (const auto& k : config_schema()) {
      if (k.section == "run" && (k.key == "out" || k.key == "threads")) continue;
      if (k.section != sec) {
        os << (sec.empty() ? "" : "\n") << '[' << k.section << "]\n";
        sec = k.section;
      }
      os << k.key << " = " << str(k.section, k.key) << '\n';
    }
    return os.str();
  }

 private:
  static std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
  }

  /// Trimmed, with runs of blanks reduced to one space.
  static std::string collapse(const std::string& s) {
    std::istringstream is(s);
    std::string out;
    for (std::string t; is >> t;) out += (out.empty() ? "" : " ") + t;
    return out;
  }

  bool known(const std::string& sec, const std::string& key) const {
    return std::any_of(config_schema().begin(), config_schema().end(),
                       [&](const SchemaKey& k) { return k.section == sec && k.key == key; });
  }

  void index_lines(const std::string& text) {
    std::istringstream is(text);
    std::string line, sec;
    for (int n = 1; std::getline(is, line); ++n) {
      line = trim(line);
      if (line.empty() || line[0] == ';' || line[0] == '#') continue;
      if (line[0] == '[') {
        sec = trim(line.substr(1, line.find(']') - 1));
        lines_.emplace(sec + "\n", n);
        continue;
      }
      const auto eq = line.find('=');
      if (eq != std::string::npos) lines_.emplace(sec + "\n" + trim(line.substr(0, eq)), n);
    }
  }

  std::string name_;
  std::map<std::string, std::map<std::string, std::string>> values_;
  std::map<std::string, int> lines_;
};

/// Registered nonlinear families: lambda(y) = lambda0 + s(y) (lambda1 - lambda0).
inline Family callback_family(const std::string& id, Permutation perm, const std::vector<double>& l0,
                              const std::vector<double>& l1, double y_min, double y_max, bool periodic_y) {
  if (id != "smooth_blend") throw std::invalid_argument("unknown callback family '" + id + "'");
  const double pi = std::numbers::pi;
  auto lam = [l0, l1, pi](double y) {
    const double s = 0.5 - 0.5 * std::cos(pi * y);
    std::vector<double> v(l0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = l0[i] + s * (l1[i] - l0[i]);
    return v;
  };
  auto dlam = [l0, l1, pi](double y) {
    const double ds = 0.5 * pi * std::sin(pi * y);
    std::vector<double> v(l0.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = ds * (l1[i] - l0[i]);
    return v;
  };
  return Family::callback(std::move(perm), lam, dlam, y_min, y_max, periodic_y);
}

inline Family family_from_config(const Config& c) {
  std::vector<int> order;
  for (const auto& t : c.list("family", "perm")) {
    try {
      order.push_back(std::stoi(t));
    } catch (const std::exception&) {
      throw ConfigError(c.where("family", "perm") + "'" + t + "' is not an index");
    }
  }
  if (order.empty()) throw ConfigError(c.where("family", "perm") + "required");
  try {
    Permutation perm(order);
    const std::string kind = c.str("family", "kind");
    const double y0 = c.real("family", "y_min"), y1 = c.real("family", "y_max");
    const bool per = c.boolean("family", "periodic_y");
    if (kind == "linear") {
      return Family::linear(perm, c.rationals("family", "lambda0"), c.rationals("family", "lambda1"), y0, y1, per);
    }
    if (kind == "constant") {
      if (per) throw ConfigError(c.where("family", "periodic_y") + "not available for constant families");
      return Family::constant(perm, c.rationals("family", "lambda"), y0, y1);
    }
    if (kind == "callback") {
      auto to_d = [](const std::vector<Rational>& v) {
        std::vector<double> o;
        for (const auto& r : v) o.push_back(static_cast<double>(r));
        return o;
      };
      auto l0 = to_d(c.rationals("family", "lambda0")), l1 = to_d(c.rationals("family", "lambda1"));
      for (auto* v : {&l0, &l1}) {
        double s = 0;
        for (double x : *v) s += x;
        if (s <= 0) throw ConfigError(c.where("family", "lambda0") + "lengths must be positive");
        for (double& x : *v) x /= s;
      }
      return callback_family(c.str("family", "callback"), perm, l0, l1, y0, y1, per);
    }
    throw ConfigError(c.where("family", "kind") + "expected linear, constant or callback, got '" + kind + "'");
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(c.where("family", "") + e.what());
  }
}

inline Forcing forcing_from_config(const Config& c) {
  std::vector<Forcing::Term> terms;
  for (const auto& t : c.list("forcing", "terms")) {
    std::string s = t;
    if (s.rfind("cos", 0) == 0)
      throw ConfigError(c.where("forcing", "terms") + "cosine terms are not allowed (f must be odd)");
    if (s.rfind("sin", 0) == 0) s = s.substr(3);
    const auto colon = s.find(':');
    if (colon == std::string::npos)
      throw ConfigError(c.where("forcing", "terms") + "'" + t + "' is not harmonic:amplitude");
    int h = 0;
    double a = 0;
    try {
      h = std::stoi(s.substr(0, colon));
      a = parse_number(s.substr(colon + 1));
    } catch (const std::exception&) {
      throw ConfigError(c.where("forcing", "terms") + "'" + t + "' is not harmonic:amplitude");
    }
    if (h == 0) throw ConfigError(c.where("forcing", "terms") + "constant terms are not allowed");
    if (h < 0) throw ConfigError(c.where("forcing", "terms") + "harmonics must be positive");
    terms.push_back({h, a});
  }
  return Forcing(terms);
}

inline LineOptions line_options_from_config(const Config& c) {
  LineOptions o;
  o.base_samples = static_cast<int>(c.integer("symmetry", "base_samples"));
  o.y_res = c.real("symmetry", "y_res");
  o.max_gap = c.real("symmetry", "max_gap");
  o.i_max = static_cast<int>(c.integer("symmetry", "i_max"));
  o.tol_line = c.real("symmetry", "tol_line");
  o.tol_orbit = c.real("orbits", "tol_orbit");
  o.tol_transversal = c.real("symmetry", "tol_transversal");
  o.dedupe = c.real("symmetry", "dedupe");
  o.include_discontinuity_branch = c.boolean("symmetry", "include_discontinuity_branch");
  if (o.i_max < 0) throw ConfigError(c.where("symmetry", "i_max") + "must be >= 0");
  if (o.base_samples < 2) throw ConfigError(c.where("symmetry", "base_samples") + "must be >= 2");
  return o;
}

inline OrbitOptions orbit_options_from_config(const Config& c) {
  OrbitOptions o;
  o.tol_orbit = c.real("orbits", "tol_orbit");
  o.tol_res = c.real("orbits", "tol_res");
  o.tol_bal = c.real("orbits", "tol_bal");
  o.eps_floor = c.real("orbits", "eps_floor");
  o.newton_max_iter = static_cast<int>(c.integer("orbits", "newton_max_iter"));
  o.newton_tol = c.real("orbits", "newton_tol");
  o.det_tol = c.real("orbits", "det_tol");
  o.delta_seed = c.real("orbits", "delta_seed");
  o.seed_ladder = static_cast<int>(c.integer("orbits", "seed_ladder"));
  o.scan_samples = static_cast<int>(c.integer("orbits", "scan_samples"));
  o.event_window = c.real("orbits", "event_window");
  o.lines = line_options_from_config(c);
  return o;
}

/// 'start:stop:step' (inclusive, rounded to the step count) or an explicit list.
inline std::vector<double> eps_grid_from_config(const Config& c) {
  const std::string s = c.str("sweep", "eps_grid");
  if (s.empty()) throw ConfigError(c.where("sweep", "eps_grid") + "required for sweep");
  std::vector<double> g;
  const auto parts = [&] {
    std::vector<std::string> p;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ':')) p.push_back(cur);
    return p;
  }();
  try {
    if (parts.size() == 3) {
      const double a = std::stod(parts[0]), b = std::stod(parts[1]), h = std::stod(parts[2]);
      if (h <= 0 || b < a) throw ConfigError(c.where("sweep", "eps_grid") + "need start <= stop and step > 0");
      const long n = std::lround((b - a) / h);
      for (long k = 0; k <= n; ++k) g.push_back(a + h * k);
    } else if (parts.size() == 1) {
      for (const auto& t : c.list("sweep", "eps_grid")) g.push_back(std::stod(t));
    } else {
      throw ConfigError(c.where("sweep", "eps_grid") + "expected start:stop:step or a list");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError(c.where("sweep", "eps_grid") + "malformed value '" + s + "'");
  }
  for (double e : g)
    if (e < 0) throw ConfigError(c.where("sweep", "eps_grid") + "eps must be nonnegative");
  return g;
}

/// Seeds as "x y; x y"; each must lie in P.
inline std::vector<std::pair<double, double>> explicit_seeds(const Config& c, const Family& fam) {
  std::vector<std::pair<double, double>> out;
  std::string s = c.str("iterate", "seeds");
  std::istringstream is(s);
  for (std::string item; std::getline(is, item, ';');) {
    std::replace(item.begin(), item.end(), ',', ' ');
    std::istringstream it(item);
    std::vector<double> v;
    for (std::string t; it >> t;) {
      try {
        v.push_back(parse_number(t));
      } catch (const std::exception&) {
        throw ConfigError(c.where("iterate", "seeds") + "'" + t + "' is not a number");
      }
    }
    if (v.empty()) continue;
    if (v.size() != 2) throw ConfigError(c.where("iterate", "seeds") + "each seed needs x and y");
    if (!fam.contains(v[1]))
      throw ConfigError(c.where("iterate", "seeds") + "seed y = " + std::to_string(v[1]) + " lies outside P");
    out.emplace_back(v[0], v[1]);
  }
  return out;
}

}  // namespace fiem
