#pragma once

/// @file io.hpp
/// @brief Text/JSON records and CSV exports.

#include "fiem/orbits.hpp"

#include <json.hpp>

#include <cstdio>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace fiem {

using json = nlohmann::ordered_json;

/// Shortest round-trip decimal.
inline std::string fmt(double v) {
  char buf[32];
  for (int prec = 15; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline std::string scalar_text(const Rational& v) { return rational_to_string(v); }
inline std::string scalar_text(double v) { return fmt(v); }

inline json scalar_json(const Rational& v) { return rational_to_string(v); }
inline json scalar_json(double v) { return v; }

template <class S>
S scalar_from_json(const json& j);

template <>
inline Rational scalar_from_json<Rational>(const json& j) {
  if (j.is_string()) return parse_rational(j.get<std::string>());
  if (j.is_number_integer()) return Rational(j.get<long long>());
  throw std::invalid_argument("rational fields must be \"p/q\" strings");
}

template <>
inline double scalar_from_json<double>(const json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) return static_cast<double>(parse_rational(j.get<std::string>()));
  throw std::invalid_argument("expected a number");
}

template <class S>
json scalar_list(const std::vector<S>& v) {
  json a = json::array();
  for (const auto& x : v) a.push_back(scalar_json(x));
  return a;
}

template <class S>
json to_json(const Iem<S>& f) {
  return json{{"perm", f.perm().final_order()},
              {"lengths", scalar_list(f.lengths())},
              {"omega", scalar_list(f.omega())},
              {"left_endpoints", scalar_list(f.left_endpoints())}};
}

template <class S>
json to_json(const Cem<S>& f) {
  return json{{"perm", f.perm().final_order()},
              {"lengths", scalar_list(f.lengths())},
              {"theta0", scalar_json(f.theta0())},
              {"theta1", scalar_json(f.theta1())}};
}

template <class S>
json to_json(const PeriodicInterval<S>& p) {
  json j{{"left", scalar_json(p.left)},
         {"right", scalar_json(p.right)},
         {"period", p.period},
         {"itinerary", p.itinerary}};
  j["symmetric_partner_offset"] = p.symmetric_partner_offset ? json(*p.symmetric_partner_offset) : json(nullptr);
  return j;
}

template <class S>
Iem<S> iem_from_json(const json& j) {
  std::vector<S> l;
  for (const auto& v : j.at("lengths")) l.push_back(scalar_from_json<S>(v));
  return Iem<S>(Permutation(j.at("perm").get<std::vector<int>>()), std::move(l));
}

template <class S>
Cem<S> cem_from_json(const json& j) {
  std::vector<S> l;
  for (const auto& v : j.at("lengths")) l.push_back(scalar_from_json<S>(v));
  return Cem<S>(Permutation(j.at("perm").get<std::vector<int>>()), std::move(l), scalar_from_json<S>(j.at("theta0")),
                scalar_from_json<S>(j.at("theta1")));
}

template <class S>
PeriodicInterval<S> periodic_interval_from_json(const json& j) {
  PeriodicInterval<S> p;
  p.left = scalar_from_json<S>(j.at("left"));
  p.right = scalar_from_json<S>(j.at("right"));
  p.period = j.at("period").get<int>();
  p.itinerary = j.at("itinerary").get<std::vector<int>>();
  if (!j.at("symmetric_partner_offset").is_null()) p.symmetric_partner_offset = j["symmetric_partner_offset"].get<int>();
  return p;
}

namespace detail {

template <class T, class F>
std::string joined(const std::vector<T>& v, F&& f) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + f(v[i]);
  return s;
}

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream is(s);
  while (std::getline(is, cur, sep))
    if (!cur.empty()) out.push_back(cur);
  return out;
}

inline std::map<std::string, std::string> record_fields(const std::string& line, const std::string& tag) {
  std::istringstream is(line);
  std::string head;
  is >> head;
  if (head != tag) throw std::invalid_argument("expected a " + tag + " record");
  std::map<std::string, std::string> m;
  std::string tok;
  while (is >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw std::invalid_argument("malformed field '" + tok + "'");
    m[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  return m;
}

template <class S>
S scalar_from_text(const std::string& s) {
  if constexpr (std::is_same_v<S, Rational>) return parse_rational(s);
  else return std::stod(s);
}

}  // namespace detail

/// One-line text records: `IEM perm=4,3,2,1 lengths=... omega=... left_endpoints=...`
template <class S>
std::string to_text(const Iem<S>& f) {
  auto sc = [](const S& v) { return scalar_text(v); };
  auto in = [](int v) { return std::to_string(v); };
  return "IEM perm=" + detail::joined(f.perm().final_order(), in) + " lengths=" + detail::joined(f.lengths(), sc) +
         " omega=" + detail::joined(f.omega(), sc) + " left_endpoints=" + detail::joined(f.left_endpoints(), sc);
}

template <class S>
std::string to_text(const Cem<S>& f) {
  auto sc = [](const S& v) { return scalar_text(v); };
  auto in = [](int v) { return std::to_string(v); };
  return "CEM perm=" + detail::joined(f.perm().final_order(), in) + " lengths=" + detail::joined(f.lengths(), sc) +
         " theta0=" + scalar_text(f.theta0()) + " theta1=" + scalar_text(f.theta1());
}

template <class S>
std::string to_text(const PeriodicInterval<S>& p) {
  auto in = [](int v) { return std::to_string(v); };
  return "PERIODIC_INTERVAL left=" + scalar_text(p.left) + " right=" + scalar_text(p.right) +
         " period=" + std::to_string(p.period) + " itinerary=" + detail::joined(p.itinerary, in) +
         " symmetric_partner_offset=" + (p.symmetric_partner_offset ? std::to_string(*p.symmetric_partner_offset) : "none");
}

template <class S>
Iem<S> iem_from_text(const std::string& line) {
  auto m = detail::record_fields(line, "IEM");
  std::vector<int> perm;
  for (auto& t : detail::split(m.at("perm"), ',')) perm.push_back(std::stoi(t));
  std::vector<S> l;
  for (auto& t : detail::split(m.at("lengths"), ',')) l.push_back(detail::scalar_from_text<S>(t));
  return Iem<S>(Permutation(perm), l);
}

template <class S>
Cem<S> cem_from_text(const std::string& line) {
  auto m = detail::record_fields(line, "CEM");
  std::vector<int> perm;
  for (auto& t : detail::split(m.at("perm"), ',')) perm.push_back(std::stoi(t));
  std::vector<S> l;
  for (auto& t : detail::split(m.at("lengths"), ',')) l.push_back(detail::scalar_from_text<S>(t));
  return Cem<S>(Permutation(perm), l, detail::scalar_from_text<S>(m.at("theta0")),
                detail::scalar_from_text<S>(m.at("theta1")));
}

template <class S>
PeriodicInterval<S> periodic_interval_from_text(const std::string& line) {
  auto m = detail::record_fields(line, "PERIODIC_INTERVAL");
  PeriodicInterval<S> p;
  p.left = detail::scalar_from_text<S>(m.at("left"));
  p.right = detail::scalar_from_text<S>(m.at("right"));
  p.period = std::stoi(m.at("period"));
  for (auto& t : detail::split(m.at("itinerary"), ',')) p.itinerary.push_back(std::stoi(t));
  if (m.at("symmetric_partner_offset") != "none") p.symmetric_partner_offset = std::stoi(m.at("symmetric_partner_offset"));
  return p;
}

inline json to_json(const SaddleConnection& s) {
  return json{{"alpha", s.alpha}, {"beta", s.beta}, {"m", s.m}, {"side", to_string(s.side)},
              {"label", "(" + Permutation::label(s.alpha) + "," + Permutation::label(s.beta) + "," + std::to_string(s.m) + ")"}};
}

inline json to_json(const IntersectionCandidate& c) {
  return json{{"x", c.x}, {"y", c.y}, {"j", c.j}, {"k", c.k}, {"divisor_period", c.divisor_period},
              {"refined", c.refined}, {"transversal", c.transversal}};
}

inline json to_json(const OrbitRecord& o) {
  json pts = json::array();
  for (const auto& p : o.points) pts.push_back(json{{"x", p.x}, {"y", p.y}, {"alpha", p.alpha}});
  json bal = json::array();
  for (const auto& b : o.balance)
    bal.push_back(json{{"harmonic", b.harmonic}, {"S", b.S}, {"C", b.C}, {"balanced", b.balanced}});
  return json{{"q", o.q},
              {"points", pts},
              {"eps", o.eps},
              {"symmetric", o.symmetric},
              {"symmetry_lines", o.symmetry_lines},
              {"itinerary", o.itinerary},
              {"M", o.M},
              {"residue", o.residue},
              {"class", to_string(o.cls)},
              {"residue_reliable", o.residue_reliable},
              {"balance", bal},
              {"closure", o.closure}};
}

inline void write_trajectory_csv(std::ostream& os, const Trajectory& t) {
  os << "step,x,y,alpha\n";
  for (std::size_t k = 0; k < t.points.size(); ++k)
    os << k << ',' << fmt(t.points[k].x) << ',' << fmt(t.points[k].y) << ',' << t.points[k].alpha << '\n';
}

inline void write_symmetry_lines_header(std::ostream& os) { os << "line_index,branch,segment,y_param,x,y\n"; }

inline void write_symmetry_lines_csv(std::ostream& os, const SymmetryLineSet& set) {
  for (const auto& br : set.branches)
    for (std::size_t s = 0; s < br.segments.size(); ++s)
      for (const auto& z : br.segments[s].samples)
        os << set.index << ',' << br.branch << ',' << s << ',' << fmt(z.y_param) << ',' << fmt(z.x) << ','
           << fmt(z.y) << '\n';
}

inline void write_sweep_csv(std::ostream& os, const SweepResult& r) {
  os << "eps,q,x0,y0,residue,class,event\n";
  for (const auto& row : r.track)
    os << fmt(row.eps) << ',' << row.q << ',' << fmt(row.x0) << ',' << fmt(row.y0) << ',' << fmt(row.residue) << ','
       << to_string(row.cls) << ',' << row.event << '\n';
}

inline void write_events_log(std::ostream& os, const SweepResult& r) {
  for (const auto& e : r.events) os << "eps=" << fmt(e.eps) << ' ' << e.kind << ' ' << e.detail << '\n';
  if (r.truncated) os << "track truncated; last good eps=" << fmt(r.last_good_eps) << '\n';
}

}  // namespace fiem
