// fiemctl: batch driver for exchange-map families and their perturbations.
//
//   fiemctl <command> --config <file> [--out <dir>] [--mode rational|float] [--threads N]
//
// Exit codes: 0 success, 1 config error, 2 boundary escape, 3 verification failure.

#include "fiem/fiem.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <random>

namespace fs = std::filesystem;
using namespace fiem;

namespace {

constexpr int kOk = 0, kConfigError = 1, kEscape = 2, kVerifyFailed = 3;

struct Run {
  Config cfg;
  fs::path out;
  Mode mode = Mode::floating;
  unsigned threads = 1;
};

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
  if (!os) throw std::runtime_error("cannot write " + p.string());
}

PerturbedMap make_map(const Run& r) {
  Family fam = family_from_config(r.cfg);
  if (!fam.is_symmetric())
    throw ConfigError(r.cfg.where("family", "perm") + "the perturbed map needs a reversing permutation");
  const double eps = r.cfg.real("map", "eps");
  if (eps < 0) throw ConfigError(r.cfg.where("map", "eps") + "must be nonnegative");
  return PerturbedMap(std::move(fam), forcing_from_config(r.cfg), eps);
}

int cmd_iterate(const Run& r) {
  const PerturbedMap T = make_map(r);
  const Family& fam = T.family();
  auto seeds = explicit_seeds(r.cfg, fam);
  const long extra = r.cfg.integer("iterate", "random_seeds");
  const long steps = r.cfg.integer("iterate", "steps");
  if (extra < 0) throw ConfigError(r.cfg.where("iterate", "random_seeds") + "must be >= 0");
  if (steps < 0) throw ConfigError(r.cfg.where("iterate", "steps") + "must be >= 0");
  std::mt19937_64 rng(static_cast<std::uint64_t>(r.cfg.integer("iterate", "rng_seed")));
  std::uniform_real_distribution<double> ux(0, 1), uy(fam.y_min(), fam.y_max());
  for (long k = 0; k < extra; ++k) {
    const double x = ux(rng);
    seeds.emplace_back(x, uy(rng));
  }
  if (seeds.empty()) throw ConfigError(r.cfg.where("iterate", "seeds") + "no seeds given");

  auto escaped = parallel_map<int>(seeds.size(), r.threads, [&](std::size_t k) {
    const Trajectory t = T.iterate(T.make_point(seeds[k].first, seeds[k].second), steps);
    char name[32];
    std::snprintf(name, sizeof name, "trajectory_%03zu.csv", k);
    std::ostringstream os;
    write_trajectory_csv(os, t);
    write_file(r.out / name, os.str());
    return t.escaped ? 1 : 0;
  });
  int n_escaped = 0;
  for (std::size_t k = 0; k < escaped.size(); ++k)
    if (escaped[k]) {
      ++n_escaped;
      std::cerr << "seed " << k << " left P\n";
    }
  std::cout << seeds.size() << " trajectories written to " << r.out.string() << '\n';
  return n_escaped ? kEscape : kOk;
}

int cmd_symmetry_lines(const Run& r) {
  const PerturbedMap T = make_map(r);
  const LineOptions lo = line_options_from_config(r.cfg);
  const int i_max = lo.i_max;
  const long pairs_max = r.cfg.integer("symmetry", "pairs_max");
  auto lines = parallel_map<SymmetryLineSet>(2 * i_max + 1, r.threads,
                                             [&](std::size_t k) { return gamma(T, static_cast<int>(k) - i_max, lo); });
  std::ostringstream csv;
  write_symmetry_lines_header(csv);
  json summary = json::array();
  for (const auto& set : lines) {
    write_symmetry_lines_csv(csv, set);
    json branches = json::array();
    for (const auto& br : set.branches) {
      std::size_t n = 0;
      for (const auto& s : br.segments) n += s.samples.size();
      branches.push_back(json{{"branch", br.branch},
                              {"segments", br.segments.size()},
                              {"samples", n},
                              {"on_discontinuity", br.on_discontinuity},
                              {"truncated", br.truncated},
                              {"unresolved", br.unresolved}});
    }
    summary.push_back(json{{"line_index", set.index}, {"branches", branches}});
  }
  write_file(r.out / "symmetry_lines.csv", csv.str());
  write_file(r.out / "symmetry_lines.json", summary.dump(2) + "\n");

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t a = 0; a < lines.size(); ++a)
    for (std::size_t b = a + 1; b < lines.size(); ++b)
      if (static_cast<long>(b - a) <= pairs_max) pairs.emplace_back(a, b);
  auto found = parallel_map<std::vector<IntersectionCandidate>>(
      pairs.size(), r.threads, [&](std::size_t k) { return intersections(T, lines[pairs[k].first], lines[pairs[k].second], lo); });
  json cands = json::array();
  std::size_t refined = 0, total = 0;
  for (const auto& v : found)
    for (const auto& c : v) {
      cands.push_back(to_json(c));
      ++total;
      refined += c.refined;
    }
  write_file(r.out / "candidates.json", cands.dump(2) + "\n");
  std::cout << lines.size() << " lines, " << total << " candidates (" << refined << " refined)\n";
  return kOk;
}

void add_with_l_image(const PerturbedMap& T, std::vector<OrbitRecord>& v, const OrbitRecord& o,
                      const OrbitOptions& oo) {
  detail::add_unique(T, v, o);
  if (auto img = l_image(T, o, oo)) {
    detail::normalize_start(*img);
    detail::add_unique(T, v, std::move(*img));
  }
}

int cmd_find_periodic(const Run& r) {
  const PerturbedMap T = make_map(r);
  const OrbitOptions oo = orbit_options_from_config(r.cfg);
  const int q_max = static_cast<int>(r.cfg.integer("orbits", "q_max"));
  if (q_max < 1) throw ConfigError(r.cfg.where("orbits", "q_max") + "must be >= 1");
  if (q_max > oo.lines.i_max) throw ConfigError(r.cfg.where("orbits", "q_max") + "must not exceed [symmetry] i_max");

  SymmetricSearch sym = find_symmetric(T, q_max, oo);
  std::vector<OrbitRecord> nonsym;
  json predictions = json::array();
  if (r.cfg.boolean("orbits", "predict")) {
    for (const auto& term : T.forcing().terms())
      for (const auto& o : sym.orbits) {
        json p{{"harmonic", term.harmonic}, {"q", o.q}, {"x0", o.points[0].x}, {"y0", o.points[0].y}};
        try {
          const Prediction pr = predict_nonsymmetric(T, o, term.harmonic, oo);
          const auto confirmed = confirm_prediction(T, pr, o.q, oo);
          for (const auto& n : confirmed) add_with_l_image(T, nonsym, n, oo);
          p["applicable"] = pr.applicable;
          p["width"] = pr.width;
          p["predicted"] = pr.count;
          p["confirmed"] = confirmed.size();
        } catch (const std::invalid_argument& e) {
          p["applicable"] = false;
          p["reason"] = e.what();
        }
        predictions.push_back(p);
      }
  }
  const long nx = r.cfg.integer("orbits", "scan_nx"), ny = r.cfg.integer("orbits", "scan_ny");
  if (nx > 0 && ny > 0) {
    auto scans = parallel_map<std::vector<OrbitRecord>>(q_max, r.threads, [&](std::size_t k) {
      return scan_periodic(T, static_cast<int>(k) + 1, static_cast<int>(nx), static_cast<int>(ny), oo);
    });
    for (const auto& v : scans)
      for (const auto& o : v) {
        if (o.symmetric) detail::add_unique(T, sym.orbits, o);
        else add_with_l_image(T, nonsym, o, oo);
      }
  }
  detail::canonical_sort(sym.orbits);
  detail::canonical_sort(nonsym);

  json doc{{"eps", T.eps()}, {"q_max", q_max}};
  doc["symmetric"] = json::array();
  for (const auto& o : sym.orbits) doc["symmetric"].push_back(to_json(o));
  doc["nonsymmetric"] = json::array();
  for (const auto& o : nonsym) doc["nonsymmetric"].push_back(to_json(o));
  doc["predictions"] = predictions;
  doc["diagnostics"] = json::array();
  for (const auto& d : sym.diagnostics)
    doc["diagnostics"].push_back(json{{"x", d.x}, {"y", d.y}, {"q", d.q}, {"reason", d.reason}});
  write_file(r.out / "orbits.json", doc.dump(2) + "\n");
  std::cout << sym.orbits.size() << " symmetric, " << nonsym.size() << " non-symmetric orbits\n";
  return kOk;
}

int cmd_sweep(const Run& r) {
  const PerturbedMap T = make_map(r);
  const OrbitOptions oo = orbit_options_from_config(r.cfg);
  const auto grid = eps_grid_from_config(r.cfg);
  const int q = static_cast<int>(r.cfg.integer("sweep", "q"));
  if (q < 1) throw ConfigError(r.cfg.where("sweep", "q") + "must be >= 1");
  const PerturbedMap T0 = T.with_eps(grid.front());
  std::vector<OrbitRecord> cands;
  for (const auto& o : find_symmetric(T0, q, oo).orbits)
    if (o.q == q) cands.push_back(o);
  if (cands.empty()) throw ConfigError(r.cfg.where("sweep", "q") + "no symmetric orbit of this period at the first eps");
  const OrbitRecord* start = nullptr;
  if (r.cfg.has("sweep", "x0") || r.cfg.has("sweep", "y0")) {
    const PhasePoint target{wrap01(r.cfg.real("sweep", "x0")), r.cfg.real("sweep", "y0"), 0};
    double best = 1e300;
    for (const auto& o : cands)
      for (const auto& p : o.points)
        if (double d = detail::cylinder_dist(T0, p, target); d < best) {
          best = d;
          start = &o;
        }
  } else {
    for (const auto& o : cands)
      if (!start && o.cls == StabilityClass::elliptic) start = &o;
    if (!start) start = &cands.front();
  }
  const SweepResult res = sweep_eps(T, *start, grid, oo);
  std::ostringstream csv, log;
  write_sweep_csv(csv, res);
  write_events_log(log, res);
  write_file(r.out / "sweep.csv", csv.str());
  write_file(r.out / "events.log", log.str());
  json fin{{"last_good_eps", res.last_good_eps}, {"truncated", res.truncated}, {"l_paired", res.l_paired}};
  fin["symmetric"] = json::array();
  for (const auto& o : res.final_symmetric) fin["symmetric"].push_back(to_json(o));
  fin["nonsymmetric"] = json::array();
  for (const auto& o : res.final_nonsymmetric) fin["nonsymmetric"].push_back(to_json(o));
  write_file(r.out / "sweep_final.json", fin.dump(2) + "\n");
  int pitchforks = 0;
  for (const auto& e : res.events) pitchforks += e.kind == "pitchfork";
  std::cout << res.track.size() << " eps points, " << pitchforks << " pitchfork event(s)\n";
  return kOk;
}

template <class S>
void oracle_report(const Iem<S>& f, int q_max, int m_max, json& doc, std::ostringstream& txt) {
  doc["iem"] = to_json(f);
  txt << to_text(f) << '\n';
  const auto w = is_symmetric(f);
  doc["symmetric"] = w.symmetric;
  doc["periodic_intervals"] = json::array();
  for (const auto& p : periodic_intervals(f, q_max)) {
    doc["periodic_intervals"].push_back(to_json(p));
    txt << to_text(p) << '\n';
  }
  doc["saddle_connections"] = json::array();
  for (const auto& c : saddle_connections(f, m_max)) {
    doc["saddle_connections"].push_back(to_json(c));
    txt << "SADDLE_CONNECTION alpha=" << c.alpha << " beta=" << c.beta << " m=" << c.m << " side=" << to_string(c.side)
        << '\n';
  }
  if (auto sd = swap_decompose(f)) {
    doc["swap_decomposition"] = json{{"symmetric", to_json(sd->symmetric)}, {"swap", sd->swap.final_order()}};
  } else {
    doc["swap_decomposition"] = nullptr;
  }
  if (w.symmetric) {
    const auto rep = verify_no_nonsymmetric(f, q_max);
    doc["no_nonsymmetric"] = json{{"pass", rep.pass}, {"checked", rep.checked}};
  }
}

int cmd_oracle(const Run& r) {
  const Family fam = family_from_config(r.cfg);
  const std::string ys = r.cfg.str("oracle", "y");
  Rational y;
  try {
    y = parse_rational(ys);
  } catch (const std::exception&) {
    throw ConfigError(r.cfg.where("oracle", "y") + "'" + ys + "' is not a decimal or p/q value");
  }
  if (!fam.contains(static_cast<double>(y))) throw ConfigError(r.cfg.where("oracle", "y") + "outside P");
  const int q_max = static_cast<int>(r.cfg.integer("oracle", "q_max"));
  const int m_max = static_cast<int>(r.cfg.integer("oracle", "m_max"));
  if (q_max < 1) throw ConfigError(r.cfg.where("oracle", "q_max") + "must be >= 1");
  if (m_max < 1) throw ConfigError(r.cfg.where("oracle", "m_max") + "must be >= 1");
  json doc{{"mode", to_string(r.mode)}, {"y", rational_to_string(y)}};
  std::ostringstream txt;
  if (r.mode == Mode::rational && fam.kind() != Family::Kind::callback) {
    oracle_report(fam.iem_at_exact(y), q_max, m_max, doc, txt);
  } else {
    if (r.mode == Mode::rational) warn("callback families have no exact form; oracle runs in float");
    oracle_report(fam.iem_at(static_cast<double>(y)), q_max, m_max, doc, txt);
  }
  write_file(r.out / "oracle.json", doc.dump(2) + "\n");
  write_file(r.out / "oracle.txt", txt.str());
  std::cout << doc["periodic_intervals"].size() << " periodic intervals, " << doc["saddle_connections"].size()
            << " saddle connections\n";
  return kOk;
}

int cmd_verify(const Run& r) {
  const PerturbedMap T = make_map(r);
  VerifyOptions vo;
  vo.samples = static_cast<int>(r.cfg.integer("verify", "samples"));
  vo.rng_seed = static_cast<unsigned>(r.cfg.integer("verify", "rng_seed"));
  vo.q_max = static_cast<int>(r.cfg.integer("oracle", "q_max"));
  vo.orbit = orbit_options_from_config(r.cfg);
  vo.lines = std::min(3, vo.orbit.lines.i_max);
  try {
    vo.y = parse_rational(r.cfg.str("oracle", "y"));
  } catch (const std::exception&) {
    throw ConfigError(r.cfg.where("oracle", "y") + "not a decimal or p/q value");
  }
  const auto checks = r.mode == Mode::rational ? verify_all<Rational>(T, vo) : verify_all<double>(T, vo);
  json doc{{"mode", to_string(r.mode)}};
  doc["checks"] = json::array();
  bool all = true;
  for (const auto& c : checks) {
    all = all && c.passed;
    doc["checks"].push_back(json{{"suite", c.suite}, {"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    std::cout << (c.passed ? "PASS " : "FAIL ") << c.suite << ": " << c.name
              << (c.detail.empty() ? "" : " (" + c.detail + ")") << '\n';
  }
  doc["passed"] = all;
  write_file(r.out / "verify.json", doc.dump(2) + "\n");
  return all ? kOk : kVerifyFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exchange-map families, perturbations and periodic orbits"};
  app.require_subcommand(1);
  std::string config_path, out_dir, mode_str;
  unsigned threads = 0;

  struct Command {
    const char* name;
    const char* help;
    int (*run)(const Run&);
  };
  const std::vector<Command> commands = {
      {"iterate", "iterate seeds and write one trajectory CSV per seed", cmd_iterate},
      {"symmetry-lines", "sample symmetry lines and their intersections", cmd_symmetry_lines},
      {"find-periodic", "find, classify and predict periodic orbits", cmd_find_periodic},
      {"sweep", "continue a symmetric orbit in eps and report bifurcations", cmd_sweep},
      {"oracle", "periodic intervals and saddle connections of one exchange map", cmd_oracle},
      {"verify", "run the invariant suites on the configured family", cmd_verify},
  };
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    sub->add_option("--config", config_path, "experiment config")->required();
    sub->add_option("--out", out_dir, "output directory (overrides [run] out)");
    sub->add_option("--mode", mode_str, "arithmetic mode (overrides [run] mode)")
        ->check(CLI::IsMember({"rational", "float"}));
    sub->add_option("--threads", threads, "worker threads (overrides [run] threads)")->check(CLI::PositiveNumber);
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }

  std::mutex warn_mutex;
  warning_sink() = [&](std::string_view msg) {
    std::lock_guard<std::mutex> lock(warn_mutex);
    std::cerr << "warning: " << msg << '\n';
  };

  try {
    Run run;
    run.cfg = Config::load(config_path);
    if (!out_dir.empty()) run.cfg.set("run", "out", out_dir);
    if (!mode_str.empty()) run.cfg.set("run", "mode", mode_str);
    if (threads > 0) run.cfg.set("run", "threads", std::to_string(threads));
    try {
      run.mode = parse_mode(run.cfg.str("run", "mode"));
    } catch (const std::exception& e) {
      throw ConfigError(run.cfg.where("run", "mode") + e.what());
    }
    const long t = run.cfg.integer("run", "threads");
    if (t < 1) throw ConfigError(run.cfg.where("run", "threads") + "must be >= 1");
    run.threads = static_cast<unsigned>(t);
    run.out = run.cfg.str("run", "out");
    fs::create_directories(run.out);
    write_file(run.out / "resolved_config.ini", run.cfg.resolved());
    for (const auto& c : commands)
      if (app.got_subcommand(c.name)) return c.run(run);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const BoundaryEscape& e) {
    std::cerr << "boundary escape: " << e.what() << '\n';
    return kEscape;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }
  return kOk;
}
