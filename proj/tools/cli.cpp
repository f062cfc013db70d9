#include "cli.hpp"

#include <chrono>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "sepcov/error.hpp"
#include "sepcov/io.hpp"
#include "sepcov/kernels.hpp"
#include "sepcov/parallel.hpp"

namespace sepcov::cli {
namespace {

using nlohmann::json;
namespace fs = std::filesystem;

void emit(std::ostream& out, const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    out << text;
  } else {
    io::write_text_file_atomic(path, text);
  }
}

// ---------------------------------------------------------------------------
// test

struct TestArgs {
  std::string input;
  std::string stat = "g-tilde";
  std::string method = "emp-boot";
  std::vector<std::string> proj;
  int B = 1000;
  std::uint64_t seed = 0;
  std::string json_out;
  unsigned threads = 0;
};

int cmd_test(const TestArgs& a, std::ostream& out, std::ostream& err) {
  const Statistic stat = parse_statistic(a.stat);
  const Method method = parse_method(a.method);
  std::vector<ProjectionSet> sets;
  for (const auto& p : a.proj.empty() ? std::vector<std::string>{"1x1"} : a.proj) {
    sets.push_back(ProjectionSet::parse(p));
  }
  if (method == Method::Asymptotic) {
    for (const auto& p : sets) {
      const bool ok = (stat == Statistic::G && p.size() == 1) ||
                      (stat == Statistic::GTilde && p.is_rectangular());
      if (!ok) {
        fail(ErrorKind::InvalidArgument,
             "--method asymptotic supports --stat g with a single pair or --stat g-tilde with "
             "a pxq set");
      }
    }
  }
  if (method != Method::Asymptotic && a.B < 1) fail(ErrorKind::InvalidArgument, "--B must be >= 1");

  const SampleSet s = io::read_matrix_stack_file(a.input);
  json reports = json::array();
  std::vector<double> p_values;
  for (const auto& p : sets) {
    const auto t0 = std::chrono::steady_clock::now();
    const TestReport r = run_test(s, {stat, method, p, a.B}, a.seed, resolve_threads(a.threads));
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    for (const auto& w : r.warnings) err << "warning: " << w << '\n';
    reports.push_back(io::report_to_json(r, ms));
    p_values.push_back(r.p_value);
  }
  json doc;
  if (sets.size() == 1) {
    doc = reports.front();
  } else {
    doc["reports"] = reports;
    doc["bonferroni_p_value"] = bonferroni(p_values);
  }
  emit(out, a.json_out, doc.dump(2) + "\n");
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string scenario = "gaussian";
  double gamma = 0.0;
  long long n = 100;
  long long d1 = 32;
  long long d2 = 7;
  std::uint64_t seed = 0;
  std::string out_path;
};

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  ScenarioConfig cfg;
  cfg.family = parse_family(a.scenario);
  cfg.gamma = a.gamma;
  cfg.n = a.n;
  cfg.d1 = a.d1;
  cfg.d2 = a.d2;
  cfg.seed = a.seed;
  if (cfg.d1 < 1 || cfg.d2 < 1) fail(ErrorKind::InvalidArgument, "--d1 and --d2 must be positive");
  check_fullcov_dims(cfg.d1, cfg.d2);
  const SampleSet s = sample_scenario(cfg);
  std::ostringstream text;
  io::write_matrix_stack(text, s);
  emit(out, a.out_path, text.str());
  return kOk;
}

// ---------------------------------------------------------------------------
// power

struct PowerArgs {
  std::string config;
  std::string out_path;
  bool resume = false;
  bool paper_scale = false;
  unsigned threads = 0;
};

template <class T>
T get_or(const json& j, const char* key, T fallback) {
  return j.contains(key) ? j.at(key).get<T>() : fallback;
}

PowerStudy parse_power_config(const json& j, bool paper_scale) {
  static const std::set<std::string> keys{"scenario", "d1",    "d2",   "gamma", "N",
                                          "replications", "alpha", "seed", "tests"};
  if (!j.is_object()) fail(ErrorKind::Parse, "power config must be a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!keys.count(k)) fail(ErrorKind::Parse, "unknown power config key '" + k + "'");
  }
  PowerStudy st;
  st.family = parse_family(get_or<std::string>(j, "scenario", "gaussian"));
  st.d1 = get_or<Eigen::Index>(j, "d1", 32);
  st.d2 = get_or<Eigen::Index>(j, "d2", 7);
  st.gammas = get_or<std::vector<double>>(j, "gamma", {0.0});
  st.ns = get_or<std::vector<Eigen::Index>>(j, "N", {100});
  st.replications = get_or<int>(j, "replications", paper_scale ? 1000 : 500);
  st.alpha = get_or<double>(j, "alpha", 0.05);
  st.seed = get_or<std::uint64_t>(j, "seed", 0);
  if (st.d1 < 1 || st.d2 < 1) fail(ErrorKind::InvalidArgument, "d1 and d2 must be positive");
  check_fullcov_dims(st.d1, st.d2);
  for (double g : st.gammas) {
    if (!(g >= 0.0 && g <= 1.0)) fail(ErrorKind::InvalidArgument, "gamma must lie in [0,1]");
  }
  for (auto n : st.ns) {
    if (n < 2) fail(ErrorKind::InvalidArgument, "N must be >= 2");
  }
  if (st.gammas.empty() || st.ns.empty()) fail(ErrorKind::InvalidArgument, "empty gamma or N grid");
  if (st.replications < 1) fail(ErrorKind::InvalidArgument, "replications must be >= 1");
  if (!(st.alpha > 0.0 && st.alpha < 1.0)) fail(ErrorKind::InvalidArgument, "alpha must lie in (0,1)");

  const json tests = j.contains("tests") ? j.at("tests")
                                         : json::array({json{{"statistic", "g-tilde"}}});
  for (const auto& t : tests) {
    for (const auto& [k, v] : t.items()) {
      if (k != "statistic" && k != "method" && k != "proj" && k != "B") {
        fail(ErrorKind::Parse, "unknown test key '" + k + "'");
      }
    }
    TestSpec spec;
    spec.statistic = parse_statistic(get_or<std::string>(t, "statistic", "g-tilde"));
    spec.method = parse_method(get_or<std::string>(t, "method", "emp-boot"));
    spec.proj = ProjectionSet::parse(get_or<std::string>(t, "proj", "1x1"));
    spec.B = get_or<int>(t, "B", paper_scale ? 1000 : 200);
    if (spec.method != Method::Asymptotic && spec.B < 1) {
      fail(ErrorKind::InvalidArgument, "B must be >= 1");
    }
    if (spec.method == Method::Asymptotic &&
        !((spec.statistic == Statistic::G && spec.proj.size() == 1) ||
          (spec.statistic == Statistic::GTilde && spec.proj.is_rectangular()))) {
      fail(ErrorKind::InvalidArgument,
           "asymptotic method supports g with a single pair or g-tilde with a pxq set");
    }
    st.tests.push_back(spec);
  }
  return st;
}

// Canonical description of everything that determines the rows.
std::string study_fingerprint(const PowerStudy& st) {
  json j;
  j["scenario"] = std::string(to_string(st.family));
  j["d1"] = st.d1;
  j["d2"] = st.d2;
  j["replications"] = st.replications;
  j["alpha"] = st.alpha;
  j["seed"] = st.seed;
  json tests = json::array();
  for (const auto& t : st.tests) {
    tests.push_back({{"statistic", std::string(to_string(t.statistic))},
                     {"method", std::string(to_string(t.method))},
                     {"proj", t.proj.to_string()},
                     {"B", t.B}});
  }
  j["tests"] = tests;
  return j.dump();
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

using CellKey = std::pair<std::string, Eigen::Index>;  // (gamma as written, N)

CellKey cell_key(double gamma, Eigen::Index n) { return {io::format_double(gamma), n}; }

std::string join_lines(const std::vector<std::string>& lines) {
  std::string s;
  for (const auto& l : lines) s += l + '\n';
  return s;
}

// Completed cells of an earlier run whose rows still match the checksums in
// the sidecar written next to the CSV.
std::map<CellKey, std::vector<std::string>> load_completed(const fs::path& csv,
                                                           const fs::path& sidecar,
                                                           const std::string& fingerprint,
                                                           std::ostream& err) {
  std::map<CellKey, std::vector<std::string>> done;
  if (!fs::exists(csv) || !fs::exists(sidecar)) return done;
  json side;
  try {
    side = json::parse(io::read_text_file(sidecar));
  } catch (const json::exception&) {
    err << "resume: unreadable checkpoint, starting over\n";
    return done;
  }
  if (side.value("study", std::string()) != fingerprint) {
    err << "resume: checkpoint belongs to a different study, starting over\n";
    return done;
  }
  std::map<CellKey, std::vector<std::string>> by_cell;
  std::istringstream in(io::read_text_file(csv));
  std::string line;
  bool header = true;
  while (std::getline(in, line)) {
    if (header) {
      header = false;
      continue;
    }
    const auto f = io::split_csv_line(line);
    if (f.size() != 11) continue;
    try {
      by_cell[{f[1], std::stoll(f[2])}].push_back(line);
    } catch (const std::exception&) {
    }
  }
  for (const auto& c : side.value("cells", json::array())) {
    const CellKey key{c.at("gamma").get<std::string>(), c.at("N").get<Eigen::Index>()};
    auto it = by_cell.find(key);
    if (it == by_cell.end()) continue;
    if (hex64(io::fnv1a64(join_lines(it->second))) == c.at("checksum").get<std::string>()) {
      done[key] = it->second;
    } else {
      err << "resume: checksum mismatch for gamma=" << key.first << " N=" << key.second
          << ", recomputing\n";
    }
  }
  return done;
}

int cmd_power(const PowerArgs& a, std::ostream& out, std::ostream& err) {
  json cfg;
  try {
    cfg = json::parse(io::read_text_file(a.config));
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("power config: ") + e.what());
  }
  PowerStudy st;
  try {
    st = parse_power_config(cfg, a.paper_scale);
  } catch (const json::exception& e) {
    fail(ErrorKind::Parse, std::string("power config: ") + e.what());
  }
  st.threads = resolve_threads(a.threads);
  if (a.resume && a.out_path.empty()) fail(ErrorKind::InvalidArgument, "--resume requires --out");

  const std::string fingerprint = study_fingerprint(st);
  const bool to_file = !a.out_path.empty();
  const fs::path csv = a.out_path;
  fs::path sidecar = csv;
  sidecar += ".ckpt";

  std::map<CellKey, std::vector<std::string>> cells;
  if (a.resume) cells = load_completed(csv, sidecar, fingerprint, err);

  json side{{"study", fingerprint}, {"cells", json::array()}};
  auto checkpoint = [&](const CellKey& key, const std::vector<std::string>& lines) {
    side["cells"].push_back(
        {{"gamma", key.first}, {"N", key.second}, {"checksum", hex64(io::fnv1a64(join_lines(lines)))}});
  };
  auto write_partial = [&] {
    std::string text = std::string(io::kPowerCsvHeader) + "\n";
    for (const auto& [key, lines] : cells) text += join_lines(lines);
    io::write_text_file_atomic(csv, text);
    io::write_text_file_atomic(sidecar, side.dump() + "\n");
  };
  for (const auto& [key, lines] : cells) checkpoint(key, lines);
  if (to_file) write_partial();
  if (!cells.empty()) err << "resume: reusing " << cells.size() << " completed cell(s)\n";

  power_curve(
      st, [&](double g, Eigen::Index n) { return cells.count(cell_key(g, n)) > 0; },
      [&](const std::vector<PowerRow>& rows) {
        std::vector<std::string> lines;
        int failures = 0;
        for (const auto& r : rows) {
          lines.push_back(io::power_csv_line(r));
          failures += r.failures;
        }
        const CellKey key = cell_key(rows.front().gamma, rows.front().n);
        cells[key] = lines;
        err << "cell gamma=" << key.first << " N=" << key.second << " done";
        if (failures > 0) err << " (" << failures << " failed test evaluations counted as non-rejections)";
        err << '\n';
        if (to_file) {
          checkpoint(key, lines);
          write_partial();
        }
      });

  // Final table in grid order.
  std::string text = std::string(io::kPowerCsvHeader) + "\n";
  for (double g : st.gammas) {
    for (auto n : st.ns) text += join_lines(cells.at(cell_key(g, n)));
  }
  emit(out, a.out_path, text);
  return kOk;
}

// ---------------------------------------------------------------------------
// eigen

struct EigenArgs {
  std::string input;
  int k = 5;
  std::string out_path;
};

int cmd_eigen(const EigenArgs& a, std::ostream& out) {
  const SampleSet s = io::read_matrix_stack_file(a.input);
  if (a.k < 1) fail(ErrorKind::InvalidArgument, "--k must be >= 1");
  if (a.k > s.d1() || a.k > s.d2()) {
    fail(ErrorKind::InvalidArgument, "--k " + std::to_string(a.k) + " exceeds a marginal dimension (" +
                                         std::to_string(s.d1()) + ", " + std::to_string(s.d2()) + ")");
  }
  const SeparableFit fit = fit_separable(s);
  std::string text = "marginal,rank,eigenvalue,cumulative_share,vector\n";
  auto dump = [&](const char* name, const EigenSystem& es, double trace) {
    double cum = 0.0;
    for (int r = 0; r < a.k; ++r) {
      cum += es.values(r);
      std::string vec;
      for (Eigen::Index i = 0; i < es.vectors.rows(); ++i) {
        if (i > 0) vec += ' ';
        vec += io::format_double(es.vectors(i, r));
      }
      text += std::string(name) + ',' + std::to_string(r + 1) + ',' + io::format_double(es.values(r)) +
              ',' + io::format_double(cum / trace) + ',' + vec + '\n';
    }
  };
  dump("c1", fit.eig1, fit.marginals.trace_c1);
  dump("c2", fit.eig2, fit.marginals.trace_c2);
  emit(out, a.out_path, text);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Separability tests for the covariance of matrix-valued data"};
  app.require_subcommand(1);
  std::string isa = "auto";
  app.add_option("--isa", isa, "Vector kernels: auto, scalar, avx2, neon");

  TestArgs ta;
  auto* test = app.add_subcommand("test", "Test separability of a matrix stack");
  test->add_option("input", ta.input, "Matrix-stack file")->required();
  test->add_option("--stat", ta.stat, "g, g-tilde, g-tilde-a or hs");
  test->add_option("--method", ta.method, "asymptotic, param-boot or emp-boot");
  test->add_option("--proj", ta.proj, "Projection set 'pxq' or '(r,s);(r,s)'; repeatable");
  test->add_option("--B", ta.B, "Bootstrap replicates");
  test->add_option("--seed", ta.seed, "Random seed");
  test->add_option("--json", ta.json_out, "Write the report here instead of stdout");
  test->add_option("--threads", ta.threads, "Worker threads (default SEPCOV_THREADS or 1)");

  SimulateArgs sa;
  auto* sim = app.add_subcommand("simulate", "Draw a sample from a simulation scenario");
  sim->add_option("--scenario", sa.scenario, "gaussian or t6");
  sim->add_option("--gamma", sa.gamma, "Departure from separability in [0,1]");
  sim->add_option("--N", sa.n, "Number of replicates");
  sim->add_option("--d1", sa.d1, "Rows");
  sim->add_option("--d2", sa.d2, "Columns");
  sim->add_option("--seed", sa.seed, "Random seed");
  sim->add_option("--out", sa.out_path, "Output file (default stdout)");

  PowerArgs pa;
  auto* power = app.add_subcommand("power", "Run a size/power study");
  power->add_option("--config", pa.config, "JSON study description")->required();
  power->add_option("--out", pa.out_path, "CSV output (default stdout)");
  power->add_flag("--resume", pa.resume, "Reuse checksummed cells of an interrupted run");
  power->add_flag("--paper-scale", pa.paper_scale,
                  "Default to 1000 replications and B = 1000 where the config is silent");
  power->add_option("--threads", pa.threads, "Worker threads (default SEPCOV_THREADS or 1)");

  EigenArgs ea;
  auto* eig = app.add_subcommand("eigen", "Export the leading marginal eigenpairs");
  eig->add_option("input", ea.input, "Matrix-stack file")->required();
  eig->add_option("--k", ea.k, "Eigenpairs per marginal");
  eig->add_option("--out", ea.out_path, "CSV output (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (isa != "auto") {
      const auto parsed = kernels::parse_isa(isa);
      if (!parsed) fail(ErrorKind::Parse, "unknown --isa '" + isa + "'");
      if (!kernels::set_active_isa(*parsed)) {
        fail(ErrorKind::InvalidArgument, "--isa " + isa + " is not available on this machine");
      }
    }
    if (*test) return cmd_test(ta, out, err);
    if (*sim) return cmd_simulate(sa, out);
    if (*power) return cmd_power(pa, out, err);
    if (*eig) return cmd_eigen(ea, out);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return is_statistical(e.kind()) ? kStatistical : kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

}  // namespace sepcov::cli
