#include "app.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numbers>
#include <sstream>

#include "expression.hpp"

namespace fracafd::cli {

using nlohmann::json;
namespace fs = std::filesystem;

// ---------------------------------------------------------------------------
// Parsing helpers

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(v))
    throw UsageError(key + ": expected a number, got '" + text + "'");
  return v;
}

int parse_int(const std::string& key, const std::string& text) {
  const std::string s = trim(text);
  int v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) throw UsageError(key + ": expected an integer, got '" + text + "'");
  return v;
}

std::pair<double, double> parse_range(const std::string& key, const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw UsageError(key + ": expected A:B, got '" + text + "'");
  return {parse_double(key, text.substr(0, colon)), parse_double(key, text.substr(colon + 1))};
}

// "a,b,c" or "lo:hi:n" (n uniform points).
std::vector<double> parse_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ':')) parts.push_back(item);
    if (parts.size() != 3) throw UsageError(key + ": expected lo:hi:n");
    const double lo = parse_double(key, parts[0]), hi = parse_double(key, parts[1]);
    const int n = parse_int(key, parts[2]);
    if (n < 1) throw UsageError(key + ": n must be >= 1");
    for (int i = 0; i < n; ++i) out.push_back(n == 1 ? lo : lo + (hi - lo) * i / (n - 1));
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_double(key, item));
  if (out.empty()) throw UsageError(key + ": empty list");
  return out;
}

}  // namespace

void apply_setting(RunConfig& cfg, const std::string& raw_key, const std::string& value) {
  const std::string key = trim(raw_key);
  if (key == "family") {
    const std::string v = trim(value);
    if (v != "heat" && v != "poisson") throw UsageError("family: expected heat or poisson");
    cfg.family = v;
  } else if (key == "alpha") {
    cfg.alpha = parse_double(key, value);
  } else if (key == "sigma") {
    cfg.sigma = parse_double(key, value);
  } else if (key == "terms") {
    cfg.terms = parse_int(key, value);
    cfg.rel_error.reset();
  } else if (key == "rel-error") {
    cfg.rel_error = parse_double(key, value);
    cfg.terms.reset();
  } else if (key == "window") {
    cfg.window = parse_double(key, value);
  } else if (key == "t-range") {
    cfg.search.t_range = parse_range(key, value);
  } else if (key == "x-range") {
    cfg.search.x_range = parse_range(key, value);
    cfg.x_range_set = true;
  } else if (key == "grid") {
    const auto sep = value.find('x');
    if (sep == std::string::npos) throw UsageError("grid: expected NTxNX");
    cfg.search.n_t = parse_int(key, value.substr(0, sep));
    cfg.search.n_x = parse_int(key, value.substr(sep + 1));
  } else if (key == "refine") {
    cfg.search.refine_rounds = parse_int(key, value);
  } else if (key == "out") {
    cfg.output_dir = trim(value);
  } else if (key == "data") {
    cfg.data = trim(value);
  } else if (key == "t-list") {
    cfg.t_list = parse_list(key, value);
  } else if (key == "x-list") {
    cfg.x_list = parse_list(key, value);
  } else if (key == "depth") {
    const std::string v = trim(value);
    if (v != "quick" && v != "full") throw UsageError("depth: expected quick or full");
    cfg.depth = v;
  } else if (key == "from") {
    cfg.from = trim(value);
  } else {
    throw UsageError("unknown setting '" + key + "'");
  }
}

void apply_config_file(RunConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string s = trim(line);
    if (s.empty() || s[0] == '#') continue;
    const auto eq = s.find('=');
    if (eq == std::string::npos)
      throw UsageError(path + ":" + std::to_string(number) + ": expected key=value");
    apply_setting(cfg, s.substr(0, eq), s.substr(eq + 1));
  }
}

KernelFamily RunConfig::kernel_family() const {
  try {
    if (family == "heat") {
      if (!alpha) throw UsageError("heat family needs --alpha");
      return KernelFamily::heat(*alpha);
    }
    if (!sigma) throw UsageError("poisson family needs --sigma");
    return KernelFamily::poisson(*sigma);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
}

double RunConfig::data_window() const { return window.value_or(20.0); }

SearchConfig RunConfig::search_config() const {
  SearchConfig s = search;
  if (!x_range_set) s.x_range = {-data_window(), data_window()};
  return s;
}

StopRule RunConfig::stop_rule() const {
  if (terms) return StopRule::terms(*terms);
  return StopRule::relative(*rel_error);
}

void RunConfig::validate() const {
  kernel_family();
  if (data.empty()) throw UsageError("no data: pass --data example1|example2|FILE");
  if (terms.has_value() == rel_error.has_value()) throw UsageError("set exactly one of --terms and --rel-error");
  if (terms && *terms < 1) throw UsageError("terms must be >= 1");
  if (rel_error && !(*rel_error > 0.0 && *rel_error < 1.0)) throw UsageError("rel-error must lie in (0, 1)");
  if (!(data_window() > 0.0)) throw UsageError("window must be > 0");
  try {
    search_config().validate();
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  for (double t : t_list)
    if (!(t > 0.0)) throw UsageError("t-list: every t must be > 0");
}

RunConfig preset(const std::string& name) {
  RunConfig cfg;
  cfg.data = name;
  if (name == "example1") {
    cfg.family = "heat";
    cfg.alpha = 0.5;
    cfg.terms = 14;
    // The datum has 1/x^2 tails.
    cfg.window = 1e4;
    cfg.search.x_range = {-4.0, 4.0};
  } else if (name == "example2") {
    cfg.family = "poisson";
    cfg.sigma = 1.0;
    cfg.terms = 15;
    cfg.window = 15.0;
    cfg.search.x_range = {-6.0, 6.0};
  } else {
    throw UsageError("unknown preset '" + name + "'");
  }
  cfg.x_range_set = true;
  return cfg;
}

double example1_datum(double x) {
  return 0.5 / (0.25 + (0.5 - x) * (0.5 - x)) + 2.0 * std::numbers::pi / (1.0 + (0.5 + x) * (0.5 + x)) +
         0.8 / (0.64 + (1.0 + x) * (1.0 + x));
}

double example2_datum(double x) {
  static constexpr double a[5] = {0.5, 3.1, 2.4, 0.2, 1.6};
  static constexpr double b[5] = {1.0, 0.6, -0.04, 2.3, -2.0};
  double sum = 0.0;
  for (int j = 0; j < 5; ++j) sum += a[j] * std::exp(-(b[j] - x) * (b[j] - x) / a[j]);
  return sum * std::cos(x);
}

DataFunction make_data(const RunConfig& cfg) {
  const double window = cfg.data_window();
  if (cfg.data == "example1") return DataFunction(example1_datum, window);
  if (cfg.data == "example2") return DataFunction(example2_datum, window);
  Expression expr = [&] {
    try {
      return load_expression_file(cfg.data);
    } catch (const ExpressionError& e) {
      throw UsageError(e.what());
    }
  }();
  return DataFunction([expr](double x) { return expr(x); }, window);
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Serialization

namespace {

json config_json(const RunConfig& cfg) {
  json j;
  j["family"] = cfg.family;
  if (cfg.alpha) j["alpha"] = *cfg.alpha;
  if (cfg.sigma) j["sigma"] = *cfg.sigma;
  j["data"] = cfg.data;
  if (cfg.terms) j["terms"] = *cfg.terms;
  if (cfg.rel_error) j["rel_error"] = *cfg.rel_error;
  j["window"] = cfg.data_window();
  const SearchConfig s = cfg.search_config();
  j["t_range"] = {s.t_range.first, s.t_range.second};
  j["x_range"] = {s.x_range.first, s.x_range.second};
  j["grid"] = {s.n_t, s.n_x};
  j["refine"] = s.refine_rounds;
  j["refine_shrink"] = s.refine_shrink;
  j["degeneracy_floor"] = s.degeneracy_floor;
  return j;
}

void config_from_json(const json& j, RunConfig& cfg) {
  cfg.family = j.at("family").get<std::string>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("sigma")) cfg.sigma = j["sigma"].get<double>();
  cfg.data = j.at("data").get<std::string>();
  cfg.terms.reset();
  cfg.rel_error.reset();
  if (j.contains("terms")) cfg.terms = j["terms"].get<int>();
  if (j.contains("rel_error")) cfg.rel_error = j["rel_error"].get<double>();
  cfg.window = j.at("window").get<double>();
  cfg.search.t_range = {j.at("t_range")[0].get<double>(), j.at("t_range")[1].get<double>()};
  cfg.search.x_range = {j.at("x_range")[0].get<double>(), j.at("x_range")[1].get<double>()};
  cfg.x_range_set = true;
  cfg.search.n_t = j.at("grid")[0].get<int>();
  cfg.search.n_x = j.at("grid")[1].get<int>();
  cfg.search.refine_rounds = j.at("refine").get<int>();
  cfg.search.refine_shrink = j.at("refine_shrink").get<double>();
  cfg.search.degeneracy_floor = j.at("degeneracy_floor").get<double>();
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
}

}  // namespace

std::string representation_json(const SparseRepresentation& rep, const RunConfig& cfg, bool partial) {
  json j;
  j["config"] = config_json(cfg);
  j["family"] = rep.family.name();
  j["order"] = rep.family.order();
  j["partial"] = partial;
  j["data_norm"] = rep.data_norm;
  json params = json::array();
  for (const auto& q : rep.params) params.push_back({{"t", q.t}, {"x", q.x}});
  j["params"] = params;
  j["ortho_coeffs"] = rep.ortho_coeffs;
  j["kernel_coeffs"] = rep.kernel_coeffs;
  j["kernel_norms"] = rep.kernel_norms;
  j["residual_norms"] = rep.residual_norms;
  j["a_matrix"] = rep.a_matrix.dense();
  json steps = json::array();
  for (const auto& s : rep.steps)
    steps.push_back({{"coarse_objective", s.coarse_objective},
                     {"objective", s.objective},
                     {"degenerate_skipped", s.degenerate_skipped},
                     {"reorthogonalized", s.reorthogonalized}});
  j["steps"] = steps;
  return j.dump(2) + "\n";
}

SparseRepresentation load_representation(const std::string& path, RunConfig& cfg) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path + "'");
  json j;
  try {
    j = json::parse(in);
    config_from_json(j.at("config"), cfg);
    SparseRepresentation rep;
    const double order = j.at("order").get<double>();
    rep.family = j.at("family").get<std::string>() == "heat" ? KernelFamily::heat(order) : KernelFamily::poisson(order);
    rep.data_norm = j.at("data_norm").get<double>();
    for (const auto& p : j.at("params")) rep.params.push_back({p.at("t").get<double>(), p.at("x").get<double>()});
    rep.ortho_coeffs = j.at("ortho_coeffs").get<std::vector<double>>();
    rep.kernel_coeffs = j.at("kernel_coeffs").get<std::vector<double>>();
    rep.kernel_norms = j.at("kernel_norms").get<std::vector<double>>();
    rep.residual_norms = j.at("residual_norms").get<std::vector<double>>();
    const auto dense = j.at("a_matrix").get<std::vector<std::vector<double>>>();
    for (std::size_t c = 0; c < dense.size(); ++c) {
      std::vector<double> column(c + 1);
      for (std::size_t r = 0; r <= c; ++r) column[r] = dense.at(r).at(c);
      rep.a_matrix.append_column(std::move(column));
    }
    for (const auto& s : j.at("steps"))
      rep.steps.push_back({s.at("coarse_objective").get<double>(), s.at("objective").get<double>(),
                           s.at("degenerate_skipped").get<std::size_t>(), s.at("reorthogonalized").get<bool>()});
    const std::size_t n = rep.params.size();
    if (rep.ortho_coeffs.size() != n || rep.kernel_coeffs.size() != n || rep.kernel_norms.size() != n ||
        rep.a_matrix.size() != n)
      throw UsageError("'" + path + "': inconsistent representation sizes");
    return rep;
  } catch (const json::exception& e) {
    throw UsageError("'" + path + "': " + e.what());
  } catch (const DomainError& e) {
    throw UsageError("'" + path + "': " + e.what());
  }
}

std::vector<double> default_t_list() {
  std::vector<double> t;
  const int n = 20;
  for (int i = 0; i < n; ++i) t.push_back(1e-3 * std::pow(2.0 / 1e-3, static_cast<double>(i) / (n - 1)));
  t.back() = 2.0;
  return t;
}

std::vector<double> default_x_list(const RunConfig& cfg) {
  const auto range = cfg.search_config().x_range;
  const int n = 400;
  std::vector<double> x;
  for (int i = 0; i < n; ++i) x.push_back(range.first + (range.second - range.first) * i / (n - 1));
  x.back() = range.second;
  return x;
}

void write_decomposition(const SparseRepresentation& rep, const RunConfig& cfg, const DataFunction& f,
                         const GramContext& ctx, bool partial) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  std::ostringstream params;
  params << "k,t,x,ortho_coeff,kernel_coeff,residual_norm,relative_error\n";
  for (std::size_t k = 0; k < rep.size(); ++k)
    params << k + 1 << ',' << format_number(rep.params[k].t) << ',' << format_number(rep.params[k].x) << ','
           << format_number(rep.ortho_coeffs[k]) << ',' << format_number(rep.kernel_coeffs[k]) << ','
           << format_number(rep.residual_norms[k]) << ',' << format_number(rep.residual_norms[k] / rep.data_norm)
           << '\n';
  write_text(dir / "params.csv", params.str());

  std::ostringstream matrix;
  for (const auto& row : rep.a_matrix.dense()) {
    for (std::size_t c = 0; c < row.size(); ++c) matrix << (c ? "," : "") << format_number(row[c]);
    matrix << '\n';
  }
  write_text(dir / "a_matrix.csv", matrix.str());
  write_text(dir / "result.json", representation_json(rep, cfg, partial));

  std::ostringstream curve;
  curve << "x,f,f_N\n";
  for (double x : default_x_list(cfg))
    curve << format_number(x) << ',' << format_number(f(x)) << ',' << format_number(rep.evaluate(ctx, x)) << '\n';
  write_text(dir / "approx_curve.csv", curve.str());
}

void write_solution(const SolutionField& sol, const RunConfig& cfg, const DataFunction& f) {
  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  const auto ts = cfg.t_list.empty() ? default_t_list() : cfg.t_list;
  const auto xs = cfg.x_list.empty() ? default_x_list(cfg) : cfg.x_list;
  const auto grid = evaluate_grid(sol, ts, xs);
  std::ostringstream out;
  out << "t,x,u\n";
  for (std::size_t i = 0; i < ts.size(); ++i)
    for (std::size_t j = 0; j < xs.size(); ++j)
      out << format_number(ts[i]) << ',' << format_number(xs[j]) << ',' << format_number(grid[i][j]) << '\n';
  write_text(dir / "solution_grid.csv", out.str());

  const auto report = isometry_report(sol, f);
  double ortho_sq = 0.0;
  for (double d : sol.representation().ortho_coeffs) ortho_sq += d * d;
  std::ostringstream iso;
  iso << "{\n  \"l2_norm_f\": " << format_number(report.l2_norm_f) << ",\n  \"hk_norm_u\": "
      << format_number(report.hk_norm_u) << ",\n  \"residual\": " << format_number(report.residual)
      << ",\n  \"sum_ortho_coeffs_sq\": " << format_number(ortho_sq) << "\n}\n";
  write_text(dir / "isometry.json", iso.str());
}

// ---------------------------------------------------------------------------
// Commands

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void warn_about_window(const DataFunction& f, std::ostream& log) {
  if (f.tail_fraction() > 1e-10)
    log << "warning: " << format_number(f.tail_fraction())
        << " of the L2 mass of f on [-2L, 2L] lies outside [-L, L]; consider a larger --window\n";
}

void note_order(const RunConfig& cfg, std::ostream& log) {
  if (cfg.data == "example1" || cfg.data == "example2")
    log << "note: the order used by the published experiment is not stated; running with "
        << (cfg.family == "heat" ? "alpha=" + format_number(*cfg.alpha) : "sigma=" + format_number(*cfg.sigma))
        << "\n";
}

// Decomposes and writes the decomposition files. Returns nullopt (after
// writing the partial result) when the dictionary is exhausted.
std::optional<SparseRepresentation> run_decomposition(const RunConfig& cfg, const DataFunction& f,
                                                      const GramContext& ctx, std::ostream& log) {
  const auto start = std::chrono::steady_clock::now();
  try {
    auto rep = decompose(f, ctx, cfg.search_config(), cfg.stop_rule());
    write_decomposition(rep, cfg, f, ctx, false);
    for (std::size_t k = 0; k < rep.size(); ++k)
      log << "step " << k + 1 << ": t=" << format_number(rep.params[k].t) << " x=" << format_number(rep.params[k].x)
          << " relative_error=" << format_number(rep.residual_norms[k] / rep.data_norm) << "\n";
    log << "decomposition: " << rep.size() << " terms in " << seconds_since(start) << " s\n";
    return rep;
  } catch (const DictionaryExhausted& e) {
    log << "error: " << e.what() << "\n";
    if (e.partial()) {
      write_decomposition(*e.partial(), cfg, f, ctx, true);
      log << "partial result with " << e.partial()->size() << " terms written (flagged \"partial\": true)\n";
    }
    return std::nullopt;
  }
}

}  // namespace

int cmd_decompose(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  note_order(cfg, log);
  const DataFunction f = make_data(cfg);
  warn_about_window(f, log);
  const GramContext ctx(cfg.kernel_family());
  return run_decomposition(cfg, f, ctx, log) ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  const DataFunction f = make_data(cfg);
  const GramContext ctx(cfg.kernel_family());
  SparseRepresentation rep;
  if (!cfg.from.empty()) {
    RunConfig echoed = cfg;
    rep = load_representation(cfg.from, echoed);
  } else {
    warn_about_window(f, log);
    auto computed = run_decomposition(cfg, f, ctx, log);
    if (!computed) return 1;
    rep = std::move(*computed);
  }
  const auto start = std::chrono::steady_clock::now();
  try {
    SolutionField sol(std::move(rep), ctx);
    write_solution(sol, cfg, f);
  } catch (const DomainError& e) {
    throw UsageError(e.what());
  }
  log << "solution grid written in " << seconds_since(start) << " s\n";
  return 0;
}

int cmd_example(const RunConfig& cfg, std::ostream& log) {
  cfg.validate();
  note_order(cfg, log);
  const DataFunction f = make_data(cfg);
  const GramContext ctx(cfg.kernel_family());
  auto rep = run_decomposition(cfg, f, ctx, log);
  if (!rep) return 1;
  const auto start = std::chrono::steady_clock::now();
  SolutionField sol(std::move(*rep), ctx);
  write_solution(sol, cfg, f);
  log << "solution grid written in " << seconds_since(start) << " s\n";
  return 0;
}

// ---------------------------------------------------------------------------

int run(int argc, char** argv) {
  CLI::App app{"Sparse kernel expansions over fractional heat and Poisson dictionaries"};
  app.require_subcommand(1);
  const std::vector<std::string> keys = {"family", "alpha", "sigma", "terms",  "rel-error", "window",
                                         "t-range", "x-range", "grid", "refine", "out",       "data",
                                         "t-list", "x-list", "depth", "from"};
  struct Sub {
    CLI::App* app;
    std::map<std::string, std::string> values;
    std::string config;
  };
  std::map<std::string, Sub> subs;
  const std::map<std::string, std::string> descriptions = {
      {"decompose", "Run the greedy decomposition and write params/A/result/curve files"},
      {"solve", "Evaluate the solution on a (t, x) grid and report the isometry"},
      {"verify", "Run the oracle agreement checks"},
      {"example1", "Preset: first published experiment (heat family)"},
      {"example2", "Preset: second published experiment (Poisson family)"}};
  for (const auto& [name, text] : descriptions) {
    Sub& sub = subs[name];
    sub.app = app.add_subcommand(name, text);
    sub.app->add_option("--config", sub.config, "key=value settings file; flags override it");
    for (const auto& key : keys) sub.app->add_option("--" + key, sub.values[key]);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (auto& [name, sub] : subs) {
      if (!sub.app->parsed()) continue;
      RunConfig cfg;
      if (name == "example1" || name == "example2") cfg = preset(name);
      if (name == "solve" && sub.app->count("--from") > 0) {
        cfg.from = sub.values["from"];
        load_representation(cfg.from, cfg);
      }
      if (!sub.config.empty()) apply_config_file(cfg, sub.config);
      for (const auto& key : keys)
        if (sub.app->count("--" + key) > 0) apply_setting(cfg, key, sub.values[key]);

      if (name == "decompose") return cmd_decompose(cfg, std::cerr);
      if (name == "solve") return cmd_solve(cfg, std::cerr);
      if (name == "verify") return cmd_verify(cfg.depth, std::cout);
      return cmd_example(cfg, std::cerr);
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

}  // namespace fracafd::cli
