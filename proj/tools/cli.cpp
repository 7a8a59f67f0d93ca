#include "cli.hpp"

#include "relmod/cutoff_variational.hpp"
#include "relmod/errors.hpp"
#include "relmod/findim_modular.hpp"
#include "relmod/fock_truncated.hpp"
#include "relmod/scalar_field.hpp"
#include "relmod/signalling.hpp"

#include <CLI11.hpp>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <sstream>

namespace relmod::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(text, &pos);
    if (pos != text.size() || !std::isfinite(v)) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': expected a number, got '" + text + "'");
  }
}

long long parse_int(const std::string& key, const std::string& text) {
  try {
    std::size_t pos = 0;
    const long long v = std::stoll(text, &pos);
    if (pos != text.size()) throw std::invalid_argument(text);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("parameter '" + key + "': expected an integer, got '" + text + "'");
  }
}

class Reader {
 public:
  explicit Reader(const RunConfig& cfg) : cfg_(cfg) {}

  const std::string& str(const std::string& key) const { return cfg_.params.at(key); }

  double num(const std::string& key, double lo = -HUGE_VAL, double hi = HUGE_VAL) const {
    const double v = parse_double(key, str(key));
    if (v < lo || v > hi)
      throw ConfigError("parameter '" + key + "' = " + str(key) + " outside [" + format_double(lo) +
                        ", " + format_double(hi) + "]");
    return v;
  }

  int integer(const std::string& key, long long lo, long long hi) const {
    const long long v = parse_int(key, str(key));
    if (v < lo || v > hi)
      throw ConfigError("parameter '" + key + "' = " + str(key) + " outside [" + std::to_string(lo) +
                        ", " + std::to_string(hi) + "]");
    return static_cast<int>(v);
  }

  std::string choice(const std::string& key, const std::vector<std::string>& allowed) const {
    const std::string& v = str(key);
    if (std::find(allowed.begin(), allowed.end(), v) == allowed.end())
      throw ConfigError("parameter '" + key + "' = '" + v + "' is not one of the allowed values");
    return v;
  }

 private:
  const RunConfig& cfg_;
};

std::string yes_no(bool b) { return b ? "1" : "0"; }

// "c1,c2:w1,w2:amp + ..." with one coordinate per dimension; a single width
// applies to every axis and the amplitude defaults to 1.
BumpSum parse_bumps(const std::string& key, const std::string& text, int d) {
  BumpSum sum;
  if (trim(text).empty()) return sum;
  for (const std::string& term : split(text, '+')) {
    const auto parts = split(term, ':');
    if (parts.size() < 2 || parts.size() > 3)
      throw ConfigError("parameter '" + key + "': bump '" + term + "' must be center:width[:amplitude]");
    const auto c = split(parts[0], ','), w = split(parts[1], ',');
    if (static_cast<int>(c.size()) != d || (static_cast<int>(w.size()) != d && w.size() != 1))
      throw ConfigError("parameter '" + key + "': bump '" + term + "' needs " + std::to_string(d) +
                        " coordinates");
    BumpFunction b;
    for (int k = 0; k < d; ++k) {
      b.center[k] = parse_double(key, c[k]);
      b.width[k] = parse_double(key, w.size() == 1 ? w[0] : w[k]);
      if (!(b.width[k] > 0.0)) throw ConfigError("parameter '" + key + "': widths must be positive");
    }
    b.amplitude = parts.size() == 3 ? parse_double(key, parts[2]) : 1.0;
    sum.terms.push_back(b);
  }
  return sum;
}

std::vector<ScheduleEntry> parse_schedule(const std::string& text) {
  std::vector<ScheduleEntry> out;
  if (trim(text).empty()) return out;
  for (const std::string& item : split(text, ';')) {
    if (item.empty()) continue;
    const auto p = split(item, ':');
    if (p.size() != 3) throw ConfigError("schedule entry '" + item + "' must be epsilon:s:t");
    out.push_back({parse_double("schedule", p[0]), parse_double("schedule", p[1]),
                   parse_double("schedule", p[2])});
  }
  return out;
}

InitialData read_data(const Reader& r) {
  InitialData g;
  g.dimension = r.integer("dimension", 1, 3);
  g.mass = r.num("mass", 0.0);
  g.g0 = parse_bumps("g0", r.str("g0"), g.dimension);
  g.g1 = parse_bumps("g1", r.str("g1"), g.dimension);
  return g;
}

Geometry read_geometry(const Reader& r) {
  const std::string kind = r.choice("geometry", {"wedge", "cone"});
  if (kind == "wedge") return Geometry::wedge();
  return Geometry::cone(r.num("radius", 1e-12));
}

const std::vector<std::string> kSweepHeader = {"epsilon", "s",     "t",   "H_minus",
                                               "H_exact", "H_plus", "gap", "quad_err"};

std::vector<std::string> sweep_row(const BoundSweepRecord& rec) {
  return {format_double(rec.epsilon), format_double(rec.s),      format_double(rec.t),
          format_double(rec.H_minus), format_double(rec.H_exact), format_double(rec.H_plus),
          format_double(rec.gap()),   format_double(rec.quad_error_estimate)};
}

// ---------------------------------------------------------------- findim

RunResult run_findim(const RunConfig& cfg) {
  const Reader r(cfg);
  const int n_inst = r.integer("instances", 0, 1000000);
  const int n_thm = r.integer("theorem_instances", 0, 1000000);
  const int n_mono = r.integer("monotonicity_instances", 0, 1000000);
  RunResult out;
  out.table.header = {"seed", "dim", "check", "value", "threshold", "pass"};
  out.table.plot_x = 1;
  out.table.plot_y = {4};
  struct Stat {
    int count = 0, failures = 0;
    double worst = 0.0;
  };
  std::map<std::string, Stat> stats;
  auto add = [&](std::uint64_t seed, long dim, const std::string& name, double value, double threshold,
                 bool residual_kind) {
    const bool pass = residual_kind ? value <= threshold : value >= threshold;
    out.table.rows.push_back({std::to_string(seed), std::to_string(dim), name, format_double(value),
                              format_double(threshold), yes_no(pass)});
    auto& s = stats[name];
    s.worst = s.count == 0 ? value : (residual_kind ? std::max(s.worst, value) : std::min(s.worst, value));
    ++s.count;
    if (!pass) {
      ++s.failures;
      out.failures.push_back(name + " seed " + std::to_string(seed) + ": " + format_double(value) +
                             " vs " + format_double(threshold));
    }
  };
  for (int i = 0; i < n_inst; ++i) {
    const std::uint64_t seed = cfg.seed + std::uint64_t(i);
    const auto inst = findim_suite_instance(seed);
    for (const auto& c : inst.checks)
      add(seed, long(inst.dim), c.check_name, c.residual, c.tolerance * cfg.tolerance_scale, true);
  }
  const double slack = -kInequalitySlack * cfg.tolerance_scale;
  for (int i = 0; i < n_thm; ++i) {
    const std::uint64_t seed = cfg.seed + 1000000 + std::uint64_t(i);
    const auto t = theorem_instance(seed);
    add(seed, 4, "theorem_upper_margin", t.upper.margin, slack, false);
    add(seed, 4, "theorem_lower_margin", t.lower.margin, slack, false);
  }
  for (int i = 0; i < n_mono; ++i) {
    const std::uint64_t seed = cfg.seed + 2000000 + std::uint64_t(i);
    add(seed, 4, "monotonicity_margin", monotonicity_instance(seed).margin, slack, false);
  }
  for (const auto& [name, s] : stats)
    out.summary["checks"][name] = {{"count", s.count}, {"failures", s.failures}, {"worst", s.worst}};
  out.summary["total_failures"] = out.failures.size();
  out.headline = "findim suite: " + std::to_string(out.table.rows.size()) + " checks, " +
                 std::to_string(out.failures.size()) + " failures";
  return out;
}

// ---------------------------------------------------------------- fock

RunResult run_fock(const RunConfig& cfg) {
  const Reader r(cfg);
  const int modes = r.integer("modes", 1, 4);
  const int cutoff = r.integer("cutoff", 2, 20);
  const int trials = r.integer("trials", 1, 1000);
  RunResult out;
  out.table.header = {"check", "residual", "tolerance", "pass", "params"};
  out.table.plot_x = 0;
  out.table.plot_y = {2};
  const auto checks = fock_suite(cfg.seed, modes, cutoff, trials);
  for (const auto& c : checks) {
    const double tol = c.tolerance * cfg.tolerance_scale;
    const bool pass = c.residual <= tol;
    std::string params;
    for (const auto& [k, v] : c.params) params += (params.empty() ? "" : ";") + k + "=" + format_double(v);
    out.table.rows.push_back({c.check_name, format_double(c.residual), format_double(tol), yes_no(pass), params});
    auto& s = out.summary["checks"][c.check_name];
    if (s.is_null()) s = {{"count", 0}, {"max_residual", 0.0}};
    s["count"] = s["count"].get<int>() + 1;
    s["max_residual"] = std::max(s["max_residual"].get<double>(), c.residual);
    if (!pass) out.failures.push_back(c.check_name + ": " + format_double(c.residual) + " > " + format_double(tol));
  }
  out.summary["modes"] = modes;
  out.summary["cutoff"] = cutoff;
  out.summary["total_failures"] = out.failures.size();
  out.headline = "fock suite: " + std::to_string(checks.size()) + " checks, " +
                 std::to_string(out.failures.size()) + " failures";
  return out;
}

// ---------------------------------------------------------------- scalar

RunResult run_scalar(const RunConfig& cfg) {
  const Reader r(cfg);
  RunResult out;
  if (cfg.action == "flow") {
    const Geometry geo = read_geometry(r);
    const int d = r.integer("dimension", 1, 3);
    const double s = r.num("s");
    const int steps = r.integer("steps", 1, 100000);
    const auto comps = split(r.str("point"), ',');
    if (comps.size() != 4) throw ConfigError("parameter 'point' needs four comma-separated coordinates");
    SpacetimePoint x{};
    for (int k = 0; k < 4; ++k) x[k] = parse_double("point", comps[k]);
    out.table.header = {"s", "x0", "x1", "x2", "x3", "jacobian"};
    out.table.plot_x = 2;
    out.table.plot_y = {1};
    for (int k = 0; k <= steps; ++k) {
      const double sk = s * k / steps;
      const auto p = modular_flow_point(geo, sk, x, d);
      out.table.rows.push_back({format_double(sk), format_double(p.x[0]), format_double(p.x[1]),
                                format_double(p.x[2]), format_double(p.x[3]), format_double(p.jacobian)});
    }
    const auto twice = modular_flow_point(geo, s, modular_flow_point(geo, s, x, d).x, d);
    const auto direct = modular_flow_point(geo, 2 * s, x, d);
    double dev = 0.0;
    for (int k = 0; k < 4; ++k) dev = std::max(dev, std::abs(twice.x[k] - direct.x[k]));
    out.summary["group_law_residual"] = dev;
    if (dev > 1e-10 * cfg.tolerance_scale) out.failures.push_back("flow group law residual " + format_double(dev));
    out.headline = "flow: " + std::to_string(steps + 1) + " points, group-law residual " + format_double(dev);
    return out;
  }

  const InitialData g = read_data(r);
  const Geometry geo = read_geometry(r);
  if (cfg.action == "exact") {
    const auto h = exact_entropy(g, geo);
    out.table.header = {"geometry", "H_exact", "quad_err"};
    out.table.rows.push_back({r.str("geometry"), format_double(h.value), format_double(h.error)});
    out.table.plot_x = 0;
    out.table.plot_y = {2};
    out.summary["H_exact"] = h.value;
    out.summary["quad_err"] = h.error;
    out.headline = format_double(h.value);
    return out;
  }

  std::vector<ScheduleEntry> schedule;
  if (cfg.action == "bound")
    schedule.push_back({r.num("epsilon"), r.num("s"), r.num("t")});
  else
    schedule = parse_schedule(r.str("schedule"));
  const double gap_target = r.num("gap_target", 0.0);
  const double gap_floor = r.num("gap_floor", 0.0);
  const auto recs = squeeze_sweep(g, geo, schedule);
  out.table.header = kSweepHeader;
  out.table.plot_x = 1;
  out.table.plot_y = {4, 5, 6, 7};
  nlohmann::json records = nlohmann::json::array();
  for (const auto& rec : recs) {
    out.table.rows.push_back(sweep_row(rec));
    const double slack = rec.quad_error_estimate * cfg.tolerance_scale;
    if (rec.H_minus > rec.H_exact + slack || rec.H_exact > rec.H_plus + slack)
      out.failures.push_back("ordering violated at epsilon " + format_double(rec.epsilon));
    records.push_back({{"epsilon", rec.epsilon}, {"gap", rec.gap()}});
  }
  out.summary["records"] = records.size();
  if (!recs.empty()) {
    const auto& last = recs.back();
    const double rel = last.gap() / std::max(last.H_exact, gap_floor);
    out.summary["final_relative_gap"] = rel;
    out.summary["H_exact"] = last.H_exact;
    const CutoffProfile prof = eta_st(last.s, last.t);
    const double pred = boundary_term_prediction(g, geo, prof, Side::upper) -
                        boundary_term_prediction(g, geo, prof, Side::lower);
    out.summary["predicted_gap_limit"] = pred;
    if (gap_target > 0.0 && rel > gap_target * cfg.tolerance_scale)
      out.failures.push_back("final relative gap " + format_double(rel) + " above target " +
                             format_double(gap_target));
    // Least-squares slope of log gap against log epsilon.
    std::vector<std::pair<double, double>> pts;
    for (const auto& rec : recs)
      if (rec.gap() > 0.0) pts.emplace_back(std::log(rec.epsilon), std::log(rec.gap()));
    if (pts.size() >= 2) {
      double mx = 0, my = 0;
      for (auto [x, y] : pts) mx += x, my += y;
      mx /= double(pts.size());
      my /= double(pts.size());
      double sxy = 0, sxx = 0;
      for (auto [x, y] : pts) sxy += (x - mx) * (y - my), sxx += (x - mx) * (x - mx);
      if (sxx > 0) out.summary["log_gap_slope"] = sxy / sxx;
    }
    out.headline = "final gap " + format_double(last.gap()) + " (relative " + format_double(rel) + ")";
  } else {
    out.headline = "empty schedule";
  }
  out.summary["sweep"] = records;
  return out;
}

// ---------------------------------------------------------------- cutoff

RunResult run_cutoff(const RunConfig& cfg) {
  const Reader r(cfg);
  RunResult out;
  if (cfg.action == "limit") {
    const double s = r.num("s");
    const double v = energy_limit(s);
    out.table.header = {"s", "E_limit"};
    out.table.rows.push_back({format_double(s), format_double(v)});
    out.table.plot_x = 1;
    out.table.plot_y = {2};
    out.summary["E_limit"] = v;
    out.headline = format_double(v);
    return out;
  }
  if (cfg.action == "energy") {
    const double s = r.num("s"), t = r.num("t");
    const auto e = energy(eta_st(s, t));
    const double lim = energy_limit(s);
    out.table.header = {"s", "t", "E", "E_limit", "gap"};
    out.table.rows.push_back({format_double(s), format_double(t), format_double(e.value), format_double(lim),
                              format_double(e.value - lim)});
    out.table.plot_x = 2;
    out.table.plot_y = {3, 4};
    out.summary["E"] = e.value;
    out.summary["E_limit"] = lim;
    out.summary["quad_err"] = e.error;
    out.headline = format_double(e.value);
    return out;
  }
  const int n = r.integer("n_grid", 3, 50000000);
  const auto dm = minimize_discrete(n);
  out.table.header = {"x", "eta"};
  out.table.plot_x = 1;
  out.table.plot_y = {2};
  for (Eigen::Index i = 0; i < dm.grid.size(); ++i)
    out.table.rows.push_back({format_double(dm.grid(i)), format_double(dm.values(i))});
  const double cf = discrete_minimum_closed_form(n);
  out.summary["minimum"] = dm.minimum;
  out.summary["closed_form"] = cf;
  out.summary["n_grid"] = n;
  out.headline = format_double(dm.minimum);
  return out;
}

// ---------------------------------------------------------------- signalling

RunResult run_signalling(const RunConfig& cfg) {
  const Reader r(cfg);
  RunResult out;
  out.table.plot_x = 0;
  out.table.plot_y = {2};
  const double exact_tol = 1e-12 * cfg.tolerance_scale;
  if (cfg.action == "check") {
    const int n = r.integer("n", 1, 8);
    const int dim = r.integer("dim", 1, 64);
    const int gens = r.integer("generators", 1, 20);
    const auto tc = build_truncated_cuntz(n, dim);
    const auto rel = tc.relation_residuals();
    const auto ns = nonsignalling_check(make_two_factor_scenario(tc, cuntz_sum_unitary(tc), gens, cfg.seed));
    const auto id = nonsignalling_check(make_two_factor_scenario(tc, sparse_identity(Eigen::Index(dim) * dim), gens, cfg.seed));
    out.table.header = {"check", "residual", "asserted"};
    out.table.rows = {{"cuntz_relations_defect_free", format_double(rel.defect_free_residual), "1"},
                      {"cuntz_relations_full_space", format_double(rel.full_space_defect), "0"},
                      {"nonsignalling_cuntz_sum", format_double(ns.max_residual), "1"},
                      {"nonsignalling_cuntz_sum_full_space", format_double(ns.full_space_residual), "0"},
                      {"nonsignalling_identity", format_double(id.max_residual), "1"}};
    for (const auto& row : out.table.rows)
      if (row[2] == "1" && parse_double(row[0], row[1]) > exact_tol)
        out.failures.push_back(row[0] + " residual " + row[1]);
    out.summary["defect_free_dim"] = tc.defect_free_dim();
    out.summary["commutator_pairs"] = ns.pairs;
    out.summary["nonsignalling_residual"] = ns.max_residual;
    out.headline = "non-signalling residual " + format_double(ns.max_residual);
    return out;
  }
  if (cfg.action == "gap") {
    const double eps = r.num("epsilon");
    const int samples = r.integer("samples", 0, 1000000);
    const int dim = r.integer("dim", 4, 512);
    const double q = r.num("tail_decay");
    const auto rep = norm_gap_experiment(eps, samples, dim, q, cfg.seed);
    out.table.header = {"epsilon", "samples", "floor", "min_gap", "adversarial_gap", "slack", "pass"};
    out.table.rows.push_back({format_double(rep.epsilon), std::to_string(rep.samples), format_double(rep.floor),
                              format_double(rep.min_gap), format_double(rep.adversarial_gap),
                              format_double(rep.slack), yes_no(rep.pass)});
    out.table.plot_x = 1;
    out.table.plot_y = {3, 4, 5};
    out.summary = rep;
    if (!rep.pass) out.failures.push_back("norm gap fell below floor - slack");
    out.headline = "min gap " + format_double(std::min(rep.min_gap, rep.adversarial_gap)) + ", floor " +
                   format_double(rep.floor);
    return out;
  }
  const int n = r.integer("n", 1, 8);
  const int outer = r.integer("outer_dim", 1, 32);
  const int middle = r.integer("middle_dim", 1, 64);
  const int cert_dim = r.integer("certificate_dim", 1, 64);
  const auto rep = product_reconstruction(n, outer, middle);
  const auto cert = product_form_gap(n, cert_dim);
  out.table.header = {"check", "value"};
  out.table.rows = {{"product_residual", format_double(rep.residual)},
                    {"unitarity_u", format_double(rep.unitarity_u)},
                    {"unitarity_u_prime", format_double(rep.unitarity_u_prime)},
                    {"no_middle_relative_distance", format_double(cert.relative_distance)}};
  if (rep.residual > exact_tol || rep.unitarity_u > exact_tol || rep.unitarity_u_prime > exact_tol)
    out.failures.push_back("product reconstruction residual " + format_double(rep.residual));
  if (n > 1 && !cert.certified)
    out.failures.push_back("no certified product-form gap: " + format_double(cert.relative_distance));
  out.summary["product_residual"] = rep.residual;
  out.summary["certificate_relative_distance"] = cert.relative_distance;
  out.summary["certificate_singular_values"] = cert.singular_values;
  out.headline = "u'u - w residual " + format_double(rep.residual) + ", gap without middle family " +
                 format_double(cert.relative_distance);
  return out;
}

bool is_config_code(ErrorCode c) {
  switch (c) {
    case ErrorCode::ParameterViolation:
    case ErrorCode::DomainViolation:
    case ErrorCode::ScheduleViolation:
    case ErrorCode::GeometryViolation:
    case ErrorCode::MassNotZero:
    case ErrorCode::DimensionTooSmall:
      return true;
    default:
      return false;
  }
}

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ConfigError("cannot read '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out << bytes;
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

Params parse_config_text(const std::string& text) {
  Params p;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(lineno) + ": expected 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    if (p.count(key)) throw ConfigError("config line " + std::to_string(lineno) + ": duplicate key '" + key + "'");
    p[key] = trim(line.substr(eq + 1));
  }
  return p;
}

const Params& parameter_schema(const std::string& subcommand, const std::string& action) {
  static const Params field = {{"geometry", "wedge"}, {"radius", "1"}, {"dimension", "1"},
                               {"mass", "0"},         {"g0", "2:1:1"}, {"g1", ""}};
  auto with = [](Params base, const Params& extra) {
    for (const auto& kv : extra) base[kv.first] = kv.second;
    return base;
  };
  static const std::map<std::string, Params> schemas = {
      {"findim.suite", {{"instances", "1000"}, {"theorem_instances", "500"}, {"monotonicity_instances", "1000"}}},
      {"fock.suite", {{"modes", "2"}, {"cutoff", "12"}, {"trials", "5"}}},
      {"scalar.exact", field},
      {"scalar.bound", with(field, {{"epsilon", "0.01"}, {"s", "1.5"}, {"t", "200"}, {"gap_target", "0"},
                                    {"gap_floor", "1e-12"}})},
      {"scalar.sweep", with(field, {{"schedule", "0.1:2:4;0.03:1.5:6;0.01:1.5:20;0.003:1.2:60;0.001:1.1:220"},
                                    {"gap_target", "0"},
                                    {"gap_floor", "1e-12"}})},
      {"scalar.flow", {{"geometry", "wedge"}, {"radius", "1"}, {"dimension", "3"},
                       {"point", "0.2,0.5,-0.1,0.3"}, {"s", "1"}, {"steps", "8"}}},
      {"cutoff.energy", {{"s", "1.5"}, {"t", "200"}}},
      {"cutoff.limit", {{"s", "3"}}},
      {"cutoff.minimize", {{"n_grid", "20000"}}},
      {"signalling.check", {{"n", "2"}, {"dim", "32"}, {"generators", "3"}}},
      {"signalling.gap", {{"epsilon", "0.01"}, {"samples", "200"}, {"dim", "64"}, {"tail_decay", "0.5"}}},
      {"signalling.factorize", {{"n", "2"}, {"outer_dim", "8"}, {"middle_dim", "16"}, {"certificate_dim", "16"}}},
  };
  const auto it = schemas.find(subcommand + "." + action);
  if (it == schemas.end()) throw ConfigError("unknown command '" + subcommand + " " + action + "'");
  return it->second;
}

RunConfig make_config(const std::string& subcommand, const std::string& action,
                      const Params& file_params, const Params& overrides) {
  RunConfig cfg;
  cfg.subcommand = subcommand;
  cfg.action = action;
  cfg.params = parameter_schema(subcommand, action);
  for (const Params* src : {&file_params, &overrides})
    for (const auto& [k, v] : *src) {
      if (!cfg.params.count(k))
        throw ConfigError("unknown parameter '" + k + "' for '" + subcommand + " " + action + "'");
      cfg.params[k] = v;
    }
  return cfg;
}

RunResult execute(const RunConfig& cfg) {
  parameter_schema(cfg.subcommand, cfg.action);
  if (!(cfg.tolerance_scale > 0.0)) throw ConfigError("--tolerance-scale must be positive");
  if (cfg.subcommand == "findim") return run_findim(cfg);
  if (cfg.subcommand == "fock") return run_fock(cfg);
  if (cfg.subcommand == "scalar") return run_scalar(cfg);
  if (cfg.subcommand == "cutoff") return run_cutoff(cfg);
  return run_signalling(cfg);
}

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string format_csv(const Table& t) {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  line(t.header);
  for (const auto& row : t.rows) line(row);
  return out;
}

std::string plot_script(const Table& t, const std::string& title) {
  std::string s = "# columns:";
  for (std::size_t i = 0; i < t.header.size(); ++i) s += " " + std::to_string(i + 1) + "=" + t.header[i];
  s += "\nset datafile separator ','\nset title '" + title + "'\nset key autotitle columnhead\n";
  if (t.plot_y.empty()) return s;
  s += "plot ";
  for (std::size_t i = 0; i < t.plot_y.size(); ++i) {
    if (i) s += ", ";
    s += i == 0 ? "'results.csv'" : "''";
    s += " using " + (t.plot_x > 0 ? std::to_string(t.plot_x) : std::string("0")) + ":" +
         std::to_string(t.plot_y[i]) + " with linespoints";
  }
  return s + "\n";
}

std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1)
    throw std::runtime_error("SHA-256 digest failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out += hex[md[i] >> 4];
    out += hex[md[i] & 15];
  }
  return out;
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  RunResult res;
  try {
    res = execute(cfg);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const Error& e) {
    err << (is_config_code(e.code()) ? "config error: " : "computation error: ") << e.what() << "\n";
    return is_config_code(e.code()) ? kExitConfig : kExitComputation;
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return kExitComputation;
  }

  nlohmann::json summary = res.summary;
  summary["command"] = cfg.subcommand + " " + cfg.action;
  summary["seed"] = cfg.seed;
  summary["parameters"] = cfg.params;
  summary["tolerance_scale"] = cfg.tolerance_scale;
  summary["failures"] = res.failures;
  summary["pass"] = res.failures.empty();

  const std::map<std::string, std::string> files = {
      {"results.csv", format_csv(res.table)},
      {"summary.json", summary.dump(2) + "\n"},
      {"plot.txt", plot_script(res.table, cfg.subcommand + " " + cfg.action)},
  };
  try {
    std::filesystem::create_directories(cfg.output_dir);
    nlohmann::json manifest;
    manifest["generated_utc"] = utc_now();
    manifest["command"] = cfg.subcommand + " " + cfg.action;
    for (const auto& [name, bytes] : files) {
      write_file(cfg.output_dir / name, bytes);
      manifest["files"].push_back({{"path", name}, {"sha256", sha256_hex(bytes)}, {"bytes", bytes.size()}});
    }
    write_file(cfg.output_dir / "manifest.json", manifest.dump(2) + "\n");
  } catch (const std::exception& e) {
    err << "computation error: " << e.what() << "\n";
    return kExitComputation;
  }

  out << res.headline << "\n";
  if (!res.failures.empty()) {
    err << "tolerance failures (" << res.failures.size() << "):\n";
    const std::size_t shown = std::min<std::size_t>(res.failures.size(), 20);
    for (std::size_t i = 0; i < shown; ++i) err << "  " << res.failures[i] << "\n";
    return kExitTolerance;
  }
  return kExitOk;
}

int main_entry(int argc, char** argv) {
  CLI::App app{"relmod: numerical checks for relative modular Hamiltonians and entropy bounds"};
  app.allow_extras();
  std::string subcommand, action, config_path, out_dir = ".";
  std::uint64_t seed = 1;
  double tol_scale = 1.0;
  app.add_option("subcommand", subcommand, "findim | fock | scalar | cutoff | signalling")->required();
  app.add_option("action", action, "suite | exact | bound | sweep | flow | energy | limit | minimize | check | gap | factorize")
      ->required();
  app.add_option("--config", config_path, "flat key = value parameter file");
  app.add_option("--seed", seed, "base seed");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--tolerance-scale", tol_scale, "multiplies every pass/fail tolerance");
  app.footer("Any other --key value pair overrides a parameter of the chosen command.");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    Params overrides;
    const auto rest = app.remaining();
    for (std::size_t i = 0; i < rest.size(); ++i) {
      std::string tok = rest[i];
      if (tok.rfind("--", 0) != 0) throw ConfigError("unexpected argument '" + tok + "'");
      tok = tok.substr(2);
      std::string value;
      const auto eq = tok.find('=');
      if (eq != std::string::npos) {
        value = tok.substr(eq + 1);
        tok = tok.substr(0, eq);
      } else {
        if (i + 1 >= rest.size()) throw ConfigError("missing value for --" + tok);
        value = rest[++i];
      }
      std::replace(tok.begin(), tok.end(), '-', '_');
      overrides[tok] = value;
    }
    const Params file_params = config_path.empty() ? Params{} : parse_config_text(read_file(config_path));
    RunConfig cfg = make_config(subcommand, action, file_params, overrides);
    cfg.seed = seed;
    cfg.output_dir = out_dir;
    cfg.tolerance_scale = tol_scale;
    return run(cfg, std::cout, std::cerr);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace relmod::cli
