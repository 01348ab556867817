#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "liepoisson/integrators.hpp"
#include "liepoisson/poisson.hpp"
#include "liepoisson/rigid_body.hpp"
#include "liepoisson/splitting.hpp"
#include "liepoisson/verify.hpp"

// Configuration, trajectory export and the report commands behind the
// command-line tool. Everything here writes to caller-supplied streams so it
// can be exercised without a process boundary.

namespace liepoisson::harness {

enum ExitCode : int {
  kExitOk = 0,
  kExitCheckFailed = 1,
  kExitConfigError = 2,
  kExitBlowUp = 3,
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class Method {
  euler,
  modified_euler,
  trapezoid,
  midpoint,
  rk,
  ruth,
  lie_trotter,
  lie_trotter_frozen,
  strang,
  yoshida,
};

enum class System { rigid_body, harmonic_oscillator, example31 };

struct RunConfig {
  Method method = Method::lie_trotter;
  std::string tableau;  // name or inline "a11,a12;a21,a22|b1,b2"
  int order = 4;        // yoshida only

  System system = System::rigid_body;
  double I1 = 2.0;
  double I3 = 1.0;
  double A = 1.0;  // example31: H = A x1 + B x2, RK coefficients a_coef, b_coef
  double B = 0.0;
  double a_coef = 0.5;
  double b_coef = 1.0;

  std::vector<double> initial_state;  // empty: system default
  double h = 0.01;
  long steps = 100;
  long sample_every = 1;
  std::uint64_t seed = 0;
  double fd_eps = kDefaultFdEps;
  std::string output = "-";
  ImplicitSolverConfig solver;

  // verify
  std::string check;
  std::string observable;
  int samples = 10;

  // order
  std::vector<double> h_list{0.1, 0.05, 0.025, 0.0125};
  double T = 1.0;
};

// Parsing.

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

inline double parse_plain_number(std::string_view s, std::string_view key,
                                 bool finite_only = true) {
  double v = 0.0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  if (!s.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || s.empty()) {
    throw ConfigError(std::string(key) + ": not a number: '" + std::string(s) + "'");
  }
  if (finite_only && !std::isfinite(v)) throw ConfigError(std::string(key) + ": must be finite");
  return v;
}

}  // namespace detail

/// Parses a real number; "p/q" fractions are accepted.
inline double parse_real(std::string_view text, std::string_view key = "value") {
  const std::string s = detail::trim(text);
  const auto slash = s.find('/');
  if (slash == std::string::npos) return detail::parse_plain_number(s, key);
  const double den = detail::parse_plain_number(detail::trim(s.substr(slash + 1)), key);
  if (den == 0.0) throw ConfigError(std::string(key) + ": zero denominator");
  return detail::parse_plain_number(detail::trim(s.substr(0, slash)), key) / den;
}

inline std::vector<double> parse_real_list(std::string_view text,
                                           std::string_view key = "list") {
  std::vector<double> out;
  std::string item;
  std::istringstream in{std::string(text)};
  while (std::getline(in, item, ',')) out.push_back(parse_real(item, key));
  if (out.empty()) throw ConfigError(std::string(key) + ": empty list");
  return out;
}

inline long parse_integer(std::string_view text, std::string_view key) {
  const std::string s = detail::trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
    throw ConfigError(std::string(key) + ": not an integer: '" + s + "'");
  }
  return v;
}

inline bool parse_bool(std::string_view text, std::string_view key) {
  const std::string s = detail::trim(text);
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError(std::string(key) + ": not a boolean: '" + s + "'");
}

/// Tableau by built-in name or inline "a11,a12;a21,a22|b1,b2".
inline ButcherTableau parse_tableau(std::string_view spec) {
  const std::string s = detail::trim(spec);
  if (auto named = tableaus::by_name(s)) return *named;
  const auto bar = s.find('|');
  if (bar == std::string::npos) throw ConfigError("tableau: unknown name '" + s + "'");
  const std::vector<double> b = parse_real_list(s.substr(bar + 1), "tableau");
  const auto n = static_cast<Eigen::Index>(b.size());
  Matrix a(n, n);
  std::istringstream rows(s.substr(0, bar));
  std::string row;
  Eigen::Index i = 0;
  while (std::getline(rows, row, ';')) {
    const auto entries = parse_real_list(row, "tableau");
    if (i >= n || static_cast<Eigen::Index>(entries.size()) != n) {
      throw ConfigError("tableau: a must be s x s with s = length of b");
    }
    for (Eigen::Index j = 0; j < n; ++j) a(i, j) = entries[static_cast<std::size_t>(j)];
    ++i;
  }
  if (i != n) throw ConfigError("tableau: a must be s x s with s = length of b");
  return ButcherTableau(std::move(a), Eigen::Map<const StateVector>(b.data(), n), "inline");
}

inline Method parse_method(std::string_view name) {
  static const std::pair<std::string_view, Method> table[] = {
      {"euler", Method::euler},
      {"modified_euler", Method::modified_euler},
      {"trapezoid", Method::trapezoid},
      {"midpoint", Method::midpoint},
      {"gauss_legendre", Method::midpoint},
      {"rk", Method::rk},
      {"ruth", Method::ruth},
      {"lie_trotter", Method::lie_trotter},
      {"lie_trotter_frozen", Method::lie_trotter_frozen},
      {"strang", Method::strang},
      {"yoshida", Method::yoshida},
  };
  for (const auto& [key, m] : table)
    if (key == name) return m;
  throw ConfigError("method: unknown '" + std::string(name) + "'");
}

inline System parse_system(std::string_view name) {
  if (name == "rigid_body") return System::rigid_body;
  if (name == "harmonic_oscillator") return System::harmonic_oscillator;
  if (name == "example31") return System::example31;
  throw ConfigError("system: unknown '" + std::string(name) + "'");
}

/// Flat key/value settings; keys use '-' separators ("sample-every").
using Settings = std::map<std::string, std::string>;

inline std::string normalize_key(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return key;
}

/// Reads "key = value" lines. '#' starts a comment outside quotes; values
/// may be wrapped in double quotes.
inline Settings read_settings(std::istream& in) {
  Settings out;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(lineno) + ": expected key = value");
    }
    std::string key = normalize_key(detail::trim(t.substr(0, eq)));
    std::string value = detail::trim(t.substr(eq + 1));
    if (!value.empty() && value.front() == '"') {
      const auto close = value.find('"', 1);
      const std::string rest = close == std::string::npos ? "" : detail::trim(value.substr(close + 1));
      if (close == std::string::npos || !(rest.empty() || rest.front() == '#')) {
        throw ConfigError("config line " + std::to_string(lineno) + ": bad quoting");
      }
      value = value.substr(1, close - 1);
    } else {
      value = detail::trim(value.substr(0, value.find('#')));
    }
    if (key.empty()) throw ConfigError("config line " + std::to_string(lineno) + ": empty key");
    out[key] = value;
  }
  return out;
}

/// Builds a RunConfig from settings and validates it.
inline RunConfig config_from_settings(const Settings& settings) {
  RunConfig cfg;
  bool frozen = false;
  for (const auto& [raw_key, value] : settings) {
    const std::string key = normalize_key(raw_key);
    if (key == "method") {
      std::string name = value;
      // "yoshida6" is shorthand for method = yoshida, order = 6.
      if (name.rfind("yoshida", 0) == 0 && name.size() > 7) {
        cfg.order = static_cast<int>(parse_integer(name.substr(7), "method"));
        name = "yoshida";
      }
      cfg.method = parse_method(name);
    } else if (key == "tableau") cfg.tableau = value;
    else if (key == "order") cfg.order = static_cast<int>(parse_integer(value, key));
    else if (key == "system") cfg.system = parse_system(value);
    else if (key == "I1") cfg.I1 = parse_real(value, key);
    else if (key == "I3") cfg.I3 = parse_real(value, key);
    else if (key == "A") cfg.A = parse_real(value, key);
    else if (key == "B") cfg.B = parse_real(value, key);
    else if (key == "a-coef") cfg.a_coef = parse_real(value, key);
    else if (key == "b-coef") cfg.b_coef = parse_real(value, key);
    else if (key == "m0") cfg.initial_state = parse_real_list(value, key);
    else if (key == "h") cfg.h = parse_real(value, key);
    else if (key == "steps") cfg.steps = parse_integer(value, key);
    else if (key == "sample-every") cfg.sample_every = parse_integer(value, key);
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_integer(value, key));
    else if (key == "fd-eps") cfg.fd_eps = parse_real(value, key);
    else if (key == "output") cfg.output = value;
    else if (key == "check") cfg.check = value;
    else if (key == "observable") cfg.observable = value;
    else if (key == "samples") cfg.samples = static_cast<int>(parse_integer(value, key));
    else if (key == "h-list") cfg.h_list = parse_real_list(value, key);
    else if (key == "T") cfg.T = parse_real(value, key);
    else if (key == "frozen") frozen = parse_bool(value, key);
    else if (key == "tolerance") cfg.solver.tolerance = parse_real(value, key);
    else if (key == "max-iterations") cfg.solver.max_iterations = static_cast<int>(parse_integer(value, key));
    else if (key == "solver") {
      if (value == "fixed_point") cfg.solver.strategy = SolverStrategy::fixed_point;
      else if (value == "newton_fd") cfg.solver.strategy = SolverStrategy::newton_fd;
      else throw ConfigError("solver: unknown '" + value + "'");
    } else {
      throw ConfigError("unknown setting '" + raw_key + "'");
    }
  }
  if (frozen) {
    if (cfg.method != Method::lie_trotter && cfg.method != Method::lie_trotter_frozen) {
      throw ConfigError("frozen: only applies to lie_trotter");
    }
    cfg.method = Method::lie_trotter_frozen;
  }
  return cfg;
}

inline Eigen::Index system_dimension(System s) {
  return s == System::rigid_body ? 3 : 2;
}

inline bool is_splitting(Method m) {
  return m == Method::lie_trotter || m == Method::lie_trotter_frozen ||
         m == Method::strang || m == Method::yoshida;
}

inline StateVector initial_state(const RunConfig& cfg) {
  const Eigen::Index n = system_dimension(cfg.system);
  if (cfg.initial_state.empty()) {
    if (cfg.system == System::rigid_body) return Eigen::Vector3d(1.0, 0.0, 1.0);
    if (cfg.system == System::harmonic_oscillator) return Eigen::Vector2d(1.0, 0.0);
    return Eigen::Vector2d(1.0, 1.0);
  }
  if (static_cast<Eigen::Index>(cfg.initial_state.size()) != n) {
    throw ConfigError("m0: expected " + std::to_string(n) + " components");
  }
  return Eigen::Map<const StateVector>(cfg.initial_state.data(), n);
}

/// zero_step_ok admits h = 0, used by the eigenvalue probe.
inline void validate(const RunConfig& cfg, bool zero_step_ok = false) {
  if (!std::isfinite(cfg.h) || !(cfg.h > 0.0 || (zero_step_ok && cfg.h == 0.0))) {
    throw ConfigError(zero_step_ok ? "h: must be finite and >= 0" : "h: must be finite and > 0");
  }
  if (cfg.steps < 1) throw ConfigError("steps: must be >= 1");
  if (cfg.sample_every < 1) throw ConfigError("sample-every: must be >= 1");
  if (!(cfg.fd_eps > 0.0)) throw ConfigError("fd-eps: must be > 0");
  if (cfg.samples < 0) throw ConfigError("samples: must be >= 0");
  if (cfg.method == Method::ruth && cfg.system != System::harmonic_oscillator) {
    throw ConfigError("method ruth requires system harmonic_oscillator");
  }
  if (is_splitting(cfg.method) && cfg.system != System::rigid_body) {
    throw ConfigError("splitting methods require system rigid_body");
  }
  if (cfg.method == Method::yoshida && (cfg.order < 4 || cfg.order % 2 != 0)) {
    throw ConfigError("order: yoshida needs an even order >= 4");
  }
  if (cfg.system == System::rigid_body && !(cfg.I1 > cfg.I3 && cfg.I3 > 0.0)) {
    throw ConfigError("inertia: require I1 > I3 > 0");
  }
  try {
    cfg.solver.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  const StateVector x0 = initial_state(cfg);
  if (!x0.allFinite()) throw ConfigError("m0: non-finite entry");
}

// Systems and maps.

inline PoissonSystem build_system(const RunConfig& cfg) {
  switch (cfg.system) {
    case System::rigid_body: return make_rigid_body_system(RigidBodyParams(cfg.I1, cfg.I3));
    case System::harmonic_oscillator: return make_harmonic_oscillator();
    case System::example31: return make_affine_planar_system(cfg.A, cfg.B);
  }
  throw ConfigError("unknown system");
}

inline ButcherTableau resolve_tableau(const RunConfig& cfg) {
  if (!cfg.tableau.empty()) return parse_tableau(cfg.tableau);
  if (cfg.system == System::example31) {
    return ButcherTableau(Matrix::Constant(1, 1, cfg.a_coef),
                          StateVector::Constant(1, cfg.b_coef), "example31");
  }
  return tableaus::rk4();
}

inline OneStepMap build_map(const RunConfig& cfg) {
  const Eigen::Index n = system_dimension(cfg.system);
  const ImplicitSolverConfig solver = cfg.solver;
  switch (cfg.method) {
    case Method::ruth:
      return {2, [](const StateVector& x, double h) -> StateVector {
                const auto y = ruth_step({x[0], x[1]}, h);
                return Eigen::Vector2d(y[0], y[1]);
              }};
    case Method::lie_trotter:
    case Method::lie_trotter_frozen: {
      const RigidBodyParams p(cfg.I1, cfg.I3);
      const bool frozen = cfg.method == Method::lie_trotter_frozen;
      return {3, [p, frozen](const StateVector& x, double h) -> StateVector {
                return lie_trotter_rigid_step(p, x.head<3>(), h, frozen);
              }};
    }
    case Method::strang:
    case Method::yoshida: {
      const int order = cfg.method == Method::strang ? 2 : cfg.order;
      SplitScheme scheme = make_rigid_body_scheme(RigidBodyParams(cfg.I1, cfg.I3), order);
      return {3, [scheme, order](const StateVector& x, double h) {
                return composition_step(scheme, x, h, order);
              }};
    }
    default: break;
  }

  const VectorField f = cfg.system == System::rigid_body
                            ? rigid_body_field(RigidBodyParams(cfg.I1, cfg.I3))
                            : hamiltonian_field(build_system(cfg));
  switch (cfg.method) {
    case Method::euler:
      return {n, [f](const StateVector& x, double h) { return explicit_euler_step(f, x, h); }};
    case Method::modified_euler:
      return {n, [f, solver](const StateVector& x, double h) {
                return modified_euler_step(f, x, h, solver);
              }};
    case Method::trapezoid:
      return {n, [f, solver](const StateVector& x, double h) {
                return trapezoid_step(f, x, h, solver);
              }};
    case Method::midpoint:
      return {n, [f, solver](const StateVector& x, double h) {
                return gauss_legendre_step(f, x, h, solver);
              }};
    case Method::rk: {
      const ButcherTableau tab = resolve_tableau(cfg);
      return {n, [f, tab, solver](const StateVector& x, double h) {
                return rk_step(f, tab, x, h, solver);
              }};
    }
    default: break;
  }
  throw ConfigError("unsupported method/system combination");
}

// Trajectories and CSV.

struct TrajectoryRow {
  long step;
  double t;
  std::vector<double> values;  // state components, H, then C when defined

  bool operator==(const TrajectoryRow&) const = default;
};

struct TrajectoryRecord {
  std::vector<std::string> columns;
  std::vector<TrajectoryRow> rows;

  bool operator==(const TrajectoryRecord&) const = default;
};

inline std::vector<std::string> csv_columns(System s) {
  switch (s) {
    case System::rigid_body: return {"step", "t", "m1", "m2", "m3", "H", "C"};
    case System::harmonic_oscillator: return {"step", "t", "q", "p", "H"};
    case System::example31: return {"step", "t", "x1", "x2", "H"};
  }
  return {};
}

/// 17 significant digits, locale independent.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

/// Shortest round-trip representation, for human-facing reports.
inline std::string format_short(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline void write_csv_header(std::ostream& out, const std::vector<std::string>& cols) {
  for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
  out << '\n';
}

inline void write_csv_row(std::ostream& out, const TrajectoryRow& row) {
  out << row.step << ',' << format_real(row.t);
  for (double v : row.values) out << ',' << format_real(v);
  out << '\n';
}

inline void write_csv(std::ostream& out, const TrajectoryRecord& rec) {
  write_csv_header(out, rec.columns);
  for (const auto& row : rec.rows) write_csv_row(out, row);
}

inline TrajectoryRecord read_csv(std::istream& in) {
  TrajectoryRecord rec;
  std::string line;
  if (!std::getline(in, line)) throw ConfigError("csv: missing header");
  std::istringstream hdr(line);
  for (std::string col; std::getline(hdr, col, ',');) rec.columns.push_back(col);
  if (rec.columns.size() < 3) throw ConfigError("csv: header too short");
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream cells(line);
    std::string cell;
    std::getline(cells, cell, ',');
    TrajectoryRow row{parse_integer(cell, "step"), 0.0, {}};
    std::getline(cells, cell, ',');
    row.t = parse_real(cell, "t");
    // a blown-up run can leave inf or nan in the derived columns
    while (std::getline(cells, cell, ',')) {
      row.values.push_back(detail::parse_plain_number(detail::trim(cell), "csv", false));
    }
    if (row.values.size() + 2 != rec.columns.size()) throw ConfigError("csv: ragged row");
    rec.rows.push_back(std::move(row));
  }
  return rec;
}

namespace detail {

inline TrajectoryRow make_row(const PoissonSystem& system, long step, double h,
                              const StateVector& x) {
  TrajectoryRow row{step, static_cast<double>(step) * h, {}};
  row.values.assign(x.data(), x.data() + x.size());
  row.values.push_back(system.hamiltonian()(x));
  for (const auto& c : system.casimirs()) row.values.push_back(c(x));
  return row;
}

}  // namespace detail

/// Runs the configured trajectory, handing each sampled row to `sink`.
/// Rows: step 0, every sample_every-th step, and the final step.
/// Throws BlowUpError at the first non-finite state.
template <class Sink>
void run_trajectory(const RunConfig& cfg, Sink&& sink) {
  validate(cfg);
  const PoissonSystem system = build_system(cfg);
  const OneStepMap map = build_map(cfg);
  StateVector x = initial_state(cfg);
  sink(detail::make_row(system, 0, cfg.h, x));
  for (long n = 1; n <= cfg.steps; ++n) {
    x = map(x, cfg.h);
    if (!x.allFinite()) throw BlowUpError(n);
    if (n % cfg.sample_every == 0 || n == cfg.steps) {
      sink(detail::make_row(system, n, cfg.h, x));
    }
  }
}

inline TrajectoryRecord integrate(const RunConfig& cfg) {
  TrajectoryRecord rec{csv_columns(cfg.system), {}};
  run_trajectory(cfg, [&](TrajectoryRow row) { rec.rows.push_back(std::move(row)); });
  return rec;
}

// Commands. Each returns a process exit code.

namespace detail {

template <class Body>
int guarded(std::ostream& err, Body&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  } catch (const BlowUpError& e) {
    err << "numerical blow-up: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const NonConvergenceError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitBlowUp;
  } catch (const std::invalid_argument& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfigError;
  }
}

inline void warn_about(const RunConfig& cfg, std::ostream& err) {
  if (cfg.method == Method::yoshida && exceeds_recommended_order(cfg.order)) {
    const auto count = composition_step_count(cfg.order / 2);
    err << "warning: order " << cfg.order << " uses " << count.second_order_calls
        << " second-order substeps per step\n";
  }
  if (cfg.method == Method::rk || cfg.check == "tableau") {
    const ButcherTableau tab = resolve_tableau(cfg);
    if (!tab.is_consistent()) {
      err << "warning: tableau '" << tab.name() << "' has sum(b) = "
          << format_short(tab.b().sum()) << " != 1\n";
    }
  }
}

inline std::string format_state(const StateVector& x) {
  std::string s = "(";
  for (Eigen::Index i = 0; i < x.size(); ++i) s += (i ? ", " : "") + format_short(x[i]);
  return s + ")";
}

}  // namespace detail

/// Writes the trajectory as CSV. Rows already written stay in `out` when the
/// run blows up.
inline int cmd_integrate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&] {
    validate(cfg);
    detail::warn_about(cfg, err);
    write_csv_header(out, csv_columns(cfg.system));
    try {
      run_trajectory(cfg, [&](const TrajectoryRow& row) { write_csv_row(out, row); });
    } catch (const BlowUpError&) {
      out.flush();
      throw;
    }
    return static_cast<int>(kExitOk);
  });
}

/// States examined by the Poisson check: the initial state, then `samples`
/// seeded random states.
inline std::vector<StateVector> verification_states(const RunConfig& cfg) {
  std::vector<StateVector> states{initial_state(cfg)};
  const Eigen::Index n = system_dimension(cfg.system);
  auto extra = cfg.system == System::rigid_body
                   ? sample_shell(n, cfg.samples, cfg.seed, 0.5, 2.0)
                   : sample_box(n, cfg.samples, cfg.seed, -1.0, 1.0);
  states.insert(states.end(), extra.begin(), extra.end());
  return states;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    std::string check = cfg.check;
    std::string observable = cfg.observable;
    if (check.rfind("drift:", 0) == 0) {
      observable = check.substr(6);
      check = "drift";
    }

    if (check == "tableau") {
      detail::warn_about(cfg, err);
      const ButcherTableau tab = resolve_tableau(cfg);
      const Matrix r = symplectic_condition_residual(tab);
      out << "tableau " << tab.name() << " (s = " << tab.stages() << ")\n";
      out << "residual b_i a_ij + b_j a_ji - b_i b_j:\n[";
      for (Eigen::Index i = 0; i < r.rows(); ++i) {
        out << (i ? ",\n [" : "[");
        for (Eigen::Index j = 0; j < r.cols(); ++j) out << (j ? ", " : "") << format_short(r(i, j));
        out << ']';
      }
      const double worst = liepoisson::detail::max_abs(r);
      const bool pass = worst <= kSymplecticTableauTolerance;
      out << "]\nmax residual " << format_short(worst) << " (threshold "
          << format_short(kSymplecticTableauTolerance) << "): "
          << (pass ? "PASS" : "FAIL") << '\n';
      return pass ? kExitOk : kExitCheckFailed;
    }

    validate(cfg);
    detail::warn_about(cfg, err);
    const PoissonSystem system = build_system(cfg);
    const OneStepMap map = build_map(cfg);

    if (check == "poisson" || check == "symplectic2d") {
      const bool planar = check == "symplectic2d";
      if (planar && map.dimension != 2) {
        throw ConfigError("check symplectic2d requires a two-dimensional system");
      }
      const double threshold = planar ? kSymplecticResidualTolerance : kPoissonResidualTolerance;
      double worst = 0.0;
      const auto states = verification_states(cfg);
      for (std::size_t i = 0; i < states.size(); ++i) {
        const double r = planar ? symplectic_residual_2d(map, states[i], cfg.h, cfg.fd_eps)
                                : poisson_residual(system, map, states[i], cfg.h, cfg.fd_eps);
        worst = std::max(worst, r);
        out << "state " << i << ' ' << detail::format_state(states[i]) << " residual "
            << format_short(r) << '\n';
      }
      const bool pass = worst <= threshold;
      out << check << " max residual " << format_short(worst) << " (threshold "
          << format_short(threshold) << "): " << (pass ? "PASS" : "FAIL") << '\n';
      return pass ? kExitOk : kExitCheckFailed;
    }

    if (check == "drift") {
      if (observable.empty()) observable = system.casimirs().empty() ? "hamiltonian" : "casimir";
      ScalarField field;
      if (observable == "hamiltonian" || observable == "H") {
        field = system.hamiltonian();
      } else if (observable == "casimir" || observable == "C") {
        if (system.casimirs().empty()) throw ConfigError("observable: system has no Casimir");
        field = system.casimirs().front();
      } else {
        throw ConfigError("observable: unknown '" + observable + "'");
      }
      const StateVector x0 = initial_state(cfg);
      const DriftReport rep = drift(map, field, x0, cfg.h, cfg.steps);
      const double threshold = kConservedDriftTolerance * std::max(1.0, std::abs(field(x0)));
      const bool pass = rep.max_abs_deviation <= threshold;
      out << "drift of " << observable << " over " << cfg.steps << " steps, h = "
          << format_short(cfg.h) << '\n'
          << "max |deviation| " << format_short(rep.max_abs_deviation) << '\n'
          << "final deviation " << format_short(rep.final_deviation) << '\n'
          << "conserved to " << format_short(threshold) << ": " << (pass ? "PASS" : "FAIL")
          << '\n';
      return pass ? kExitOk : kExitCheckFailed;
    }

    throw ConfigError("check: expected poisson, symplectic2d, drift or tableau");
  });
}

inline int cmd_order(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    validate(cfg);
    if (cfg.system != System::rigid_body) {
      throw ConfigError("order: requires system rigid_body (closed-form oracle)");
    }
    detail::warn_about(cfg, err);
    const RigidBodyParams p(cfg.I1, cfg.I3);
    const OneStepMap map = build_map(cfg);
    const Oracle oracle = [p](const StateVector& x, double t) -> StateVector {
      return exact_solution(p, x.head<3>(), t);
    };
    const OrderEstimate est =
        convergence_order(map, oracle, initial_state(cfg), cfg.T, cfg.h_list);
    out << "h,error\n";
    for (std::size_t i = 0; i < est.h_values.size(); ++i) {
      out << format_short(est.h_values[i]) << ',' << format_short(est.errors[i]) << '\n';
    }
    if (est.exact) {
      out << "slope inf (map reproduces the exact solution)\n";
    } else {
      out << "slope " << format_short(est.slope) << '\n';
    }
    return static_cast<int>(kExitOk);
  });
}

/// Tolerance on |lambda| and on the root product.
inline constexpr double kUnitModulusTolerance = 1e-10;

inline int cmd_eig(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return detail::guarded(err, [&]() -> int {
    validate(cfg, true);
    if (cfg.system != System::rigid_body) throw ConfigError("eig: requires system rigid_body");
    const RigidBodyParams p(cfg.I1, cfg.I3);
    const StateVector m = initial_state(cfg);
    const CharacteristicRoots roots = characteristic_roots(step_propagator(p, m.head<3>(), cfg.h));
    bool pass = std::abs(roots.product - std::complex<double>(1.0)) <= kUnitModulusTolerance;
    out << "R = M N P at m = " << detail::format_state(m) << ", h = " << format_short(cfg.h)
        << '\n';
    for (int i = 0; i < 3; ++i) {
      pass = pass && std::abs(roots.moduli[i] - 1.0) <= kUnitModulusTolerance;
      out << "lambda" << i + 1 << " = " << format_real(roots.roots[i].real())
          << (roots.roots[i].imag() < 0.0 ? " - " : " + ")
          << format_real(std::abs(roots.roots[i].imag())) << "i  |lambda| = "
          << format_real(roots.moduli[i]) << '\n';
    }
    out << "product = " << format_real(roots.product.real())
        << (roots.product.imag() < 0.0 ? " - " : " + ")
        << format_real(std::abs(roots.product.imag())) << "i\n"
        << "method: "
        << (roots.method == RootMethod::characteristic_polynomial ? "characteristic polynomial"
                                                                  : "rotation angle")
        << '\n'
        << "unit moduli and product within " << format_short(kUnitModulusTolerance) << ": "
        << (pass ? "PASS" : "FAIL") << '\n';
    return pass ? kExitOk : kExitCheckFailed;
  });
}

}  // namespace liepoisson::harness
