#include "btcsense/runner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include <json.hpp>
#include <yaml-cpp/yaml.h>

#include "btcsense/analytics.hpp"
#include "btcsense/linalg.hpp"
#include "btcsense/meanfield.hpp"
#include "btcsense/metrology.hpp"
#include "btcsense/observables.hpp"
#include "btcsense/parallel.hpp"

namespace btc::runner {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::vector<std::pair<Experiment, const char*>> kExperiments = {
    {Experiment::QfiScan, "qfi-scan"},
    {Experiment::HomodyneScan, "homodyne-scan"},
    {Experiment::AbsorberScan, "absorber-scan"},
    {Experiment::Scaling, "scaling"},
    {Experiment::PhaseDiagram, "phase-diagram"},
    {Experiment::MeanField, "meanfield"},
    {Experiment::SuperspinBenchmark, "superspin-benchmark"},
};

}  // namespace

const char* to_string(Experiment e) {
  for (const auto& [k, v] : kExperiments)
    if (k == e) return v;
  return "unknown";
}

std::optional<Experiment> experiment_from_string(const std::string& name) {
  for (const auto& [k, v] : kExperiments)
    if (name == v) return k;
  return std::nullopt;
}

std::vector<std::string> experiment_names() {
  std::vector<std::string> out;
  for (const auto& [k, v] : kExperiments) out.emplace_back(v);
  return out;
}

// ---- parsing -------------------------------------------------------------

namespace {

std::vector<double> parse_values(const YAML::Node& n, const std::string& field,
                                 std::vector<std::string>& errors) {
  std::vector<double> out;
  try {
    if (n.IsScalar()) {
      out.push_back(n.as<double>());
    } else if (n.IsSequence()) {
      for (const auto& x : n) out.push_back(x.as<double>());
    } else if (n.IsMap() && n["linspace"]) {
      const auto v = n["linspace"].as<std::vector<double>>();
      if (v.size() != 3 || v[2] < 1 || v[2] != std::floor(v[2])) {
        errors.push_back(field + ": linspace needs [start, stop, count >= 1]");
        return {};
      }
      const int count = static_cast<int>(v[2]);
      for (int i = 0; i < count; ++i) {
        out.push_back(count == 1 ? v[0] : v[0] + (v[1] - v[0]) * i / (count - 1));
      }
    } else if (n.IsMap() && n["range"]) {
      const auto v = n["range"].as<std::vector<double>>();
      if (v.size() != 3 || !(v[2] > 0.0)) {
        errors.push_back(field + ": range needs [start, stop, step > 0]");
        return {};
      }
      for (long i = 0;; ++i) {
        const double x = v[0] + i * v[2];
        if (x > v[1] + 1e-12 * std::max(1.0, std::abs(v[1]))) break;
        out.push_back(x);
      }
    } else {
      errors.push_back(field + ": expected a number, a list, {linspace: ...} or {range: ...}");
    }
  } catch (const YAML::Exception&) {
    errors.push_back(field + ": values must be numeric");
  }
  return out;
}

template <class T>
void read_scalar(const YAML::Node& n, const std::string& field, T& dst,
                 std::vector<std::string>& errors) {
  if (!n) return;
  try {
    dst = n.as<T>();
  } catch (const YAML::Exception&) {
    errors.push_back(field + ": has the wrong type");
  }
}

void check_keys(const YAML::Node& n, const std::string& where, const std::set<std::string>& allowed,
                std::vector<std::string>& errors) {
  if (!n) return;
  if (!n.IsMap()) {
    errors.push_back(where + ": must be a mapping");
    return;
  }
  for (const auto& kv : n) {
    const auto key = kv.first.as<std::string>();
    if (!allowed.count(key)) errors.push_back(where + "." + key + ": unknown key");
  }
}

void apply_override(YAML::Node& root, const std::string& assignment,
                    std::vector<std::string>& errors) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    errors.push_back("override '" + assignment + "': expected key.path=value");
    return;
  }
  std::vector<std::string> path;
  std::stringstream ss(assignment.substr(0, eq));
  for (std::string part; std::getline(ss, part, '.');) path.push_back(part);
  YAML::Node value;
  try {
    value = YAML::Load(assignment.substr(eq + 1));
  } catch (const YAML::Exception& e) {
    errors.push_back("override '" + assignment + "': " + e.what());
    return;
  }
  // yaml-cpp nodes are handles; walk by reassignment of copies.
  std::function<void(YAML::Node, std::size_t)> set = [&](YAML::Node node, std::size_t i) {
    if (i + 1 == path.size()) {
      node[path[i]] = value;
      return;
    }
    if (!node[path[i]] || !node[path[i]].IsMap()) node[path[i]] = YAML::Node(YAML::NodeType::Map);
    set(node[path[i]], i + 1);
  };
  set(root, 0);
}

}  // namespace

RunSpec parse_spec(const std::string& yaml_text, const std::vector<std::string>& overrides,
                   std::vector<std::string>& errors) {
  RunSpec spec;
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    errors.push_back(std::string("config: ") + e.what());
    return spec;
  }
  if (!root || root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) {
    errors.push_back("config: top level must be a mapping");
    return spec;
  }
  for (const auto& o : overrides) apply_override(root, o, errors);

  check_keys(root, "config", {"experiment", "name", "params", "options", "tolerances"}, errors);
  check_keys(root["params"], "params", {"N", "omega_ratio", "dphi", "phase_offset", "kappa"},
             errors);
  check_keys(root["options"], "options",
             {"quantity", "method", "t_end", "dt", "trajectory", "sample_every", "tau_max",
              "tau_points"},
             errors);
  check_keys(root["tolerances"], "tolerances", {"eigen_tol", "h_s", "h_phi", "near_critical"},
             errors);

  if (root["experiment"]) {
    const auto name = root["experiment"].as<std::string>();
    spec.experiment = experiment_from_string(name);
    if (!spec.experiment) errors.push_back("experiment: unknown value '" + name + "'");
  }
  read_scalar(root["name"], "name", spec.name, errors);

  if (const auto p = root["params"]) {
    if (p["N"]) {
      for (double v : parse_values(p["N"], "params.N", errors)) {
        if (v != std::floor(v)) {
          errors.push_back("params.N: must be integers");
          break;
        }
        spec.N.push_back(static_cast<int>(v));
      }
    }
    if (p["omega_ratio"]) spec.omega_ratio = parse_values(p["omega_ratio"], "params.omega_ratio", errors);
    if (p["dphi"]) spec.dphi = parse_values(p["dphi"], "params.dphi", errors);
    if (p["phase_offset"]) {
      spec.phase_offset = parse_values(p["phase_offset"], "params.phase_offset", errors);
    }
    read_scalar(p["kappa"], "params.kappa", spec.kappa, errors);
  }
  if (const auto o = root["options"]) {
    read_scalar(o["quantity"], "options.quantity", spec.quantity, errors);
    read_scalar(o["method"], "options.method", spec.method, errors);
    read_scalar(o["t_end"], "options.t_end", spec.t_end, errors);
    read_scalar(o["dt"], "options.dt", spec.dt, errors);
    read_scalar(o["trajectory"], "options.trajectory", spec.trajectory, errors);
    read_scalar(o["sample_every"], "options.sample_every", spec.sample_every, errors);
    read_scalar(o["tau_max"], "options.tau_max", spec.tau_max, errors);
    read_scalar(o["tau_points"], "options.tau_points", spec.tau_points, errors);
  }
  if (const auto t = root["tolerances"]) {
    read_scalar(t["eigen_tol"], "tolerances.eigen_tol", spec.tol.eigen_tol, errors);
    read_scalar(t["h_s"], "tolerances.h_s", spec.tol.h_s, errors);
    read_scalar(t["h_phi"], "tolerances.h_phi", spec.tol.h_phi, errors);
    read_scalar(t["near_critical"], "tolerances.near_critical", spec.tol.near_critical, errors);
  }
  if (spec.name.empty() && spec.experiment) spec.name = to_string(*spec.experiment);

  YAML::Emitter em;
  em << root;
  spec.canonical = em.c_str();
  return spec;
}

// ---- validation ----------------------------------------------------------

std::vector<std::string> validate(const RunSpec& s) {
  std::vector<std::string> e;
  if (!s.experiment) {
    e.push_back("experiment: missing");
    return e;
  }
  const Experiment x = *s.experiment;
  const bool needs_n = x != Experiment::MeanField;
  const bool needs_dphi = x == Experiment::AbsorberScan || x == Experiment::PhaseDiagram ||
                          x == Experiment::MeanField ||
                          (x == Experiment::Scaling && s.quantity == "absorber");

  if (!(s.kappa > 0.0)) e.push_back("params.kappa: must be > 0");
  if (needs_n && s.N.empty()) e.push_back("params.N: range is empty");
  for (int n : s.N) {
    if (n < 1) {
      e.push_back("params.N: values must be >= 1");
      break;
    }
  }
  if (s.omega_ratio.empty()) e.push_back("params.omega_ratio: range is empty");
  for (double r : s.omega_ratio) {
    if (!(r >= 0.0) || !std::isfinite(r)) {
      e.push_back("params.omega_ratio: values must be finite and >= 0");
      break;
    }
  }
  if (needs_dphi && s.dphi.empty()) e.push_back("params.dphi: range is empty");
  for (double d : s.dphi) {
    if (!(d > -kPi && d <= kPi)) {
      e.push_back("params.dphi: values must lie in (-pi, pi]");
      break;
    }
  }
  for (double o : s.phase_offset) {
    if (!(o > -kPi && o <= kPi)) {
      e.push_back("params.phase_offset: values must lie in (-pi, pi]");
      break;
    }
  }
  const bool absorber = x == Experiment::AbsorberScan ||
                        (x == Experiment::Scaling && s.quantity == "absorber");
  if (absorber && std::count(s.dphi.begin(), s.dphi.end(), 0.0) > 0) {
    e.push_back("params.dphi: contains 0, where the absorber signal is degenerate (no first-order slope)");
  }
  if (x == Experiment::HomodyneScan && s.phase_offset.empty()) {
    e.push_back("params.phase_offset: range is empty");
  }
  if (x == Experiment::Scaling) {
    if (s.quantity != "absorber" && s.quantity != "qfi") {
      e.push_back("options.quantity: must be 'absorber' or 'qfi'");
    }
    if (std::set<int>(s.N.begin(), s.N.end()).size() < 3) {
      e.push_back("params.N: scaling needs at least 3 distinct sizes");
    }
    if (s.omega_ratio.size() > 1) e.push_back("params.omega_ratio: scaling takes a single value");
    if (s.quantity == "absorber" && s.dphi.size() > 1) {
      e.push_back("params.dphi: scaling takes a single value");
    }
  }
  if (x == Experiment::PhaseDiagram && s.N.size() > 1) {
    e.push_back("params.N: phase-diagram takes a single value");
  }
  if (x == Experiment::QfiScan && s.method != "both" && s.method != "spectral" &&
      s.method != "correlation") {
    e.push_back("options.method: must be 'spectral', 'correlation' or 'both'");
  }
  if (x == Experiment::MeanField) {
    if (!(s.dt > 0.0)) e.push_back("options.dt: must be > 0");
    if (!(s.t_end >= 50.0)) e.push_back("options.t_end: must be >= 50 for the persistence test");
    if (s.sample_every < 1) e.push_back("options.sample_every: must be >= 1");
  }
  if (x == Experiment::SuperspinBenchmark) {
    if (!(s.tau_max > 0.0)) e.push_back("options.tau_max: must be > 0");
    if (s.tau_points < 2) e.push_back("options.tau_points: must be >= 2");
  }
  if (!(s.tol.eigen_tol > 0.0)) e.push_back("tolerances.eigen_tol: must be > 0");
  if (!(s.tol.h_s > 0.0)) e.push_back("tolerances.h_s: must be > 0");
  if (!(s.tol.h_phi > 0.0)) e.push_back("tolerances.h_phi: must be > 0");
  if (!(s.tol.near_critical >= 0.0)) e.push_back("tolerances.near_critical: must be >= 0");
  return e;
}

// ---- execution -----------------------------------------------------------

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Row {
  std::vector<Cell> cells;
  std::vector<std::string> flags;
  std::string params;
};

std::string join(const std::vector<std::string>& v, const char* sep) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? sep : "") + v[i];
  return out;
}

std::vector<std::string> flag_names(const std::vector<Flag>& flags) {
  std::vector<std::string> out;
  for (Flag f : flags) out.emplace_back(btc::to_string(f));
  return out;
}

void merge(std::vector<std::string>& into, const std::vector<std::string>& more) {
  for (const auto& m : more)
    if (std::find(into.begin(), into.end(), m) == into.end()) into.push_back(m);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.16e", v);
  return buf;
}

MetrologyOptions metrology_options(const RunSpec& s) {
  MetrologyOptions o;
  o.h_s = s.tol.h_s;
  o.h_phi = s.tol.h_phi;
  o.near_critical = s.tol.near_critical;
  o.spectral.tol = s.tol.eigen_tol;
  return o;
}

SpectralOptions spectral_options(const RunSpec& s) {
  SpectralOptions o;
  o.tol = s.tol.eigen_tol;
  return o;
}

template <class F>
Row guarded(const std::string& params, std::size_t ncells, F&& body) {
  Row r;
  r.params = params;
  try {
    body(r);
  } catch (const std::exception& ex) {
    r.cells.resize(ncells, Cell(kNaN));
    r.flags.push_back(std::string("error: ") + ex.what());
  }
  return r;
}

struct Grid3 {
  std::vector<int> N;
  std::vector<double> a, b;
  std::size_t size() const { return N.size() * a.size() * b.size(); }
  std::tuple<int, double, double> at(std::size_t i) const {
    const std::size_t nb = b.size(), na = a.size();
    return {N[i / (na * nb)], a[(i / nb) % na], b[i % nb]};
  }
};

std::string ptuple(std::initializer_list<std::pair<const char*, double>> kv) {
  std::string out;
  for (const auto& [k, v] : kv) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%s%s=%.10g", out.empty() ? "" : " ", k, v);
    out += buf;
  }
  return out;
}

Table finish(std::vector<std::string> columns, std::vector<Row>& rows, RunOutput& out) {
  Table t;
  t.columns = std::move(columns);
  t.columns.push_back("flags");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.cells.push_back(join(r.flags, ";"));
    t.rows.push_back(std::move(r.cells));
    if (!r.flags.empty()) out.flagged.push_back({i, r.params, r.flags});
  }
  return t;
}

RunOutput run_qfi_scan(const RunSpec& s, int workers) {
  const Grid3 g{s.N, s.omega_ratio, {0.0}};
  const auto mo = metrology_options(s);
  auto rows = parallel_map<Row>(g.size(), workers, [&](std::size_t i) {
    const auto [N, r, unused] = g.at(i);
    (void)unused;
    return guarded(ptuple({{"N", N}, {"omega_ratio", r}}), 9, [&](Row& row) {
      const auto p = ModelParams::at_ratio(N, r, s.kappa);
      double fs = kNaN, fe = kNaN, fc = kNaN;
      if (s.method != "correlation") {
        const auto res = qfi_rate_spectral(p, mo);
        fs = res.value;
        fe = res.error;
        merge(row.flags, flag_names(res.flags));
      }
      if (s.method != "spectral") {
        const auto res = qfi_rate_correlation(p, IntegralMethod::LinearSolve, mo);
        fc = res.value;
        merge(row.flags, flag_names(res.flags));
      }
      // each approximation only on its own side of omega_c
      const bool below = r < 1.0;
      row.cells = {long(N), r, p.omega, fs, fe, fc,
                   below ? analytics::hp_qfi_rate(p.omega, p.kappa) : kNaN,
                   below ? kNaN : analytics::superspin_qfi_rate_at(N, p.omega, p.kappa),
                   analytics::superspin_qfi_rate(N, p.kappa)};
    });
  });
  RunOutput out;
  out.table = finish({"N", "omega_ratio", "omega", "f_spectral", "f_spectral_err", "f_correlation",
                      "f_hp", "f_superspin", "f_superspin_inf"},
                     rows, out);
  return out;
}

RunOutput run_homodyne_scan(const RunSpec& s, int workers) {
  const Grid3 g{s.N, s.omega_ratio, s.phase_offset};
  const auto mo = metrology_options(s);
  auto rows = parallel_map<Row>(g.size(), workers, [&](std::size_t i) {
    const auto [N, r, off] = g.at(i);
    return guarded(ptuple({{"N", N}, {"omega_ratio", r}, {"phase_offset", off}}), 9, [&](Row& row) {
      auto p = ModelParams::at_ratio(N, r, s.kappa);
      p.phase_offset = off;
      const auto e = homodyne_error(p, mo);
      const auto f = qfi_rate_spectral(p, mo);
      merge(row.flags, flag_names(e.flags));
      merge(row.flags, flag_names(f.flags));
      const auto chk = qcrb_check(f.value, e);
      if (!chk.ok) row.flags.push_back("qcrb_violated");
      row.cells = {long(N), r, off, e.value, e.numerator, e.denominator,
                   r < 1.0 ? analytics::hp_error_homodyne(p.omega, p.kappa, off).value : kNaN, f.value,
                   chk.margin};
    });
  });
  RunOutput out;
  out.table = finish({"N", "omega_ratio", "phase_offset", "delta_phi_bar", "sigma", "dsignal",
                      "delta_phi_bar_hp", "f_qfi", "qcrb_margin"},
                     rows, out);
  return out;
}

RunOutput run_absorber_scan(const RunSpec& s, int workers) {
  const Grid3 g{s.N, s.omega_ratio, s.dphi};
  const auto mo = metrology_options(s);
  auto rows = parallel_map<Row>(g.size(), workers, [&](std::size_t i) {
    const auto [N, r, dphi] = g.at(i);
    return guarded(ptuple({{"N", N}, {"omega_ratio", r}, {"dphi", dphi}}), 10, [&](Row& row) {
      auto p = ModelParams::at_ratio(N, r, s.kappa);
      p.dphi = dphi;
      const auto e = absorber_error(p, mo);
      const auto f = qfi_rate_spectral(ModelParams::at_ratio(N, r, s.kappa), mo);
      merge(row.flags, flag_names(e.flags));
      const auto chk = qcrb_check(f.value, e);
      if (!chk.ok) row.flags.push_back("qcrb_violated");
      const Regime regime = classify_regime(p);
      const double hp =
          regime == Regime::I ? analytics::hp_error_absorber(p.omega, p.kappa, dphi).value : kNaN;
      row.cells = {long(N), r, dphi, e.value, e.numerator, e.denominator, hp,
                   std::string(to_string(regime)), f.value, chk.margin};
    });
  });
  RunOutput out;
  out.table = finish({"N", "omega_ratio", "dphi", "delta_phi_bar", "sigma", "dsignal",
                      "delta_phi_bar_hp", "regime", "f_qfi", "qcrb_margin"},
                     rows, out);
  return out;
}

RunOutput run_scaling(const RunSpec& s, int workers) {
  const auto mo = metrology_options(s);
  const double r = s.omega_ratio.front();
  const bool qfi = s.quantity == "qfi";
  auto rows = parallel_map<Row>(s.N.size(), workers, [&](std::size_t i) {
    const int N = s.N[i];
    return guarded(ptuple({{"N", N}}), 4, [&](Row& row) {
      auto p = ModelParams::at_ratio(N, r, s.kappa);
      if (qfi) {
        const auto f = qfi_rate_spectral(p, mo);
        merge(row.flags, flag_names(f.flags));
        row.cells = {std::to_string(N), f.value, f.error, kNaN};
      } else {
        p.dphi = s.dphi.front();
        const auto e = absorber_error(p, mo);
        merge(row.flags, flag_names(e.flags));
        row.cells = {std::to_string(N), e.value, e.numerator, e.denominator};
      }
    });
  });
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const double v = std::get<double>(rows[i].cells[1]);
    if (std::isfinite(v) && v > 0.0) pts.emplace_back(s.N[i], v);
  }
  Row fit_row;
  fit_row.params = "fit";
  try {
    const auto fit = fit_power_law(pts);
    // Growth exponent for the QFI, decay exponent for the error.
    const double exponent = qfi ? -fit.alpha : fit.alpha;
    char buf[64];
    std::snprintf(buf, sizeof buf, "r_squared=%.6f", fit.r_squared);
    fit_row.cells = {std::string("fit"), exponent, fit.alpha_stderr, fit.b};
    fit_row.flags.push_back(buf);
  } catch (const std::exception& ex) {
    fit_row.cells = {std::string("fit"), kNaN, kNaN, kNaN};
    fit_row.flags.push_back(std::string("error: ") + ex.what());
  }
  RunOutput out;
  std::vector<std::string> cols = qfi ? std::vector<std::string>{"N", "f_qfi", "f_err", "unused"}
                                      : std::vector<std::string>{"N", "delta_phi_bar", "sigma", "dsignal"};
  out.table = finish(cols, rows, out);
  fit_row.cells.push_back(join(fit_row.flags, ";"));
  out.table.rows.push_back(std::move(fit_row.cells));
  return out;
}

RunOutput run_phase_diagram(const RunSpec& s, int workers) {
  const int N = s.N.front();
  auto so = spectral_options(s);
  const auto cells = phase_diagram(N, s.omega_ratio, s.dphi, workers, s.kappa, so);
  std::vector<Row> rows;
  for (const auto& c : cells) {
    Row r;
    r.params = ptuple({{"omega_ratio", c.omega_over_omegac}, {"dphi", c.dphi}});
    r.cells = {c.omega_over_omegac, c.dphi, c.intensity, c.purity, c.entropy_source,
               c.entropy_decoder, std::string(to_string(c.regime))};
    if (c.error) {
      for (std::size_t k = 2; k < 6; ++k) r.cells[k] = kNaN;
      r.flags.push_back("error: " + *c.error);
    }
    rows.push_back(std::move(r));
  }
  RunOutput out;
  out.table = finish({"omega_ratio", "dphi", "intensity", "purity", "entropy_source",
                      "entropy_decoder", "regime"},
                     rows, out);
  return out;
}

RunOutput run_meanfield(const RunSpec& s, int workers) {
  const Grid3 g{{0}, s.omega_ratio, s.dphi};
  struct Res {
    Row row;
    std::vector<std::vector<Cell>> traj;
  };
  auto results = parallel_map<Res>(g.size(), workers, [&](std::size_t i) {
    const auto [unused, r, dphi] = g.at(i);
    (void)unused;
    Res res;
    res.row = guarded(ptuple({{"omega_ratio", r}, {"dphi", dphi}}), 7, [&](Row& row) {
      const auto tr = meanfield::integrate(meanfield::default_initial(), r * s.kappa, s.kappa, dphi,
                                           s.t_end, s.dt);
      std::vector<double> zs, zd;
      for (const auto& st : tr.samples) {
        zs.push_back(st.mS[2]);
        zd.push_back(st.mD[2]);
      }
      const auto bs = meanfield::classify(zs, s.t_end);
      const auto bd = meanfield::classify(zd, s.t_end);
      row.cells = {r, dphi, std::string(meanfield::to_string(bs)),
                   std::string(meanfield::to_string(bd)), tr.casimir_drift, zs.back(), zd.back()};
      if (s.trajectory) {
        for (std::size_t k = 0; k < tr.samples.size(); k += s.sample_every) {
          const auto& st = tr.samples[k];
          res.traj.push_back({r, dphi, st.time, st.mS[0], st.mS[1], st.mS[2], st.mD[0], st.mD[1],
                              st.mD[2]});
        }
      }
    });
    return res;
  });
  std::vector<Row> rows;
  RunOutput out;
  Table traj{{"omega_ratio", "dphi", "t", "mS_x", "mS_y", "mS_z", "mD_x", "mD_y", "mD_z"}, {}};
  for (auto& r : results) {
    rows.push_back(std::move(r.row));
    for (auto& t : r.traj) traj.rows.push_back(std::move(t));
  }
  out.table = finish({"omega_ratio", "dphi", "source", "decoder", "casimir_drift", "mz_source_end",
                      "mz_decoder_end"},
                     rows, out);
  if (s.trajectory) out.trajectory = std::move(traj);
  return out;
}

RunOutput run_superspin(const RunSpec& s, int workers) {
  const Grid3 g{s.N, s.omega_ratio, {0.0}};
  const auto mo = metrology_options(s);
  auto rows = parallel_map<Row>(g.size(), workers, [&](std::size_t i) {
    const auto [N, r, unused] = g.at(i);
    (void)unused;
    return guarded(ptuple({{"N", N}, {"omega_ratio", r}}), 7, [&](Row& row) {
      const auto p = ModelParams::at_ratio(N, r, s.kappa);
      const Superoperator gen = build_btc(p);
      const Vector ev = linalg::dense_eigenvalues(gen.dense());
      const std::vector<cplx> exact(ev.data(), ev.data() + ev.size());
      const double dist = analytics::matched_spectrum_distance(
          exact, analytics::superspin_spectrum(N, p.omega, p.kappa).values());

      const DensityMatrix rho = steady_state(gen, mo.spectral);
      std::vector<double> taus;
      for (int k = 0; k < s.tau_points; ++k) taus.push_back(s.tau_max * k / (s.tau_points - 1));
      const auto c = two_time_correlation(gen, btc_jump(N), rho, taus);
      double dev = 0.0;
      for (std::size_t k = 0; k < taus.size(); ++k) {
        const double approx = analytics::superspin_correlation(N, p.omega, p.kappa, taus[k]);
        dev = std::max(dev, std::abs(c[k].real() - approx) / std::abs(c[k].real()));
      }
      const auto f = qfi_rate_spectral(p, mo);
      merge(row.flags, flag_names(f.flags));
      row.cells = {long(N), r, dist, dev, f.value, analytics::superspin_qfi_rate_at(N, p.omega, p.kappa),
                   analytics::superspin_qfi_rate(N, p.kappa)};
    });
  });
  RunOutput out;
  out.table = finish({"N", "omega_ratio", "eigen_distance", "corr_max_rel_dev", "f_spectral",
                      "f_superspin", "f_superspin_inf"},
                     rows, out);
  return out;
}

json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return std::isfinite(*d) ? json(*d) : json(nullptr);
  if (const auto* l = std::get_if<long>(&c)) return json(*l);
  return json(std::get<std::string>(c));
}

std::string csv_field(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return fmt(*d);
  if (const auto* l = std::get_if<long>(&c)) return std::to_string(*l);
  const auto& s = std::get<std::string>(c);
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string q = "\"";
  for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return q + "\"";
}

bool write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  f << content;
  return static_cast<bool>(f);
}

}  // namespace

RunOutput execute(const RunSpec& spec, int workers) {
  switch (*spec.experiment) {
    case Experiment::QfiScan: return run_qfi_scan(spec, workers);
    case Experiment::HomodyneScan: return run_homodyne_scan(spec, workers);
    case Experiment::AbsorberScan: return run_absorber_scan(spec, workers);
    case Experiment::Scaling: return run_scaling(spec, workers);
    case Experiment::PhaseDiagram: return run_phase_diagram(spec, workers);
    case Experiment::MeanField: return run_meanfield(spec, workers);
    case Experiment::SuperspinBenchmark: return run_superspin(spec, workers);
  }
  throw std::logic_error("unhandled experiment");
}

std::string to_csv(const Table& t) {
  std::string out;
  for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
  out += '\n';
  for (const auto& row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + csv_field(row[i]);
    out += '\n';
  }
  return out;
}

std::string fnv1a_hex(const std::string& text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int run(const RunSpec& spec, const std::string& out_dir, int workers, std::ostream& log) {
  auto errors = validate(spec);
  if (workers < 1) errors.push_back("workers: must be >= 1");
  if (!errors.empty()) {
    for (const auto& e : errors) log << "validation error: " << e << '\n';
    return 1;
  }
  const auto t0 = std::chrono::steady_clock::now();
  const RunOutput out = execute(spec, workers);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

  fs::create_directories(out_dir);
  const fs::path csv_path = fs::path(out_dir) / (spec.name + ".csv");
  const fs::path json_path = fs::path(out_dir) / (spec.name + ".json");

  json meta;
  meta["experiment"] = to_string(*spec.experiment);
  meta["name"] = spec.name;
  meta["version"] = BTCSENSE_VERSION;
  meta["spec_hash"] = fnv1a_hex(spec.canonical);
  meta["spec"] = spec.canonical;
  meta["tolerances"] = {{"eigen_tol", spec.tol.eigen_tol},
                        {"h_s", spec.tol.h_s},
                        {"h_phi", spec.tol.h_phi},
                        {"near_critical", spec.tol.near_critical}};
  meta["columns"] = out.table.columns;
  meta["rows"] = out.table.rows.size();
  meta["csv"] = csv_path.filename().string();
  meta["workers"] = workers;
  meta["wall_time_s"] = wall;
  json flagged = json::array();
  for (const auto& f : out.flagged) {
    flagged.push_back({{"row", f.row}, {"params", f.params}, {"flags", f.flags}});
  }
  meta["flagged"] = flagged;
  if (spec.experiment == Experiment::Scaling && !out.table.rows.empty()) {
    const auto& fit = out.table.rows.back();
    meta["fit"] = {{"exponent", cell_json(fit[1])},
                   {"exponent_stderr", cell_json(fit[2])},
                   {"b", cell_json(fit[3])},
                   {"N_range", {spec.N.front(), spec.N.back()}}};
  }

  bool ok = write_file(csv_path, to_csv(out.table));
  if (out.trajectory) {
    const fs::path tp = fs::path(out_dir) / (spec.name + "_trajectory.csv");
    ok = write_file(tp, to_csv(*out.trajectory)) && ok;
    meta["trajectory_csv"] = tp.filename().string();
  }
  ok = write_file(json_path, meta.dump(2) + "\n") && ok;
  if (!ok) {
    log << "error: could not write outputs under " << out_dir << '\n';
    return 1;
  }
  log << spec.name << ": " << out.table.rows.size() << " rows -> " << csv_path.string();
  if (!out.flagged.empty()) log << " (" << out.flagged.size() << " flagged)";
  log << '\n';
  for (const auto& f : out.flagged) log << "  flagged [" << f.params << "] " << join(f.flags, "; ") << '\n';
  return out.flagged.empty() ? 0 : 2;
}

int repro(const std::string& config_dir, const std::string& out_dir, int workers,
          std::ostream& log) {
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& entry : fs::directory_iterator(config_dir, ec)) {
    if (entry.path().extension() == ".yaml") files.push_back(entry.path());
  }
  if (ec || files.empty()) {
    log << "validation error: " << config_dir << ": no *.yaml specs found\n";
    return 1;
  }
  std::sort(files.begin(), files.end());

  // Validate everything before computing anything.
  std::vector<RunSpec> specs;
  bool bad = false;
  for (const auto& f : files) {
    std::ifstream in(f);
    std::stringstream ss;
    ss << in.rdbuf();
    std::vector<std::string> errors;
    RunSpec spec = parse_spec(ss.str(), {}, errors);
    if (errors.empty()) errors = validate(spec);
    for (const auto& e : errors) log << "validation error: " << f.filename().string() << ": " << e << '\n';
    bad = bad || !errors.empty();
    specs.push_back(std::move(spec));
  }
  if (bad) return 1;
  int code = 0;
  for (const auto& spec : specs) code = std::max(code, run(spec, out_dir, workers, log));
  return code;
}

}  // namespace btc::runner
