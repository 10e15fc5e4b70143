#include "geolift/scenario.hpp"

#include <yaml-cpp/yaml.h>

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <set>
#include <sstream>

namespace geolift {

namespace fs = std::filesystem;

namespace {

std::string where(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? " (line " + std::to_string(m.line + 1) + ")" : "";
}

template <class T>
T scalar(const YAML::Node& n, const std::string& key) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("bad value for '" + key + "'" + where(n));
  }
}

template <class T>
T get(const YAML::Node& node, const std::string& key, T fallback) {
  const YAML::Node n = node[key];
  return n ? scalar<T>(n, key) : fallback;
}

template <class T>
T need(const YAML::Node& node, const std::string& key) {
  const YAML::Node n = node[key];
  if (!n) throw ConfigError("missing '" + key + "'" + where(node));
  return scalar<T>(n, key);
}

Vector as_vector(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError("'" + key + "' must be a list of numbers" + where(n));
  Vector v(static_cast<Eigen::Index>(n.size()));
  for (size_t i = 0; i < n.size(); ++i) v[static_cast<Eigen::Index>(i)] = scalar<double>(n[i], key);
  return v;
}

Vector need_vector(const YAML::Node& node, const std::string& key) {
  const YAML::Node n = node[key];
  if (!n) throw ConfigError("missing '" + key + "'" + where(node));
  return as_vector(n, key);
}

std::optional<Vector> opt_vector(const YAML::Node& node, const std::string& key) {
  const YAML::Node n = node[key];
  if (!n) return std::nullopt;
  return as_vector(n, key);
}

std::vector<Point> as_points(const YAML::Node& n, const std::string& key) {
  if (!n.IsSequence()) throw ConfigError("'" + key + "' must be a list of points" + where(n));
  std::vector<Point> out;
  for (const auto& x : n) out.push_back(as_vector(x, key));
  return out;
}

json yaml_to_json(const YAML::Node& n) {
  switch (n.Type()) {
    case YAML::NodeType::Sequence: {
      json a = json::array();
      for (const auto& x : n) a.push_back(yaml_to_json(x));
      return a;
    }
    case YAML::NodeType::Map: {
      json o = json::object();
      for (const auto& kv : n) o[kv.first.as<std::string>()] = yaml_to_json(kv.second);
      return o;
    }
    case YAML::NodeType::Scalar: {
      const std::string s = n.Scalar();
      if (s == "true" || s == "false") return s == "true";
      try {
        size_t used = 0;
        const long long i = std::stoll(s, &used);
        if (used == s.size()) return i;
      } catch (const std::exception&) {
      }
      try {
        size_t used = 0;
        const double d = std::stod(s, &used);
        if (used == s.size()) return d;
      } catch (const std::exception&) {
      }
      return s;
    }
    default: return nullptr;
  }
}

struct Settings {
  ConnectOptions connect;
  std::uint64_t seed = 1;
  bool trace = false;

  const LiftOptions& lift() const { return connect.lift; }
  const IntegratorOptions& integrator() const { return connect.lift.integrator; }
};

void apply_tolerances(const YAML::Node& t, Settings& s) {
  if (!t) return;
  if (!t.IsMap()) throw ConfigError("'tolerances' must be a table" + where(t));
  static const std::set<std::string> known{"rel_tol",  "abs_tol",      "max_steps", "min_step",   "domain_margin",
                                           "max_chart_step", "lift_tol", "dt_max",    "dt_min",     "tol_causal",
                                           "dedup_tol", "max_newton"};
  for (const auto& kv : t) {
    const std::string k = kv.first.as<std::string>();
    if (!known.count(k)) throw ConfigError("unknown tolerance '" + k + "'" + where(kv.first));
  }
  auto& I = s.connect.lift.integrator;
  I.rel_tol = get(t, "rel_tol", I.rel_tol);
  I.abs_tol = get(t, "abs_tol", I.abs_tol);
  I.max_steps = get(t, "max_steps", I.max_steps);
  I.min_step = get(t, "min_step", I.min_step);
  I.domain_margin = get(t, "domain_margin", I.domain_margin);
  I.max_chart_step = get(t, "max_chart_step", I.max_chart_step);
  auto& L = s.connect.lift;
  L.lift_tol = get(t, "lift_tol", L.lift_tol);
  L.dt_max = get(t, "dt_max", L.dt_max);
  L.dt_min = get(t, "dt_min", L.dt_min);
  L.tol_causal = get(t, "tol_causal", L.tol_causal);
  L.max_newton = get(t, "max_newton", L.max_newton);
  s.connect.dedup_tol = get(t, "dedup_tol", s.connect.dedup_tol);
  L.validate();
}

ManifoldSpec manifold_from_yaml(const YAML::Node& n) {
  ManifoldSpec M;
  M.id = get<std::string>(n, "id", "user");
  M.dim = need<int>(n, "dim");
  const int m = M.dim;
  if (m < 2) throw ConfigError("manifold dim must be >= 2");
  Christoffel G(m);
  if (const YAML::Node c = n["christoffel"]) {
    if (!c.IsSequence() || static_cast<int>(c.size()) != m) throw ConfigError("christoffel must be [k][i][j]" + where(c));
    for (int k = 0; k < m; ++k)
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) G(k, i, j) = scalar<double>(c[k][i][j], "christoffel");
  }
  if (G.max_asymmetry() > 1e-12) throw ConfigError("christoffel symbols must be symmetric in the lower indices");
  M.christoffel = [G](const Point&) { return G; };
  M.christoffel_derivative = [m](const Point&) { return ChristoffelDerivative(m); };
  auto square = [&](const YAML::Node& node, const std::string& key) {
    Matrix A(m, m);
    if (!node.IsSequence() || static_cast<int>(node.size()) != m) throw ConfigError(key + " must be " + std::to_string(m) + "x" + std::to_string(m));
    for (int i = 0; i < m; ++i) A.row(i) = as_vector(node[i], key).transpose();
    return A;
  };
  if (const YAML::Node g = n["metric"]) {
    const Matrix A = square(g, "metric");
    M.metric = [A](const Point&) { return A; };
    M.signature = get<std::string>(n, "signature", "riemannian") == "lorentzian" ? Signature::lorentzian
                                                                                 : Signature::riemannian;
  }
  if (auto T = opt_vector(n, "time_orientation")) M.time_orientation = [T = *T](const Point&) { return T; };
  if (const YAML::Node h = n["aux_metric"]) {
    const Matrix A = square(h, "aux_metric");
    M.aux_metric = [A](const Point&) { return A; };
  }
  if (auto P = opt_vector(n, "periods")) M.periods.assign(P->data(), P->data() + P->size());
  if (auto D = opt_vector(n, "deck_generator")) {
    M.deck_generator = *D;
    M.multiplicity = MultiplicityMode::deck;
  }
  if (const YAML::Node box = n["box"]) {
    const std::vector<Point> b = as_points(box, "box");
    if (static_cast<int>(b.size()) != m) throw ConfigError("box needs one [lo, hi] pair per coordinate");
    M.domain_predicate = [b](const Point& x) {
      for (size_t i = 0; i < b.size(); ++i)
        if (!(x[static_cast<Eigen::Index>(i)] > b[i][0] && x[static_cast<Eigen::Index>(i)] < b[i][1])) return false;
      return true;
    };
    M.boundary_distance = [b](const Point& x) {
      double d = std::numeric_limits<double>::infinity();
      for (size_t i = 0; i < b.size(); ++i) {
        const double xi = x[static_cast<Eigen::Index>(i)];
        d = std::min({d, std::max(0.0, xi - b[i][0]), std::max(0.0, b[i][1] - xi)});
      }
      return d;
    };
    M.fills_chart = false;
  } else {
    M.domain_predicate = [](const Point&) { return true; };
  }
  return M;
}

ManifoldSpec resolve_manifold(const YAML::Node& n, const fs::path& base) {
  if (!n) throw ConfigError("scenario has no 'manifold'");
  if (n.IsMap()) return manifold_from_yaml(n);
  const std::string id = n.as<std::string>();
  if (id.size() > 5 && (id.ends_with(".yaml") || id.ends_with(".yml"))) {
    const fs::path p = fs::path(id).is_absolute() ? fs::path(id) : base / id;
    return load_manifold(p.string());
  }
  return catalog_manifold(id);
}

PathSpec path_from_yaml(const YAML::Node& n, const ManifoldSpec& M) {
  if (!n) throw ConfigError("task needs a 'path'");
  const std::string type = get<std::string>(n, "type", "polyline");
  PathSpec P;
  if (type == "polyline" || type == "segment") {
    P = polyline_path(as_points(n["nodes"], "nodes"));
    if (type == "segment" && P.nodes.size() != 2) throw ConfigError("segment needs exactly two nodes");
    P.kind = type;
  } else if (type == "bump") {
    // a + t (b - a) + sin(pi t) bump
    const Point a = need_vector(n, "from"), b = need_vector(n, "to"), c = need_vector(n, "bump");
    P = function_path([a, b, c](double t) -> Point { return a + t * (b - a) + std::sin(M_PI * t) * c; },
                      [a, b, c](double t) -> Vector { return (b - a) + M_PI * std::cos(M_PI * t) * c; });
    P.kind = "bump";
    P.nodes = {a, b, c};
  } else {
    throw ConfigError("unknown path type '" + type + "' (polyline, segment, bump)");
  }
  if (P.eval(0.0).size() != M.dim) throw ConfigError("path dimension does not match the manifold");
  if (const YAML::Node c = n["causal"]) P.causal_tag = path_character_from_string(c.as<std::string>());
  return P;
}

ConeSpec cone_from_yaml(const YAML::Node& n, const ManifoldSpec& M) {
  if (!n) throw ConfigError("task needs a 'cone'");
  ConeSpec c;
  c.kind = cone_kind_from_string(need<std::string>(n, "kind"));
  if (auto r = opt_vector(n, "root")) c.root = *r;
  else if (c.rooted()) throw ConfigError("cone '" + to_string(c.kind) + "' needs a root");
  else c.root = Point::Zero(M.dim);
  return c;
}

BallSpec ball_from_yaml(const YAML::Node& n) {
  if (!n) throw ConfigError("task needs a 'ball'");
  return {need_vector(n, "center"), need<double>(n, "radius"), get<double>(n, "collar", 0.0)};
}

ProbeBudget budget_from_yaml(const YAML::Node& n, std::uint64_t seed) {
  ProbeBudget b;
  b.seed = seed;
  if (!n) return b;
  b.n_rays = get(n, "n_rays", b.n_rays);
  b.n_segments = get(n, "n_segments", b.n_segments);
  b.horizon = get(n, "horizon", b.horizon);
  b.doublings = get(n, "doublings", b.doublings);
  b.bound_radius = get(n, "bound_radius", b.bound_radius);
  b.stability = get(n, "stability", b.stability);
  return b;
}

void require_in_domain(const ManifoldSpec& M, const Point& x, const std::string& what) {
  if (x.size() != M.dim) throw PreconditionError(what + " has dimension " + std::to_string(x.size()));
  if (!M.contains(x)) {
    std::ostringstream os;
    os.precision(17);
    os << what << " = (";
    for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << x[i];
    os << ") is outside the domain of " << M.id;
    throw PreconditionError(os.str());
  }
}

// Every point named in the task must be in M before anything runs.
void check_points(const YAML::Node& task, const ManifoldSpec& M) {
  for (const char* key : {"p", "q", "waypoint"})
    if (auto x = opt_vector(task, key)) require_in_domain(M, *x, key);
  if (const YAML::Node w = task["waypoints"])
    for (const auto& x : as_points(w, "waypoints")) require_in_domain(M, x, "waypoint");
  if (const YAML::Node c = task["cone"])
    if (auto r = opt_vector(c, "root")) require_in_domain(M, *r, "cone root");
  if (const YAML::Node path = task["path"])
    if (const YAML::Node nodes = path["nodes"])
      for (const auto& x : as_points(nodes, "nodes")) require_in_domain(M, x, "path node");
}

json lift_json(const LiftResult& r, bool trace) { return trace ? json(r) : json(without_trace(r)); }

json connection_json(ConnectionResult r, bool trace) {
  if (!trace)
    for (auto& d : r.diagnostics) d.lift = without_trace(d.lift);
  return json(r);
}

struct TaskResult {
  json result;
  bool breach = false;
  std::string message;
};

TaskResult run_task(const std::string& kind, const YAML::Node& task, const ManifoldSpec& M, const Settings& S) {
  check_points(task, M);
  TaskResult out;
  const auto& I = S.integrator();
  if (kind == "exp") {
    const Point p = need_vector(task, "p");
    const Vector v = need_vector(task, "v");
    const GeodesicPath path = integrate_geodesic(M, p, v, get(task, "t_max", 1.0), I);
    out.result = {{"endpoint", path.termination == Termination::reached_target ? vector_to_json(path.samples.back().x)
                                                                                : json(nullptr)},
                  {"termination", to_string(path.termination)},
                  {"path", path}};
    if (const YAML::Node tp = task["t_probe"]) {
      const TangentVector w{p, v / aux_norm(M, {p, v})};
      out.result["maximal_interval"] = maximal_interval(M, w, scalar<double>(tp, "t_probe"), I);
    }
  } else if (kind == "dexp") {
    out.result = dexp(M, need_vector(task, "p"), need_vector(task, "v"), I);
  } else if (kind == "conjugate_scan") {
    const Point p = need_vector(task, "p");
    ConjugateScanOptions so;
    so.integrator = I;
    const double t_max = need<double>(task, "t_max");
    const int n = get(task, "n_samples", 400);
    if (auto w = opt_vector(task, "w")) {
      const Vector unit = *w / aux_norm(M, {p, *w});
      out.result = conjugate_scan(M, p, {p, unit}, t_max, n, so);
    } else {
      out.result = {{"certificate", causal_conjugate_certificate(M, p, t_max, get(task, "n_rays", 64), so, n, S.seed)}};
    }
  } else if (kind == "lift") {
    const Point p = need_vector(task, "p");
    const PathSpec alpha = path_from_yaml(task["path"], M);
    LiftResult r = alpha.causal_tag ? causal_lift(M, p, alpha, S.lift())
                                    : lift_path(M, p, alpha, opt_vector(task, "v0").value_or(Vector::Zero(M.dim)), S.lift());
    out.result = lift_json(r, S.trace);
  } else if (kind == "connect") {
    ConnectOptions o = S.connect;
    o.velocity_budget = get(task, "velocity_budget", o.velocity_budget);
    if (const YAML::Node c = task["character"]) o.character_filter = path_character_from_string(c.as<std::string>());
    std::vector<Point> wps;
    if (const YAML::Node w = task["waypoints"]) wps = as_points(w, "waypoints");
    const SeedStrategy strat = seed_strategy_from_string(get<std::string>(task, "strategy", wps.empty() ? "straight" : "waypoints"));
    out.result = connection_json(
        connect(M, need_vector(task, "p"), need_vector(task, "q"), strat, o, wps, opt_vector(task, "v0")), S.trace);
  } else if (kind == "connect_causal") {
    out.result = connection_json(
        connect_causal(M, need_vector(task, "p"), need_vector(task, "q"), S.connect, opt_vector(task, "waypoint")),
        S.trace);
  } else if (kind == "multiplicity") {
    ConnectOptions o = S.connect;
    o.velocity_budget = get(task, "velocity_budget", o.velocity_budget);
    out.result = connection_json(enumerate_multiplicity(M, need_vector(task, "p"), need_vector(task, "q"),
                                                        get(task, "class_budget", 5), o),
                                 S.trace);
  } else if (kind == "homotopy") {
    const Point p = need_vector(task, "p");
    PathSpec alpha = path_from_yaml(task["path"], M);
    if (!alpha.causal_tag) alpha.causal_tag = PathCharacter::timelike;
    const LiftResult lift = causal_lift(M, p, alpha, S.lift());
    out.result = {{"lift", lift_json(lift, S.trace)}};
    if (lift.status != LiftStatus::complete) {
      out.message = "lift did not complete; no homotopy";
      out.result["grid"] = nullptr;
    } else {
      const HomotopyGrid G = straighten_homotopy(M, p, alpha, lift, get(task, "n_s", 50), get(task, "n_t", 50), S.lift());
      out.result["grid"] = G;
      if (!G.all_timelike) {
        out.breach = true;
        out.message = "a homotopy slice is not timelike";
      }
    }
  } else if (kind == "probe_proper") {
    out.result = properness_probe(M, cone_from_yaml(task["cone"], M), ball_from_yaml(task["ball"]),
                                  budget_from_yaml(task["budget"], S.seed), I);
  } else if (kind == "probe_imprison") {
    out.result = imprisonment_scan(M, cone_from_yaml(task["cone"], M), get(task, "n_rays", 64), get(task, "horizon", 16.0),
                                   get(task, "bound_radius", 4.0), I, S.seed);
  } else if (kind == "probe_pseudoconvex") {
    out.result = pseudoconvexity_scan(M, cone_from_yaml(task["cone"], M), ball_from_yaml(task["ball"]),
                                      get(task, "n_segments", 64), S.connect, S.seed, get(task, "doublings", 2));
  } else if (kind == "probe_consistency") {
    const ConsistencyReport r = properness_consistency_check(M, cone_from_yaml(task["cone"], M), ball_from_yaml(task["ball"]),
                                                             budget_from_yaml(task["budget"], S.seed), S.connect);
    out.result = r;
    if (!r.note.empty()) out.message = r.note;
  } else {
    throw ConfigError("unknown task kind '" + kind + "'");
  }
  return out;
}

std::string timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream f(path);
  if (!f) throw ConfigError("cannot write " + path.string());
  f << text;
}

}  // namespace

ManifoldSpec load_manifold(const std::string& id_or_path) {
  if (!fs::exists(id_or_path)) return catalog_manifold(id_or_path);
  YAML::Node n;
  try {
    n = YAML::LoadFile(id_or_path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse manifold file " + id_or_path + ": " + e.what());
  }
  return manifold_from_yaml(n["manifold"] ? n["manifold"] : n);
}

ScenarioOutcome run_scenario(const std::string& config_path, const RunOptions& opts) {
  YAML::Node cfg;
  try {
    cfg = YAML::LoadFile(config_path);
  } catch (const YAML::Exception& e) {
    throw ConfigError("cannot parse " + config_path + ": " + e.what());
  }
  if (!cfg.IsMap()) throw ConfigError(config_path + ": top level must be a table");
  const fs::path base = fs::path(config_path).parent_path();
  const ManifoldSpec M = resolve_manifold(cfg["manifold"], base);

  Settings S;
  S.seed = opts.seed.value_or(get<std::uint64_t>(cfg, "seed", 1));
  S.trace = opts.trace;
  apply_tolerances(cfg["tolerances"], S);

  fs::path out_dir = opts.out_dir ? fs::path(*opts.out_dir) : base / get<std::string>(cfg, "output", "reports");
  fs::create_directories(out_dir);

  const YAML::Node tasks = cfg["tasks"];
  if (!tasks || !tasks.IsSequence()) throw ConfigError(config_path + ": 'tasks' must be a list");
  static const std::set<std::string> kinds{"exp",           "dexp",           "conjugate_scan",   "lift",
                                           "connect",       "connect_causal", "multiplicity",     "homotopy",
                                           "probe_proper",  "probe_imprison", "probe_pseudoconvex", "probe_consistency"};
  std::vector<std::string> names;
  for (size_t i = 0; i < tasks.size(); ++i) {
    const std::string kind = need<std::string>(tasks[i], "kind");
    if (!kinds.count(kind)) throw ConfigError("unknown task kind '" + kind + "'" + where(tasks[i]));
    names.push_back(get<std::string>(tasks[i], "name", kind));
  }

  auto execute = [&](size_t i) {
    const YAML::Node task = tasks[i];
    const std::string kind = task["kind"].as<std::string>();
    TaskOutcome o{names[i], kind, "ok", "", ""};
    json report = {{"schema_version", kSchemaVersion},
                   {"task", names[i]},
                   {"kind", kind},
                   {"manifold", M.id},
                   {"seed", S.seed},
                   {"parameters", yaml_to_json(task)},
                   {"result", nullptr}};
    try {
      TaskResult r = run_task(kind, task, M, S);
      report["result"] = std::move(r.result);
      o.message = r.message;
      if (r.breach) o.status = "breach";
    } catch (const InvariantBreach& e) {
      o.status = "breach";
      o.message = e.what();
    } catch (const std::exception& e) {
      o.status = "error";
      o.message = e.what();
    }
    report["status"] = o.status;
    report["message"] = o.message;
    std::ostringstream fname;
    fname << std::setw(2) << std::setfill('0') << i << "_" << names[i] << ".json";
    const fs::path file = out_dir / fname.str();
    write_file(file, report.dump(2) + "\n");
    o.file = file.string();
    return o;
  };

  ScenarioOutcome res;
  if (opts.parallel) {
    std::vector<std::future<TaskOutcome>> futs;
    for (size_t i = 0; i < tasks.size(); ++i) futs.push_back(std::async(std::launch::async, execute, i));
    for (auto& f : futs) res.tasks.push_back(f.get());
  } else {
    for (size_t i = 0; i < tasks.size(); ++i) res.tasks.push_back(execute(i));
  }

  bool breach = false, error = false;
  json summary_tasks = json::array();
  for (const auto& t : res.tasks) {
    breach = breach || t.status == "breach";
    error = error || t.status == "error";
    if (t.status != "ok") std::cerr << t.name << ": " << t.status << ": " << t.message << "\n";
    summary_tasks.push_back({{"name", t.name},
                             {"kind", t.kind},
                             {"status", t.status},
                             {"message", t.message},
                             {"file", fs::path(t.file).filename().string()}});
  }
  res.exit_code = error ? 2 : breach ? 1 : 0;
  const json summary = {{"schema_version", kSchemaVersion},
                        {"config", config_path},
                        {"manifold", M.id},
                        {"seed", S.seed},
                        {"timestamp", timestamp()},
                        {"tasks", summary_tasks},
                        {"exit_code", res.exit_code}};
  const fs::path sp = out_dir / "summary.json";
  write_file(sp, summary.dump(2) + "\n");
  res.summary_path = sp.string();
  return res;
}

std::string emit_plot_data(const std::string& report_path, const std::string& kind, const std::string& out_dir) {
  std::ifstream f(report_path);
  if (!f) throw ConfigError("cannot read " + report_path);
  json report;
  try {
    report = json::parse(f);
  } catch (const json::exception& e) {
    throw ConfigError(report_path + ": " + e.what());
  }
  if (!report.contains("result") || report.at("result").is_null())
    throw ConfigError(report_path + " has no result to plot");
  const std::string csv = plot_csv(report, kind);
  const fs::path src(report_path);
  const fs::path dir = out_dir.empty() ? src.parent_path() : fs::path(out_dir);
  fs::create_directories(dir);
  const fs::path out = dir / (src.stem().string() + "_" + kind + ".csv");
  write_file(out, csv);
  return out.string();
}

}  // namespace geolift
