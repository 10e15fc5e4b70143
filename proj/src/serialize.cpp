#include "geolift/serialize.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace geolift {

json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x;
}

double number_from(const json& j) {
  if (j.is_string()) {
    const std::string s = j.get<std::string>();
    if (s == "nan") return std::nan("");
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    throw ConfigError("not a number: '" + s + "'");
  }
  return j.get<double>();
}

json vector_to_json(const Vector& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(number(v[i]));
  return a;
}

Vector vector_from_json(const json& j) {
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from(j[i]);
  return v;
}

json matrix_to_json(const Matrix& m) {
  json a = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) a.push_back(vector_to_json(m.row(r).transpose()));
  return a;
}

Matrix matrix_from_json(const json& j) {
  const auto rows = static_cast<Eigen::Index>(j.size());
  const auto cols = rows ? static_cast<Eigen::Index>(j[0].size()) : 0;
  Matrix m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) m.row(r) = vector_from_json(j[static_cast<size_t>(r)]).transpose();
  return m;
}

namespace {

json doubles(const std::vector<double>& xs) {
  json a = json::array();
  for (double x : xs) a.push_back(number(x));
  return a;
}

std::vector<double> doubles_from(const json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(number_from(x));
  return out;
}

json points(const std::vector<Point>& ps) {
  json a = json::array();
  for (const auto& p : ps) a.push_back(vector_to_json(p));
  return a;
}

std::vector<Point> points_from(const json& j) {
  std::vector<Point> out;
  for (const auto& x : j) out.push_back(vector_from_json(x));
  return out;
}

template <class T, class F>
json optional_json(const std::optional<T>& o, F f) {
  return o ? f(*o) : json(nullptr);
}

}  // namespace

void to_json(json& j, const TangentVector& v) {
  j = {{"base", vector_to_json(v.base)}, {"components", vector_to_json(v.components)}};
}

void from_json(const json& j, TangentVector& v) {
  v.base = vector_from_json(j.at("base"));
  v.components = vector_from_json(j.at("components"));
}

void to_json(json& j, const CausalCharacter& c) {
  j = {{"tag", to_string(c.tag)},
       {"orientation", optional_json(c.orientation, [](TimeOrientation o) { return json(to_string(o)); })}};
}

void from_json(const json& j, CausalCharacter& c) {
  const std::string tag = j.at("tag");
  c.tag = tag == "timelike" ? CausalTag::timelike : tag == "null" ? CausalTag::null : CausalTag::spacelike;
  c.orientation.reset();
  if (!j.at("orientation").is_null())
    c.orientation = j.at("orientation") == "future" ? TimeOrientation::future : TimeOrientation::past;
}

void to_json(json& j, const GeodesicPath& p) {
  json s = json::array();
  for (const auto& x : p.samples)
    s.push_back({{"t", number(x.t)}, {"x", vector_to_json(x.x)}, {"xdot", vector_to_json(x.xdot)}});
  j = {{"initial", p.initial},
       {"samples", s},
       {"t_end", number(p.t_end)},
       {"termination", to_string(p.termination)},
       {"periods", doubles(p.periods)}};
}

void from_json(const json& j, GeodesicPath& p) {
  p.initial = j.at("initial").get<TangentVector>();
  p.samples.clear();
  for (const auto& x : j.at("samples"))
    p.samples.push_back({number_from(x.at("t")), vector_from_json(x.at("x")), vector_from_json(x.at("xdot"))});
  p.t_end = number_from(j.at("t_end"));
  p.termination = termination_from_string(j.at("termination"));
  p.periods = doubles_from(j.at("periods"));
}

void to_json(json& j, const MaximalInterval& m) {
  j = {{"a_est", number(m.a_est)},
       {"b_est", number(m.b_est)},
       {"a_is_escape", m.a_is_escape},
       {"b_is_escape", m.b_is_escape}};
}

void from_json(const json& j, MaximalInterval& m) {
  m.a_est = number_from(j.at("a_est"));
  m.b_est = number_from(j.at("b_est"));
  m.a_is_escape = j.at("a_is_escape");
  m.b_is_escape = j.at("b_is_escape");
}

void to_json(json& j, const DexpMatrix& d) {
  j = {{"at", d.at},
       {"matrix", matrix_to_json(d.matrix)},
       {"det", number(d.det)},
       {"frame_det", number(d.frame_det)},
       {"endpoint", vector_to_json(d.endpoint)}};
}

void from_json(const json& j, DexpMatrix& d) {
  d.at = j.at("at").get<TangentVector>();
  d.matrix = matrix_from_json(j.at("matrix"));
  d.det = number_from(j.at("det"));
  d.frame_det = number_from(j.at("frame_det"));
  d.endpoint = vector_from_json(j.at("endpoint"));
}

void to_json(json& j, const ConjugateReport& r) {
  json s = json::array();
  for (const auto& [t, d] : r.det_samples) s.push_back({number(t), number(d)});
  j = {{"ray", r.ray},
       {"conjugate_times", doubles(r.conjugate_times)},
       {"scan_horizon", number(r.scan_horizon)},
       {"det_samples", s}};
}

void from_json(const json& j, ConjugateReport& r) {
  r.ray = j.at("ray").get<TangentVector>();
  r.conjugate_times = doubles_from(j.at("conjugate_times"));
  r.scan_horizon = number_from(j.at("scan_horizon"));
  r.det_samples.clear();
  for (const auto& s : j.at("det_samples")) r.det_samples.emplace_back(number_from(s[0]), number_from(s[1]));
}

void to_json(json& j, const CausalConjugateReport& r) {
  j = {{"base", vector_to_json(r.base)}, {"t_max", number(r.t_max)}, {"n_rays", r.n_rays},
       {"n_samples", r.n_samples},       {"empty", r.empty},          {"witnesses", r.witnesses}};
}

void from_json(const json& j, CausalConjugateReport& r) {
  r.base = vector_from_json(j.at("base"));
  r.t_max = number_from(j.at("t_max"));
  r.n_rays = j.at("n_rays");
  r.n_samples = j.at("n_samples");
  r.empty = j.at("empty");
  r.witnesses = j.at("witnesses").get<std::vector<ConjugateReport>>();
}

void to_json(json& j, const LiftResult& r) {
  json s = json::array();
  for (const auto& x : r.lift_samples)
    s.push_back({{"t", number(x.t)}, {"v", vector_to_json(x.v)}, {"residual", number(x.residual)}, {"det", number(x.det)}});
  j = {{"p", vector_to_json(r.p)},
       {"status", to_string(r.status)},
       {"lift_samples", s},
       {"reach", number(r.reach)},
       {"failure", optional_json(r.failure, [](LiftFailure f) { return json(to_string(f)); })},
       {"cluster_point", optional_json(r.cluster_point, [](const TangentVector& v) { return json(v); })},
       {"terminal_iterate", optional_json(r.terminal_iterate, [](const Vector& v) { return vector_to_json(v); })},
       {"stall_det_ratio", number(r.stall_det_ratio)},
       {"stall_termination", optional_json(r.stall_termination, [](Termination t) { return json(to_string(t)); })},
       {"ccp", optional_json(r.ccp, [](CcpVerdict v) { return json(to_string(v)); })}};
}

void from_json(const json& j, LiftResult& r) {
  r.p = vector_from_json(j.at("p"));
  r.status = lift_status_from_string(j.at("status"));
  r.lift_samples.clear();
  for (const auto& x : j.at("lift_samples"))
    r.lift_samples.push_back({number_from(x.at("t")), vector_from_json(x.at("v")), number_from(x.at("residual")),
                              number_from(x.at("det"))});
  r.reach = number_from(j.at("reach"));
  r.failure.reset();
  r.cluster_point.reset();
  r.terminal_iterate.reset();
  r.stall_termination.reset();
  r.ccp.reset();
  if (!j.at("failure").is_null()) r.failure = lift_failure_from_string(j.at("failure"));
  if (!j.at("cluster_point").is_null()) r.cluster_point = j.at("cluster_point").get<TangentVector>();
  if (!j.at("terminal_iterate").is_null()) r.terminal_iterate = vector_from_json(j.at("terminal_iterate"));
  r.stall_det_ratio = number_from(j.at("stall_det_ratio"));
  if (!j.at("stall_termination").is_null()) r.stall_termination = termination_from_string(j.at("stall_termination"));
  if (!j.at("ccp").is_null()) r.ccp = ccp_verdict_from_string(j.at("ccp"));
}

void to_json(json& j, const ConnectionResult& r) {
  json sols = json::array();
  for (const auto& s : r.solutions)
    sols.push_back({{"v", s.v},
                    {"class_label", s.class_label},
                    {"character", optional_json(s.character, [](const CausalCharacter& c) { return json(c); })},
                    {"h_norm", number(s.h_norm)}});
  json diag = json::array();
  for (const auto& d : r.diagnostics)
    diag.push_back({{"class_label", d.class_label}, {"seed", d.seed}, {"nodes", points(d.nodes)}, {"lift", d.lift}});
  j = {{"p", vector_to_json(r.p)},
       {"q", vector_to_json(r.q)},
       {"solutions", sols},
       {"diagnostics", diag},
       {"class_budget", r.class_budget}};
}

void from_json(const json& j, ConnectionResult& r) {
  r.p = vector_from_json(j.at("p"));
  r.q = vector_from_json(j.at("q"));
  r.solutions.clear();
  for (const auto& s : j.at("solutions")) {
    Solution x;
    x.v = s.at("v").get<TangentVector>();
    x.class_label = s.at("class_label");
    if (!s.at("character").is_null()) x.character = s.at("character").get<CausalCharacter>();
    x.h_norm = number_from(s.at("h_norm"));
    r.solutions.push_back(std::move(x));
  }
  r.diagnostics.clear();
  for (const auto& d : j.at("diagnostics")) {
    ConnectAttempt a;
    a.class_label = d.at("class_label");
    a.seed = d.at("seed");
    a.nodes = points_from(d.at("nodes"));
    a.lift = d.at("lift").get<LiftResult>();
    r.diagnostics.push_back(std::move(a));
  }
  r.class_budget = j.at("class_budget");
}

void to_json(json& j, const HomotopyGrid& g) {
  json x = json::array(), xd = json::array(), gg = json::array();
  for (size_t i = 0; i < g.x.size(); ++i) {
    x.push_back(points(g.x[i]));
    xd.push_back(points(g.xdot[i]));
    gg.push_back(doubles(g.g[i]));
  }
  j = {{"p", vector_to_json(g.p)},
       {"s", doubles(g.s)},
       {"t", doubles(g.t)},
       {"x", x},
       {"xdot", xd},
       {"g", gg},
       {"slice_max_g", doubles(g.slice_max_g)},
       {"slice_timelike", g.slice_timelike},
       {"endpoint_error", number(g.endpoint_error)},
       {"all_timelike", g.all_timelike}};
}

void from_json(const json& j, HomotopyGrid& g) {
  g.p = vector_from_json(j.at("p"));
  g.s = doubles_from(j.at("s"));
  g.t = doubles_from(j.at("t"));
  g.x.clear();
  g.xdot.clear();
  g.g.clear();
  for (const auto& r : j.at("x")) g.x.push_back(points_from(r));
  for (const auto& r : j.at("xdot")) g.xdot.push_back(points_from(r));
  for (const auto& r : j.at("g")) g.g.push_back(doubles_from(r));
  g.slice_max_g = doubles_from(j.at("slice_max_g"));
  g.slice_timelike = j.at("slice_timelike").get<std::vector<bool>>();
  g.endpoint_error = number_from(j.at("endpoint_error"));
  g.all_timelike = j.at("all_timelike");
}

void to_json(json& j, const ProbeReport& r) {
  json levels = json::array();
  for (const auto& l : r.levels)
    levels.push_back({{"samples", l.samples}, {"horizon", number(l.horizon)}, {"bound", number(l.bound)}});
  json params = json::array();
  for (const auto& [k, v] : r.parameters) params.push_back({{"name", k}, {"value", number(v)}});
  j = {{"probe", r.probe},
       {"verdict", to_string(r.verdict)},
       {"levels", levels},
       {"witness_vectors", r.witness_vectors},
       {"witness_paths", r.witness_paths},
       {"witness_validated", r.witness_validated},
       {"seed", r.seed},
       {"parameters", params}};
}

void from_json(const json& j, ProbeReport& r) {
  r.probe = j.at("probe");
  r.verdict = verdict_from_string(j.at("verdict"));
  r.levels.clear();
  for (const auto& l : j.at("levels"))
    r.levels.push_back({l.at("samples").get<int>(), number_from(l.at("horizon")), number_from(l.at("bound"))});
  r.witness_vectors = j.at("witness_vectors").get<std::vector<TangentVector>>();
  r.witness_paths = j.at("witness_paths").get<std::vector<GeodesicPath>>();
  r.witness_validated = j.at("witness_validated");
  r.seed = j.at("seed");
  r.parameters.clear();
  for (const auto& p : j.at("parameters"))
    r.parameters.emplace_back(p.at("name").get<std::string>(), number_from(p.at("value")));
}

void to_json(json& j, const ConsistencyReport& r) {
  j = {{"proper", r.proper},     {"pseudoconvex", r.pseudoconvex}, {"imprison", r.imprison},
       {"decided", r.decided}, {"consistent", r.consistent},     {"note", r.note}};
}

void from_json(const json& j, ConsistencyReport& r) {
  r.proper = j.at("proper").get<ProbeReport>();
  r.pseudoconvex = j.at("pseudoconvex").get<ProbeReport>();
  r.imprison = j.at("imprison").get<ProbeReport>();
  r.decided = j.at("decided");
  r.consistent = j.at("consistent");
  r.note = j.at("note");
}

LiftResult without_trace(LiftResult r) {
  if (r.lift_samples.size() > 2) r.lift_samples = {r.lift_samples.front(), r.lift_samples.back()};
  return r;
}

namespace {

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string cell(const json& j) { return j.is_string() ? j.get<std::string>() : fmt(number_from(j)); }

void header(std::ostringstream& os, std::initializer_list<std::string> lead, const std::string& stem, size_t n,
            std::initializer_list<std::string> tail) {
  bool first = true;
  auto put = [&](const std::string& s) {
    os << (first ? "" : ",") << s;
    first = false;
  };
  for (const auto& s : lead) put(s);
  for (size_t i = 0; i < n; ++i) put(stem + std::to_string(i));
  for (const auto& s : tail) put(s);
  os << '\n';
}

void put_row(std::ostringstream& os, const std::vector<std::string>& cells) {
  for (size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << cells[i];
  os << '\n';
}

}  // namespace

std::string plot_csv(const json& report, const std::string& kind) {
  const std::string task = report.value("kind", "");
  const json& r = report.at("result");
  std::ostringstream os;
  auto incompatible = [&]() { return ConfigError("plot kind '" + kind + "' does not apply to a '" + task + "' report"); };
  if (kind == "geodesic") {
    const json* path = nullptr;
    if (task == "exp") path = &r.at("path");
    else if (r.contains("samples") && r.contains("termination")) path = &r;
    if (!path) throw incompatible();
    const size_t m = (*path).at("initial").at("base").size();
    os << "t";
    for (size_t i = 0; i < m; ++i) os << ",x" << i;
    for (size_t i = 0; i < m; ++i) os << ",xdot" << i;
    os << '\n';
    for (const auto& s : path->at("samples")) {
      std::vector<std::string> row{cell(s.at("t"))};
      for (const auto& x : s.at("x")) row.push_back(cell(x));
      for (const auto& x : s.at("xdot")) row.push_back(cell(x));
      put_row(os, row);
    }
  } else if (kind == "det") {
    if (task != "conjugate_scan" || !r.contains("det_samples")) throw incompatible();
    os << "t,det\n";
    for (const auto& s : r.at("det_samples")) put_row(os, {cell(s[0]), cell(s[1])});
  } else if (kind == "lift") {
    const json* lift = nullptr;
    if (task == "lift") lift = &r;
    else if (task == "homotopy") lift = &r.at("lift");
    if (!lift) throw incompatible();
    const auto& samples = lift->at("lift_samples");
    header(os, {"t"}, "v", samples.empty() ? 0 : samples[0].at("v").size(), {"residual"});
    for (const auto& s : samples) {
      std::vector<std::string> row{cell(s.at("t"))};
      for (const auto& x : s.at("v")) row.push_back(cell(x));
      row.push_back(cell(s.at("residual")));
      put_row(os, row);
    }
  } else if (kind == "homotopy") {
    if (task != "homotopy") throw incompatible();
    const json& g = r.at("grid");
    header(os, {"s", "t"}, "x", g.at("p").size(), {"g"});
    for (size_t i = 0; i < g.at("s").size(); ++i)
      for (size_t k = 0; k < g.at("t").size(); ++k) {
        std::vector<std::string> row{cell(g.at("s")[i]), cell(g.at("t")[k])};
        for (const auto& x : g.at("x")[i][k]) row.push_back(cell(x));
        row.push_back(cell(g.at("g")[i][k]));
        put_row(os, row);
      }
  } else if (kind == "connection") {
    if (task != "connect" && task != "connect_causal" && task != "multiplicity") throw incompatible();
    header(os, {"class_label"}, "v", r.at("p").size(), {"character", "h_norm"});
    for (const auto& s : r.at("solutions")) {
      std::vector<std::string> row{std::to_string(s.at("class_label").get<int>())};
      for (const auto& x : s.at("v").at("components")) row.push_back(cell(x));
      row.push_back(s.at("character").is_null() ? "" : s.at("character").at("tag").get<std::string>());
      row.push_back(cell(s.at("h_norm")));
      put_row(os, row);
    }
  } else {
    throw ConfigError("unknown plot kind '" + kind + "' (geodesic, det, lift, homotopy, connection)");
  }
  return os.str();
}

}  // namespace geolift
