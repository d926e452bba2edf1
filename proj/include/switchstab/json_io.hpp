#pragma once

// JSON (de)serialization of signals, class specs, systems, quadratic pairs
// and reports. Requires nlohmann/json. Parse errors name the offending field
// by its path, e.g. "system.modes[1].A".

#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "switchstab/certify.hpp"
#include "switchstab/limit_sets.hpp"
#include "switchstab/lyapunov.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/system.hpp"

namespace switchstab {

using Json = nlohmann::ordered_json;

inline constexpr const char* kSchemaVersion = "switchstab/1";

/// Reads a JSON document; syntax errors report line and column.
inline Json ReadJsonFile(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": JSON syntax error");
  }
}

namespace json_detail {

inline std::string Join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string Index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline const Json& Field(const Json& j, const std::string& key, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw ConfigError(Join(path, key) + ": missing field");
  return *it;
}

inline double Number(const Json& j, const std::string& path) {
  if (!j.is_number()) throw ConfigError(path + ": expected a number");
  return j.get<double>();
}

inline double Number(const Json& j, const std::string& key, const std::string& path) {
  return Number(Field(j, key, path), Join(path, key));
}

inline double NumberOr(const Json& j, const std::string& key, double fallback,
                       const std::string& path) {
  return j.contains(key) ? Number(j, key, path) : fallback;
}

inline long Integer(const Json& j, const std::string& path) {
  if (!j.is_number_integer()) throw ConfigError(path + ": expected an integer");
  return j.get<long>();
}

inline std::string String(const Json& j, const std::string& path) {
  if (!j.is_string()) throw ConfigError(path + ": expected a string");
  return j.get<std::string>();
}

inline std::vector<ModeId> Modes(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of mode ids");
  std::vector<ModeId> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(static_cast<ModeId>(Integer(j[i], Index(path, i))));
  }
  return out;
}

inline Json VectorJson(const Vector& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

}  // namespace json_detail

inline Vector ParseVector(const Json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  Vector v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    v[static_cast<Eigen::Index>(i)] = json_detail::Number(j[i], json_detail::Index(path, i));
  }
  return v;
}

/// Nested rows [[..], [..]], or a flat row-major array when `cols` is known.
inline Matrix ParseMatrix(const Json& j, const std::string& path, Eigen::Index cols = -1) {
  if (!j.is_array() || j.empty()) throw ConfigError(path + ": expected a non-empty matrix");
  if (j.front().is_array()) {
    const auto rows = static_cast<Eigen::Index>(j.size());
    const auto c = static_cast<Eigen::Index>(j.front().size());
    Matrix m(rows, c);
    for (Eigen::Index r = 0; r < rows; ++r) {
      const Json& row = j[static_cast<std::size_t>(r)];
      const std::string rp = json_detail::Index(path, static_cast<std::size_t>(r));
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != c) {
        throw ConfigError(rp + ": rows must have equal length");
      }
      for (Eigen::Index k = 0; k < c; ++k) {
        m(r, k) = json_detail::Number(row[static_cast<std::size_t>(k)],
                                      json_detail::Index(rp, static_cast<std::size_t>(k)));
      }
    }
    return m;
  }
  const Vector flat = ParseVector(j, path);
  if (cols <= 0) {
    const auto n = static_cast<Eigen::Index>(std::lround(std::sqrt(double(flat.size()))));
    if (n * n != flat.size()) throw ConfigError(path + ": flat matrix must be square");
    cols = n;
  }
  if (flat.size() % cols != 0) throw ConfigError(path + ": flat length not a multiple of columns");
  Matrix m(flat.size() / cols, cols);
  for (Eigen::Index i = 0; i < flat.size(); ++i) m(i / cols, i % cols) = flat[i];
  return m;
}

inline Json MatrixJson(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(json_detail::VectorJson(m.row(r)));
  return rows;
}

// ---- signals ---------------------------------------------------------------

inline SwitchingSignal ParseSignal(const Json& j, const std::string& path = "signal") {
  using namespace json_detail;
  const double t0 = Number(j, "t_begin", path);
  const double t1 = Number(j, "t_end", path);
  const auto initial = static_cast<ModeId>(Integer(Field(j, "initial_mode", path),
                                                   Join(path, "initial_mode")));
  std::vector<Switch> switches;
  if (j.contains("switches")) {
    const Json& s = j.at("switches");
    const std::string sp = Join(path, "switches");
    if (!s.is_array()) throw ConfigError(sp + ": expected an array of [t, mode]");
    for (std::size_t i = 0; i < s.size(); ++i) {
      const std::string ip = Index(sp, i);
      if (!s[i].is_array() || s[i].size() != 2) throw ConfigError(ip + ": expected [t, mode]");
      switches.push_back({Number(s[i][0], Index(ip, 0)),
                          static_cast<ModeId>(Integer(s[i][1], Index(ip, 1)))});
    }
  }
  try {
    return SwitchingSignal(t0, t1, initial, std::move(switches));
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline Json ToJson(const SwitchingSignal& sig) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "signal";
  j["t_begin"] = sig.t_begin();
  j["t_end"] = sig.t_end();
  j["initial_mode"] = sig.initial_mode();
  Json sw = Json::array();
  for (const Switch& s : sig.switches()) sw.push_back(Json::array({s.time, s.mode}));
  j["switches"] = sw;
  return j;
}

// ---- class specs -----------------------------------------------------------

/// {"1": [2, 3], "2": [1], ...}
inline SetValuedMap ParseGraph(const Json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected {mode: [successors]}");
  std::map<ModeId, std::set<ModeId>> succ;
  for (auto it = j.begin(); it != j.end(); ++it) {
    ModeId from;
    try {
      std::size_t used = 0;
      from = std::stoi(it.key(), &used);
      if (used != it.key().size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw ConfigError(path + ": key '" + it.key() + "' is not a mode id");
    }
    auto& out = succ[from];
    for (ModeId m : json_detail::Modes(it.value(), json_detail::Join(path, it.key()))) {
      out.insert(m);
    }
  }
  try {
    return SetValuedMap(std::move(succ));
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline Json ToJson(const SetValuedMap& h) {
  Json j = Json::object();
  for (const auto& [from, to] : h.successors()) {
    Json a = Json::array();
    for (ModeId m : to) a.push_back(m);
    j[std::to_string(from)] = a;
  }
  return j;
}

inline SignalClassSpec ParseClass(const Json& j, const std::string& path = "class") {
  using namespace json_detail;
  const std::string type = String(Field(j, "type", path), Join(path, "type"));
  if (type == "adt") {
    return AverageDwell{Number(j, "tau_d", path),
                        static_cast<int>(Integer(Field(j, "n0", path), Join(path, "n0")))};
  }
  if (type == "dwell") return Dwell{Number(j, "tau_d", path)};
  if (type == "ergodic") {
    return Ergodic{Number(j, "period", path),
                   Modes(Field(j, "modes", path), Join(path, "modes"))};
  }
  if (type == "graph") return GraphConstrained{ParseGraph(Field(j, "graph", path), Join(path, "graph"))};
  if (type == "intersection") {
    const Json& members = Field(j, "members", path);
    if (!members.is_array() || members.empty()) {
      throw ConfigError(Join(path, "members") + ": expected a non-empty array");
    }
    std::vector<SignalClassSpec> out;
    for (std::size_t i = 0; i < members.size(); ++i) {
      out.push_back(ParseClass(members[i], Index(Join(path, "members"), i)));
    }
    return Intersect(std::move(out));
  }
  throw ConfigError(Join(path, "type") + ": unknown class '" + type + "'");
}

inline Json ToJson(const SignalClassSpec& spec) {
  return std::visit(
      [](const auto& k) -> Json {
        using T = std::decay_t<decltype(k)>;
        Json j;
        if constexpr (std::is_same_v<T, AverageDwell>) {
          j["type"] = "adt";
          j["tau_d"] = k.tau_d;
          j["n0"] = k.n0;
        } else if constexpr (std::is_same_v<T, Dwell>) {
          j["type"] = "dwell";
          j["tau_d"] = k.tau_d;
        } else if constexpr (std::is_same_v<T, Ergodic>) {
          j["type"] = "ergodic";
          j["period"] = k.period;
          j["modes"] = k.modes;
        } else if constexpr (std::is_same_v<T, GraphConstrained>) {
          j["type"] = "graph";
          j["graph"] = ToJson(k.graph);
        } else {
          j["type"] = "intersection";
          Json m = Json::array();
          for (const auto& s : k.members) m.push_back(ToJson(s));
          j["members"] = m;
        }
        return j;
      },
      spec.kind);
}

// ---- systems and pairs -----------------------------------------------------

/// "all" | {"halfspaces": [[n_1, ..., n_d, offset], ...], "box": half_width}
/// with each row meaning n . x >= offset.
inline Domain ParseDomain(const Json& j, Eigen::Index n, const std::string& path) {
  using namespace json_detail;
  if (j.is_string() && j.get<std::string>() == "all") return Domain::Everywhere(n);
  if (!j.is_object()) throw ConfigError(path + ": expected \"all\" or {halfspaces: ...}");
  const double half_width = NumberOr(j, "box", 2.0, path);
  std::vector<Halfspace> hs;
  const Json& rows = Field(j, "halfspaces", path);
  const std::string rp = Join(path, "halfspaces");
  if (!rows.is_array()) throw ConfigError(rp + ": expected an array");
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector row = ParseVector(rows[i], Index(rp, i));
    if (row.size() != n + 1) {
      throw ConfigError(Index(rp, i) + ": expected " + std::to_string(n + 1) + " numbers");
    }
    hs.push_back({row.head(n), row[n]});
  }
  return Domain::Halfspaces(std::move(hs), Box::Symmetric(n, half_width));
}

/// {"builtin": name} or {"dimension": n, "modes": [{"id": 1, "linear": {"A": ...},
/// "domain": ...}, ...]}.
inline SwitchedSystem ParseSystem(const Json& j, const std::string& path = "system") {
  using namespace json_detail;
  if (j.contains("builtin")) {
    const std::string name = String(j.at("builtin"), Join(path, "builtin"));
    if (auto sys = BuiltinSystem(name)) return *sys;
    throw ConfigError(Join(path, "builtin") + ": unknown system '" + name + "'");
  }
  const Json& modes = Field(j, "modes", path);
  const std::string mp = Join(path, "modes");
  if (!modes.is_array() || modes.empty()) throw ConfigError(mp + ": expected a non-empty array");
  Eigen::Index n = j.contains("dimension")
                       ? static_cast<Eigen::Index>(Integer(j.at("dimension"), Join(path, "dimension")))
                       : -1;
  std::vector<Mode> out;
  for (std::size_t i = 0; i < modes.size(); ++i) {
    const std::string ip = Index(mp, i);
    const Json& m = modes[i];
    const auto id = m.contains("id") ? static_cast<ModeId>(Integer(m.at("id"), Join(ip, "id")))
                                     : static_cast<ModeId>(i + 1);
    const Json& lin = Field(m, "linear", ip);
    Matrix a = ParseMatrix(Field(lin, "A", Join(ip, "linear")), Join(ip, "linear.A"), n);
    if (n < 0) n = a.rows();
    if (a.rows() != n || a.cols() != n) {
      throw ConfigError(Join(ip, "linear.A") + ": expected " + std::to_string(n) + "x" +
                        std::to_string(n));
    }
    std::optional<Domain> dom;
    if (m.contains("domain")) dom = ParseDomain(m.at("domain"), n, Join(ip, "domain"));
    out.push_back(LinearMode(id, std::move(a), std::move(dom)));
  }
  return SwitchedSystem(n, std::move(out));
}

/// {"P": [matrix per mode], "C": [matrix per mode]}
inline LyapunovPair ParseQuadraticPair(const Json& j, Eigen::Index n,
                                       const std::string& path = "pair") {
  using namespace json_detail;
  const Json& ps = Field(j, "P", path);
  const Json& cs = Field(j, "C", path);
  if (!ps.is_array() || !cs.is_array() || ps.size() != cs.size()) {
    throw ConfigError(path + ": P and C must be arrays of equal length");
  }
  std::vector<Matrix> p, c;
  for (std::size_t i = 0; i < ps.size(); ++i) {
    p.push_back(ParseMatrix(ps[i], Index(Join(path, "P"), i), n));
    c.push_back(ParseMatrix(cs[i], Index(Join(path, "C"), i), n));
  }
  try {
    return QuadraticPair(p, c);
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

// ---- reports ---------------------------------------------------------------

inline Json ToJson(const ValidationReport& r) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "validation";
  j["passed"] = r.passed;
  j["message"] = r.message;
  if (r.switch_indices) {
    j["switch_indices"] = Json::array({r.switch_indices->first, r.switch_indices->second});
  }
  if (r.times) j["times"] = Json::array({r.times->first, r.times->second});
  if (r.jump) j["jump"] = Json::array({r.jump->first, r.jump->second});
  if (r.missing_mode) j["missing_mode"] = *r.missing_mode;
  return j;
}

inline Json ToJson(const SetEstimate& s) {
  Json j;
  j["cluster_tol"] = s.cluster_tol;
  Json pts = Json::array();
  for (std::size_t i = 0; i < s.points.size(); ++i) {
    Json p;
    p["x"] = json_detail::VectorJson(s.points[i]);
    if (s.has_modes()) p["mode"] = s.modes[i];
    pts.push_back(p);
  }
  j["points"] = pts;
  return j;
}

/// Subspace basis as an array of column vectors.
inline Json ToJson(const Subspace& s) {
  Json j;
  j["ambient_dimension"] = s.ambient_dimension();
  Json cols = Json::array();
  for (Eigen::Index k = 0; k < s.dimension(); ++k) {
    cols.push_back(json_detail::VectorJson(s.basis().col(k)));
  }
  j["basis"] = cols;
  return j;
}

inline Json ToJson(const PredictedLimit& l) {
  Json j;
  j["kind"] = ToString(l.kind);
  j["description"] = l.description;
  if (l.subspace) j["subspace"] = ToJson(*l.subspace);
  if (!l.points.empty()) {
    Json pts = Json::array();
    for (const auto& p : l.points) pts.push_back(json_detail::VectorJson(p));
    j["points"] = pts;
  }
  return j;
}

inline Json ToJson(const CertificateReport& r) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = "certificate";
  j["theorem"] = r.theorem;
  j["verdict"] = ToString(r.verdict);
  j["conclusion"] = r.conclusion;
  Json hs = Json::array();
  for (const auto& h : r.hypotheses) {
    Json e;
    e["name"] = h.name;
    e["statement"] = h.statement;
    e["status"] = ToString(h.status);
    e["detail"] = h.detail;
    if (h.margin) e["margin"] = std::isfinite(*h.margin) ? Json(*h.margin) : Json(nullptr);
    if (h.witness) e["witness"] = json_detail::VectorJson(*h.witness);
    if (h.witness_mode) e["witness_mode"] = *h.witness_mode;
    hs.push_back(e);
  }
  j["hypotheses"] = hs;
  j["predicted_limit"] = ToJson(r.predicted_limit);
  return j;
}

}  // namespace switchstab
