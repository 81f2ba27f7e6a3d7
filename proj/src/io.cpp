#include "lmd/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "lmd/errors.hpp"

namespace lmd::io {

namespace {

[[noreturn]] void bad(const std::string& what) { throw UnreadableInputError(what); }

void check_version(const json& doc, const char* kind) {
  if (!doc.is_object()) bad(std::string(kind) + ": expected a JSON object");
  if (!doc.contains("schema_version") || doc.at("schema_version") != kSchemaVersion)
    bad(std::string(kind) + ": unsupported or missing schema_version");
}

json versioned(const char* kind) {
  json doc = json::object();
  doc["schema_version"] = kSchemaVersion;
  doc["kind"] = kind;
  return doc;
}

template <typename T>
T field(const json& doc, const char* key) {
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    bad(std::string("field '") + key + "': " + e.what());
  }
}

json matrix_rows(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_rows(const json& rows) {
  if (!rows.is_array()) bad("matrix: expected an array of rows");
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = n == 0 ? 0 : static_cast<Eigen::Index>(rows.at(0).size());
  Eigen::MatrixXd m(n, p);
  for (Eigen::Index i = 0; i < n; ++i) {
    const json& row = rows.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != p) bad("matrix: ragged rows");
    for (Eigen::Index j = 0; j < p; ++j) m(i, j) = row.at(static_cast<std::size_t>(j)).get<double>();
  }
  return m;
}

json vector_json(const Eigen::VectorXd& v) {
  json out = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

Eigen::VectorXd vector_from(const json& arr) {
  const auto values = arr.get<std::vector<double>>();
  return Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
}

json alert_json(const Alert& a) {
  json fired = json::array();
  for (const auto& m : a.fired_by) fired.push_back(m.label());
  return {{"system", a.system},
          {"member", a.member.label()},
          {"error", a.error},
          {"threshold", a.threshold},
          {"fired_by", fired}};
}

}  // namespace

json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) bad("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    bad(path.string() + ": " + e.what());
  }
}

std::string dump(const json& doc) { return doc.dump(2) + "\n"; }

void write_json(const std::filesystem::path& path, const json& doc) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << dump(doc);
}

std::string format_double(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

// ---------------------------------------------------------------------------

json to_json(const LoginHistory& history) {
  json doc = versioned("login_history");
  doc["user"] = history.user();
  json graphs = json::array();
  for (const auto& g : history.graphs()) {
    json edges = json::array();
    for (const auto& [e, w] : g.edges()) edges.push_back(json::array({e.first, e.second, w}));
    graphs.push_back({{"day", g.day()}, {"vertices", g.vertices()}, {"edges", edges}});
  }
  doc["graphs"] = std::move(graphs);
  return doc;
}

LoginHistory history_from_json(const json& doc) {
  check_version(doc, "login_history");
  const auto user = field<std::string>(doc, "user");
  std::vector<LoginGraph> graphs;
  try {
    for (const auto& g : doc.at("graphs")) {
      LoginGraph graph(user, g.at("day").get<DayIndex>());
      for (const auto& v : g.at("vertices")) graph.add_vertex(v.get<std::string>());
      for (const auto& e : g.at("edges")) {
        if (!e.is_array() || e.size() != 3) bad("edge must be [src, dst, weight]");
        graph.add_login(e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<std::int64_t>());
      }
      graphs.push_back(std::move(graph));
    }
    return LoginHistory(user, std::move(graphs));
  } catch (const json::exception& e) {
    bad(std::string("login_history: ") + e.what());
  } catch (const std::invalid_argument& e) {
    bad(std::string("login_history: ") + e.what());
  }
}

json to_json(const ModelSpec& spec) {
  std::vector<int> measures;
  for (auto m : spec.measures) measures.push_back(index_of(m));
  return {{"label", spec.label()},
          {"measures", measures},
          {"compression", std::string(to_string(spec.compression))},
          {"roles", spec.roles},
          {"alpha", spec.alpha}};
}

ModelSpec model_spec_from_json(const json& doc) {
  ModelSpec spec;
  try {
    for (int i : doc.at("measures").get<std::vector<int>>()) spec.measures.push_back(measure_from_index(i));
    spec.compression = parse_compression(doc.at("compression").get<std::string>());
    spec.roles = doc.at("roles").get<int>();
    spec.alpha = doc.at("alpha").get<double>();
    spec.validate();
  } catch (const json::exception& e) {
    bad(std::string("model spec: ") + e.what());
  } catch (const std::invalid_argument& e) {
    bad(std::string("model spec: ") + e.what());
  } catch (const ConfigError& e) {
    bad(std::string("model spec: ") + e.what());
  }
  return spec;
}

json to_json(const Ensemble& ensemble) {
  json doc = versioned("ensemble");
  doc["user"] = ensemble.user;
  json members = json::array();
  for (const auto& m : ensemble.members) members.push_back(to_json(m));
  doc["members"] = std::move(members);
  json prov = json::array();
  for (const auto& p : ensemble.provenance)
    prov.push_back({{"mode", std::string(to_string(p.mode))},
                    {"type_index", p.type_index},
                    {"member", p.member.label()}});
  doc["provenance"] = std::move(prov);
  return doc;
}

Ensemble ensemble_from_json(const json& doc) {
  check_version(doc, "ensemble");
  Ensemble e;
  e.user = field<std::string>(doc, "user");
  try {
    for (const auto& m : doc.at("members")) e.members.push_back(model_spec_from_json(m));
    for (const auto& p : doc.at("provenance")) {
      EnsemblePick pick;
      pick.mode = parse_injection_mode(p.at("mode").get<std::string>());
      pick.type_index = p.at("type_index").get<int>();
      const auto label = p.at("member").get<std::string>();
      auto it = std::find_if(e.members.begin(), e.members.end(),
                             [&](const ModelSpec& s) { return s.label() == label; });
      if (it == e.members.end()) bad("ensemble: provenance names unknown member " + label);
      pick.member = *it;
      e.provenance.push_back(std::move(pick));
    }
  } catch (const json::exception& ex) {
    bad(std::string("ensemble: ") + ex.what());
  } catch (const ConfigError& ex) {
    bad(std::string("ensemble: ") + ex.what());
  }
  if (e.members.empty()) bad("ensemble: no members");
  return e;
}

json to_json(const NmfModel& model, double alpha) {
  json doc = versioned("nmf_model");
  doc["roles"] = model.roles;
  doc["alpha"] = alpha;
  doc["scaling"] = model.scaling.divisors;
  doc["g"] = matrix_rows(model.g);
  doc["f"] = matrix_rows(model.f);
  doc["objective_history"] = model.objective_history;
  return doc;
}

json to_json(const PcaModel& model, double alpha) {
  json doc = versioned("pca_model");
  doc["roles"] = model.roles;
  doc["alpha"] = alpha;
  doc["scaling"] = model.scaling.divisors;
  doc["mean"] = vector_json(model.mean);
  doc["components"] = matrix_rows(model.components);
  doc["eigenvalues"] = vector_json(model.eigenvalues);
  doc["discarded_eigenvalues"] = vector_json(model.discarded_eigenvalues);
  return doc;
}

NmfModel nmf_model_from_json(const json& doc) {
  check_version(doc, "nmf_model");
  NmfModel m;
  try {
    m.roles = doc.at("roles").get<int>();
    m.scaling.divisors = doc.at("scaling").get<std::vector<double>>();
    m.g = matrix_from_rows(doc.at("g"));
    m.f = matrix_from_rows(doc.at("f"));
    m.objective_history = doc.at("objective_history").get<std::vector<double>>();
  } catch (const json::exception& e) {
    bad(std::string("nmf_model: ") + e.what());
  }
  return m;
}

PcaModel pca_model_from_json(const json& doc) {
  check_version(doc, "pca_model");
  PcaModel m;
  try {
    m.roles = doc.at("roles").get<int>();
    m.scaling.divisors = doc.at("scaling").get<std::vector<double>>();
    m.mean = vector_from(doc.at("mean"));
    m.components = matrix_from_rows(doc.at("components"));
    m.eigenvalues = vector_from(doc.at("eigenvalues"));
    m.discarded_eigenvalues = vector_from(doc.at("discarded_eigenvalues"));
  } catch (const json::exception& e) {
    bad(std::string("pca_model: ") + e.what());
  }
  return m;
}

json to_json(const EnsembleReport& r) {
  json doc = versioned("ensemble_report");
  doc["user"] = r.user;
  doc["mode"] = std::string(to_string(r.mode));
  doc["mean_fpr"] = r.mean_fpr;
  doc["fpr_stderr"] = r.fpr_stderr;
  doc["fpr_iterations"] = r.fpr_iterations;
  doc["fpr_skipped"] = r.fpr_skipped;
  doc["mu_tpr"] = r.mu_tpr;
  json types = json::array();
  for (std::size_t t = 0; t < r.mean_tpr.size(); ++t)
    types.push_back({{"type_index", t}, {"mean_tpr", r.mean_tpr[t]}});
  doc["tpr_by_type"] = std::move(types);
  json roc = json::array();
  for (const auto& p : r.roc)
    roc.push_back({{"alpha", p.alpha}, {"mean_fpr", p.mean_fpr}, {"mu_tpr", p.mu_tpr}, {"mean_tpr", p.mean_tpr}});
  doc["roc"] = std::move(roc);
  return doc;
}

json to_json(const DetectionReport& r) {
  json doc = versioned("detection_report");
  doc["user"] = r.user;
  doc["day"] = r.day;
  doc["novel_systems"] = r.novel;
  doc["fits_performed"] = r.fits_performed;
  json alerts = json::array();
  for (const auto& a : r.alerts) alerts.push_back(alert_json(a));
  doc["alerts"] = std::move(alerts);
  json info = json::array();
  for (const auto& a : r.informational) info.push_back(alert_json(a));
  doc["informational"] = std::move(info);
  return doc;
}

json to_json(const BaselineReport& r) {
  json doc = versioned("baseline_report");
  doc["user"] = r.user;
  doc["threshold"] = r.threshold;
  doc["days"] = r.days;
  doc["mean_distance"] = r.mean_distance;
  doc["distances"] = matrix_rows(r.distances);
  doc["flagged_days"] = r.flagged;
  return doc;
}

json catalog_to_json(std::span<const AdversarialGraph> catalog) {
  json doc = versioned("adversarial_catalog");
  json graphs = json::array();
  for (const auto& g : catalog) {
    json edges = json::array();
    for (auto [a, b] : g.edges) edges.push_back(json::array({a, b}));
    graphs.push_back({{"type_index", g.type_index},
                      {"node_count", g.node_count},
                      {"root", g.root},
                      {"code", g.canonical_code},
                      {"edges", edges}});
  }
  doc["graphs"] = std::move(graphs);
  return doc;
}

void write_scores_csv(std::ostream& out, std::span<const ModelScore> scores) {
  const std::size_t types = scores.empty() ? 0 : scores.front().mean_tpr.size();
  out << "label,measures,compression,roles,alpha,mean_fpr,fpr_stderr,fpr_iterations,fpr_skipped,mu_tpr";
  for (std::size_t t = 0; t < types; ++t) out << ",tpr_" << t;
  out << "\n";
  for (const auto& s : scores) {
    std::string measures;
    for (auto m : s.spec.measures) {
      if (!measures.empty()) measures += ' ';
      measures += std::to_string(index_of(m));
    }
    out << '"' << s.spec.label() << "\"," << measures << ',' << to_string(s.spec.compression) << ','
        << s.spec.roles << ',' << format_double(s.spec.alpha) << ',' << format_double(s.mean_fpr)
        << ',' << format_double(s.fpr_stderr) << ',' << s.fpr_iterations << ',' << s.fpr_skipped
        << ',' << format_double(s.mean_tpr_over_types());
    for (double v : s.mean_tpr) out << ',' << format_double(v);
    out << "\n";
  }
}

}  // namespace lmd::io
