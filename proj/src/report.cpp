#include "fieldclust/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "fieldclust/error.hpp"

namespace fieldclust {

using json = nlohmann::ordered_json;

double round6(double value) {
  if (!std::isfinite(value) || value == 0.0) return value;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", value);
  return std::strtod(buf, nullptr);
}

namespace {

json value_to_json(const ReportValue& v) {
  json j;
  j["hex"] = v.hex;
  j["occurrences"] = v.occurrences;
  j["type"] = v.type ? json(*v.type) : json(nullptr);
  j["positions"] = v.positions;
  return j;
}

ReportValue value_from_json(const json& j) {
  ReportValue v;
  v.hex = j.at("hex").get<std::string>();
  v.occurrences = j.at("occurrences").get<std::size_t>();
  if (!j.at("type").is_null()) v.type = j["type"].get<std::string>();
  v.positions = j.at("positions").get<std::vector<std::array<std::size_t, 2>>>();
  return v;
}

json metrics_to_json(const Metrics& m) {
  return json{{"tp", m.tp},         {"fp", m.fp},         {"tn_plus_fn", m.tn_plus_fn},
              {"fn", m.fn},         {"precision", m.precision}, {"recall", m.recall},
              {"f_score", m.f_score}, {"beta", m.beta},   {"coverage", m.coverage}};
}

Metrics metrics_from_json(const json& j) {
  Metrics m;
  m.tp = j.at("tp").get<std::uint64_t>();
  m.fp = j.at("fp").get<std::uint64_t>();
  m.tn_plus_fn = j.at("tn_plus_fn").get<std::uint64_t>();
  m.fn = j.at("fn").get<std::uint64_t>();
  m.precision = j.at("precision").get<double>();
  m.recall = j.at("recall").get<double>();
  m.f_score = j.at("f_score").get<double>();
  m.beta = j.at("beta").get<double>();
  m.coverage = j.at("coverage").get<double>();
  return m;
}

}  // namespace

std::string report_to_json(const AnalysisReport& r) {
  const auto& md = r.metadata;
  json meta;
  meta["protocol"] = md.protocol;
  meta["input"] = md.input;
  meta["filter"] = md.filter;
  meta["limit"] = md.limit;
  meta["limit_stage"] = md.limit_stage;
  meta["segmenter"] = md.segmenter;
  meta["records"] = md.records;
  meta["messages"] = md.messages;
  meta["total_bytes"] = md.total_bytes;
  meta["segments"] = md.segments;
  meta["excluded_segments"] = md.excluded_segments;
  meta["excluded_bytes"] = md.excluded_bytes;
  meta["unique_values"] = md.unique_values;
  meta["epsilon"] = md.epsilon;
  meta["knee"] = md.knee;
  meta["chosen_k"] = md.chosen_k;
  meta["min_samples"] = md.min_samples;
  meta["retrimmed"] = md.retrimmed;
  meta["retrim_count"] = md.retrim_count;
  meta["fallback"] = md.fallback;
  meta["retrim_stalled"] = md.retrim_stalled;
  meta["retrim_capped"] = md.retrim_capped;
  meta["kneedle_sensitivity"] = md.kneedle_sensitivity;
  meta["spline_smoothing"] = md.spline_smoothing;
  meta["epsilon_shift"] = md.epsilon_shift;
  meta["thresholds"] = {{"eps_rho_threshold", md.thresholds.eps_rho_threshold},
                        {"neighbor_density_threshold", md.thresholds.neighbor_density_threshold},
                        {"split_percentile", md.thresholds.split_percentile}};
  meta["refined"] = md.refined;
  meta["log_rounding"] = md.log_rounding;
  meta["occurrence_counting"] = md.occurrence_counting;
  meta["pair_counting"] = md.pair_counting;

  json doc;
  doc["metadata"] = std::move(meta);
  doc["messages"] = r.messages;
  json clusters = json::array();
  for (const auto& c : r.clusters) {
    json jc;
    jc["id"] = c.id;
    jc["stats"] = {{"mean_pairwise", c.stats.mean_pairwise},
                   {"minmed", c.stats.minmed},
                   {"d_max", c.stats.d_max},
                   {"singleton", c.stats.singleton}};
    jc["values"] = json::array();
    for (const auto& v : c.values) jc["values"].push_back(value_to_json(v));
    clusters.push_back(std::move(jc));
  }
  doc["clusters"] = std::move(clusters);
  doc["noise"] = json::array();
  for (const auto& v : r.noise) doc["noise"].push_back(value_to_json(v));
  doc["metrics"] = r.metrics ? metrics_to_json(*r.metrics) : json(nullptr);
  return doc.dump(1) + "\n";
}

AnalysisReport report_from_json(const std::string& text) {
  AnalysisReport r;
  try {
    auto doc = json::parse(text);
    const auto& meta = doc.at("metadata");
    auto& md = r.metadata;
    md.protocol = meta.at("protocol").get<std::string>();
    md.input = meta.at("input").get<std::string>();
    md.filter = meta.at("filter").get<std::string>();
    md.limit = meta.at("limit").get<std::size_t>();
    md.limit_stage = meta.at("limit_stage").get<std::string>();
    md.segmenter = meta.at("segmenter").get<std::string>();
    md.records = meta.at("records").get<std::size_t>();
    md.messages = meta.at("messages").get<std::size_t>();
    md.total_bytes = meta.at("total_bytes").get<std::size_t>();
    md.segments = meta.at("segments").get<std::size_t>();
    md.excluded_segments = meta.at("excluded_segments").get<std::size_t>();
    md.excluded_bytes = meta.at("excluded_bytes").get<std::size_t>();
    md.unique_values = meta.at("unique_values").get<std::size_t>();
    md.epsilon = meta.at("epsilon").get<double>();
    md.knee = meta.at("knee").get<double>();
    md.chosen_k = meta.at("chosen_k").get<std::size_t>();
    md.min_samples = meta.at("min_samples").get<std::size_t>();
    md.retrimmed = meta.at("retrimmed").get<bool>();
    md.retrim_count = meta.at("retrim_count").get<std::size_t>();
    md.fallback = meta.at("fallback").get<bool>();
    md.retrim_stalled = meta.at("retrim_stalled").get<bool>();
    md.retrim_capped = meta.at("retrim_capped").get<bool>();
    md.kneedle_sensitivity = meta.at("kneedle_sensitivity").get<double>();
    md.spline_smoothing = meta.at("spline_smoothing").get<double>();
    md.epsilon_shift = meta.at("epsilon_shift").get<double>();
    const auto& th = meta.at("thresholds");
    md.thresholds.eps_rho_threshold = th.at("eps_rho_threshold").get<double>();
    md.thresholds.neighbor_density_threshold = th.at("neighbor_density_threshold").get<double>();
    md.thresholds.split_percentile = th.at("split_percentile").get<double>();
    md.refined = meta.at("refined").get<bool>();
    md.log_rounding = meta.at("log_rounding").get<std::string>();
    md.occurrence_counting = meta.at("occurrence_counting").get<std::string>();
    md.pair_counting = meta.at("pair_counting").get<std::string>();

    r.messages = doc.at("messages").get<std::vector<std::string>>();
    for (const auto& jc : doc.at("clusters")) {
      ReportCluster c;
      c.id = jc.at("id").get<std::size_t>();
      const auto& st = jc.at("stats");
      c.stats.mean_pairwise = st.at("mean_pairwise").get<double>();
      c.stats.minmed = st.at("minmed").get<double>();
      c.stats.d_max = st.at("d_max").get<double>();
      c.stats.singleton = st.at("singleton").get<bool>();
      for (const auto& jv : jc.at("values")) c.values.push_back(value_from_json(jv));
      r.clusters.push_back(std::move(c));
    }
    for (const auto& jv : doc.at("noise")) r.noise.push_back(value_from_json(jv));
    if (!doc.at("metrics").is_null()) r.metrics = metrics_from_json(doc["metrics"]);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::parse, std::string("report: ") + e.what());
  }
  return r;
}

AnalysisReport read_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::io, "cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return report_from_json(ss.str());
}

void write_table(std::ostream& out, const AnalysisReport& report) {
  auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return std::string(buf);
  };
  const auto& md = report.metadata;
  std::vector<std::string> row{md.protocol, std::to_string(md.messages), std::to_string(md.unique_values),
                               num(md.epsilon)};
  if (report.metrics) {
    row.push_back(num(report.metrics->precision));
    row.push_back(num(report.metrics->recall));
    row.push_back(num(report.metrics->f_score));
  } else {
    row.insert(row.end(), {"-", "-", "-"});
  }
  const std::vector<std::string> header{"protocol", "messages", "fields", "epsilon", "P", "R", "F(1/4)"};
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = std::max(header[i].size(), row[i].size());

  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      if (i == 0) {
        out << std::left << std::setw(int(width[i])) << cells[i];
      } else {
        out << std::right << std::setw(int(width[i])) << cells[i];
      }
    }
    out << '\n';
  };
  line(header);
  line(row);
}

void emit_report(const AnalysisReport& report, const std::filesystem::path& json_path,
                 const std::filesystem::path& table_path) {
  if (!json_path.empty()) {
    std::ofstream out(json_path, std::ios::binary);
    if (!out) throw Error(ErrorKind::io, "cannot write " + json_path.string());
    out << report_to_json(report);
    if (!out) throw Error(ErrorKind::io, "write failed for " + json_path.string());
  }
  if (!table_path.empty()) {
    std::ofstream out(table_path);
    if (!out) throw Error(ErrorKind::io, "cannot write " + table_path.string());
    write_table(out, report);
    if (!out) throw Error(ErrorKind::io, "write failed for " + table_path.string());
  }
}

}  // namespace fieldclust
