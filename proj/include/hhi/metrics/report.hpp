#pragma once

#include <algorithm>
#include <cstdio>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hhi/core/errors.hpp"
#include "hhi/core/serde.hpp"
#include "hhi/metrics/evaluate.hpp"

namespace hhi::metrics {

inline constexpr const char* kMetricColumns[] = {"BL↑", "p_e↑", "p_c↓", "sim↑"};

struct MethodLabel {
  std::string method = "model";
  std::string train_data = "-";
};

inline Json scores_json(const Scores& s) { return Json{{"BL", s.BL}, {"p_e", s.p_e}, {"p_c", s.p_c}, {"sim", s.sim}}; }

inline Scores scores_from_json(const Json& j) {
  return {json_detail::get_required<double>(j, "BL"), json_detail::get_required<double>(j, "p_e"),
          json_detail::get_required<double>(j, "p_c"), json_detail::get_required<double>(j, "sim")};
}

inline Json report_to_json(const std::vector<MetricReport>& reports, const EvalConfig& cfg, const MethodLabel& label) {
  Json results = Json::array();
  for (const auto& r : reports) {
    Json per_source = Json::object();
    for (const auto& [src, m] : r.per_source) {
      auto j = scores_json(m.mean);
      j["n"] = m.n;
      per_source[std::string(source_label(src))] = j;
    }
    Json items = Json::array();
    for (const auto& it : r.per_item) {
      auto j = Json{{"sample_id", it.sample_id}, {"source", to_string(it.source)}, {"beams_used", it.beams_used}};
      j.update(scores_json(it.scores));
      items.push_back(j);
    }
    results.push_back(Json{{"k", r.k}, {"macro", scores_json(r.macro)}, {"per_source", per_source}, {"per_item", items}});
  }
  Json meta{{"topk_reduction", "best-of-prefix"}, {"macro", "mean of per-source means"}};
  if (cfg.categorical) meta["categorical_best_of_two"] = "per-metric";
  return Json{{"mode", "wenda"}, {"method", label.method}, {"train_data", label.train_data},
              {"config", cfg},   {"meta", meta},           {"results", results}};
}

inline Json situ_report_to_json(const std::vector<SituReport>& reports, const EvalConfig& cfg,
                                const MethodLabel& label) {
  Json results = Json::array();
  for (const auto& r : reports) {
    Json verbs = Json::array();
    for (const auto& [v, s] : r.top_verbs) verbs.push_back(Json{{"verb", v}, {"sim", s}});
    Json splits = Json::object();
    for (const auto& [sp, s] : r.per_split) splits[std::string(to_string(sp))] = s;
    Json items = Json::array();
    for (const auto& it : r.per_item)
      items.push_back(Json{{"sample_id", it.sample_id}, {"verb", it.verb}, {"split", to_string(it.split)}, {"sim", it.sim}});
    results.push_back(Json{{"k", r.k}, {"sim", r.overall}, {"top_verbs", verbs}, {"per_split", splits}, {"per_item", items}});
  }
  return Json{{"mode", "imsitu"},
              {"method", label.method},
              {"train_data", label.train_data},
              {"config", cfg},
              {"meta", Json{{"topk_reduction", "best-of-prefix"}}},
              {"results", results}};
}

namespace report_detail {

inline std::size_t display_width(std::string_view s) {
  std::size_t n = 0;
  for (unsigned char c : s)
    if ((c & 0xC0) != 0x80) ++n;
  return n;
}

inline std::string pad(std::string_view s, std::size_t w) {
  std::string out(s);
  for (std::size_t n = display_width(s); n < w; ++n) out += ' ';
  return out;
}

inline std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

class Table {
 public:
  void row(std::vector<std::string> cells) { rows_.push_back(std::move(cells)); }
  void rule() { rows_.push_back({}); }

  std::string str() const {
    std::vector<std::size_t> w;
    for (const auto& r : rows_)
      for (std::size_t i = 0; i < r.size(); ++i) {
        if (w.size() <= i) w.push_back(0);
        w[i] = std::max(w[i], display_width(r[i]));
      }
    std::size_t total = 0;
    for (auto x : w) total += x + 2;
    std::string out;
    for (const auto& r : rows_) {
      if (r.empty()) {
        out += std::string(total > 2 ? total - 2 : 0, '-') + "\n";
        continue;
      }
      std::string line;
      for (std::size_t i = 0; i < r.size(); ++i) line += pad(r[i], i + 1 < r.size() ? w[i] + 2 : 0);
      while (!line.empty() && line.back() == ' ') line.pop_back();
      out += line + "\n";
    }
    return out;
  }

 private:
  std::vector<std::vector<std::string>> rows_;
};

inline std::vector<int> all_ks(const std::vector<Json>& reports) {
  std::set<int> ks;
  for (const auto& r : reports)
    for (const auto& res : r.at("results")) ks.insert(res.at("k").get<int>());
  return {ks.begin(), ks.end()};
}

inline const Json* result_for(const Json& report, int k) {
  for (const auto& res : report.at("results"))
    if (res.at("k").get<int>() == k) return &res;
  return nullptr;
}

inline void append_scores(std::vector<std::string>& row, const Json* j) {
  if (!j) {
    row.insert(row.end(), 4, "");
    return;
  }
  auto s = scores_from_json(*j);
  for (double x : {s.BL, s.p_e, s.p_c, s.sim}) row.push_back(num(x));
}

inline std::string wenda_tables(const std::vector<Json>& reports) {
  std::vector<std::string> sources = {"WW", "CC", "COCO"};
  Table macro, per_source;
  std::vector<std::string> head = {"Method", "Train Data"};
  head.insert(head.end(), std::begin(kMetricColumns), std::end(kMetricColumns));
  macro.row(head);
  std::vector<std::string> groups = {"", ""};
  std::vector<std::string> head2 = {"Method", "Train Data"};
  for (const auto& s : sources) {
    groups.push_back(s);
    groups.insert(groups.end(), 3, "");
    head2.insert(head2.end(), std::begin(kMetricColumns), std::end(kMetricColumns));
  }
  per_source.row(groups);
  per_source.row(head2);
  for (int k : all_ks(reports)) {
    macro.rule();
    macro.row({"Results@" + std::to_string(k)});
    per_source.rule();
    per_source.row({"Results@" + std::to_string(k)});
    for (const auto& r : reports) {
      const Json* res = result_for(r, k);
      if (!res) continue;
      std::vector<std::string> row = {r.at("method").get<std::string>(), r.at("train_data").get<std::string>()};
      append_scores(row, &res->at("macro"));
      macro.row(row);
      std::vector<std::string> row2 = {r.at("method").get<std::string>(), r.at("train_data").get<std::string>()};
      for (const auto& s : sources)
        append_scores(row2, res->at("per_source").contains(s) ? &res->at("per_source").at(s) : nullptr);
      per_source.row(row2);
    }
  }
  return "Aggregated over sources (macro mean)\n" + macro.str() + "\nPer source\n" + per_source.str();
}

inline std::string imsitu_tables(const std::vector<Json>& reports) {
  std::vector<std::string> verbs;
  for (const auto& r : reports) {
    for (const auto& res : r.at("results")) {
      for (const auto& v : res.at("top_verbs")) {
        auto name = v.at("verb").get<std::string>();
        if (std::find(verbs.begin(), verbs.end(), name) == verbs.end()) verbs.push_back(name);
      }
      break;
    }
  }
  std::set<std::string> split_names;
  for (const auto& r : reports)
    for (const auto& res : r.at("results"))
      for (const auto& [sp, _] : res.at("per_split").items()) split_names.insert(sp);

  Table by_verb, by_split;
  std::vector<std::string> head = {"Method", "Train Data", "Average sim."};
  head.insert(head.end(), verbs.begin(), verbs.end());
  by_verb.row(head);
  std::vector<std::string> head2 = {"Method", "Train Data"};
  head2.insert(head2.end(), split_names.begin(), split_names.end());
  by_split.row(head2);
  for (int k : all_ks(reports)) {
    by_verb.rule();
    by_verb.row({"Results@" + std::to_string(k)});
    by_split.rule();
    by_split.row({"Results@" + std::to_string(k)});
    for (const auto& r : reports) {
      const Json* res = result_for(r, k);
      if (!res) continue;
      std::vector<std::string> row = {r.at("method").get<std::string>(), r.at("train_data").get<std::string>(),
                                      num(res->at("sim").get<double>())};
      for (const auto& v : verbs) {
        std::string cell;
        for (const auto& tv : res->at("top_verbs"))
          if (tv.at("verb") == v) cell = num(tv.at("sim").get<double>());
        row.push_back(cell);
      }
      by_verb.row(row);
      std::vector<std::string> row2 = {r.at("method").get<std::string>(), r.at("train_data").get<std::string>()};
      for (const auto& sp : split_names)
        row2.push_back(res->at("per_split").contains(sp) ? num(res->at("per_split").at(sp).get<double>()) : "");
      by_split.row(row2);
    }
  }
  return "Verb similarity (overall and most common verbs)\n" + by_verb.str() + "\nVerb similarity per split\n" +
         by_split.str();
}

}  // namespace report_detail

/// Human-readable tables for one or more report JSON documents of the same
/// mode, one row per method.
inline std::string format_tables(const std::vector<Json>& reports) {
  if (reports.empty()) throw ValidationError("no reports to format");
  const auto mode = reports.front().at("mode").get<std::string>();
  for (const auto& r : reports)
    if (r.at("mode").get<std::string>() != mode) throw ValidationError("cannot mix wenda and imsitu reports");
  if (mode == "wenda") return report_detail::wenda_tables(reports);
  if (mode == "imsitu") return report_detail::imsitu_tables(reports);
  throw ValidationError("unknown report mode '" + mode + "'");
}

}  // namespace hhi::metrics
