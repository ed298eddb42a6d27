#pragma once

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "tablenet/table.hpp"

namespace tablenet {

using json = nlohmann::ordered_json;

enum class Language { zh, en };

inline std::string_view to_string(Language lang) { return lang == Language::zh ? "zh" : "en"; }

NLOHMANN_JSON_SERIALIZE_ENUM(HeaderLayout, {{HeaderLayout::horizontal, "horizontal"},
                                            {HeaderLayout::vertical, "vertical"},
                                            {HeaderLayout::matrix, "matrix"}})

NLOHMANN_JSON_SERIALIZE_ENUM(LineStyle,
                             {{LineStyle::fully_lined, "fully_lined"},
                              {LineStyle::horizontally_lineless, "horizontally_lineless"},
                              {LineStyle::vertically_lineless, "vertically_lineless"},
                              {LineStyle::lined_headers_only, "lined_headers_only"},
                              {LineStyle::lineless, "lineless"}})

NLOHMANN_JSON_SERIALIZE_ENUM(Language, {{Language::zh, "zh"}, {Language::en, "en"}})

template <typename E>
E enum_from_string(const std::string& text, std::string_view what) {
  const json j = text;
  const E value = j.get<E>();
  // nlohmann maps unknown strings to the first enumerator; reject that case.
  if (json(value).get<std::string>() != text) {
    throw ConfigError("unknown " + std::string(what) + " '" + text + "'");
  }
  return value;
}

inline void to_json(json& j, const Cell& c) {
  j = json{{"content", c.content},     {"row_start", c.row_start}, {"col_start", c.col_start},
           {"rowspan", c.rowspan},     {"colspan", c.colspan},     {"is_header", c.is_header}};
}

inline void from_json(const json& j, Cell& c) {
  c.content = j.value("content", std::string{});
  j.at("row_start").get_to(c.row_start);
  j.at("col_start").get_to(c.col_start);
  c.rowspan = j.value("rowspan", std::size_t{1});
  c.colspan = j.value("colspan", std::size_t{1});
  c.is_header = j.value("is_header", false);
}

inline void to_json(json& j, const Labels& l) {
  j = json{{"is_simple", l.is_simple},   {"is_colored", l.is_colored},
           {"is_lined", l.is_lined},     {"line_style", l.line_style},
           {"header_layout", l.header_layout}};
}

inline void from_json(const json& j, Labels& l) {
  j.at("is_simple").get_to(l.is_simple);
  j.at("is_colored").get_to(l.is_colored);
  j.at("is_lined").get_to(l.is_lined);
  l.line_style = enum_from_string<LineStyle>(j.at("line_style").get<std::string>(), "line_style");
  l.header_layout =
      enum_from_string<HeaderLayout>(j.at("header_layout").get<std::string>(), "header_layout");
}

inline void to_json(json& j, const StyleSpec& s) {
  j = json{{"is_colored", s.is_colored()},
           {"line_style", s.line_style},
           {"border_thickness", s.border_thickness},
           {"font_color", s.font_color},
           {"border_color", s.border_color},
           {"header_background", s.header_background},
           {"body_background", s.body_background},
           {"zebra", s.zebra},
           {"zebra_color", s.zebra_color},
           {"font_family", s.font_family},
           {"font_size_px", s.font_size_px}};
}

inline void from_json(const json& j, StyleSpec& s) {
  s = StyleSpec{};
  if (j.contains("line_style")) {
    s.line_style = enum_from_string<LineStyle>(j.at("line_style").get<std::string>(), "line_style");
  }
  s.border_thickness = j.value("border_thickness", s.border_thickness);
  s.font_color = j.value("font_color", s.font_color);
  s.border_color = j.value("border_color", s.border_color);
  s.header_background = j.value("header_background", s.header_background);
  s.body_background = j.value("body_background", s.body_background);
  s.zebra = j.value("zebra", s.zebra);
  s.zebra_color = j.value("zebra_color", s.zebra_color);
  s.font_family = j.value("font_family", s.font_family);
  s.font_size_px = j.value("font_size_px", s.font_size_px);
}

inline json matrix_to_json(const Matrix<int>& m) {
  json rows = json::array();
  for (std::size_t r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

inline json schema_to_json(const TableSchema& s) {
  return json{{"n_rows", s.n_rows},
              {"n_cols", s.n_cols},
              {"row_span_matrix", matrix_to_json(s.row_spans)},
              {"col_span_matrix", matrix_to_json(s.col_spans)},
              {"header_layout", s.header_layout},
              {"header_rows", s.header_rows},
              {"header_cols", s.header_cols}};
}

struct Provenance {
  std::string parent_id;
  json transform;  // null for untransformed variants

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

// Dataset unit: one table with its structural and visual annotations.
struct AnnotationRecord {
  std::string id;
  std::string html;
  std::vector<std::string> structure_tokens;
  std::vector<Cell> cells;
  Labels labels;
  std::string topic;
  Language language = Language::en;
  std::optional<StyleSpec> style;
  std::optional<Provenance> provenance;
  json extra = json::object();  // unknown fields, preserved verbatim

  friend bool operator==(const AnnotationRecord&, const AnnotationRecord&) = default;
};

inline AnnotationRecord make_record(std::string id, const TableGrid& grid, const StyleSpec& style,
                                    std::string topic, Language language) {
  AnnotationRecord r;
  r.id = std::move(id);
  r.html = grid_to_html(grid, style);
  r.structure_tokens = structure_tokens(grid);
  r.cells = grid.cells();
  r.labels = derive_labels(grid, style);
  r.topic = std::move(topic);
  r.language = language;
  r.style = style;
  return r;
}

// Builds a record for already-rendered markup; the grid is reparsed from it.
inline AnnotationRecord make_record_from_html(std::string id, std::string html,
                                              const StyleSpec& style, std::string topic,
                                              Language language) {
  const TableGrid grid = html_to_grid(html);
  AnnotationRecord r;
  r.id = std::move(id);
  r.structure_tokens = structure_tokens(grid);
  r.cells = grid.cells();
  r.labels = derive_labels(grid, style);
  r.html = std::move(html);
  r.topic = std::move(topic);
  r.language = language;
  r.style = style;
  return r;
}

inline const std::vector<std::string>& known_record_fields() {
  static const std::vector<std::string> kFields = {
      "id",    "html",     "structure_tokens", "cells", "labels", "topic",
      "language", "style", "provenance"};
  return kFields;
}

inline void to_json(json& j, const AnnotationRecord& r) {
  j = json::object();
  j["id"] = r.id;
  j["html"] = r.html;
  j["structure_tokens"] = r.structure_tokens;
  j["cells"] = r.cells;
  j["labels"] = r.labels;
  j["topic"] = r.topic;
  j["language"] = r.language;
  if (r.style) j["style"] = *r.style;
  if (r.provenance) {
    j["provenance"] = json{{"parent_id", r.provenance->parent_id},
                           {"transform", r.provenance->transform}};
  }
  for (const auto& [key, value] : r.extra.items()) j[key] = value;
}

inline void from_json(const json& j, AnnotationRecord& r) {
  r = AnnotationRecord{};
  j.at("id").get_to(r.id);
  j.at("html").get_to(r.html);
  r.structure_tokens = j.value("structure_tokens", std::vector<std::string>{});
  if (j.contains("cells")) j.at("cells").get_to(r.cells);
  if (j.contains("labels")) j.at("labels").get_to(r.labels);
  r.topic = j.value("topic", std::string{});
  if (j.contains("language")) {
    r.language = enum_from_string<Language>(j.at("language").get<std::string>(), "language");
  }
  if (j.contains("style")) r.style = j.at("style").get<StyleSpec>();
  if (j.contains("provenance") && !j.at("provenance").is_null()) {
    const json& p = j.at("provenance");
    r.provenance = Provenance{p.value("parent_id", std::string{}),
                              p.contains("transform") ? p.at("transform") : json(nullptr)};
  }
  const auto& known = known_record_fields();
  for (const auto& [key, value] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) r.extra[key] = value;
  }
}

// JSON schema of one manifest line, printed by `--schema`.
inline json manifest_schema() {
  const json cell = {{"type", "object"},
                     {"required", {"content", "row_start", "col_start", "rowspan", "colspan", "is_header"}},
                     {"properties",
                      {{"content", {{"type", "string"}}},
                       {"row_start", {{"type", "integer"}, {"minimum", 0}}},
                       {"col_start", {{"type", "integer"}, {"minimum", 0}}},
                       {"rowspan", {{"type", "integer"}, {"minimum", 1}}},
                       {"colspan", {{"type", "integer"}, {"minimum", 1}}},
                       {"is_header", {{"type", "boolean"}}}}}};
  const json labels = {
      {"type", "object"},
      {"required", {"is_simple", "is_colored", "is_lined", "line_style", "header_layout"}},
      {"properties",
       {{"is_simple", {{"type", "boolean"}}},
        {"is_colored", {{"type", "boolean"}}},
        {"is_lined", {{"type", "boolean"}}},
        {"line_style",
         {{"enum", {"fully_lined", "horizontally_lineless", "vertically_lineless",
                    "lined_headers_only", "lineless"}}}},
        {"header_layout", {{"enum", {"horizontal", "vertical", "matrix"}}}}}}};
  return {{"$schema", "https://json-schema.org/draft/2020-12/schema"},
          {"title", "AnnotationRecord"},
          {"type", "object"},
          {"required", {"id", "html", "structure_tokens", "cells", "labels", "topic", "language"}},
          {"properties",
           {{"id", {{"type", "string"}}},
            {"html", {{"type", "string"}}},
            {"structure_tokens", {{"type", "array"}, {"items", {{"type", "string"}}}}},
            {"cells", {{"type", "array"}, {"items", cell}}},
            {"labels", labels},
            {"topic", {{"type", "string"}}},
            {"language", {{"enum", {"zh", "en"}}}},
            {"style", {{"type", "object"}}},
            {"provenance",
             {{"type", "object"},
              {"properties", {{"parent_id", {{"type", "string"}}}, {"transform", {}}}}}}}},
          {"additionalProperties", true}};
}

}  // namespace tablenet
