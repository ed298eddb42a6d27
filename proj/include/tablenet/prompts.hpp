#pragma once

#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>

#include "tablenet/error.hpp"

namespace tablenet {

// Prompt templates with {slot} placeholders. Defaults are built in; any of
// them can be replaced by a file named <name>.txt in a prompt directory.
struct PromptSet {
  std::string topic =
      "List {copy} specific, detailed {lang} phrases describing table topics in the "
      "{domain} field.\n"
      "Answer with JSON only, in the form {\"phrase\": [\"...\", \"...\"]}.\n"
      "Avoid these topics and anything close to them:\n"
      "{used_topics}\n";

  std::string header =
      "Domain: {domain}\nTopic: {topic}\nLanguage: {lang}\n"
      "HTML table:\n{HTML_CODE}\n\n"
      "Write a column or row name into every <th> element, including <th> elements "
      "that carry rowspan or colspan. Keep every tag, attribute and the nesting exactly "
      "as given and leave <td> elements untouched.\n"
      "Answer with JSON only, in the form {\"html\": \"<table>...</table>\"}.\n";

  std::string body =
      "Domain: {domain}\nTopic: {topic}\nLanguage: {lang}\n"
      "HTML table with filled headers and empty body cells:\n{HTML_CODE}\n\n"
      "Fill every <td> element with distinct content that fits its headers and the topic. "
      "Keep every tag, attribute and the nesting exactly as given.\n"
      "Produce {copy} different filled versions.\n"
      "Answer with JSON only, in the form {\"html\": [\"<table>...</table>\", ...]}.\n";

  std::string rank =
      "Rate the HTML table below on integer scales from 1 to 5.\n"
      "structure_rank: report exactly {score}. Logical columns per row: {structure_info}.\n"
      "topic_rank: how well the content covers the topic \"{topic}\" and these entities: "
      "{entities}.\n"
      "semantic_rank: deduct for empty cells, header/body mismatch, vague headers and "
      "garbled text, in proportion to the affected cells. \"N/A\", \"-\" and \"TBD\" are not "
      "empty.\n"
      "rank: the minimum of the three.\n"
      "Answer with JSON only: {\"structure_rank\": n, \"topic_rank\": n, "
      "\"semantic_rank\": n, \"rank\": n}.\n"
      "HTML:\n{html_code}\n";

  static PromptSet load(const std::filesystem::path& dir) {
    PromptSet p;
    const auto read = [&](std::string_view name, std::string& slot) {
      const auto file = dir / (std::string(name) + ".txt");
      if (!std::filesystem::exists(file)) return;
      std::ifstream in(file, std::ios::binary);
      if (!in) throw ConfigError("cannot read prompt template " + file.string());
      std::ostringstream ss;
      ss << in.rdbuf();
      slot = ss.str();
    };
    if (!std::filesystem::is_directory(dir)) {
      throw ConfigError("prompt directory not found: " + dir.string());
    }
    read("topic", p.topic);
    read("header", p.header);
    read("body", p.body);
    read("rank", p.rank);
    return p;
  }
};

// Replaces each {name} with its value. Unknown placeholders are left alone so
// literal JSON braces in templates survive.
inline std::string render_template(std::string_view text,
                                   const std::map<std::string, std::string>& slots) {
  std::string out;
  out.reserve(text.size());
  for (std::size_t i = 0; i < text.size();) {
    if (text[i] == '{') {
      const auto close = text.find('}', i + 1);
      if (close != std::string_view::npos) {
        const auto it = slots.find(std::string(text.substr(i + 1, close - i - 1)));
        if (it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out.push_back(text[i++]);
  }
  return out;
}

}  // namespace tablenet
