#pragma once

#include <cstdlib>
#include <memory>
#include <string>
#include <vector>

#include "tablenet/infill.hpp"
#include "tablenet/prompts.hpp"
#include "tablenet/transport.hpp"

namespace tablenet {

struct ProviderConfig {
  std::string kind = "template";  // template | http
  std::string endpoint;
  std::string model;
  int max_inflight = 4;
  int timeout_ms = 60000;
  std::string api_key_env = "TABLENET_API_KEY";
  double temperature = 0.7;
  std::string prompt_dir;
  std::string transcript;  // record to this JSONL file when set
  std::string replay;      // serve responses from this JSONL file when set

  static ProviderConfig from_json(const json& j) {
    ProviderConfig c;
    c.kind = j.value("kind", c.kind);
    c.endpoint = j.value("endpoint", c.endpoint);
    c.model = j.value("model", c.model);
    c.max_inflight = j.value("max_inflight", c.max_inflight);
    c.timeout_ms = j.value("timeout_ms", c.timeout_ms);
    c.api_key_env = j.value("api_key_env", c.api_key_env);
    c.temperature = j.value("temperature", c.temperature);
    c.prompt_dir = j.value("prompt_dir", c.prompt_dir);
    c.transcript = j.value("transcript", c.transcript);
    c.replay = j.value("replay", c.replay);
    if (c.kind != "template" && c.kind != "http") {
      throw ConfigError("provider kind must be template or http, got '" + c.kind + "'");
    }
    if (c.max_inflight < 1) throw ConfigError("max_inflight must be >= 1");
    return c;
  }
};

namespace detail {

inline std::string strip_code_fence(std::string text) {
  const auto first = text.find("```");
  if (first == std::string::npos) return text;
  auto start = text.find('\n', first);
  const auto last = text.rfind("```");
  if (start == std::string::npos || last <= start) return text;
  return text.substr(start + 1, last - start - 1);
}

inline json parse_reply_json(const std::string& content) {
  try {
    return json::parse(strip_code_fence(content));
  } catch (const json::parse_error& e) {
    throw ResponseFormatError(std::string("reply is not JSON: ") + e.what());
  }
}

// Table fragment of a document, the part sent to the model.
inline std::string table_fragment(std::string_view document) {
  const TableAnalysis a = analyze_table(document);
  if (a.table_end <= a.table_begin) return std::string(document);
  return std::string(document.substr(a.table_begin, a.table_end - a.table_begin));
}

inline std::string splice_fragment(std::string_view document, std::string_view fragment) {
  const TableAnalysis a = analyze_table(document);
  if (a.table_end <= a.table_begin) return std::string(fragment);
  std::string out(document.substr(0, a.table_begin));
  out += fragment;
  out += document.substr(a.table_end);
  return out;
}

}  // namespace detail

// Chat-completion client: builds prompts, sends them through a Transport and
// parses the reply contracts. Speaks the OpenAI-compatible payload shape.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<Transport> transport, std::string model, double temperature)
      : transport_(std::move(transport)), model_(std::move(model)), temperature_(temperature) {}

  json complete(const std::string& prompt) const {
    const json request = {{"model", model_},
                          {"messages", json::array({{{"role", "user"}, {"content", prompt}}})},
                          {"temperature", temperature_}};
    const json response = transport_->post(request);
    const auto* content = find_content(response);
    if (!content) throw ResponseFormatError("response has no choices[0].message.content");
    return detail::parse_reply_json(*content);
  }

 private:
  static const std::string* find_content(const json& response) {
    if (!response.contains("choices") || !response["choices"].is_array() ||
        response["choices"].empty()) {
      return nullptr;
    }
    const json& choice = response["choices"][0];
    if (!choice.is_object() || !choice.contains("message")) return nullptr;
    const json& msg = choice["message"];
    if (!msg.is_object() || !msg.contains("content") || !msg["content"].is_string()) return nullptr;
    return msg["content"].get_ptr<const std::string*>();
  }

  std::shared_ptr<Transport> transport_;
  std::string model_;
  double temperature_;
};

class HttpProvider : public ContentProvider {
 public:
  HttpProvider(std::shared_ptr<Transport> transport, std::string model, PromptSet prompts = {},
               double temperature = 0.7)
      : client_(std::move(transport), std::move(model), temperature),
        prompts_(std::move(prompts)) {}

  std::vector<std::string> topic(std::string_view domain, Language lang,
                                 const std::vector<std::string>& used_topics,
                                 std::size_t n) const override {
    std::vector<std::string> used = used_topics;
    std::vector<std::string> out;
    for (int attempt = 0; attempt < 3 && out.size() < n; ++attempt) {
      std::string used_list;
      for (const auto& t : used) used_list += "- " + t + "\n";
      const json reply = client_.complete(render_template(
          prompts_.topic, {{"copy", std::to_string(n - out.size())},
                           {"lang", language_name(lang)},
                           {"domain", std::string(domain)},
                           {"used_topics", used_list.empty() ? "(none)" : used_list}}));
      if (!reply.contains("phrase") || !reply["phrase"].is_array()) {
        throw ResponseFormatError("topic reply missing \"phrase\" array");
      }
      for (const auto& p : reply["phrase"]) {
        if (!p.is_string()) continue;
        std::string t = html::normalize_space(p.get<std::string>());
        if (t.empty() || std::find(used.begin(), used.end(), t) != used.end()) continue;
        used.push_back(t);
        out.push_back(std::move(t));
        if (out.size() == n) break;
      }
    }
    if (out.size() < n) {
      throw ResponseFormatError("provider returned " + std::to_string(out.size()) + " of " +
                                std::to_string(n) + " unused topics");
    }
    return out;
  }

  std::string fill_headers(std::string_view html, std::string_view topic,
                           std::string_view domain, Language lang) const override {
    const json reply = client_.complete(render_template(
        prompts_.header, slots(html, topic, domain, lang, 1)));
    if (!reply.contains("html")) throw ResponseFormatError("reply missing \"html\" key");
    const json& value = reply["html"];
    std::string fragment;
    if (value.is_string()) {
      fragment = value.get<std::string>();
    } else if (value.is_array() && !value.empty() && value[0].is_string()) {
      fragment = value[0].get<std::string>();
    } else {
      throw ResponseFormatError("\"html\" must be a string");
    }
    std::string out = detail::splice_fragment(html, fragment);
    check_structure_preserved(html, out);
    return out;
  }

  std::vector<std::string> fill_bodies(std::string_view html, std::string_view topic,
                                       std::string_view domain, Language lang,
                                       std::size_t n_variants) const override {
    const json reply = client_.complete(render_template(
        prompts_.body, slots(html, topic, domain, lang, n_variants)));
    if (!reply.contains("html")) throw ResponseFormatError("reply missing \"html\" key");
    const json& value = reply["html"];
    if (!value.is_array() || value.size() < n_variants) {
      throw ResponseFormatError("\"html\" must list " + std::to_string(n_variants) + " tables");
    }
    std::vector<std::string> out;
    for (std::size_t i = 0; i < n_variants; ++i) {
      if (!value[i].is_string()) throw ResponseFormatError("\"html\" entries must be strings");
      std::string filled = detail::splice_fragment(html, value[i].get<std::string>());
      check_structure_preserved(html, filled);
      out.push_back(std::move(filled));
    }
    return out;
  }

  const ChatClient& client() const { return client_; }
  const PromptSet& prompts() const { return prompts_; }

 private:
  static std::string language_name(Language lang) {
    return lang == Language::zh ? "Chinese" : "English";
  }

  static std::map<std::string, std::string> slots(std::string_view html, std::string_view topic,
                                                  std::string_view domain, Language lang,
                                                  std::size_t copy) {
    return {{"domain", std::string(domain)},
            {"topic", std::string(topic)},
            {"lang", language_name(lang)},
            {"copy", std::to_string(copy)},
            {"HTML_CODE", detail::table_fragment(html)}};
  }

  ChatClient client_;
  PromptSet prompts_;
};

// Builds the transport stack for a provider config: live HTTP, optionally
// recorded, or replayed from a transcript.
inline std::shared_ptr<Transport> make_transport(const ProviderConfig& cfg) {
  if (!cfg.replay.empty()) {
    if (!std::filesystem::exists(cfg.replay)) throw PathError(cfg.replay);
    return std::make_shared<ReplayTransport>(ProviderTranscript::load(cfg.replay));
  }
  if (cfg.endpoint.empty()) throw ConfigError("http provider needs an endpoint");
  std::string key;
  if (!cfg.api_key_env.empty()) {
    if (const char* v = std::getenv(cfg.api_key_env.c_str())) key = v;
  }
  std::shared_ptr<Transport> t =
      std::make_shared<HttpTransport>(cfg.endpoint, key, cfg.timeout_ms, cfg.max_inflight);
  if (!cfg.transcript.empty()) {
    t = std::make_shared<RecordingTransport>(
        t, std::make_shared<ProviderTranscript>(cfg.transcript));
  }
  return t;
}

inline std::shared_ptr<ContentProvider> make_provider(const ProviderConfig& cfg,
                                                      std::uint64_t seed) {
  if (cfg.kind == "template") return std::make_shared<TemplateProvider>(seed);
  PromptSet prompts = cfg.prompt_dir.empty() ? PromptSet{} : PromptSet::load(cfg.prompt_dir);
  return std::make_shared<HttpProvider>(make_transport(cfg), cfg.model, std::move(prompts),
                                        cfg.temperature);
}

}  // namespace tablenet
