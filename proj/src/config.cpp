#include "metatag/config.hpp"

#include <charconv>
#include <filesystem>
#include <functional>
#include <map>

#include "metatag/corpus.hpp"
#include "metatag/error.hpp"

namespace metatag {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(const std::string& s, char sep = ',') {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    auto pos = s.find(sep, start);
    if (pos == std::string::npos) pos = s.size();
    auto item = trim(std::string_view(s).substr(start, pos - start));
    if (!item.empty()) out.push_back(std::move(item));
    start = pos + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
  T v{};
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
  if (ec != std::errc() || ptr != value.data() + value.size()) {
    throw ConfigError("config key '" + key + "': '" + value + "' is not a valid number");
  }
  return v;
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes") return true;
  if (value == "false" || value == "0" || value == "no") return false;
  throw ConfigError("config key '" + key + "': '" + value + "' is not a boolean");
}

std::string resolve(const std::string& base, const std::string& path) {
  if (base.empty() || path.empty() || std::filesystem::path(path).is_absolute()) return path;
  return (std::filesystem::path(base) / path).lexically_normal().string();
}

}  // namespace

RunConfig parse_run_config(std::string_view text, const std::string& base_dir) {
  RunConfig c;
  bool finetune = false;
  using Setter = std::function<void(const std::string&, const std::string&)>;
  const std::map<std::string, Setter> setters = {
      {"task", [&](auto&, auto& v) { c.task = parse_task(v); }},
      {"name", [&](auto&, auto& v) { c.name = v; }},
      {"language", [&](auto&, auto& v) { c.language = v; }},
      {"train", [&](auto&, auto& v) { c.train_path = resolve(base_dir, v); }},
      {"dev", [&](auto&, auto& v) { c.dev_path = resolve(base_dir, v); }},
      {"test", [&](auto&, auto& v) { c.test_path = resolve(base_dir, v); }},
      {"format",
       [&](auto& k, auto& v) {
         if (v != "conll" && v != "conllu") throw ConfigError("config key '" + k + "': expected conll or conllu");
         c.format = v;
       }},
      {"token_col", [&](auto& k, auto& v) { c.token_col = parse_number<std::size_t>(k, v); }},
      {"tag_col",
       [&](auto& k, auto& v) { c.tag_col = v == "last" ? -1 : parse_number<int>(k, v); }},
      {"embeddings",
       [&](auto& k, auto& v) {
         c.embeddings.clear();
         for (const auto& item : split_list(v)) {
           const auto parts = split_list(item, ':');
           if (parts.size() < 2 || parts.size() > 3 || (parts.size() == 3 && parts[2] != "trainable")) {
             throw ConfigError("config key '" + k + "': entry '" + item +
                               "' must be lang:path or lang:path:trainable");
           }
           c.embeddings.push_back({parts[0], resolve(base_dir, parts[1]), parts.size() == 3});
         }
       }},
      {"combiner", [&](auto&, auto& v) { c.combiner = parse_combiner(v); }},
      {"lstm_hidden", [&](auto& k, auto& v) { c.lstm_hidden = parse_number<std::size_t>(k, v); }},
      {"attention_hidden", [&](auto& k, auto& v) { c.attention_hidden = parse_number<std::size_t>(k, v); }},
      {"learning_rate", [&](auto& k, auto& v) { c.train.learning_rate = parse_number<double>(k, v); }},
      {"batch_size", [&](auto& k, auto& v) { c.train.batch_size = parse_number<std::size_t>(k, v); }},
      {"patience", [&](auto& k, auto& v) { c.train.patience = parse_number<std::size_t>(k, v); }},
      {"lr_decay", [&](auto& k, auto& v) { c.train.lr_decay = parse_number<double>(k, v); }},
      {"dropout", [&](auto& k, auto& v) { c.train.dropout = parse_number<double>(k, v); }},
      {"max_epochs", [&](auto& k, auto& v) { c.train.max_epochs = parse_number<std::size_t>(k, v); }},
      {"min_lr", [&](auto& k, auto& v) { c.train.min_lr = parse_number<double>(k, v); }},
      {"clip_norm", [&](auto& k, auto& v) { c.train.clip_norm = parse_number<double>(k, v); }},
      {"finetune_embeddings", [&](auto& k, auto& v) { finetune = parse_bool(k, v); }},
      {"seeds",
       [&](auto& k, auto& v) {
         c.seeds.clear();
         for (const auto& s : split_list(v)) c.seeds.push_back(parse_number<std::uint64_t>(k, s));
         if (c.seeds.empty()) throw ConfigError("config key '" + k + "': no seeds given");
       }},
      {"output_dir", [&](auto&, auto& v) { c.output_dir = resolve(base_dir, v); }},
  };

  std::size_t line_number = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    const std::string line = trim(text.substr(start, end - start));
    ++line_number;
    start = end + 1;
    if (line.empty() || line[0] == '#') {
      if (end == text.size()) break;
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected 'key = value'", line_number);
    const std::string key = trim(std::string_view(line).substr(0, eq));
    const std::string value = trim(std::string_view(line).substr(eq + 1));
    auto it = setters.find(key);
    if (it == setters.end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(key, value);
    if (end == text.size()) break;
  }
  if (finetune) {
    for (auto& e : c.embeddings) e.trainable = true;
  }
  c.train.task = c.task;
  return c;
}

RunConfig load_run_config(const std::string& path) {
  return parse_run_config(read_text_file(path), std::filesystem::path(path).parent_path().string());
}

void check_paths(const RunConfig& c) {
  if (c.embeddings.empty()) throw ConfigError("config lists no embeddings");
  auto need = [](const std::string& key, const std::string& path) {
    if (path.empty()) throw ConfigError("config key '" + key + "' is required");
    if (!std::filesystem::exists(path)) throw ConfigError("config key '" + key + "': no such file " + path);
  };
  need("train", c.train_path);
  need("dev", c.dev_path);
  if (!c.test_path.empty()) need("test", c.test_path);
  for (const auto& e : c.embeddings) need("embeddings", e.path);
}

}  // namespace metatag
