#include "metatag/checkpoint.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <map>
#include <sstream>

#include "metatag/corpus.hpp"
#include "metatag/error.hpp"

namespace metatag {

namespace {

std::string join(std::span<const std::string> items, char sep = ' ') {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += sep;
    out += items[i];
  }
  return out;
}

std::vector<std::string> split_spaces(std::string_view s) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < s.size()) {
    while (i < s.size() && s[i] == ' ') ++i;
    const std::size_t start = i;
    while (i < s.size() && s[i] != ' ') ++i;
    if (i > start) out.emplace_back(s.substr(start, i - start));
  }
  return out;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string blob_body(TaggerModel& model) {
  const auto& cfg = model.config();
  std::string out;
  out += "combiner = " + to_string(cfg.combiner) + "\n";
  out += "lstm_hidden = " + std::to_string(cfg.lstm_hidden) + "\n";
  out += "attention_hidden = " + std::to_string(cfg.attention_hidden) + "\n";
  out += "seed = " + std::to_string(cfg.seed) + "\n";
  out += "tags = " + join(model.tags()) + "\n";
  out += "sources = " + std::to_string(model.sources().size()) + "\n";
  for (std::size_t i = 0; i < model.sources().size(); ++i) {
    const auto& s = model.sources()[i];
    const std::string key = "source." + std::to_string(i);
    out += key + ".language = " + s.language() + "\n";
    out += key + ".trainable = " + (s.trainable() ? "true" : "false") + "\n";
    out += key + ".vocab = " + join(s.tokens()) + "\n";
  }
  std::vector<std::string> names;
  for (auto* p : model.all_parameters()) names.push_back(p->name());
  out += "parameters = " + join(names) + "\n";
  return out;
}

class Writer {
 public:
  void bytes(std::string_view s) { out_ += s; }
  void u32(std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out_ += static_cast<char>(v >> (8 * i) & 0xFF);
  }
  void u64(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) out_ += static_cast<char>(v >> (8 * i) & 0xFF);
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  std::string take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  std::string_view bytes(std::size_t n) {
    if (n > in_.size() - pos_) throw CorruptionError("checkpoint is truncated");
    auto s = in_.substr(pos_, n);
    pos_ += n;
    return s;
  }
  std::uint64_t uint(int width) {
    auto s = bytes(static_cast<std::size_t>(width));
    std::uint64_t v = 0;
    for (int i = width; i-- > 0;) v = v << 8 | static_cast<unsigned char>(s[static_cast<std::size_t>(i)]);
    return v;
  }
  std::uint32_t u32() { return static_cast<std::uint32_t>(uint(4)); }
  std::uint64_t u64() { return uint(8); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool done() const { return pos_ == in_.size(); }
  std::size_t remaining() const { return in_.size() - pos_; }

 private:
  std::string_view in_;
  std::size_t pos_ = 0;
};

std::map<std::string, std::string> parse_blob(std::string_view blob) {
  std::map<std::string, std::string> kv;
  std::size_t start = 0;
  while (start < blob.size()) {
    auto end = blob.find('\n', start);
    if (end == std::string_view::npos) end = blob.size();
    auto line = blob.substr(start, end - start);
    start = end + 1;
    if (line.empty()) continue;
    const auto eq = line.find(" = ");
    if (eq == std::string_view::npos) throw CorruptionError("malformed config line '" + std::string(line) + "'");
    kv[std::string(line.substr(0, eq))] = std::string(line.substr(eq + 3));
  }
  return kv;
}

const std::string& field(const std::map<std::string, std::string>& kv, const std::string& key) {
  auto it = kv.find(key);
  if (it == kv.end()) throw CorruptionError("checkpoint config lacks '" + key + "'");
  return it->second;
}

std::size_t to_size(const std::string& s, const std::string& key) {
  try {
    std::size_t used = 0;
    const auto v = std::stoull(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return static_cast<std::size_t>(v);
  } catch (const std::exception&) {
    throw CorruptionError("checkpoint config '" + key + "' is not a count");
  }
}

}  // namespace

std::string config_blob(TaggerModel& model) {
  const std::string body = blob_body(model);
  return body + "fingerprint = " + fnv1a_hex(body) + "\n";
}

std::string model_fingerprint(TaggerModel& model) { return fnv1a_hex(blob_body(model)); }

std::string serialize_checkpoint(TaggerModel& model) {
  Writer w;
  w.bytes("PTAG");
  w.u32(kCheckpointVersion);
  const std::string blob = config_blob(model);
  w.u64(blob.size());
  w.bytes(blob);
  for (auto* p : model.all_parameters()) {
    w.u64(p->name().size());
    w.bytes(p->name());
    const Tensor& v = p->value();
    w.u64(v.rank());
    for (auto e : v.shape()) w.u64(e);
    for (double x : v.values()) w.f64(x);
  }
  return w.take();
}

TaggerModel deserialize_checkpoint(std::string_view bytes) {
  if (bytes.size() < 4 || bytes.substr(0, 4) != "PTAG") throw FormatError("not a checkpoint (bad magic)");
  Reader r(bytes.substr(4));
  const auto version = r.u32();
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  const auto blob_len = r.u64();
  if (blob_len > r.remaining()) throw CorruptionError("checkpoint is truncated");
  const std::string blob(r.bytes(blob_len));
  const auto fp_pos = blob.rfind("fingerprint = ");
  if (fp_pos == std::string::npos) throw CorruptionError("checkpoint config has no fingerprint");
  const auto kv = parse_blob(blob);
  if (fnv1a_hex(std::string_view(blob).substr(0, fp_pos)) != field(kv, "fingerprint")) {
    throw CorruptionError("checkpoint config fingerprint mismatch");
  }

  std::map<std::string, Tensor> stored;
  const auto names = split_spaces(field(kv, "parameters"));
  for (const auto& expected : names) {
    const auto name_len = r.u64();
    if (name_len > r.remaining()) throw CorruptionError("checkpoint is truncated");
    const std::string name(r.bytes(name_len));
    if (name != expected) throw CorruptionError("expected parameter '" + expected + "', found '" + name + "'");
    const auto rank = r.u64();
    if (rank == 0 || rank > 2) throw CorruptionError("parameter '" + name + "' has rank " + std::to_string(rank));
    Shape shape;
    std::uint64_t count = 1;
    for (std::uint64_t i = 0; i < rank; ++i) {
      shape.push_back(r.u64());
      if (shape.back() == 0) throw CorruptionError("parameter '" + name + "' has a zero extent");
      count *= shape.back();
    }
    if (count > r.remaining() / 8) throw CorruptionError("checkpoint is truncated");
    std::vector<double> values(count);
    for (auto& v : values) v = r.f64();
    stored.emplace(name, Tensor(std::move(shape), std::move(values)));
  }
  if (!r.done()) throw CorruptionError("trailing bytes after the last parameter");

  ModelConfig cfg;
  cfg.combiner = parse_combiner(field(kv, "combiner"));
  cfg.lstm_hidden = to_size(field(kv, "lstm_hidden"), "lstm_hidden");
  cfg.attention_hidden = to_size(field(kv, "attention_hidden"), "attention_hidden");
  cfg.seed = to_size(field(kv, "seed"), "seed");
  const auto tags = split_spaces(field(kv, "tags"));
  const auto n_sources = to_size(field(kv, "sources"), "sources");
  EmbeddingSet sources;
  for (std::size_t i = 0; i < n_sources; ++i) {
    const std::string key = "source." + std::to_string(i);
    const std::string& lang = field(kv, key + ".language");
    const std::string pname = "embed." + std::to_string(i) + "." + lang;
    auto it = stored.find(pname);
    if (it == stored.end()) throw CorruptionError("missing embedding table '" + pname + "'");
    sources.emplace_back(lang, split_spaces(field(kv, key + ".vocab")), it->second,
                         field(kv, key + ".trainable") == "true");
  }
  TaggerModel model(std::move(sources), tags, cfg);
  const auto params = model.all_parameters();
  if (params.size() != names.size()) {
    throw CorruptionError("checkpoint lists " + std::to_string(names.size()) + " parameters, model has " +
                          std::to_string(params.size()));
  }
  for (auto* p : params) {
    auto it = stored.find(p->name());
    if (it == stored.end()) throw CorruptionError("checkpoint lacks parameter '" + p->name() + "'");
    if (it->second.shape() != p->value().shape()) {
      throw CorruptionError("parameter '" + p->name() + "' has shape " + shape_string(it->second.shape()) +
                            ", header implies " + shape_string(p->value().shape()));
    }
    p->value() = it->second;
  }
  return model;
}

void save_checkpoint(TaggerModel& model, const std::string& path) {
  const std::string bytes = serialize_checkpoint(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw ArgumentError("failed writing " + path);
}

TaggerModel load_checkpoint(const std::string& path) {
  return deserialize_checkpoint(read_text_file(path));
}

TaggerModel load_checkpoint(const std::string& path, std::span<const std::string> expected_tags) {
  TaggerModel model = load_checkpoint(path);
  if (!std::equal(model.tags().begin(), model.tags().end(), expected_tags.begin(), expected_tags.end())) {
    throw ConfigError("checkpoint tag inventory [" + join(model.tags(), ',') +
                      "] differs from expected [" + join(expected_tags, ',') + "]");
  }
  return model;
}

}  // namespace metatag
