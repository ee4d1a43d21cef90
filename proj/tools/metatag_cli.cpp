#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include "CLI11.hpp"
#include "metatag/checkpoint.hpp"
#include "metatag/config.hpp"
#include "metatag/corpus.hpp"
#include "metatag/embed.hpp"
#include "metatag/error.hpp"
#include "metatag/eval.hpp"
#include "metatag/langdist.hpp"
#include "metatag/tagger.hpp"
#include "metatag/trainer.hpp"

namespace fs = std::filesystem;
using namespace metatag;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw ArgumentError("cannot write " + path.string());
}

// Writes to `path`, or stdout when it is empty or "-".
void emit(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file(path, text);
  }
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, sep);) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::string fixed(double v, int digits = 6) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

Dataset load_split(const RunConfig& c, const std::string& path, const std::string& split) {
  if (c.format == "conllu") return parse_conllu(read_text_file(path), split);
  ConllOptions o;
  o.token_col = c.token_col;
  o.tag_col = c.tag_col;
  o.split = split;
  return parse_conll(read_text_file(path), o);
}

// Input sentences for tagging. Each token keeps the fields echoed in the
// output: every column for CoNLL, FORM and UPOS for CoNLL-U.
struct InputSentence {
  std::vector<std::string> tokens;
  std::vector<std::string> prefix;
};

std::vector<InputSentence> read_input(const std::string& path, const std::string& format,
                                      std::size_t token_col) {
  const std::string text = read_text_file(path);
  std::vector<InputSentence> out;
  if (format == "conllu") {
    for (const auto& s : parse_conllu(text).sentences()) {
      InputSentence in;
      for (std::size_t i = 0; i < s.tokens.size(); ++i) {
        in.tokens.push_back(s.tokens[i]);
        in.prefix.push_back(s.tokens[i] + " " + s.tags[i]);
      }
      out.push_back(std::move(in));
    }
    return out;
  }
  if (format != "conll") throw ConfigError("--format must be conll or conllu");
  for (const auto& block : read_column_blocks(text)) {
    InputSentence in;
    for (const auto& line : block) {
      if (token_col >= line.fields.size()) {
        throw ParseError("no column " + std::to_string(token_col), line.line_number);
      }
      in.tokens.push_back(line.fields[token_col]);
      std::string joined;
      for (const auto& f : line.fields) joined += (joined.empty() ? "" : " ") + f;
      in.prefix.push_back(joined);
    }
    out.push_back(std::move(in));
  }
  return out;
}

// ---- train

struct ResultsFile {
  std::string setting;
  std::string language;
  Task task = Task::kNer;
  std::string test_path;
  std::vector<RunResult> runs;
  std::vector<std::string> predictions;  // per run, absolute
};

std::string format_results(const ResultsFile& r) {
  std::string out = "# setting\t" + r.setting + "\n# language\t" + r.language + "\n# task\t" +
                    to_string(r.task) + "\n# test\t" + r.test_path + "\nseed\tdev\ttest\tpredictions\n";
  for (std::size_t i = 0; i < r.runs.size(); ++i) {
    out += std::to_string(r.runs[i].seed) + "\t" + fixed(r.runs[i].dev_metric) + "\t" +
           fixed(r.runs[i].test_metric) + "\t" + fs::path(r.predictions[i]).filename().string() + "\n";
  }
  return out;
}

ResultsFile parse_results(const std::string& path) {
  ResultsFile r;
  std::istringstream in(read_text_file(path));
  const fs::path dir = fs::path(path).parent_path();
  std::size_t line_number = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_number;
    if (line.empty() || line.rfind("seed\t", 0) == 0) continue;
    const auto f = split(line, '\t');
    if (line[0] == '#') {
      if (f.size() < 2) continue;
      if (f[0] == "# setting") r.setting = f[1];
      if (f[0] == "# language") r.language = f[1];
      if (f[0] == "# task") r.task = parse_task(f[1]);
      if (f[0] == "# test") r.test_path = f[1];
      continue;
    }
    if (f.size() != 4) throw ParseError("results rows need seed, dev, test, predictions", line_number);
    RunResult run;
    try {
      run.seed = std::stoull(f[0]);
      run.dev_metric = std::stod(f[1]);
      run.test_metric = std::stod(f[2]);
    } catch (const std::exception&) {
      throw ParseError("bad number in results row", line_number);
    }
    r.runs.push_back(run);
    r.predictions.push_back((dir / f[3]).string());
  }
  if (r.runs.empty()) throw ParseError("results file has no runs", line_number);
  return r;
}

int cmd_train(const std::string& config_path, const std::vector<std::uint64_t>& seeds_override,
              const std::string& output_dir) {
  RunConfig c = load_run_config(config_path);
  if (!seeds_override.empty()) c.seeds = seeds_override;
  if (!output_dir.empty()) c.output_dir = output_dir;
  check_paths(c);
  validate(c.train);
  const Dataset train_set = load_split(c, c.train_path, "train");
  const Dataset dev_set = load_split(c, c.dev_path, "dev");
  const Dataset test_set = c.test_path.empty() ? Dataset() : load_split(c, c.test_path, "test");
  EmbeddingSet tables;
  for (const auto& e : c.embeddings) {
    tables.push_back(load_table_file(e.path, e.language));
    tables.back().set_trainable(e.trainable);
  }

  const fs::path dir = fs::path(c.output_dir) / c.name;
  fs::create_directories(dir);
  ResultsFile results{c.name, c.language, c.task, c.test_path.empty() ? "" : fs::absolute(c.test_path).string(), {}, {}};
  for (std::uint64_t seed : c.seeds) {
    ModelConfig mc;
    mc.combiner = c.combiner;
    mc.lstm_hidden = c.lstm_hidden;
    mc.attention_hidden = c.attention_hidden;
    mc.seed = seed;
    TaggerModel model(tables, train_set.tags(), mc);
    TrainConfig tc = c.train;
    tc.seed = seed;
    const TrainResult tr = train(train_set, dev_set, model, tc);

    const std::string stem = "seed" + std::to_string(seed);
    save_checkpoint(model, (dir / (stem + ".ckpt")).string());
    write_file(dir / (stem + ".log"), format_epoch_log(tr));
    RunResult run;
    run.seed = seed;
    run.dev_metric = tr.best_dev;
    const fs::path pred_path = dir / (stem + ".test.conll");
    if (!test_set.empty()) {
      const TagSequences predicted = predict_all(model, test_set);
      run.test_metric = task_metric(c.task, test_set, predicted);
      std::string text;
      for (std::size_t s = 0; s < test_set.size(); ++s) {
        for (std::size_t t = 0; t < test_set[s].tokens.size(); ++t) {
          text += test_set[s].tokens[t] + " " + test_set[s].tags[t] + " " + predicted[s][t] + "\n";
        }
        text += "\n";
      }
      write_file(pred_path, text);
    }
    results.runs.push_back(run);
    results.predictions.push_back(pred_path.string());
    std::cout << c.name << " seed " << seed << ": best epoch " << tr.best_epoch << ", dev "
              << fixed(tr.best_dev, 4) << (test_set.empty() ? "" : ", test " + fixed(run.test_metric, 4)) << "\n";
  }
  write_file(dir / "results.tsv", format_results(results));
  std::cout << "wrote " << (dir / "results.tsv").string() << "\n";
  return 0;
}

// ---- tag / attention-trace

int cmd_tag(const std::string& model_path, const std::string& input, const std::string& format,
            std::size_t token_col, const std::string& output) {
  TaggerModel model = load_checkpoint(model_path);
  std::string out;
  for (const auto& s : read_input(input, format, token_col)) {
    const auto tags = model.predict(s.tokens);
    for (std::size_t i = 0; i < tags.size(); ++i) out += s.prefix[i] + " " + tags[i] + "\n";
    out += "\n";
  }
  emit(output, out);
  return 0;
}

int cmd_attention(const std::string& model_path, const std::string& input, const std::string& format,
                  std::size_t token_col, const std::string& output) {
  TaggerModel model = load_checkpoint(model_path);
  if (model.combiner().kind() != CombinerKind::kAttention) {
    throw ConfigError("attention-trace needs a model with the attention combiner");
  }
  std::string out;
  for (const auto& s : read_input(input, format, token_col)) {
    out += format_attention_trace(model, s.tokens, attention_trace(model, s.tokens)) + "\n";
  }
  emit(output, out);
  return 0;
}

// ---- eval / significance

double units_p_value(Task task, const std::string& gold_path, const std::string& a_path,
                     const std::string& b_path, std::uint64_t permutations, std::uint64_t seed,
                     std::uint64_t* used = nullptr) {
  const Dataset gold = parse_conll(read_text_file(gold_path));
  auto predictions = [&](const std::string& path) {
    ConllOptions o;
    o.normalize_iob2 = false;
    const Dataset d = parse_conll(read_text_file(path), o);
    if (d.size() != gold.size()) throw ArgumentError(path + ": sentence count differs from the gold file");
    TagSequences tags;
    for (std::size_t s = 0; s < d.size(); ++s) {
      if (d[s].tokens != gold[s].tokens) {
        throw ArgumentError(path + ": tokens of sentence " + std::to_string(s + 1) + " differ from the gold file");
      }
      tags.push_back(d[s].tags);
    }
    return tags;
  };
  const auto a = per_sentence_scores(task, gold, predictions(a_path));
  const auto b = per_sentence_scores(task, gold, predictions(b_path));
  const auto r = paired_permutation_test(a, b, permutations, seed);
  if (used) *used = r.permutations;
  return r.p_value;
}

int cmd_significance(const std::string& gold, const std::string& a, const std::string& b, const std::string& task,
                     std::uint64_t permutations, std::uint64_t seed, double alpha) {
  SignificanceReport r;
  r.system_a = a;
  r.system_b = b;
  r.p_value = units_p_value(parse_task(task), gold, a, b, permutations, seed, &r.permutations);
  r.significant = r.p_value <= alpha;
  std::cout << "system_a\t" << r.system_a << "\nsystem_b\t" << r.system_b << "\np_value\t" << r.p_value
            << "\npermutations\t" << r.permutations << "\nalpha\t" << alpha << "\nresult\t"
            << (r.significant ? "significant" : "not significant") << "\n";
  return 0;
}

int cmd_eval(const std::vector<std::string>& paths, const std::string& baseline, double alpha,
             std::uint64_t permutations, const std::string& output) {
  std::vector<ResultsFile> files;
  for (const auto& p : paths) files.push_back(parse_results(p));
  std::vector<ReportCell> cells;
  for (const auto& f : files) {
    std::vector<double> percent;
    for (const auto& r : f.runs) percent.push_back(100.0 * r.test_metric);
    ReportCell cell{f.setting, f.language, aggregate(percent), false};
    if (!baseline.empty() && f.setting != baseline) {
      for (const auto& base : files) {
        if (base.setting != baseline || base.language != f.language) continue;
        if (f.test_path.empty()) throw ConfigError(f.setting + ": results carry no test split");
        // compare the median-dev run of each setting
        const std::size_t i = median_dev_run(f.runs), j = median_dev_run(base.runs);
        const double p = units_p_value(f.task, f.test_path, f.predictions[i], base.predictions[j], permutations, 1);
        cell.significant = p <= alpha;
      }
    }
    cells.push_back(cell);
  }
  emit(output, format_report(cells));
  return 0;
}

// ---- distance / rank / advise

std::map<std::string, std::string> language_files(const std::vector<std::string>& specs) {
  std::map<std::string, std::string> out;
  for (const auto& s : specs) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0 || eq + 1 == s.size()) {
      throw ConfigError("expected lang=path, got '" + s + "'");
    }
    out[s.substr(0, eq)] = s.substr(eq + 1);
  }
  return out;
}

std::vector<std::string> whitespace_tokens(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

int cmd_distance(const std::string& measure_name, const std::vector<std::string>& corpus_specs,
                 const std::vector<std::string>& text_specs, std::size_t order, const std::string& output) {
  const Measure measure = parse_measure(measure_name);
  const auto corpora = language_files(corpus_specs);
  auto texts = language_files(text_specs);
  if (corpora.size() < 2) throw ConfigError("distance needs at least two --corpus entries");
  std::map<std::string, std::string> contents;
  for (const auto& [lang, path] : corpora) contents[lang] = read_text_file(path);
  auto text_of = [&](const std::string& lang) {
    auto it = texts.find(lang);
    return it == texts.end() ? contents.at(lang) : read_text_file(it->second);
  };

  DistanceMatrix m{measure, {}};
  std::map<std::string, TypeSet> pool;
  if (measure == Measure::kVocab || measure == Measure::kVocabTrain) {
    for (const auto& [lang, text] : contents) pool[lang] = vocabulary_types(whitespace_tokens(text));
  }
  for (const auto& [l1, c1] : contents) {
    std::optional<UnigramLM> lm;
    if (measure == Measure::kPerplexity) lm = train_unigram(whitespace_tokens(c1), l1);
    for (const auto& [l2, c2] : contents) {
      if (l1 == l2) continue;
      double v = 0.0;
      switch (measure) {
        case Measure::kPerplexity:
          v = perplexity(*lm, whitespace_tokens(text_of(l2)));
          break;
        case Measure::kCharPerplexity:
          v = charlm_perplexity(c1, text_of(l2), order);
          break;
        case Measure::kVocab:
        case Measure::kVocabTrain:
          v = vocab_overlap(pool, l1, l2);
          break;
      }
      m.values[{l1, l2}] = v;
    }
  }
  emit(output, format_distance_matrix(m));
  return 0;
}

std::string ranking_row(const std::string& label, const Ranking& r) {
  std::string out = r.target + "\t" + label;
  for (const auto& group : r.groups) {
    for (const auto& l : group) out += "\t" + l + (group.size() > 1 ? "*" : "");
  }
  return out + "\n";
}

int cmd_rank(const std::vector<std::string>& distance_files, const std::string& rankings_file,
             const std::string& measures_csv, const std::vector<std::string>& targets, bool with_vote,
             bool table, const std::string& output) {
  std::set<std::string> wanted;
  for (const auto& m : split(measures_csv, ',')) wanted.insert(to_string(parse_measure(m)));

  // per target, (measure label, ranking) in input order
  std::map<std::string, std::vector<std::pair<std::string, Ranking>>> by_target;
  std::vector<std::string> order;
  auto add = [&](const std::string& label, Ranking r) {
    if (!wanted.empty() && !wanted.count(label)) return;
    if (!by_target.count(r.target)) order.push_back(r.target);
    by_target[r.target].emplace_back(label, std::move(r));
  };
  if (!rankings_file.empty()) {
    for (auto& row : parse_rankings(read_text_file(rankings_file))) add(row.measure, std::move(row.ranking));
  }
  for (const auto& path : distance_files) {
    for (const auto& m : parse_distance_matrices(read_text_file(path))) {
      std::set<std::string> langs;
      for (const auto& [pair, v] : m.values) langs.insert(pair.first);
      for (const auto& t : langs) add(to_string(m.measure), rank_by_measure(m, t));
    }
  }
  if (order.empty()) throw ConfigError("rank needs --rankings or --distances input");

  std::vector<Ranking> columns;
  std::vector<std::string> labels;
  std::string rows;
  for (const auto& target : order) {
    if (!targets.empty() && std::find(targets.begin(), targets.end(), target) == targets.end()) continue;
    std::vector<Ranking> inputs;
    for (const auto& [label, r] : by_target[target]) {
      inputs.push_back(r);
      if (!with_vote) {
        rows += ranking_row(label, r);
        columns.push_back(r);
        labels.push_back(target + "/" + label);
      }
    }
    if (with_vote) {
      const Ranking v = vote(inputs);
      rows += ranking_row("dVOTE", v);
      columns.push_back(v);
      labels.push_back(target);
    }
  }
  emit(output, table ? format_rankings(columns, labels) : rows);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"metatag: multilingual meta-embedding sequence tagging"};
  app.require_subcommand(1);
  app.set_version_flag("--version", "metatag " METATAG_VERSION);

  std::string config, model, input, output, format = "conll", gold, sys_a, sys_b, task = "ner";
  std::string baseline, rankings, measures, measure, output_dir;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> results, corpora, texts, distances, targets;
  std::size_t token_col = 0, order = 5;
  std::uint64_t permutations = kDefaultPermutations, seed = 1;
  double alpha = 0.05;
  bool with_vote = false, table = false;
  AdviceContext advice;

  auto* train_cmd = app.add_subcommand("train", "train one model per seed from a run config");
  train_cmd->add_option("config", config, "run config file")->required()->check(CLI::ExistingFile);
  train_cmd->add_option("--seeds", seeds, "override the config's seed list")->delimiter(',');
  train_cmd->add_option("--output-dir", output_dir, "override the config's output_dir");

  auto* tag_cmd = app.add_subcommand("tag", "append predicted tags to a CoNLL file");
  auto* trace_cmd = app.add_subcommand("attention-trace", "dump per-token attention weights");
  for (auto* c : {tag_cmd, trace_cmd}) {
    c->add_option("--model", model, "checkpoint")->required()->check(CLI::ExistingFile);
    c->add_option("--input", input, "sentences to tag")->required()->check(CLI::ExistingFile);
    c->add_option("--format", format, "conll or conllu")->check(CLI::IsMember({"conll", "conllu"}));
    c->add_option("--token-col", token_col, "token column of CoNLL input");
    c->add_option("-o,--output", output, "output file (default stdout)");
  }

  auto* eval_cmd = app.add_subcommand("eval", "mean ± std report over results files");
  eval_cmd->add_option("results", results, "results.tsv files written by train")->required()->check(CLI::ExistingFile);
  eval_cmd->add_option("--baseline", baseline, "setting the others are tested against");
  eval_cmd->add_option("--alpha", alpha, "significance level");
  eval_cmd->add_option("--permutations", permutations, "permutation budget");
  eval_cmd->add_option("-o,--output", output, "output file (default stdout)");

  auto* sig_cmd = app.add_subcommand("significance", "paired permutation test between two prediction files");
  sig_cmd->add_option("--gold", gold, "gold CoNLL file")->required()->check(CLI::ExistingFile);
  sig_cmd->add_option("--a", sys_a, "predictions of system A (tag in last column)")->required()->check(CLI::ExistingFile);
  sig_cmd->add_option("--b", sys_b, "predictions of system B (tag in last column)")->required()->check(CLI::ExistingFile);
  sig_cmd->add_option("--task", task, "ner or pos")->check(CLI::IsMember({"ner", "pos"}));
  sig_cmd->add_option("--permutations", permutations, "permutation budget");
  sig_cmd->add_option("--seed", seed, "seed for sampled permutations");
  sig_cmd->add_option("--alpha", alpha, "significance level");

  auto* dist_cmd = app.add_subcommand("distance", "pairwise language distances");
  dist_cmd->add_option("--measure", measure, "dP, dPF, dV or dVT")->required();
  dist_cmd->add_option("--corpus", corpora, "lang=path of a whitespace-tokenized text")->required();
  dist_cmd->add_option("--text", texts, "lang=path of the text scored under the other LMs (default: its corpus)");
  dist_cmd->add_option("--order", order, "character n-gram order for dPF");
  dist_cmd->add_option("-o,--output", output, "output file (default stdout)");

  auto* rank_cmd = app.add_subcommand("rank", "rank auxiliary languages per measure, optionally by vote");
  rank_cmd->add_option("--distances", distances, "distance tables written by distance")->check(CLI::ExistingFile);
  rank_cmd->add_option("--rankings", rankings, "ranking rows: target, measure, languages")->check(CLI::ExistingFile);
  rank_cmd->add_option("--measures", measures, "comma-separated measures to use (default all)");
  rank_cmd->add_option("--target", targets, "restrict to these target languages");
  rank_cmd->add_flag("--vote", with_vote, "combine the measures by majority vote");
  rank_cmd->add_flag("--table", table, "print one column per ranking");
  rank_cmd->add_option("-o,--output", output, "output file (default stdout)");

  auto* advise_cmd = app.add_subcommand("advise", "suggest an auxiliary embedding strategy");
  advise_cmd->add_flag("--can-train-embeddings", advice.can_train_embeddings, "enough text to train embeddings");
  advise_cmd->add_flag("--has-multilingual", advice.has_multilingual, "good multilingual embeddings exist");
  advise_cmd->add_flag("--distances-available", advice.distances_available, "language distances are at hand");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) return cmd_train(config, seeds, output_dir);
    if (*tag_cmd) return cmd_tag(model, input, format, token_col, output);
    if (*trace_cmd) return cmd_attention(model, input, format, token_col, output);
    if (*eval_cmd) return cmd_eval(results, baseline, alpha, permutations, output);
    if (*sig_cmd) return cmd_significance(gold, sys_a, sys_b, task, permutations, seed, alpha);
    if (*dist_cmd) return cmd_distance(measure, corpora, texts, order, output);
    if (*rank_cmd) return cmd_rank(distances, rankings, measures, targets, with_vote, table, output);
    if (*advise_cmd) {
      std::cout << advise(advice).text << "\n";
      return 0;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
