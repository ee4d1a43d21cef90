#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "metatag/combine.hpp"
#include "metatag/eval.hpp"
#include "metatag/trainer.hpp"

namespace metatag {

struct EmbeddingSource {
  std::string language;
  std::string path;
  bool trainable = false;
};

// Flat "key = value" run description. Lists are comma-separated; '#' starts
// a comment line. Relative paths resolve against the config file's folder.
struct RunConfig {
  Task task = Task::kNer;
  std::string name = "run";  // setting label in reports
  std::string language;      // report column
  std::string train_path;
  std::string dev_path;
  std::string test_path;
  std::string format = "conll";  // conll | conllu
  std::size_t token_col = 0;
  int tag_col = -1;  // -1: last column
  std::vector<EmbeddingSource> embeddings;  // "lang:path" or "lang:path:trainable"
  CombinerKind combiner = CombinerKind::kAttention;
  std::size_t lstm_hidden = 256;
  std::size_t attention_hidden = 0;
  TrainConfig train;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::string output_dir = "runs";
};

RunConfig parse_run_config(std::string_view text, const std::string& base_dir = {});
RunConfig load_run_config(const std::string& path);
// Every referenced input file must exist.
void check_paths(const RunConfig& config);

}  // namespace metatag
