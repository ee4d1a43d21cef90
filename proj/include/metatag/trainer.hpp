#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "metatag/corpus.hpp"
#include "metatag/eval.hpp"
#include "metatag/tagger.hpp"

namespace metatag {

struct TrainConfig {
  double learning_rate = 0.1;
  std::size_t batch_size = 64;
  std::size_t patience = 3;  // epochs without strict dev improvement before halving
  double lr_decay = 0.5;
  double dropout = 0.1;  // on the combined input vector
  std::size_t max_epochs = 50;
  double min_lr = 1e-4;
  std::uint64_t seed = 1;
  double clip_norm = 0.0;  // 0 disables global-norm clipping
  Task task = Task::kPos;
};

void validate(const TrainConfig& config);

// Learning-rate halving on a dev-metric plateau.
class PlateauSchedule {
 public:
  PlateauSchedule(double learning_rate, std::size_t patience, double decay);

  // Records one epoch's dev metric and returns whether it strictly beat the
  // best so far. The rate is cut after `patience` non-improving epochs.
  bool observe(double metric);
  double learning_rate() const { return lr_; }
  double best() const { return best_; }

 private:
  double lr_;
  std::size_t patience_;
  double decay_;
  double best_;
  std::size_t bad_epochs_ = 0;
};

struct EpochLog {
  std::size_t epoch = 0;  // 1-based
  double loss = 0.0;      // summed NLL over the epoch
  double dev_metric = 0.0;
  double learning_rate = 0.0;  // rate used during this epoch
  bool improved = false;
};

struct TrainResult {
  std::vector<EpochLog> epochs;
  std::size_t best_epoch = 0;
  double best_dev = 0.0;
};

// Minibatch SGD on the summed CRF negative log-likelihood. Leaves the model
// holding the parameters of the best dev epoch.
TrainResult train(const Dataset& train_set, const Dataset& dev_set, TaggerModel& model,
                  const TrainConfig& config);

TagSequences predict_all(TaggerModel& model, const Dataset& data);

// Tab-separated: epoch, loss, dev metric, learning rate, improved flag.
std::string format_epoch_log(const TrainResult& result);

}  // namespace metatag
