#include "metatag/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <limits>

#include "metatag/error.hpp"

namespace metatag {

void validate(const TrainConfig& c) {
  auto in_unit = [](double v) { return v > 0.0 && v <= 1.0; };
  if (!in_unit(c.learning_rate)) throw ConfigError("learning_rate must lie in (0, 1]");
  if (!in_unit(c.lr_decay)) throw ConfigError("lr_decay must lie in (0, 1]");
  if (!(c.min_lr > 0.0 && c.min_lr <= 1.0)) throw ConfigError("min_lr must lie in (0, 1]");
  if (!(c.dropout >= 0.0 && c.dropout < 1.0)) throw ConfigError("dropout must lie in [0, 1)");
  if (c.patience < 1) throw ConfigError("patience must be at least 1");
  if (c.batch_size < 1) throw ConfigError("batch_size must be at least 1");
  if (c.clip_norm < 0.0) throw ConfigError("clip_norm must be non-negative");
}

PlateauSchedule::PlateauSchedule(double learning_rate, std::size_t patience, double decay)
    : lr_(learning_rate),
      patience_(patience),
      decay_(decay),
      best_(-std::numeric_limits<double>::infinity()) {}

bool PlateauSchedule::observe(double metric) {
  if (metric > best_) {
    best_ = metric;
    bad_epochs_ = 0;
    return true;
  }
  if (++bad_epochs_ >= patience_) {
    lr_ *= decay_;
    bad_epochs_ = 0;
  }
  return false;
}

TagSequences predict_all(TaggerModel& model, const Dataset& data) {
  TagSequences out;
  out.reserve(data.size());
  for (const auto& s : data.sentences()) out.push_back(model.predict(s.tokens));
  return out;
}

namespace {

void check_inventory(const TaggerModel& model, const Dataset& data, const char* name) {
  for (const auto& t : data.tags()) {
    bool found = false;
    for (const auto& m : model.tags()) found = found || m == t;
    if (!found) {
      throw ConfigError(std::string(name) + " tag '" + t + "' is missing from the model's tag inventory");
    }
  }
}

}  // namespace

TrainResult train(const Dataset& train_set, const Dataset& dev_set, TaggerModel& model,
                  const TrainConfig& config) {
  validate(config);
  check_inventory(model, train_set, "training");
  check_inventory(model, dev_set, "dev");
  if (train_set.empty()) throw ArgumentError("training set is empty");

  std::vector<std::vector<std::size_t>> gold;
  for (const auto& s : train_set.sentences()) gold.push_back(model.tag_indices(s.tags));

  auto params = model.trainable_parameters();
  std::vector<Tensor> best_values;
  for (auto* p : params) best_values.push_back(p->value());

  Rng master(config.seed);
  Rng dropout_rng = master.split(0);
  PlateauSchedule schedule(config.learning_rate, config.patience, config.lr_decay);
  TrainResult result;
  EncodeOptions options;
  options.dropout = config.dropout;
  options.rng = &dropout_rng;

  for (std::size_t epoch = 1; epoch <= config.max_epochs; ++epoch) {
    const double lr = schedule.learning_rate();
    double epoch_loss = 0.0;
    const auto plan = batches(train_set, config.batch_size, master.next());
    for (std::size_t bi = 0; bi < plan.size(); ++bi) {
      for (auto* p : params) p->zero_grad();
      double batch_loss = 0.0;
      for (auto idx : plan[bi]) {
        Graph g;
        Var em = model.encode(g, train_set[idx].tokens, options);
        Var nll = crf_nll(g, em, gold[idx], model.crf());
        g.backward(nll);
        batch_loss += g.value(nll)[0];
      }
      if (!std::isfinite(batch_loss)) {
        throw NumericError("non-finite loss in batch " + std::to_string(bi + 1) + " of epoch " +
                           std::to_string(epoch));
      }
      double factor = lr;
      if (config.clip_norm > 0.0) {
        double sq = 0.0;
        for (auto* p : params) {
          for (double v : p->grad().values()) sq += v * v;
        }
        const double norm = std::sqrt(sq);
        if (norm > config.clip_norm) factor *= config.clip_norm / norm;
      }
      for (auto* p : params) {
        auto vals = p->value().values();
        auto grads = p->grad().values();
        for (std::size_t i = 0; i < vals.size(); ++i) vals[i] -= factor * grads[i];
      }
      epoch_loss += batch_loss;
    }
    const double metric = task_metric(config.task, dev_set, predict_all(model, dev_set));
    const bool improved = schedule.observe(metric);
    if (improved) {
      for (std::size_t i = 0; i < params.size(); ++i) best_values[i] = params[i]->value();
      result.best_epoch = epoch;
      result.best_dev = metric;
    }
    result.epochs.push_back({epoch, epoch_loss, metric, lr, improved});
    if (schedule.learning_rate() < config.min_lr) break;
  }
  for (std::size_t i = 0; i < params.size(); ++i) params[i]->value() = best_values[i];
  return result;
}

std::string format_epoch_log(const TrainResult& result) {
  std::string out = "epoch\tloss\tdev\tlr\timproved\n";
  char buf[160];
  for (const auto& e : result.epochs) {
    std::snprintf(buf, sizeof buf, "%zu\t%.17g\t%.6f\t%.6g\t%d\n", e.epoch, e.loss, e.dev_metric,
                  e.learning_rate, e.improved ? 1 : 0);
    out += buf;
  }
  return out;
}

}  // namespace metatag
