#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "metatag/checkpoint.hpp"
#include "metatag/combine.hpp"
#include "metatag/corpus.hpp"
#include "metatag/crf.hpp"
#include "metatag/error.hpp"
#include "metatag/eval.hpp"
#include "metatag/langdist.hpp"
#include "metatag/tagger.hpp"

namespace py = pybind11;
using namespace metatag;

namespace {

using Matrix = std::vector<std::vector<double>>;
using Groups = std::vector<std::vector<std::string>>;

Tensor to_tensor(const Matrix& rows) {
  if (rows.empty()) throw ArgumentError("matrix has no rows");
  Tensor t({rows.size(), rows.front().size()});
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != rows.front().size()) throw DimensionError("ragged matrix");
    for (std::size_t c = 0; c < rows[r].size(); ++c) t.at(r, c) = rows[r][c];
  }
  return t;
}

Tensor to_vector(const std::vector<double>& v) {
  Tensor t({v.size()});
  for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i];
  return t;
}

CrfParams make_crf(const Matrix& transitions, const std::vector<double>& start, const std::vector<double>& stop) {
  CrfParams crf(transitions.size());
  crf.transitions.value() = to_tensor(transitions);
  crf.start.value() = to_vector(start);
  crf.stop.value() = to_vector(stop);
  if (crf.transitions.value().cols() != transitions.size() || start.size() != transitions.size() ||
      stop.size() != transitions.size()) {
    throw DimensionError("transitions must be K x K with start and stop of length K");
  }
  return crf;
}

Ranking make_ranking(const Groups& groups, const std::string& target) {
  Ranking r;
  r.target = target;
  r.groups = groups;
  return r;
}

Dataset make_dataset(const std::vector<std::vector<std::string>>& tokens,
                     const std::vector<std::vector<std::string>>& tags) {
  if (tokens.size() != tags.size()) throw ArgumentError("tokens and tags differ in sentence count");
  std::vector<TaggedSentence> s;
  for (std::size_t i = 0; i < tokens.size(); ++i) s.push_back({tokens[i], tags[i]});
  return Dataset(std::move(s));
}

py::list sentences(const Dataset& d) {
  py::list out;
  for (const auto& s : d.sentences()) out.append(py::make_tuple(s.tokens, s.tags));
  return out;
}

}  // namespace

PYBIND11_MODULE(_metatag, m) {
  m.doc() = "Meta-embedding sequence tagging: CRF, evaluation and language distances";

  auto base = py::register_exception<Error>(m, "MetatagError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<ArgumentError>(m, "ArgumentError", base.ptr());
  py::register_exception<DimensionError>(m, "DimensionError", base.ptr());

  // CRF
  m.def(
      "crf_log_partition",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<double>& start,
         const std::vector<double>& stop) {
        return crf_log_partition(to_tensor(emissions), make_crf(transitions, start, stop));
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("start"), py::arg("stop"));
  m.def(
      "crf_score",
      [](const Matrix& emissions, const std::vector<std::size_t>& path, const Matrix& transitions,
         const std::vector<double>& start, const std::vector<double>& stop) {
        return crf_score(to_tensor(emissions), path, make_crf(transitions, start, stop));
      },
      py::arg("emissions"), py::arg("path"), py::arg("transitions"), py::arg("start"), py::arg("stop"));
  m.def(
      "viterbi",
      [](const Matrix& emissions, const Matrix& transitions, const std::vector<double>& start,
         const std::vector<double>& stop) {
        auto r = viterbi(to_tensor(emissions), make_crf(transitions, start, stop));
        return py::make_tuple(r.path, r.score);
      },
      py::arg("emissions"), py::arg("transitions"), py::arg("start"), py::arg("stop"),
      "Best tag path and its score.");

  // attention
  m.def(
      "attention_weights",
      [](const Matrix& projected, const Matrix& w, const std::vector<double>& v) {
        AttentionParams a;
        a.w = Parameter("w", to_tensor(w));
        a.v = Parameter("v", to_tensor({v}));
        a.hidden = v.size();
        return attention_weights(projected, a);
      },
      py::arg("projected"), py::arg("w"), py::arg("v"));

  // corpora and scoring
  m.def(
      "parse_conll",
      [](const std::string& text, std::size_t token_col, int tag_col) {
        ConllOptions o;
        o.token_col = token_col;
        o.tag_col = tag_col;
        return sentences(parse_conll(text, o));
      },
      py::arg("text"), py::arg("token_col") = 0, py::arg("tag_col") = kLastColumn,
      "List of (tokens, tags) pairs.");
  m.def(
      "parse_conllu", [](const std::string& text) { return sentences(parse_conllu(text)); }, py::arg("text"));
  m.def("extract_spans", [](const std::vector<std::string>& tags) {
    py::list out;
    for (const auto& s : extract_spans(tags)) out.append(py::make_tuple(s.type, s.begin, s.end));
    return out;
  });
  m.def(
      "span_f1",
      [](const std::vector<std::vector<std::string>>& tokens, const std::vector<std::vector<std::string>>& gold,
         const std::vector<std::vector<std::string>>& predicted) {
        auto r = span_f1(make_dataset(tokens, gold), predicted);
        return py::make_tuple(r.precision, r.recall, r.f1);
      },
      py::arg("tokens"), py::arg("gold"), py::arg("predicted"), "(precision, recall, f1)");
  m.def(
      "token_accuracy",
      [](const std::vector<std::vector<std::string>>& tokens, const std::vector<std::vector<std::string>>& gold,
         const std::vector<std::vector<std::string>>& predicted) {
        return token_accuracy(make_dataset(tokens, gold), predicted).accuracy;
      },
      py::arg("tokens"), py::arg("gold"), py::arg("predicted"));

  // significance
  m.def(
      "paired_permutation_test",
      [](const std::vector<double>& a, const std::vector<double>& b, std::uint64_t budget, std::uint64_t seed,
         const std::string& mode) {
        PermutationMode pm = PermutationMode::kAuto;
        if (mode == "exact") {
          pm = PermutationMode::kExact;
        } else if (mode == "sampled") {
          pm = PermutationMode::kSampled;
        } else if (mode != "auto") {
          throw ArgumentError("mode must be auto, exact or sampled");
        }
        auto r = paired_permutation_test(a, b, budget, seed, pm);
        py::dict d;
        d["p_value"] = r.p_value;
        d["permutations"] = r.permutations;
        d["exact"] = r.exact;
        return d;
      },
      py::arg("a"), py::arg("b"), py::arg("budget") = kDefaultPermutations, py::arg("seed") = 1,
      py::arg("mode") = "auto");
  m.def(
      "correct_multiplicity",
      [](const std::vector<double>& p, double alpha, const std::string& method) {
        auto r = correct_multiplicity(p, alpha, parse_correction(method));
        py::dict d;
        d["reject"] = r.reject;
        d["combined_p"] = r.combined_p;
        d["statistic"] = r.statistic;
        d["replicated"] = r.replicated;
        return d;
      },
      py::arg("p_values"), py::arg("alpha") = 0.05, py::arg("method") = "fisher");
  m.def(
      "aggregate",
      [](const std::vector<double>& values) {
        auto a = aggregate(values);
        return py::make_tuple(a.mean, a.stddev, a.formatted);
      },
      py::arg("values"), "(mean, sample std, \"mean ± std\")");

  // language distances
  py::class_<UnigramLM>(m, "UnigramLM")
      .def(py::init([](const std::vector<std::string>& tokens, const std::string& language) {
             return train_unigram(tokens, language);
           }),
           py::arg("tokens"), py::arg("language") = "")
      .def("probability", &UnigramLM::probability)
      .def("unk_probability", &UnigramLM::unk_probability)
      .def("perplexity", [](const UnigramLM& lm, const std::vector<std::string>& text) { return perplexity(lm, text); })
      .def_property_readonly("vocabulary_size", &UnigramLM::vocabulary_size);
  m.def(
      "perplexity",
      [](const std::function<double(const std::string&)>& p, const std::vector<std::string>& text) {
        return perplexity(p, text);
      },
      py::arg("probability"), py::arg("text"), "Perplexity of `text` under a token -> probability callable.");
  m.def(
      "charlm_perplexity",
      [](const std::string& corpus, const std::string& text, std::size_t order) {
        return charlm_perplexity(corpus, text, order);
      },
      py::arg("corpus"), py::arg("text"), py::arg("order") = 5);
  m.def("vocab_overlap", py::overload_cast<std::size_t, std::size_t, std::size_t, std::size_t>(&vocab_overlap),
        py::arg("shared_12"), py::arg("shared_21"), py::arg("pooled_1"), py::arg("pooled_2"));
  m.def(
      "vote",
      [](const std::vector<Groups>& rankings) {
        std::vector<Ranking> rs;
        for (const auto& g : rankings) rs.push_back(make_ranking(g, ""));
        return vote(rs).groups;
      },
      py::arg("rankings"), "Majority vote over rankings given as lists of tie groups.");
  m.def(
      "spearman", [](const Groups& a, const Groups& b) { return spearman(make_ranking(a, ""), make_ranking(b, "")); },
      py::arg("a"), py::arg("b"));
  m.def(
      "parse_rankings",
      [](const std::string& text) {
        py::list out;
        for (const auto& r : parse_rankings(text)) out.append(py::make_tuple(r.ranking.target, r.measure, r.ranking.groups));
        return out;
      },
      py::arg("text"), "List of (target, measure, tie groups).");
  m.def(
      "advise",
      [](bool can_train, bool has_multilingual, bool distances_available) {
        return advise({can_train, has_multilingual, distances_available}).text;
      },
      py::arg("can_train_embeddings"), py::arg("has_multilingual"), py::arg("distances_available"));

  // trained models
  py::class_<TaggerModel>(m, "Tagger")
      .def_static("load", [](const std::string& path) { return load_checkpoint(path); }, py::arg("path"))
      .def_property_readonly("tags", &TaggerModel::tags)
      .def_property_readonly("languages",
                             [](const TaggerModel& t) {
                               std::vector<std::string> out;
                               for (const auto& s : t.sources()) out.push_back(s.language());
                               return out;
                             })
      .def("predict", [](TaggerModel& t, const std::vector<std::string>& tokens) { return t.predict(tokens); })
      .def("attention", [](TaggerModel& t, const std::vector<std::string>& tokens) {
        return attention_trace(t, tokens);
      });
}
