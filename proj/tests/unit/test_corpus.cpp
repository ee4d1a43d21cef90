#include <algorithm>
#include <set>
#include <string>

#include "doctest.h"
#include "metatag/corpus.hpp"
#include "metatag/error.hpp"

using namespace metatag;

TEST_CASE("two blocks give two sentences") {
  auto d = parse_conll("a X\nb Y\n\nc X\n");
  REQUIRE(d.size() == 2);
  CHECK(d[0].tokens == std::vector<std::string>{"a", "b"});
  CHECK(d[1].tags == std::vector<std::string>{"X"});
  CHECK(d.tags() == std::vector<std::string>{"X", "Y"});
  CHECK(d.token_count() == 3);
}

TEST_CASE("token and tag columns default to first and last") {
  auto d = parse_conll("John NNP I-NP B-PER\nlives VBZ I-VP O\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].tokens == std::vector<std::string>{"John", "lives"});
  CHECK(d[0].tags == std::vector<std::string>{"B-PER", "O"});
}

TEST_CASE("explicit columns") {
  ConllOptions opts;
  opts.token_col = 1;
  opts.tag_col = 0;
  opts.normalize_iob2 = false;
  auto d = parse_conll("NOUN dog x\nVERB runs x\n", opts);
  CHECK(d[0].tokens == std::vector<std::string>{"dog", "runs"});
  CHECK(d[0].tags == std::vector<std::string>{"NOUN", "VERB"});
}

TEST_CASE("IOB1 is rewritten to IOB2") {
  CHECK(to_iob2({"I-PER", "I-PER", "O", "I-PER"}) ==
        std::vector<std::string>{"B-PER", "I-PER", "O", "B-PER"});
  CHECK(to_iob2({"I-PER", "I-LOC", "B-LOC", "I-LOC"}) ==
        std::vector<std::string>{"B-PER", "B-LOC", "B-LOC", "I-LOC"});
  CHECK(to_iob2({"NOUN", "VERB"}) == std::vector<std::string>{"NOUN", "VERB"});
  auto d = parse_conll("a I-PER\nb I-PER\nc O\nd I-PER\n");
  CHECK(d[0].tags == std::vector<std::string>{"B-PER", "I-PER", "O", "B-PER"});
}

TEST_CASE("docstart lines are skipped") {
  auto d = parse_conll("-DOCSTART- -X- O\n\nEU B-ORG\nrejects O\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].tokens == std::vector<std::string>{"EU", "rejects"});
}

TEST_CASE("short lines are parse errors with a line number") {
  ConllOptions opts;
  opts.token_col = 0;
  opts.tag_col = 2;
  try {
    (void)parse_conll("a b c\nd e\n", opts);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse_conll("lonely\n"), ParseError);
}

TEST_CASE("invalid UTF-8 is rejected") {
  CHECK_THROWS_AS(parse_conll("caf\xC3 O\n"), ParseError);
  auto ok = parse_conll("caf\xC3\xA9 O\n");
  CHECK(ok[0].tokens[0] == "caf\xC3\xA9");
}

TEST_CASE("CoNLL-U single token") {
  auto d = parse_conllu("1\tdog\tdog\tNOUN\tNN\t_\t0\troot\t_\t_\n");
  REQUIRE(d.size() == 1);
  CHECK(d[0].tags == std::vector<std::string>{"NOUN"});
}

TEST_CASE("CoNLL-U skips comments, ranges and empty nodes") {
  const char* text =
      "# sent_id = 1\n"
      "# text = vámonos al mar\n"
      "1\tvámonos\tir\tVERB\t_\t_\t0\troot\t_\t_\n"
      "2-3\tal\t_\t_\t_\t_\t_\t_\t_\t_\n"
      "2\ta\ta\tADP\t_\t_\t4\tcase\t_\t_\n"
      "3\tel\tel\tDET\t_\t_\t4\tdet\t_\t_\n"
      "3.1\tnada\tnada\tPRON\t_\t_\t_\t_\t_\t_\n"
      "4\tmar\tmar\tNOUN\t_\t_\t1\tobl\t_\t_\n";
  auto d = parse_conllu(text);
  REQUIRE(d.size() == 1);
  CHECK(d[0].tokens == std::vector<std::string>{"vámonos", "a", "el", "mar"});
  CHECK(d[0].tags == std::vector<std::string>{"VERB", "ADP", "DET", "NOUN"});
}

TEST_CASE("CoNLL-U column count errors and vacuous input") {
  try {
    (void)parse_conllu("# c\n1\tdog\tNOUN\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK(parse_conllu("# only\n# comments\n").empty());
}

TEST_CASE("write then parse round trips") {
  auto d = parse_conll("Jan B-PER\nwoont O\nin O\nAmsterdam B-LOC\n\nHet O\nis O\n");
  auto again = parse_conll(write_conll(d));
  CHECK(again == d);
  CHECK(again.tags() == d.tags());
}

TEST_CASE("batches partition a seeded permutation") {
  std::vector<TaggedSentence> s;
  for (int i = 0; i < 5; ++i) s.push_back({{"w" + std::to_string(i)}, {"X"}});
  Dataset d(s);
  auto plan = batches(d, 2, 1);
  REQUIRE(plan.size() == 3);
  CHECK(plan[0].size() == 2);
  CHECK(plan[1].size() == 2);
  CHECK(plan[2].size() == 1);
  CHECK(batches(d, 2, 1) == plan);
  CHECK_THROWS_AS(batches(d, 0, 1), ArgumentError);
  CHECK(batches(Dataset{}, 4, 1).empty());
}

TEST_CASE("batch plans cover every sentence once and depend on the seed") {
  std::vector<TaggedSentence> s;
  for (int i = 0; i < 100; ++i) s.push_back({{"w"}, {"X"}});
  Dataset d(s);
  auto flatten = [](const std::vector<std::vector<std::size_t>>& plan) {
    std::vector<std::size_t> out;
    for (const auto& b : plan) out.insert(out.end(), b.begin(), b.end());
    return out;
  };
  auto a = flatten(batches(d, 7, 1));
  auto b = flatten(batches(d, 7, 2));
  CHECK(a != b);
  std::sort(a.begin(), a.end());
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == i);
}

TEST_CASE("tag inventory is stable across re-parses") {
  const char* text = "a C\nb A\n\nc B\nd A\n";
  CHECK(parse_conll(text).tags() == parse_conll(text).tags());
  CHECK(parse_conll(text).tags() == std::vector<std::string>{"C", "A", "B"});
}
