// Writes the synthetic tagging corpus and its two embedding sources.
#include <filesystem>
#include <fstream>
#include <iostream>

#include "metatag/corpus.hpp"
#include "metatag/embed.hpp"
#include "metatag/synthetic.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_synthetic OUT_DIR\n";
    return 2;
  }
  const std::filesystem::path dir = argv[1];
  std::filesystem::create_directories(dir);
  const auto corpus = metatag::make_synthetic();
  auto put = [&](const char* name, const std::string& text) {
    std::ofstream out(dir / name, std::ios::binary);
    out << text;
    if (!out) {
      std::cerr << "cannot write " << (dir / name).string() << "\n";
      std::exit(1);
    }
  };
  put("train.conll", metatag::write_conll(corpus.train));
  put("dev.conll", metatag::write_conll(corpus.dev));
  put("test.conll", metatag::write_conll(corpus.test));
  put("sa.vec", metatag::write_table(corpus.first));
  put("sb.vec", metatag::write_table(corpus.second));
  return 0;
}
