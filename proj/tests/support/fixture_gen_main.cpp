#include <filesystem>
#include <iostream>

#include "eqakit/dataset.hpp"
#include "fixtures.hpp"
#include "toy_corpus.hpp"

// Regenerates the committed files under data/. Usage: fixture_gen <repo-root>

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: fixture_gen <repo-root>" << std::endl;
    return 1;
  }
  namespace fs = std::filesystem;
  const fs::path root = argv[1];
  fs::create_directories(root / "data" / "resources");
  fs::create_directories(root / "data" / "fixtures");
  fs::create_directories(root / "data" / "toy");

  eqa::testsupport::write_resource_files((root / "data" / "resources").string());

  eqa::data::Dataset desert;
  desert.name = "desert-demo";
  desert.examples = {eqa::testsupport::desert_example()};
  eqa::data::save_dataset(desert, (root / "data" / "fixtures" / "desert.json").string());

  eqa::data::Dataset genocide;
  genocide.name = "convention-demo";
  genocide.examples = {eqa::testsupport::genocide_example()};
  eqa::data::save_dataset(genocide, (root / "data" / "fixtures" / "convention.json").string());

  const auto corpus = eqa::testsupport::make_toy_corpus(2024, 200, 200, 50, 50);
  eqa::data::save_dataset(corpus.train, (root / "data" / "toy" / "train.json").string());
  eqa::data::save_dataset(corpus.test_has_ans,
                          (root / "data" / "toy" / "test_hasans.json").string());
  eqa::data::save_dataset(corpus.test_no_ans,
                          (root / "data" / "toy" / "test_noans.json").string());

  // Mixed 150-example set (100 answerable / 50 unanswerable) for the
  // attack and augmentation demos.
  const auto mixed = eqa::testsupport::make_toy_corpus(515, 100, 50, 0, 0);
  eqa::data::Dataset small = mixed.train;
  small.name = "qa-small";
  eqa::data::save_dataset(small, (root / "data" / "fixtures" / "qa_small.json").string());

  std::cout << "fixtures written under " << (root / "data").string() << std::endl;
  return 0;
}
