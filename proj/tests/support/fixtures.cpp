#include "fixtures.hpp"

#include <fstream>
#include <stdexcept>

#include "eqakit/utf8.hpp"

namespace eqa::testsupport {

const std::string kDesertQuestion =
    "What is the name of the water body that is found to the east?";
const std::string kDesertContext =
    "To the east is the Colorado Desert and the Colorado River at the border with Arizona, "
    "and the Mojave Desert at the border with the state of Nevada. To the south is the "
    "Mexico–United States border.";
const std::string kDesertGold = "Colorado River";

const std::string kAosSentence =
    "Sea is the name of the water body that is found to the west.";
const std::string kNegationSentence =
    "Sea is the name of the water body that is found to the not east.";

const std::string kGenocideQuestion =
    "In 1948, what general assembly resolution established genocide as a prosecutable act?";
const std::string kGenocideContext =
    "Lemkin successfully campaigned for the universal acceptance of international laws "
    "defining and forbidding genocides. In 1948, the UN General Assembly adopted the "
    "Convention on the Prevention and Punishment of the Crime of Genocide (CPPCG) which "
    "defined the crime of genocide for the first time.";
const std::string kGenocideGold =
    "Convention on the Prevention and Punishment of the Crime of Genocide (CPPCG)";
const std::string kSyntheticAnswer = "Resolution 46/3";
const std::string kSyntheticStatement =
    "In 1948, Resolution 46/3 established genocide as a prosecutable act.";

std::size_t offset_of(const std::string& haystack, const std::string& needle) {
  const std::u32string h = utf8::decode(haystack);
  const std::u32string n = utf8::decode(needle);
  const std::size_t at = h.find(n);
  if (at == std::u32string::npos) {
    throw std::logic_error("fixture needle not found: " + needle);
  }
  return at;
}

data::QAExample desert_example() {
  data::QAExample ex;
  ex.id = "desert-east-1";
  ex.question = kDesertQuestion;
  ex.context = kDesertContext;
  ex.gold_answers = {{kDesertGold, offset_of(kDesertContext, kDesertGold)}};
  ex.is_answerable = true;
  ex.validate();
  return ex;
}

data::QAExample genocide_example() {
  data::QAExample ex;
  ex.id = "genocide-1948-1";
  ex.question = kGenocideQuestion;
  ex.context = kGenocideContext;
  ex.gold_answers = {{kGenocideGold, offset_of(kGenocideContext, kGenocideGold)}};
  ex.is_answerable = true;
  ex.validate();
  return ex;
}

text::LexicalResources canonical_resources() {
  text::LexicalResources res;
  res.add_antonym_pair("east", "west");
  res.add_antonym_pair("north", "south");

  res.add_pos("east", text::PosTag::kAdj);
  res.add_pos("west", text::PosTag::kAdj);
  res.add_pos("north", text::PosTag::kAdj);
  res.add_pos("south", text::PosTag::kAdj);
  res.add_pos("name", text::PosTag::kNoun);
  res.add_pos("water", text::PosTag::kNoun);
  res.add_pos("body", text::PosTag::kNoun);
  res.add_pos("assembly", text::PosTag::kNoun);
  res.add_pos("border", text::PosTag::kNoun);

  res.add_embedding("colorado", {1.0, 0.0, 0.0, 0.0});
  res.add_embedding("river", {0.0, 1.0, 0.0, 0.0});
  res.add_embedding("Sea", {0.7, 0.7, 0.0, 0.0});
  res.add_embedding("desert", {0.0, 0.0, 1.0, 0.0});
  res.add_embedding("arizona", {0.0, 0.0, 0.9, 0.1});
  res.add_embedding("nevada", {0.0, 0.0, 0.1, 0.9});
  res.add_embedding("border", {0.0, 0.0, 0.5, 0.5});
  return res;
}

void write_resource_files(const std::string& dir) {
  {
    std::ofstream out(dir + "/antonyms.tsv");
    out << "east\twest\n";
    out << "north\tsouth\n";
  }
  {
    std::ofstream out(dir + "/pos.tsv");
    out << "east\tADJ\nwest\tADJ\nnorth\tADJ\nsouth\tADJ\n";
    out << "name\tNOUN\nwater\tNOUN\nbody\tNOUN\nassembly\tNOUN\nborder\tNOUN\n";
  }
  {
    std::ofstream out(dir + "/embeddings.txt");
    out << "4\n";
    out << "colorado 1 0 0 0\n";
    out << "river 0 1 0 0\n";
    out << "Sea 0.7 0.7 0 0\n";
    out << "desert 0 0 1 0\n";
    out << "arizona 0 0 0.9 0.1\n";
    out << "nevada 0 0 0.1 0.9\n";
    out << "border 0 0 0.5 0.5\n";
  }
}

}  // namespace eqa::testsupport
