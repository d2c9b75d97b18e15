#include "eqakit/attacks.hpp"

#include <algorithm>

#include "eqakit/errors.hpp"
#include "eqakit/utf8.hpp"
#include "splice_util.hpp"

namespace eqa::attack {

namespace {

using text::LexicalResources;
using text::PosTag;
using text::Token;

const char* kWhWords[] = {"what", "which", "whose", "who", "whom",
                          "where", "when",  "why",   "how"};

bool is_wh_word(const std::string& surface) {
  return std::find(std::begin(kWhWords), std::end(kWhWords), surface) != std::end(kWhWords);
}

bool is_do_support(const std::string& surface) {
  return surface == "do" || surface == "does" || surface == "did";
}

bool starts_uppercase(const std::u32string& text, std::size_t offset) {
  if (offset >= text.size()) return false;
  const char32_t cp = text[offset];
  return (cp >= U'A' && cp <= U'Z') || (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7);
}

std::string capitalize_first(const std::string& s) {
  std::u32string cps = utf8::decode(s);
  if (!cps.empty() && cps[0] >= U'a' && cps[0] <= U'z') cps[0] -= 32;
  return utf8::encode(cps);
}

// End of the question body: last code point that is neither whitespace
// nor a question mark, plus one.
std::size_t question_core_end(const std::u32string& cps) {
  std::size_t end = cps.size();
  while (end > 0 && (text::is_space_char(cps[end - 1]) || cps[end - 1] == U'?')) --end;
  return end;
}

Outcome skip(std::string reason) { return Outcome{std::nullopt, std::move(reason)}; }

// Splices the finished attack sentence and re-maps the gold offsets.
Outcome finish(const data::QAExample& ex, Kind kind, const std::string& sentence,
               rng::Stream& stream, Placement placement) {
  for (const std::string& existing : detail::split_sentences(ex.context)) {
    if (existing == sentence) return skip("duplicate-sentence");
  }

  const std::vector<std::size_t> points =
      detail::insertion_points(ex.context, ex.gold_answers, /*include_end=*/true);
  if (points.empty()) return skip("no-insertion-point");
  const std::size_t offset = placement == Placement::kEnd
                                 ? utf8::length(ex.context)
                                 : points[stream.next_index(points.size())];

  AttackedExample attacked;
  attacked.base = ex;
  attacked.attack = kind;
  attacked.attack_sentence = sentence;
  attacked.insert_offset = offset;
  attacked.context_attacked = detail::splice_sentence(ex.context, sentence, offset);
  attacked.remapped_golds =
      detail::remap_golds(ex.gold_answers, offset, utf8::length(sentence) + 1);
  attacked.to_example().validate();
  return Outcome{std::move(attacked), ""};
}

}  // namespace

data::QAExample AttackedExample::to_example() const {
  data::QAExample out;
  out.id = base.id;
  out.question = base.question;
  out.context = context_attacked;
  out.gold_answers = remapped_golds;
  out.is_answerable = !out.gold_answers.empty();
  return out;
}

std::optional<std::string> modify_question_aos(const std::string& question,
                                               const LexicalResources& resources) {
  const std::u32string cps = utf8::decode(question);
  const std::vector<Token> tokens = text::tokenize(question);
  const std::vector<PosTag> tags = text::pos_tag(tokens, resources);

  std::u32string out;
  std::size_t consumed = 0;
  bool replaced_any = false;
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    const Token& tok = tokens[t];
    if (tags[t] != PosTag::kNoun && tags[t] != PosTag::kAdj) continue;
    const auto repl = text::antonym(tok.surface, resources);
    if (!repl) continue;
    out += cps.substr(consumed, tok.span.begin - consumed);
    std::string word = *repl;
    if (starts_uppercase(cps, tok.span.begin)) word = capitalize_first(word);
    out += utf8::decode(word);
    consumed = tok.span.end;
    replaced_any = true;
  }
  if (!replaced_any) return std::nullopt;
  out += cps.substr(consumed);
  return utf8::encode(out);
}

std::string fake_answer(const std::string& gold_text, const LexicalResources& resources) {
  return text::nearest_embedding_word(gold_text, resources);
}

std::string statement_from(const std::string& question_form, const std::string& fake,
                           const LexicalResources& resources) {
  const std::u32string cps = utf8::decode(question_form);
  const std::size_t core_end = question_core_end(cps);

  std::vector<Token> tokens;
  for (const Token& t : text::tokenize(question_form)) {
    if (t.span.begin < core_end) tokens.push_back(t);
  }

  std::size_t wh = tokens.size();
  for (std::size_t t = 0; t < tokens.size(); ++t) {
    if (is_wh_word(tokens[t].surface)) {
      wh = t;
      break;
    }
  }

  std::string statement;
  if (wh == tokens.size()) {
    // No wh-word; keep every question word after the fake answer.
    statement = fake;
    if (core_end > 0) statement += " " + utf8::encode(cps.substr(0, core_end));
  } else {
    std::size_t pos = wh + 1;
    const std::string& wh_surface = tokens[wh].surface;
    if (wh_surface == "what" || wh_surface == "which" || wh_surface == "whose") {
      // The wh-word's noun phrase is replaced together with it.
      std::size_t taken = 0;
      while (pos < tokens.size() && taken < 5) {
        const PosTag tag = text::pos_tag_word(tokens[pos].surface, resources);
        if (tag != PosTag::kNoun && tag != PosTag::kAdj) break;
        ++pos;
        ++taken;
      }
    }
    if (pos < tokens.size() && is_do_support(tokens[pos].surface)) ++pos;

    statement = utf8::encode(cps.substr(0, tokens[wh].span.begin));  // untouched prefix
    statement += fake;
    if (pos < tokens.size() && tokens[pos].span.begin < core_end) {
      statement += " " + utf8::encode(cps.substr(tokens[pos].span.begin,
                                                 core_end - tokens[pos].span.begin));
    }
  }
  return capitalize_first(statement) + ".";
}

Outcome attack_add_one_sent(const data::QAExample& ex, const LexicalResources& resources,
                            rng::Stream& stream, Placement placement) {
  if (!ex.is_answerable) return skip("unanswerable");
  const auto modified = modify_question_aos(ex.question, resources);
  if (!modified) return skip("no-substitution");
  std::string fake;
  try {
    fake = fake_answer(ex.gold_answers.front().text, resources);
  } catch (const NoEmbedding&) {
    return skip("no-embedding");
  }
  return finish(ex, Kind::kAddOneSent, statement_from(*modified, fake, resources), stream,
                placement);
}

Outcome attack_negation(const data::QAExample& ex, const LexicalResources& resources,
                        rng::Stream& stream, Placement placement) {
  if (!ex.is_answerable) return skip("unanswerable");

  const std::vector<Token> q_tokens = text::tokenize(ex.question);
  const std::vector<PosTag> q_tags = text::pos_tag(q_tokens, resources);
  std::string first_adj;
  for (std::size_t t = 0; t < q_tokens.size(); ++t) {
    if (q_tags[t] == PosTag::kAdj) {
      first_adj = q_tokens[t].surface;
      break;
    }
  }
  if (first_adj.empty()) return skip("no-adjective");

  std::string fake;
  try {
    fake = fake_answer(ex.gold_answers.front().text, resources);
  } catch (const NoEmbedding&) {
    return skip("no-embedding");
  }

  const std::string statement = statement_from(ex.question, fake, resources);

  // Insert "not" before the question's first adjective as it occurs in the
  // statement; if the template dropped that word, fall back to the first
  // adjective of the statement itself.
  const std::vector<Token> s_tokens = text::tokenize(statement);
  std::size_t at = utf8::length(statement);
  bool found = false;
  for (const Token& t : s_tokens) {
    if (t.surface == first_adj) {
      at = t.span.begin;
      found = true;
      break;
    }
  }
  if (!found) {
    for (const Token& t : s_tokens) {
      if (text::pos_tag_word(t.surface, resources) == PosTag::kAdj) {
        at = t.span.begin;
        found = true;
        break;
      }
    }
  }
  if (!found) return skip("no-adjective");

  const std::u32string cps = utf8::decode(statement);
  const std::string negated =
      utf8::encode(cps.substr(0, at)) + "not " + utf8::encode(cps.substr(at));
  return finish(ex, Kind::kNegation, negated, stream, placement);
}

RunResult attack_dataset(const data::Dataset& d, Kind kind, const LexicalResources& resources,
                         std::uint64_t seed, Placement placement) {
  RunResult result;
  result.attacked.name = d.name + "-" + kind_name(kind);
  for (const data::QAExample& ex : d.examples) {
    rng::Stream stream = rng::Stream::for_key(seed, ex.id);
    const Outcome outcome = kind == Kind::kAddOneSent
                                ? attack_add_one_sent(ex, resources, stream, placement)
                                : attack_negation(ex, resources, stream, placement);
    ManifestEntry entry;
    entry.id = ex.id;
    if (outcome.ok()) {
      entry.attacked = true;
      entry.sentence = outcome.attacked->attack_sentence;
      entry.insert_offset = outcome.attacked->insert_offset;
      result.attacked.examples.push_back(outcome.attacked->to_example());
    } else {
      entry.reason = outcome.skip_reason;
      ++result.skipped;
    }
    result.manifest.push_back(std::move(entry));
  }
  return result;
}

std::string kind_name(Kind kind) {
  return kind == Kind::kAddOneSent ? "aos" : "negation";
}

}  // namespace eqa::attack
