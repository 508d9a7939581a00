#pragma once

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "gst/env/scene.hpp"
#include "gst/error.hpp"

namespace gst {

// Answer ids are fixed: Yes=0, No=1, NA=2.
enum class Answer { kYes = 0, kNo = 1, kNa = 2 };
inline constexpr int kNumAnswers = 3;

inline std::string AnswerName(Answer a) {
  switch (a) {
    case Answer::kYes: return "Yes";
    case Answer::kNo: return "No";
    case Answer::kNa: return "NA";
  }
  return "NA";
}

// Accepts Yes/No/NA in any case, plus "N/A".
inline Answer ParseAnswer(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  if (s == "yes") return Answer::kYes;
  if (s == "no") return Answer::kNo;
  if (s == "na" || s == "n/a") return Answer::kNa;
  throw ProtocolError("invalid answer '" + s + "'");
}

enum class TemplateKind { kCategory, kAttribute, kSpatial };

enum class SpatialPredicate {
  kLeftHalf = 0,
  kRightHalf,
  kTopHalf,
  kBottomHalf,
  kHorizontalCenterThird,
  kVerticalCenterThird,
};
inline constexpr int kNumSpatialPredicates = 6;

struct Template {
  TemplateKind kind = TemplateKind::kCategory;
  int argument = 0;  // category id, attribute id, or SpatialPredicate
};

// A question as the Oracle sees it (template + argument) together with the
// rendered token ids the guesser reads. template_id < 0 marks free-form
// text (e.g. loaded from an external dataset) that the Oracle cannot judge.
struct Question {
  int template_id = -1;
  std::vector<int> tokens;

  bool operator==(const Question&) const = default;
};

class Vocabulary {
 public:
  static constexpr int kPad = 0;
  static constexpr int kUnk = 1;

  Vocabulary() : Vocabulary(std::vector<std::string>{"<pad>", "<unk>"}) {}
  explicit Vocabulary(std::vector<std::string> words) : words_(std::move(words)) {
    if (words_.size() < 2 || words_[0] != "<pad>" || words_[1] != "<unk>") {
      throw ConfigError("vocabulary must start with <pad>, <unk>");
    }
    for (std::size_t i = 0; i < words_.size(); ++i) {
      if (!ids_.emplace(words_[i], static_cast<int>(i)).second) {
        throw ConfigError("duplicate vocabulary entry '" + words_[i] + "'");
      }
    }
  }

  int Add(const std::string& w) {
    auto it = ids_.find(w);
    if (it != ids_.end()) return it->second;
    words_.push_back(w);
    ids_[w] = static_cast<int>(words_.size() - 1);
    return ids_[w];
  }
  int Id(const std::string& w) const {
    auto it = ids_.find(w);
    return it == ids_.end() ? kUnk : it->second;
  }
  const std::string& Word(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
      throw DimensionError("token id " + std::to_string(id) + " outside vocabulary");
    }
    return words_[id];
  }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

  // Lower-cases and splits off '?' before lookup.
  std::vector<int> Tokenize(const std::string& text) const {
    std::string spaced;
    for (char c : text) {
      if (c == '?' || c == ',' || c == '.') {
        spaced += ' ';
        spaced += c == '?' ? '?' : ' ';
        spaced += ' ';
      } else {
        spaced += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
      }
    }
    std::istringstream is(spaced);
    std::vector<int> out;
    for (std::string w; is >> w;) out.push_back(Id(w));
    return out;
  }
  std::string Render(const std::vector<int>& tokens) const {
    std::string s;
    for (std::size_t i = 0; i < tokens.size(); ++i) {
      if (i) s += ' ';
      s += Word(tokens[i]);
    }
    return s;
  }

  // Plain text, one token per line; the line number is the id.
  void Save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path);
    for (const auto& w : words_) out << w << "\n";
  }
  static Vocabulary Load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw NotFoundError("cannot open vocabulary " + path);
    std::vector<std::string> words;
    for (std::string line; std::getline(in, line);) {
      if (!line.empty()) words.push_back(line);
    }
    return Vocabulary(std::move(words));
  }

  bool operator==(const Vocabulary& o) const { return words_ == o.words_; }

 private:
  std::vector<std::string> words_;
  std::map<std::string, int> ids_;
};

inline const std::vector<std::string>& DefaultCategoryNames() {
  static const std::vector<std::string> names{
      "person", "dog", "cat", "cow", "car", "chair", "cup", "bird",
      "horse", "bottle", "bus", "sheep", "bench", "kite", "clock", "vase"};
  return names;
}
inline const std::vector<std::string>& DefaultColorNames() {
  static const std::vector<std::string> names{"red", "green", "blue", "yellow",
                                              "white", "black", "brown", "pink"};
  return names;
}
inline constexpr const char* kSizeNames[kNumSizeClasses] = {"small", "medium", "large"};

// The template inventory for a scene configuration: one category template
// per category, one attribute template per attribute, then six spatial
// predicates. Owns the rendering vocabulary.
class TemplateSet {
 public:
  explicit TemplateSet(const SceneConfig& cfg) : config_(cfg) {
    if (cfg.num_colors > static_cast<int>(DefaultColorNames().size())) {
      throw ConfigError("at most " + std::to_string(DefaultColorNames().size()) + " colors");
    }
    for (const char* w : {"is", "it", "a", "on", "the", "at", "in", "left", "right", "top",
                          "bottom", "middle", "column", "row", "?", "yes", "no", "n/a"}) {
      vocab_.Add(w);
    }
    for (int c = 0; c < cfg.num_categories; ++c) vocab_.Add(CategoryName(c));
    for (int k = 0; k < cfg.num_colors; ++k) vocab_.Add(DefaultColorNames()[k]);
    for (const char* s : kSizeNames) vocab_.Add(s);

    for (int c = 0; c < cfg.num_categories; ++c) templates_.push_back({TemplateKind::kCategory, c});
    for (int a = 0; a < cfg.NumAttributes(); ++a) templates_.push_back({TemplateKind::kAttribute, a});
    for (int s = 0; s < kNumSpatialPredicates; ++s) templates_.push_back({TemplateKind::kSpatial, s});
  }

  static std::string CategoryName(int c) {
    if (c < static_cast<int>(DefaultCategoryNames().size())) return DefaultCategoryNames()[c];
    return "category" + std::to_string(c);
  }
  std::string AttributeName(int a) const {
    if (config_.IsColorAttribute(a)) return DefaultColorNames()[a];
    return kSizeNames[a - config_.num_colors];
  }

  const SceneConfig& config() const { return config_; }
  const Vocabulary& vocabulary() const { return vocab_; }
  std::size_t size() const { return templates_.size(); }
  const Template& at(int id) const {
    if (id < 0 || static_cast<std::size_t>(id) >= templates_.size()) {
      throw ProtocolError("unknown template id " + std::to_string(id));
    }
    return templates_[id];
  }

  int CategoryTemplate(int category) const { return category; }
  int AttributeTemplate(int attribute) const { return config_.num_categories + attribute; }
  int SpatialTemplate(SpatialPredicate p) const {
    return config_.num_categories + config_.NumAttributes() + static_cast<int>(p);
  }
  bool IsColorTemplate(int id) const {
    const Template& t = at(id);
    return t.kind == TemplateKind::kAttribute && config_.IsColorAttribute(t.argument);
  }

  std::string Text(int id) const {
    const Template& t = at(id);
    switch (t.kind) {
      case TemplateKind::kCategory: return "is it a " + CategoryName(t.argument) + " ?";
      case TemplateKind::kAttribute: return "is it " + AttributeName(t.argument) + " ?";
      case TemplateKind::kSpatial:
        switch (static_cast<SpatialPredicate>(t.argument)) {
          case SpatialPredicate::kLeftHalf: return "is it on the left ?";
          case SpatialPredicate::kRightHalf: return "is it on the right ?";
          case SpatialPredicate::kTopHalf: return "is it at the top ?";
          case SpatialPredicate::kBottomHalf: return "is it at the bottom ?";
          case SpatialPredicate::kHorizontalCenterThird: return "is it in the middle column ?";
          case SpatialPredicate::kVerticalCenterThird: return "is it in the middle row ?";
        }
    }
    return "";
  }

  Question Make(int id) const { return Question{id, vocab_.Tokenize(Text(id))}; }

 private:
  SceneConfig config_;
  Vocabulary vocab_;
  std::vector<Template> templates_;
};

}  // namespace gst
