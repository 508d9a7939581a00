#pragma once

#include <algorithm>
#include <array>
#include <optional>
#include <string>
#include <vector>

#include "gst/env/oracle.hpp"
#include "gst/env/question.hpp"
#include "gst/env/rng.hpp"

namespace gst {

enum class QGenPolicy { kRandom, kGreedySplit, kFixed };

inline QGenPolicy ParseQGenPolicy(const std::string& s) {
  if (s == "random") return QGenPolicy::kRandom;
  if (s == "greedy" || s == "greedy-split") return QGenPolicy::kGreedySplit;
  if (s == "fixed") return QGenPolicy::kFixed;
  throw ConfigError("unknown question policy '" + s + "'");
}

// Scripted questioner. Candidates are the template inventory minus color
// templates unless `ask_color` is set: the guesser's object features carry
// category and position only, so color answers carry no signal for it.
class QuestionGenerator {
 public:
  QuestionGenerator(const TemplateSet& templates, QGenPolicy policy, bool ask_color = false,
                    std::vector<int> script = {})
      : templates_(&templates), policy_(policy), script_(std::move(script)) {
    for (int id = 0; id < static_cast<int>(templates.size()); ++id) {
      if (!ask_color && templates.IsColorTemplate(id)) continue;
      candidates_.push_back(id);
    }
  }

  QGenPolicy policy() const { return policy_; }
  const std::vector<int>& candidates() const { return candidates_; }

  // Next question, or nullopt once no unused template remains.
  std::optional<Question> Next(const Scene& scene, const std::vector<QaPair>& history,
                               Rng& rng) const {
    std::vector<int> unused;
    for (int id : candidates_) {
      const bool asked = std::any_of(history.begin(), history.end(), [id](const QaPair& qa) {
        return qa.question.template_id == id;
      });
      if (!asked) unused.push_back(id);
    }
    switch (policy_) {
      case QGenPolicy::kFixed: {
        if (history.size() >= script_.size()) return std::nullopt;
        return templates_->Make(script_[history.size()]);
      }
      case QGenPolicy::kRandom: {
        if (unused.empty()) return std::nullopt;
        return templates_->Make(unused[rng.Below(unused.size())]);
      }
      case QGenPolicy::kGreedySplit: {
        if (unused.empty()) return std::nullopt;
        return templates_->Make(MostBalanced(scene, history, unused));
      }
    }
    return std::nullopt;
  }

  // Template maximizing the worst-case number of eliminated consistent
  // objects (size minus largest answer class); ties go to the lowest id.
  int MostBalanced(const Scene& scene, const std::vector<QaPair>& history,
                   const std::vector<int>& unused) const {
    const std::vector<std::size_t> alive = ConsistentObjects(*templates_, scene, history);
    int best = unused.front();
    long best_score = -1;
    for (int id : unused) {
      const Question q{id, {}};
      std::array<long, kNumAnswers> counts{};
      for (std::size_t i : alive) ++counts[static_cast<int>(OracleAnswer(*templates_, scene, i, q))];
      const long score =
          static_cast<long>(alive.size()) - *std::max_element(counts.begin(), counts.end());
      if (score > best_score) {
        best_score = score;
        best = id;
      }
    }
    return best;
  }

 private:
  const TemplateSet* templates_;
  QGenPolicy policy_;
  std::vector<int> script_;
  std::vector<int> candidates_;
};

}  // namespace gst
