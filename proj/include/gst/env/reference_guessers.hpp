#pragma once

#include <vector>

#include "gst/env/game.hpp"
#include "gst/env/oracle.hpp"

namespace gst {

// Exact posterior under a truthful Oracle and a uniform prior: uniform over
// the objects consistent with every answer so far.
class PosteriorGuesser : public Guesser {
 public:
  explicit PosteriorGuesser(const TemplateSet& templates) : templates_(&templates) {}

  void Reset(const Scene& scene) override {
    scene_ = scene;
    history_.clear();
    states_.assign(1, Belief(scene.size(), 1.0 / static_cast<double>(scene.size())));
  }
  void Observe(const Question& q, Answer a) override {
    history_.push_back({q, a});
    const auto alive = ConsistentObjects(*templates_, scene_, history_);
    Belief pi(scene_.size(), 0.0);
    if (alive.empty()) {
      pi = states_.back();  // contradictory answers: keep the previous state
    } else {
      for (std::size_t i : alive) pi[i] = 1.0 / static_cast<double>(alive.size());
    }
    states_.push_back(std::move(pi));
  }
  const std::vector<Belief>& States() const override { return states_; }

 private:
  const TemplateSet* templates_;
  Scene scene_;
  std::vector<QaPair> history_;
  std::vector<Belief> states_;
};

// Ignores the dialogue entirely.
class UniformGuesser : public Guesser {
 public:
  void Reset(const Scene& scene) override {
    states_.assign(1, Belief(scene.size(), 1.0 / static_cast<double>(scene.size())));
  }
  void Observe(const Question&, Answer) override { states_.push_back(states_.back()); }
  const std::vector<Belief>& States() const override { return states_; }

 private:
  std::vector<Belief> states_;
};

}  // namespace gst
