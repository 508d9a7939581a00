#pragma once

#include <vector>

#include "gst/env/question.hpp"
#include "gst/env/scene.hpp"
#include "gst/error.hpp"

namespace gst {

inline bool SpatialHolds(const Scene& scene, const BBox& box, SpatialPredicate p) {
  const double xc = box.CenterX(), yc = box.CenterY();
  const double w = scene.width, h = scene.height;
  switch (p) {
    case SpatialPredicate::kLeftHalf: return xc < w / 2;
    case SpatialPredicate::kRightHalf: return xc >= w / 2;
    case SpatialPredicate::kTopHalf: return yc < h / 2;
    case SpatialPredicate::kBottomHalf: return yc >= h / 2;
    case SpatialPredicate::kHorizontalCenterThird: return xc >= w / 3 && xc < 2 * w / 3;
    case SpatialPredicate::kVerticalCenterThird: return yc >= h / 3 && yc < 2 * h / 3;
  }
  return false;
}

// Truthful rule-based Oracle.
inline Answer OracleAnswer(const TemplateSet& templates, const Scene& scene, std::size_t target,
                           const Question& q) {
  if (target >= scene.size()) throw ContractError("target index out of range");
  const Template& t = templates.at(q.template_id);  // throws ProtocolError
  const SceneObject& obj = scene.objects[target];
  auto yes_no = [](bool b) { return b ? Answer::kYes : Answer::kNo; };
  switch (t.kind) {
    case TemplateKind::kCategory: return yes_no(obj.category == t.argument);
    case TemplateKind::kAttribute: {
      const SceneConfig& cfg = templates.config();
      if (cfg.IsColorAttribute(t.argument)) {
        const bool colored = !obj.attributes.empty() && cfg.IsColorAttribute(obj.attributes.front());
        if (!colored) return Answer::kNa;
      }
      return yes_no(obj.HasAttribute(t.argument));
    }
    case TemplateKind::kSpatial:
      return yes_no(SpatialHolds(scene, obj.box, static_cast<SpatialPredicate>(t.argument)));
  }
  throw ProtocolError("unhandled template kind");
}

struct QaPair {
  Question question;
  Answer answer = Answer::kNa;

  bool operator==(const QaPair&) const = default;
};

// Objects whose Oracle answers agree with every recorded pair.
inline std::vector<std::size_t> ConsistentObjects(const TemplateSet& templates, const Scene& scene,
                                                  const std::vector<QaPair>& history) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < scene.size(); ++i) {
    bool ok = true;
    for (const QaPair& qa : history) {
      if (OracleAnswer(templates, scene, i, qa.question) != qa.answer) {
        ok = false;
        break;
      }
    }
    if (ok) out.push_back(i);
  }
  return out;
}

}  // namespace gst
