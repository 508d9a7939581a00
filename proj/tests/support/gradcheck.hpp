#pragma once

// Central finite-difference oracle. Deliberately evaluates only forward
// values on fresh tapes so it shares no backward code with the engine.

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "gst/autodiff/ops.hpp"
#include "gst/autodiff/parameter_store.hpp"
#include "gst/autodiff/tape.hpp"

namespace gst::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // "<input>[<index>]" of the largest error
  std::size_t checked = 0;
};

// |a - n| / max(|a|, |n|, floor); the floor keeps exact zeros comparable.
inline double RelError(double analytic, double numeric, double floor = 1e-6) {
  return std::abs(analytic - numeric) /
         std::max({std::abs(analytic), std::abs(numeric), floor});
}

inline void Record(GradCheckResult& r, double err, const std::string& where) {
  ++r.checked;
  if (err > r.max_rel_error) {
    r.max_rel_error = err;
    r.worst = where;
  }
}

using LossOnLeaves =
    std::function<Var<double>(Tape<double>&, const std::vector<Var<double>>&)>;

// Checks d loss / d inputs where the inputs enter as Variable leaves.
inline GradCheckResult CheckInputGradients(std::vector<Array<double>> inputs,
                                           const LossOnLeaves& build,
                                           double h = 1e-5) {
  std::vector<Array<double>> analytic;
  {
    Tape<double> tape;
    std::vector<Var<double>> leaves;
    for (const auto& in : inputs) leaves.push_back(tape.Variable(in));
    tape.Backward(build(tape, leaves));
    for (const auto& v : leaves) {
      const Array<double>* g = tape.Grad(v);
      analytic.push_back(g ? *g : Array<double>(v.shape()));
    }
  }
  auto eval = [&]() {
    Tape<double> tape(nullptr, false);
    std::vector<Var<double>> leaves;
    for (const auto& in : inputs) leaves.push_back(tape.Constant(in));
    return build(tape, leaves).value()[0];
  };
  GradCheckResult result;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    for (std::size_t i = 0; i < inputs[k].size(); ++i) {
      const double orig = inputs[k][i];
      inputs[k][i] = orig + h;
      const double up = eval();
      inputs[k][i] = orig - h;
      const double down = eval();
      inputs[k][i] = orig;
      const double numeric = (up - down) / (2 * h);
      Record(result, RelError(analytic[k][i], numeric),
             "input" + std::to_string(k) + "[" + std::to_string(i) + "]");
    }
  }
  return result;
}

using LossOnParams = std::function<Var<double>(Tape<double>&)>;

// Checks d loss / d every parameter in `store`. When `max_per_param` is
// non-zero, only that many evenly strided entries of each array are probed.
inline GradCheckResult CheckParamGradients(ParameterStore<double>& store,
                                           const LossOnParams& build,
                                           std::size_t max_per_param = 0,
                                           double h = 1e-5) {
  Gradients<double> analytic(store);
  {
    Tape<double> tape(&store);
    tape.Backward(build(tape));
    tape.AccumulateParamGrads(analytic);
  }
  auto eval = [&]() {
    Tape<double> tape(&store, false);
    return build(tape).value()[0];
  };
  GradCheckResult result;
  for (std::size_t p = 0; p < store.size(); ++p) {
    Array<double>& values = store.MutableValue(p);
    const std::size_t n = values.size();
    const std::size_t stride =
        (max_per_param == 0 || n <= max_per_param) ? 1 : n / max_per_param;
    for (std::size_t i = 0; i < n; i += stride) {
      const double orig = values[i];
      values[i] = orig + h;
      const double up = eval();
      values[i] = orig - h;
      const double down = eval();
      values[i] = orig;
      const double numeric = (up - down) / (2 * h);
      Record(result, RelError(analytic[p][i], numeric),
             store.Name(p) + "[" + std::to_string(i) + "]");
    }
  }
  return result;
}

inline Array<double> RandomArray(Shape shape, std::uint64_t seed, double lo = -1.0,
                                 double hi = 1.0) {
  std::mt19937_64 rng(seed);
  Array<double> a(shape);
  for (auto& v : a.values()) {
    v = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
  }
  return a;
}

}  // namespace gst::testing
