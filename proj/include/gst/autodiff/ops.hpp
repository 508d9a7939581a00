#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "gst/autodiff/array.hpp"
#include "gst/autodiff/tape.hpp"
#include "gst/error.hpp"

namespace gst {

namespace ops_internal {

template <typename T>
Tape<T>& TapeOf(Var<T> a) {
  if (!a.valid()) throw ContractError("invalid Var");
  return *a.tape;
}

template <typename T>
void SameTape(Var<T> a, Var<T> b) {
  if (a.tape != b.tape) throw ContractError("operands live on different tapes");
}

// How an operand of a broadcasting binary op maps onto the output.
enum class Bcast { kSame, kRow, kScalar };

inline Bcast Classify(const Shape& s, const Shape& out) {
  if (s == out) return Bcast::kSame;
  if (s.rows == 1 && s.cols == 1) return Bcast::kScalar;
  if (s.rows == 1 && s.cols == out.cols) return Bcast::kRow;
  throw DimensionError("cannot broadcast " + s.ToString() + " to " + out.ToString());
}

inline std::size_t MapIndex(Bcast b, std::size_t i, std::size_t cols) {
  switch (b) {
    case Bcast::kSame: return i;
    case Bcast::kRow: return i % cols;
    case Bcast::kScalar: return 0;
  }
  return 0;
}

inline Shape BroadcastShape(const Shape& a, const Shape& b) {
  if (a == b) return a;
  if (a.Size() >= b.Size()) {
    Classify(b, a);
    return a;
  }
  Classify(a, b);
  return b;
}

template <typename T, typename Fwd, typename DA, typename DB>
Var<T> Binary(Var<T> a, Var<T> b, const char* name, Fwd fwd, DA da, DB db) {
  SameTape(a, b);
  Tape<T>& t = TapeOf(a);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  const Shape out_shape = BroadcastShape(av.shape(), bv.shape());
  const Bcast ba = Classify(av.shape(), out_shape);
  const Bcast bb = Classify(bv.shape(), out_shape);
  const std::size_t cols = out_shape.cols;
  Array<T> out(out_shape);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = fwd(av[MapIndex(ba, i, cols)], bv[MapIndex(bb, i, cols)]);
  }
  const int ia = a.id, ib = b.id;
  return t.Push(std::move(out), t.NeedsGrad(ia) || t.NeedsGrad(ib),
                [ia, ib, ba, bb, cols, da, db](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  const Array<T>& x = tp.ValueOf(ia);
                  const Array<T>& y = tp.ValueOf(ib);
                  const bool need_a = tp.NeedsGrad(ia), need_b = tp.NeedsGrad(ib);
                  Array<T>* ga = need_a ? &tp.GradRef(ia) : nullptr;
                  Array<T>* gb = need_b ? &tp.GradRef(ib) : nullptr;
                  for (std::size_t i = 0; i < g.size(); ++i) {
                    const std::size_t ka = MapIndex(ba, i, cols);
                    const std::size_t kb = MapIndex(bb, i, cols);
                    if (ga) (*ga)[ka] += g[i] * da(x[ka], y[kb]);
                    if (gb) (*gb)[kb] += g[i] * db(x[ka], y[kb]);
                  }
                },
                name);
}

template <typename T, typename Fwd, typename Deriv>
Var<T> Unary(Var<T> a, const char* name, Fwd fwd, Deriv deriv) {
  Tape<T>& t = TapeOf(a);
  const Array<T>& av = a.value();
  Array<T> out(av.shape());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = fwd(av[i]);
  const int ia = a.id;
  // deriv(x, y) receives the input and the output value.
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia, deriv](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  const Array<T>& x = tp.ValueOf(ia);
                  const Array<T>& y = tp.ValueOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i] * deriv(x[i], y[i]);
                },
                name);
}

}  // namespace ops_internal

template <typename T>
Var<T> Matmul(Var<T> a, Var<T> b) {
  using namespace ops_internal;
  SameTape(a, b);
  Tape<T>& t = TapeOf(a);
  const Array<T>& av = a.value();
  const Array<T>& bv = b.value();
  if (av.cols() != bv.rows()) {
    throw DimensionError("matmul inner dimensions differ: " + av.shape().ToString() +
                         " x " + bv.shape().ToString());
  }
  Array<T> out(av.rows(), bv.cols());
  GemmAccumulate(av, bv, out);
  const int ia = a.id, ib = b.id;
  return t.Push(std::move(out), t.NeedsGrad(ia) || t.NeedsGrad(ib),
                [ia, ib](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  if (tp.NeedsGrad(ia)) GemmTransBAccumulate(g, tp.ValueOf(ib), tp.GradRef(ia));
                  if (tp.NeedsGrad(ib)) GemmTransAAccumulate(tp.ValueOf(ia), g, tp.GradRef(ib));
                },
                "matmul");
}

template <typename T>
Var<T> Add(Var<T> a, Var<T> b) {
  return ops_internal::Binary(
      a, b, "add", [](T x, T y) { return x + y; }, [](T, T) { return T(1); },
      [](T, T) { return T(1); });
}

template <typename T>
Var<T> Sub(Var<T> a, Var<T> b) {
  return ops_internal::Binary(
      a, b, "sub", [](T x, T y) { return x - y; }, [](T, T) { return T(1); },
      [](T, T) { return T(-1); });
}

template <typename T>
Var<T> Mul(Var<T> a, Var<T> b) {
  return ops_internal::Binary(
      a, b, "mul", [](T x, T y) { return x * y; }, [](T, T y) { return y; },
      [](T x, T) { return x; });
}

template <typename T>
Var<T> Scale(Var<T> a, T s) {
  return ops_internal::Unary(
      a, "scale", [s](T x) { return s * x; }, [s](T, T) { return s; });
}

template <typename T>
Var<T> AddScalar(Var<T> a, T s) {
  return ops_internal::Unary(
      a, "add_scalar", [s](T x) { return x + s; }, [](T, T) { return T(1); });
}

template <typename T>
Var<T> Tanh(Var<T> a) {
  return ops_internal::Unary(
      a, "tanh", [](T x) { return std::tanh(x); }, [](T, T y) { return T(1) - y * y; });
}

template <typename T>
T SigmoidScalar(T x) {
  if (x >= T(0)) return T(1) / (T(1) + std::exp(-x));
  const T e = std::exp(x);
  return e / (T(1) + e);
}

template <typename T>
Var<T> Sigmoid(Var<T> a) {
  return ops_internal::Unary(
      a, "sigmoid", [](T x) { return SigmoidScalar(x); },
      [](T, T y) { return y * (T(1) - y); });
}

template <typename T>
Var<T> Log(Var<T> a) {
  const Array<T>& av = ops_internal::TapeOf(a).Value(a);
  for (std::size_t i = 0; i < av.size(); ++i) {
    if (!(av[i] > T(0))) throw DomainError("log of non-positive value", i);
  }
  return ops_internal::Unary(
      a, "log", [](T x) { return std::log(x); }, [](T x, T) { return T(1) / x; });
}

// max(a, floor); the gradient is passed only where a > floor.
template <typename T>
Var<T> ClampMin(Var<T> a, T floor) {
  return ops_internal::Unary(
      a, "clamp_min", [floor](T x) { return std::max(x, floor); },
      [floor](T x, T) { return x > floor ? T(1) : T(0); });
}

// Softmax over every entry of `a` (shape preserved), max-subtracted.
template <typename T>
Var<T> Softmax(Var<T> a) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  Array<T> out(av.shape());
  const T mx = *std::max_element(av.values().begin(), av.values().end());
  T total = T(0);
  for (std::size_t i = 0; i < av.size(); ++i) {
    out[i] = std::exp(av[i] - mx);
    total += out[i];
  }
  for (auto& v : out.values()) v /= total;
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  const Array<T>& y = tp.ValueOf(self);
                  T dot = T(0);
                  for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += y[i] * (g[i] - dot);
                },
                "softmax");
}

// Concatenation along axis 0 (stack rows) or axis 1 (append columns).
template <typename T>
Var<T> Concat(std::span<const Var<T>> parts, int axis) {
  if (parts.empty()) throw ContractError("concat of zero parts");
  if (axis != 0 && axis != 1) throw ContractError("concat axis must be 0 or 1");
  Tape<T>& t = ops_internal::TapeOf(parts[0]);
  std::vector<int> ids;
  std::vector<std::size_t> extents;
  bool needs = false;
  std::size_t total = 0;
  const Shape first = parts[0].shape();
  for (const Var<T>& p : parts) {
    ops_internal::SameTape(parts[0], p);
    const Shape s = p.shape();
    if (axis == 0 ? s.cols != first.cols : s.rows != first.rows) {
      throw DimensionError("concat: mismatched " + s.ToString() + " vs " +
                           first.ToString() + " on axis " + std::to_string(axis));
    }
    ids.push_back(p.id);
    extents.push_back(axis == 0 ? s.rows : s.cols);
    total += extents.back();
    needs = needs || t.NeedsGrad(p.id);
  }
  const Shape out_shape = axis == 0 ? Shape{total, first.cols} : Shape{first.rows, total};
  Array<T> out(out_shape);
  std::size_t offset = 0;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    const Array<T>& pv = t.ValueOf(ids[k]);
    if (axis == 0) {
      std::copy(pv.values().begin(), pv.values().end(), out.data() + offset * out_shape.cols);
    } else {
      for (std::size_t r = 0; r < out_shape.rows; ++r) {
        std::copy_n(pv.data() + r * extents[k], extents[k],
                    out.data() + r * out_shape.cols + offset);
      }
    }
    offset += extents[k];
  }
  return t.Push(std::move(out), needs,
                [ids, extents, axis](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  std::size_t off = 0;
                  for (std::size_t k = 0; k < ids.size(); ++k) {
                    if (tp.NeedsGrad(ids[k])) {
                      Array<T>& gp = tp.GradRef(ids[k]);
                      if (axis == 0) {
                        const T* src = g.data() + off * g.cols();
                        for (std::size_t i = 0; i < gp.size(); ++i) gp[i] += src[i];
                      } else {
                        for (std::size_t r = 0; r < g.rows(); ++r) {
                          for (std::size_t c = 0; c < extents[k]; ++c) {
                            gp(r, c) += g(r, off + c);
                          }
                        }
                      }
                    }
                    off += extents[k];
                  }
                },
                "concat");
}

template <typename T>
Var<T> Concat(std::initializer_list<Var<T>> parts, int axis) {
  std::vector<Var<T>> v(parts);
  return Concat(std::span<const Var<T>>(v), axis);
}

// Columns [start, start + len).
template <typename T>
Var<T> SliceCols(Var<T> a, std::size_t start, std::size_t len) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  if (len == 0 || start + len > av.cols()) throw DimensionError("slice out of range");
  Array<T> out(av.rows(), len);
  for (std::size_t r = 0; r < av.rows(); ++r) {
    std::copy_n(av.data() + r * av.cols() + start, len, out.data() + r * len);
  }
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia, start, len](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    for (std::size_t c = 0; c < len; ++c) ga(r, start + c) += g(r, c);
                  }
                },
                "slice_cols");
}

// Sum of all entries -> 1 x 1.
template <typename T>
Var<T> Sum(Var<T> a) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  T s = T(0);
  for (T v : av.values()) s += v;
  const int ia = a.id;
  return t.Push(Array<T>(1, 1, s), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const T g = tp.GradOf(self)[0];
                  for (auto& v : tp.GradRef(ia).values()) v += g;
                },
                "sum");
}

// Column sums: m x d -> 1 x d.
template <typename T>
Var<T> SumRows(Var<T> a) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  Array<T> out(1, av.cols());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out[c] += av(r, c);
  }
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t r = 0; r < ga.rows(); ++r) {
                    for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g[c];
                  }
                },
                "sum_rows");
}

// Single entry (flat index) -> 1 x 1.
template <typename T>
Var<T> At(Var<T> a, std::size_t index) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  if (index >= av.size()) throw DimensionError("At: index out of range");
  const int ia = a.id;
  return t.Push(Array<T>(1, 1, av[index]), t.NeedsGrad(ia),
                [ia, index](Tape<T>& tp, int self) {
                  tp.GradRef(ia)[index] += tp.GradOf(self)[0];
                },
                "at");
}

// Row i of `a` multiplied by weights[i]; weights is 1 x m or m x 1.
template <typename T>
Var<T> ScaleRows(Var<T> a, Var<T> weights) {
  ops_internal::SameTape(a, weights);
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  const Array<T>& wv = weights.value();
  if (wv.size() != av.rows() || (wv.rows() != 1 && wv.cols() != 1)) {
    throw DimensionError("scale_rows: weights " + wv.shape().ToString() +
                         " do not match rows of " + av.shape().ToString());
  }
  Array<T> out(av.shape());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(r, c) = wv[r] * av(r, c);
  }
  const int ia = a.id, iw = weights.id;
  return t.Push(std::move(out), t.NeedsGrad(ia) || t.NeedsGrad(iw),
                [ia, iw](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  const Array<T>& x = tp.ValueOf(ia);
                  const Array<T>& w = tp.ValueOf(iw);
                  if (tp.NeedsGrad(ia)) {
                    Array<T>& ga = tp.GradRef(ia);
                    for (std::size_t r = 0; r < x.rows(); ++r) {
                      for (std::size_t c = 0; c < x.cols(); ++c) ga(r, c) += w[r] * g(r, c);
                    }
                  }
                  if (tp.NeedsGrad(iw)) {
                    Array<T>& gw = tp.GradRef(iw);
                    for (std::size_t r = 0; r < x.rows(); ++r) {
                      T acc = T(0);
                      for (std::size_t c = 0; c < x.cols(); ++c) acc += g(r, c) * x(r, c);
                      gw[r] += acc;
                    }
                  }
                },
                "scale_rows");
}

// 1 x d -> m x d by repetition.
template <typename T>
Var<T> RepeatRows(Var<T> a, std::size_t m) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  if (av.rows() != 1) throw DimensionError("repeat_rows expects a single row");
  Array<T> out(m, av.cols());
  for (std::size_t r = 0; r < m; ++r) std::copy(av.values().begin(), av.values().end(), out.data() + r * av.cols());
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t r = 0; r < g.rows(); ++r) {
                    for (std::size_t c = 0; c < g.cols(); ++c) ga[c] += g(r, c);
                  }
                },
                "repeat_rows");
}

template <typename T>
Var<T> Reshape(Var<T> a, Shape shape) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  if (shape.Size() != av.size()) throw DimensionError("reshape changes element count");
  const int ia = a.id;
  return t.Push(Array<T>(shape, av.values()), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += g[i];
                },
                "reshape");
}

template <typename T>
Var<T> Transpose(Var<T> a) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  Array<T> out(av.cols(), av.rows());
  for (std::size_t r = 0; r < av.rows(); ++r) {
    for (std::size_t c = 0; c < av.cols(); ++c) out(c, r) = av(r, c);
  }
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  for (std::size_t r = 0; r < ga.rows(); ++r) {
                    for (std::size_t c = 0; c < ga.cols(); ++c) ga(r, c) += g(c, r);
                  }
                },
                "transpose");
}

// a / max(sum(a), floor). Sets *floored when the floor was applied.
template <typename T>
Var<T> Normalize(Var<T> a, T floor, bool* floored = nullptr) {
  Tape<T>& t = ops_internal::TapeOf(a);
  const Array<T>& av = a.value();
  T s = T(0);
  for (T v : av.values()) s += v;
  const bool clamp = !(s > floor);
  if (floored) *floored = clamp;
  const T denom = clamp ? floor : s;
  Array<T> out(av.shape());
  for (std::size_t i = 0; i < av.size(); ++i) out[i] = av[i] / denom;
  const int ia = a.id;
  return t.Push(std::move(out), t.NeedsGrad(ia),
                [ia, denom, clamp](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  const Array<T>& y = tp.ValueOf(self);
                  Array<T>& ga = tp.GradRef(ia);
                  T dot = T(0);
                  if (!clamp) {
                    for (std::size_t i = 0; i < g.size(); ++i) dot += g[i] * y[i];
                  }
                  for (std::size_t i = 0; i < g.size(); ++i) ga[i] += (g[i] - dot) / denom;
                },
                "normalize");
}

// Rows of `table` selected by `indices` -> k x cols. Embedding lookup.
template <typename T>
Var<T> GatherRows(Var<T> table, std::span<const int> indices) {
  Tape<T>& t = ops_internal::TapeOf(table);
  const Array<T>& tv = table.value();
  if (indices.empty()) throw ContractError("gather of zero rows");
  Array<T> out(indices.size(), tv.cols());
  for (std::size_t k = 0; k < indices.size(); ++k) {
    const int r = indices[k];
    if (r < 0 || static_cast<std::size_t>(r) >= tv.rows()) {
      throw DimensionError("gather index " + std::to_string(r) + " outside table of " +
                           std::to_string(tv.rows()) + " rows");
    }
    std::copy_n(tv.data() + r * tv.cols(), tv.cols(), out.data() + k * tv.cols());
  }
  std::vector<int> idx(indices.begin(), indices.end());
  const int it = table.id;
  return t.Push(std::move(out), t.NeedsGrad(it),
                [it, idx = std::move(idx)](Tape<T>& tp, int self) {
                  const Array<T>& g = tp.GradOf(self);
                  Array<T>& gt = tp.GradRef(it);
                  for (std::size_t k = 0; k < idx.size(); ++k) {
                    for (std::size_t c = 0; c < g.cols(); ++c) gt(idx[k], c) += g(k, c);
                  }
                },
                "gather_rows");
}

template <typename T>
struct LstmState {
  Var<T> h;
  Var<T> c;
};

template <typename T>
struct LstmWeights {
  Var<T> input;      // din x 4dh
  Var<T> recurrent;  // dh x 4dh
  Var<T> bias;       // 1 x 4dh
};

// One LSTM cell step. Gate blocks in the 4dh axis are ordered
// input, forget, candidate, output.
template <typename T>
LstmState<T> LstmStep(Var<T> x, LstmState<T> prev, const LstmWeights<T>& w) {
  Tape<T>& t = ops_internal::TapeOf(x);
  const Array<T>& xv = x.value();
  const Array<T>& hv = prev.h.value();
  const Array<T>& cv = prev.c.value();
  const Array<T>& wx = w.input.value();
  const Array<T>& wh = w.recurrent.value();
  const Array<T>& bv = w.bias.value();
  const std::size_t dh = hv.cols();
  if (xv.rows() != 1 || hv.rows() != 1 || cv.shape() != hv.shape() ||
      wx.rows() != xv.cols() || wx.cols() != 4 * dh || wh.rows() != dh ||
      wh.cols() != 4 * dh || bv.rows() != 1 || bv.cols() != 4 * dh) {
    throw DimensionError("lstm_step: inconsistent shapes x" + xv.shape().ToString() +
                         " h" + hv.shape().ToString() + " Wx" + wx.shape().ToString() +
                         " Wh" + wh.shape().ToString() + " b" + bv.shape().ToString());
  }
  Array<T> z = bv;
  GemmAccumulate(xv, wx, z);
  GemmAccumulate(hv, wh, z);
  // packed = [h', c', i, f, g, o]
  Array<T> packed(1, 6 * dh);
  for (std::size_t k = 0; k < dh; ++k) {
    const T ig = SigmoidScalar(z[k]);
    const T fg = SigmoidScalar(z[dh + k]);
    const T gg = std::tanh(z[2 * dh + k]);
    const T og = SigmoidScalar(z[3 * dh + k]);
    const T c2 = fg * cv[k] + ig * gg;
    packed[k] = og * std::tanh(c2);
    packed[dh + k] = c2;
    packed[2 * dh + k] = ig;
    packed[3 * dh + k] = fg;
    packed[4 * dh + k] = gg;
    packed[5 * dh + k] = og;
  }
  const int ix = x.id, ih = prev.h.id, ic = prev.c.id;
  const int iwx = w.input.id, iwh = w.recurrent.id, ib = w.bias.id;
  const bool needs = t.NeedsGrad(ix) || t.NeedsGrad(ih) || t.NeedsGrad(ic) ||
                     t.NeedsGrad(iwx) || t.NeedsGrad(iwh) || t.NeedsGrad(ib);
  Var<T> node = t.Push(
      std::move(packed), needs,
      [=](Tape<T>& tp, int self) {
        const Array<T>& g = tp.GradOf(self);
        const Array<T>& p = tp.ValueOf(self);
        const Array<T>& c_prev = tp.ValueOf(ic);
        Array<T> dz(1, 4 * dh);
        for (std::size_t k = 0; k < dh; ++k) {
          const T c2 = p[dh + k], ig = p[2 * dh + k], fg = p[3 * dh + k];
          const T gg = p[4 * dh + k], og = p[5 * dh + k];
          const T tc = std::tanh(c2);
          const T dhn = g[k];
          const T dc = g[dh + k] + dhn * og * (T(1) - tc * tc);
          dz[k] = dc * gg * ig * (T(1) - ig);
          dz[dh + k] = dc * c_prev[k] * fg * (T(1) - fg);
          dz[2 * dh + k] = dc * ig * (T(1) - gg * gg);
          dz[3 * dh + k] = dhn * tc * og * (T(1) - og);
          if (tp.NeedsGrad(ic)) tp.GradRef(ic)[k] += dc * fg;
        }
        if (tp.NeedsGrad(ix)) GemmTransBAccumulate(dz, tp.ValueOf(iwx), tp.GradRef(ix));
        if (tp.NeedsGrad(ih)) GemmTransBAccumulate(dz, tp.ValueOf(iwh), tp.GradRef(ih));
        if (tp.NeedsGrad(iwx)) GemmTransAAccumulate(tp.ValueOf(ix), dz, tp.GradRef(iwx));
        if (tp.NeedsGrad(iwh)) GemmTransAAccumulate(tp.ValueOf(ih), dz, tp.GradRef(iwh));
        if (tp.NeedsGrad(ib)) {
          Array<T>& gb = tp.GradRef(ib);
          for (std::size_t k = 0; k < 4 * dh; ++k) gb[k] += dz[k];
        }
      },
      "lstm_step");
  return {SliceCols(node, 0, dh), SliceCols(node, dh, dh)};
}

}  // namespace gst
