#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "gst/autodiff/array.hpp"
#include "gst/error.hpp"

namespace gst {

// Named, shaped trainable arrays. Shapes are fixed at creation; values are
// mutated only by optimizers between forward/backward passes.
template <typename T>
class ParameterStore {
 public:
  ParameterStore() = default;
  explicit ParameterStore(std::uint64_t seed) : seed_(seed), rng_(seed) {}

  std::uint64_t seed() const { return seed_; }

  // Glorot-uniform weights: U(-a, a), a = sqrt(6 / (fan_in + fan_out)).
  std::size_t AddWeight(const std::string& name, Shape shape) {
    Array<T> value(shape);
    const double a = std::sqrt(6.0 / static_cast<double>(shape.rows + shape.cols));
    for (auto& v : value.values()) v = static_cast<T>((2.0 * Uniform() - 1.0) * a);
    return Add(name, std::move(value));
  }

  std::size_t AddZeros(const std::string& name, Shape shape) {
    return Add(name, Array<T>(shape));
  }

  std::size_t Add(const std::string& name, Array<T> value) {
    if (index_.count(name)) {
      throw ConfigError("duplicate parameter name '" + name + "'");
    }
    index_[name] = values_.size();
    names_.push_back(name);
    values_.push_back(std::move(value));
    return values_.size() - 1;
  }

  std::size_t size() const { return values_.size(); }
  bool Contains(const std::string& name) const { return index_.count(name) > 0; }

  std::size_t IndexOf(const std::string& name) const {
    auto it = index_.find(name);
    if (it == index_.end()) throw NotFoundError("no parameter named '" + name + "'");
    return it->second;
  }

  const std::string& Name(std::size_t i) const { return names_.at(i); }
  const Array<T>& Value(std::size_t i) const { return values_.at(i); }
  Array<T>& MutableValue(std::size_t i) { return values_.at(i); }
  const Array<T>& Value(const std::string& name) const { return Value(IndexOf(name)); }
  Array<T>& MutableValue(const std::string& name) { return MutableValue(IndexOf(name)); }

  std::size_t NumScalars() const {
    std::size_t n = 0;
    for (const auto& v : values_) n += v.size();
    return n;
  }

  bool operator==(const ParameterStore& o) const {
    return seed_ == o.seed_ && names_ == o.names_ && values_ == o.values_;
  }

 private:
  double Uniform() {
    return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t seed_ = 0;
  std::mt19937_64 rng_{0};
  std::map<std::string, std::size_t> index_;
  std::vector<std::string> names_;
  std::vector<Array<T>> values_;
};

// Gradient buffers aligned index-for-index with a ParameterStore.
template <typename T>
class Gradients {
 public:
  Gradients() = default;
  explicit Gradients(const ParameterStore<T>& store) {
    grads_.reserve(store.size());
    for (std::size_t i = 0; i < store.size(); ++i) {
      grads_.emplace_back(store.Value(i).shape());
    }
  }

  std::size_t size() const { return grads_.size(); }
  Array<T>& operator[](std::size_t i) { return grads_[i]; }
  const Array<T>& operator[](std::size_t i) const { return grads_[i]; }

  void Zero() {
    for (auto& g : grads_) g.Fill(T(0));
  }

  void Add(const Gradients& other) {
    for (std::size_t i = 0; i < grads_.size(); ++i) {
      auto& a = grads_[i].values();
      const auto& b = other.grads_[i].values();
      for (std::size_t k = 0; k < a.size(); ++k) a[k] += b[k];
    }
  }

  void Scale(T s) {
    for (auto& g : grads_) {
      for (auto& v : g.values()) v *= s;
    }
  }

  bool AllZero() const {
    for (const auto& g : grads_) {
      for (T v : g.values()) {
        if (v != T(0)) return false;
      }
    }
    return true;
  }

 private:
  std::vector<Array<T>> grads_;
};

}  // namespace gst
