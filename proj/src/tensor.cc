/* Copyright (c) 2026 The evframe Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License. */


#include "evframe/tensor.h"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numeric>

#include "evframe/error.h"

namespace evframe {

namespace {
#ifdef NDEBUG
std::atomic<bool> g_finite_checks{false};
#else
std::atomic<bool> g_finite_checks{true};
#endif
}  // namespace

std::size_t ShapeSize(const Shape& shape) {
  return std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
}

std::string ShapeToString(const Shape& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += "x";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

Tensor::Tensor(Shape shape, double fill)
    : shape_(std::move(shape)), data_(ShapeSize(shape_), fill) {}

Tensor::Tensor(Shape shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  if (ShapeSize(shape_) != data_.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "shape " + ShapeToString(shape_) + " does not hold " +
                    std::to_string(data_.size()) + " values");
  }
}

Tensor Tensor::Reshaped(Shape shape) const {
  Tensor out = *this;
  out.Reshape(std::move(shape));
  return out;
}

void Tensor::Reshape(Shape shape) {
  if (ShapeSize(shape) != data_.size()) {
    throw Error(ErrorKind::kShapeMismatch,
                "cannot reshape " + ShapeToString(shape_) + " to " + ShapeToString(shape));
  }
  shape_ = std::move(shape);
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

void Tensor::RequireShape(const Shape& expected, const char* what) const {
  if (shape_ != expected) {
    throw Error(ErrorKind::kShapeMismatch, std::string(what) + ": expected " +
                                               ShapeToString(expected) + ", got " +
                                               ShapeToString(shape_));
  }
}

void Tensor::RequireRank(std::size_t rank, const char* what) const {
  if (shape_.size() != rank) {
    throw Error(ErrorKind::kShapeMismatch, std::string(what) + ": expected rank " +
                                               std::to_string(rank) + ", got " +
                                               ShapeToString(shape_));
  }
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

double Tensor::Sum() const { return std::accumulate(data_.begin(), data_.end(), 0.0); }

double Tensor::MaxValue() const {
  if (data_.empty()) return -std::numeric_limits<double>::infinity();
  return *std::max_element(data_.begin(), data_.end());
}

Tensor& Tensor::operator+=(const Tensor& other) {
  RequireShape(other.shape_, "tensor add");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
  return *this;
}

Tensor& Tensor::operator*=(double scale) {
  for (double& v : data_) v *= scale;
  return *this;
}

void SetFiniteChecks(bool enabled) { g_finite_checks = enabled; }
bool FiniteChecksEnabled() { return g_finite_checks; }

void CheckFinite(const Tensor& t, const char* where) {
  if (g_finite_checks && !t.AllFinite()) {
    throw Error(ErrorKind::kInvalidArgument, std::string("non-finite value produced by ") + where);
  }
}

}  // namespace evframe
