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


#pragma once

#include <set>
#include <string>
#include <vector>

#include "evframe/error.h"
#include "json.hpp"

namespace evframe {

// Strict field reader for one JSON object. Type errors and, on Finish(),
// unknown keys raise InvalidConfig naming the dotted field path.
class JsonObjectReader {
 public:
  JsonObjectReader(const nlohmann::json& object, std::string path)
      : object_(object), path_(std::move(path)) {
    if (!object_.is_object()) Fail(path_, "expected an object");
  }

  bool Has(const std::string& key) const { return object_.contains(key); }

  template <typename T>
  T Get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!object_.contains(key) || object_.at(key).is_null()) return fallback;
    return Convert<T>(key);
  }

  template <typename T>
  T Require(const std::string& key) {
    seen_.insert(key);
    if (!object_.contains(key)) Fail(Field(key), "required field is missing");
    return Convert<T>(key);
  }

  JsonObjectReader Child(const std::string& key) {
    seen_.insert(key);
    static const nlohmann::json kEmpty = nlohmann::json::object();
    return JsonObjectReader(object_.contains(key) ? object_.at(key) : kEmpty, Field(key));
  }

  void Finish() const {
    for (const auto& item : object_.items()) {
      if (!seen_.count(item.key())) Fail(Field(item.key()), "unknown key");
    }
  }

  std::string Field(const std::string& key) const {
    return path_.empty() ? key : path_ + "." + key;
  }

  [[noreturn]] static void Fail(const std::string& field, const std::string& message) {
    throw Error(ErrorKind::kInvalidConfig, field + ": " + message);
  }

 private:
  template <typename T>
  T Convert(const std::string& key) {
    const nlohmann::json& value = object_.at(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!value.is_number_unsigned()) Fail(Field(key), "expected a non-negative integer");
      } else if constexpr (std::is_same_v<T, std::vector<std::size_t>>) {
        if (!value.is_array()) Fail(Field(key), "expected an array");
        for (const auto& v : value) {
          if (!v.is_number_unsigned()) Fail(Field(key), "expected non-negative integers");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!value.is_boolean()) Fail(Field(key), "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!value.is_string()) Fail(Field(key), "expected a string");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!value.is_number()) Fail(Field(key), "expected a number");
      }
      return value.get<T>();
    } catch (const nlohmann::json::exception& e) {
      Fail(Field(key), e.what());
    }
  }

  const nlohmann::json& object_;
  std::string path_;
  std::set<std::string> seen_;
};

}  // namespace evframe
