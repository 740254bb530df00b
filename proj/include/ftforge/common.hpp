/*
 * Copyright 2026 The ftforge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// @file common.hpp
/// Errors, validation reports and naming helpers shared by all modules.

#pragma once

#include <algorithm>
#include <cctype>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

namespace ftforge {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed activity source. Carries a 1-based position.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(std::to_string(line) + ":" + std::to_string(column) + ": " +
              msg),
        line_(line),
        column_(column) {}

  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

/// The model cannot be decomposed into paired, properly nested regions.
class StructureError : public Error {
 public:
  StructureError(const std::string& msg, std::string element_id)
      : Error(msg), element_id_(std::move(element_id)) {}

  const std::string& element_id() const { return element_id_; }

 private:
  std::string element_id_;
};

/// Invalid or incomplete user input other than syntax (probabilities, JSON).
class InputError : public Error {
 public:
  using Error::Error;
};

/// Exhaustive enumeration would exceed the configured size limit.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// One broken rule found by a validator.
struct Violation {
  std::string code;
  std::string message;
  std::string element_id;

  bool operator==(const Violation&) const = default;
};

/// Validators never throw on bad input; they collect violations here.
struct ValidationReport {
  std::vector<Violation> violations;

  bool ok() const { return violations.empty(); }

  bool has(std::string_view code) const {
    return std::any_of(violations.begin(), violations.end(),
                       [code](const Violation& v) { return v.code == code; });
  }

  void add(std::string code, std::string message, std::string element_id) {
    violations.push_back(
        {std::move(code), std::move(message), std::move(element_id)});
  }

  nlohmann::json to_json() const {
    nlohmann::json out = nlohmann::json::array();
    for (const Violation& v : violations) {
      out.push_back(
          {{"code", v.code}, {"message", v.message}, {"element_id", v.element_id}});
    }
    return out;
  }
};

/// Orders identifiers so that embedded numbers compare by value
/// ("a9" < "a10").
inline bool natural_less(std::string_view lhs, std::string_view rhs) {
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < lhs.size() && j < rhs.size()) {
    const bool ldigit = std::isdigit(static_cast<unsigned char>(lhs[i]));
    const bool rdigit = std::isdigit(static_cast<unsigned char>(rhs[j]));
    if (ldigit && rdigit) {
      std::size_t ie = i;
      std::size_t je = j;
      while (ie < lhs.size() && std::isdigit(static_cast<unsigned char>(lhs[ie])))
        ++ie;
      while (je < rhs.size() && std::isdigit(static_cast<unsigned char>(rhs[je])))
        ++je;
      std::string_view lnum = lhs.substr(i, ie - i);
      std::string_view rnum = rhs.substr(j, je - j);
      while (lnum.size() > 1 && lnum.front() == '0') lnum.remove_prefix(1);
      while (rnum.size() > 1 && rnum.front() == '0') rnum.remove_prefix(1);
      if (lnum.size() != rnum.size()) return lnum.size() < rnum.size();
      if (lnum != rnum) return lnum < rnum;
      i = ie;
      j = je;
      continue;
    }
    if (lhs[i] != rhs[j]) return lhs[i] < rhs[j];
    ++i;
    ++j;
  }
  if ((lhs.size() - i) != (rhs.size() - j)) return (lhs.size() - i) < (rhs.size() - j);
  return lhs < rhs;
}

inline void natural_sort(std::vector<std::string>& ids) {
  std::sort(ids.begin(), ids.end(),
            [](const std::string& a, const std::string& b) {
              return natural_less(a, b);
            });
}

/// Index shared by an action, its proposition and its fault event:
/// "A1" -> "1", "Ai" -> "i". Ids without the leading 'A' are used whole.
inline std::string action_index(std::string_view action_id) {
  if (action_id.size() > 1 && action_id.front() == 'A')
    return std::string(action_id.substr(1));
  return std::string(action_id);
}

inline std::string proposition_name(std::string_view action_id) {
  return "p" + action_index(action_id);
}

inline std::string fault_name(std::string_view action_id) {
  return "a" + action_index(action_id);
}

}  // namespace ftforge
