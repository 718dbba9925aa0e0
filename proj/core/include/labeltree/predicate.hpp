// Copyright 2026 The labeltree Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "labeltree/common.hpp"

namespace labeltree {

class PredicateError : public Error {
 public:
  using Error::Error;
};

/// Boolean expression over label membership.
///
/// Text form: integer labels combined with `!` (not), `&` (and), `|` (or) and
/// parentheses, in decreasing precedence, e.g. "(3 & 7) | !4 & 3".
///
/// A negation has no universe of its own: it is evaluated relative to the
/// enclosing conjunction's other operands. An expression is *bounded* when
/// its result is confined to vectors carrying one of its positive labels:
/// labels are bounded, an Or is bounded if every operand is, an And if any
/// operand is. Only bounded predicates are accepted, so a bare `!4` or
/// `!4 | 3` is rejected at parse time.
class Predicate {
 public:
  enum class Kind { kLabel, kAnd, kOr, kNot };

  static Predicate label(LabelId label);
  static Predicate all_of(std::vector<Predicate> operands);
  static Predicate any_of(std::vector<Predicate> operands);
  static Predicate negate(Predicate operand);

  /// Throws PredicateError on syntax errors or unbounded expressions.
  static Predicate parse(std::string_view text);

  Kind kind() const { return kind_; }
  LabelId label_id() const { return label_; }
  const std::vector<Predicate>& operands() const { return operands_; }

  bool bounded() const;
  /// Throws PredicateError unless bounded().
  void validate() const;

  /// Direct evaluation against one vector's label set.
  bool matches(const LabelSet& labels) const;

  /// Positive and negated labels referenced anywhere in the expression.
  std::vector<LabelId> referenced_labels() const;

  std::string to_string() const;
  /// Canonical text with commutative operands sorted and deduplicated; equal
  /// for predicates that differ only in operand order.
  std::string normalized() const;

 private:
  Kind kind_ = Kind::kLabel;
  LabelId label_ = 0;
  std::vector<Predicate> operands_;
};

}  // namespace labeltree
