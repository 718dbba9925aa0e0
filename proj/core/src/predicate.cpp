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

#include "labeltree/predicate.hpp"

#include <algorithm>
#include <cctype>

namespace labeltree {

Predicate Predicate::label(LabelId label) {
  Predicate p;
  p.kind_ = Kind::kLabel;
  p.label_ = label;
  return p;
}

Predicate Predicate::all_of(std::vector<Predicate> operands) {
  if (operands.empty()) throw PredicateError("empty conjunction");
  if (operands.size() == 1) return std::move(operands.front());
  Predicate p;
  p.kind_ = Kind::kAnd;
  for (auto& op : operands) {
    if (op.kind_ == Kind::kAnd) {
      for (auto& inner : op.operands_) p.operands_.push_back(std::move(inner));
    } else {
      p.operands_.push_back(std::move(op));
    }
  }
  return p;
}

Predicate Predicate::any_of(std::vector<Predicate> operands) {
  if (operands.empty()) throw PredicateError("empty disjunction");
  if (operands.size() == 1) return std::move(operands.front());
  Predicate p;
  p.kind_ = Kind::kOr;
  for (auto& op : operands) {
    if (op.kind_ == Kind::kOr) {
      for (auto& inner : op.operands_) p.operands_.push_back(std::move(inner));
    } else {
      p.operands_.push_back(std::move(op));
    }
  }
  return p;
}

Predicate Predicate::negate(Predicate operand) {
  Predicate p;
  p.kind_ = Kind::kNot;
  p.operands_.push_back(std::move(operand));
  return p;
}

bool Predicate::bounded() const {
  switch (kind_) {
    case Kind::kLabel: return true;
    case Kind::kNot: return false;
    case Kind::kOr:
      return std::all_of(operands_.begin(), operands_.end(), [](const Predicate& p) { return p.bounded(); });
    case Kind::kAnd:
      return std::any_of(operands_.begin(), operands_.end(), [](const Predicate& p) { return p.bounded(); });
  }
  return false;
}

void Predicate::validate() const {
  if (!bounded()) {
    throw PredicateError("predicate '" + to_string() +
                         "' is unbounded: every negation needs a conjunction with a positive label");
  }
}

bool Predicate::matches(const LabelSet& labels) const {
  switch (kind_) {
    case Kind::kLabel: return std::binary_search(labels.begin(), labels.end(), label_);
    case Kind::kNot: return !operands_.front().matches(labels);
    case Kind::kAnd:
      for (const auto& op : operands_) {
        if (!op.matches(labels)) return false;
      }
      return true;
    case Kind::kOr:
      for (const auto& op : operands_) {
        if (op.matches(labels)) return true;
      }
      return false;
  }
  return false;
}

std::vector<LabelId> Predicate::referenced_labels() const {
  std::vector<LabelId> out;
  std::vector<const Predicate*> stack{this};
  while (!stack.empty()) {
    const Predicate* p = stack.back();
    stack.pop_back();
    if (p->kind_ == Kind::kLabel) out.push_back(p->label_);
    for (const auto& op : p->operands_) stack.push_back(&op);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

std::string Predicate::to_string() const {
  switch (kind_) {
    case Kind::kLabel: return std::to_string(label_);
    case Kind::kNot: return "!" + operands_.front().to_string();
    case Kind::kAnd:
    case Kind::kOr: {
      std::string out = "(";
      for (std::size_t i = 0; i < operands_.size(); ++i) {
        if (i) out += kind_ == Kind::kAnd ? " & " : " | ";
        out += operands_[i].to_string();
      }
      return out + ")";
    }
  }
  return {};
}

std::string Predicate::normalized() const {
  switch (kind_) {
    case Kind::kLabel: return std::to_string(label_);
    case Kind::kNot: return "!" + operands_.front().normalized();
    case Kind::kAnd:
    case Kind::kOr: {
      std::vector<std::string> parts;
      for (const auto& op : operands_) parts.push_back(op.normalized());
      std::sort(parts.begin(), parts.end());
      parts.erase(std::unique(parts.begin(), parts.end()), parts.end());
      if (parts.size() == 1) return parts.front();
      std::string out = "(";
      for (std::size_t i = 0; i < parts.size(); ++i) {
        if (i) out += kind_ == Kind::kAnd ? "&" : "|";
        out += parts[i];
      }
      return out + ")";
    }
  }
  return {};
}

namespace {

class Parser {
 public:
  explicit Parser(std::string_view text) : text_(text) {}

  Predicate parse() {
    Predicate p = parse_or();
    skip_space();
    if (pos_ != text_.size()) fail("unexpected '" + std::string(1, text_[pos_]) + "'");
    return p;
  }

 private:
  Predicate parse_or() {
    std::vector<Predicate> ops{parse_and()};
    while (accept('|')) ops.push_back(parse_and());
    return Predicate::any_of(std::move(ops));
  }

  Predicate parse_and() {
    std::vector<Predicate> ops{parse_unary()};
    while (accept('&')) ops.push_back(parse_unary());
    return Predicate::all_of(std::move(ops));
  }

  Predicate parse_unary() {
    if (accept('!')) return Predicate::negate(parse_unary());
    if (accept('(')) {
      Predicate p = parse_or();
      if (!accept(')')) fail("expected ')'");
      return p;
    }
    skip_space();
    const std::size_t start = pos_;
    std::uint64_t value = 0;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
      value = value * 10 + static_cast<std::uint64_t>(text_[pos_] - '0');
      if (value > 0xFFFFFFFFull) fail("label out of range");
      ++pos_;
    }
    if (pos_ == start) {
      fail(pos_ < text_.size() ? "unexpected '" + std::string(1, text_[pos_]) + "'" : "unexpected end of input");
    }
    return Predicate::label(static_cast<LabelId>(value));
  }

  bool accept(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  [[noreturn]] void fail(const std::string& what) const {
    throw PredicateError("predicate parse error at offset " + std::to_string(pos_) + ": " + what);
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

}  // namespace

Predicate Predicate::parse(std::string_view text) {
  Predicate p = Parser(text).parse();
  p.validate();
  return p;
}

}  // namespace labeltree
