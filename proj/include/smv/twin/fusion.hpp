// Copyright 2026 The smv Authors
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

#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "smv/otbus/asset_id.hpp"

namespace smv::twin {

/// Compiled boolean/arithmetic expression over named inputs.
///
///   or   := and (OR and)*          and  := not (AND not)*
///   not  := NOT not | cmp          cmp  := sum ((<|<=|>|>=|==|!=) sum)?
///   sum  := prod ((+|-) prod)*     prod := unary ((*|/) unary)*
///   unary:= - unary | atom         atom := number | true | false | name | ( or )
///
/// Keywords are case-insensitive; && || ! are accepted as well. Truth values
/// are 1 and 0; any non-zero number is true.
class Expression {
 public:
  /// Throws ParseError, including for names not in `names` (when non-empty).
  static Expression parse(std::string_view text, const std::vector<std::string>& names = {});

  /// Throws InsufficientHistory if a referenced name has no value.
  double evaluate(const std::map<std::string, double>& values) const;
  bool test(const std::map<std::string, double>& values) const { return evaluate(values) != 0.0; }

  const std::string& text() const noexcept { return text_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  struct Node;

 private:
  std::string text_;
  std::vector<std::string> names_;
  std::shared_ptr<const Node> root_;
};

struct ZScoreResult {
  double z = 0;
  bool flagged = false;
};

/// z = (x - mean) / stddev over the trailing `window_n` values of `history`
/// (x itself excluded), population standard deviation. A zero deviation
/// yields z = 0. flagged = |z| > k. Throws InsufficientHistory when history
/// holds fewer than window_n values, InvalidArgument when window_n < 3.
ZScoreResult zscore(std::span<const double> history, double x, std::size_t window_n, double k);

struct FusionInput {
  std::string alias;
  AssetId asset;
  std::string variable;
};

struct ThresholdRule {
  Expression expr;
};

struct ZScoreRule {
  std::size_t window_n = 10;
  double k = 3;
};

struct FusionRule {
  std::string rule_id;
  std::vector<FusionInput> inputs;
  std::variant<ThresholdRule, ZScoreRule> kind;
  AssetId target;
  std::string output;

  /// inputs >= 1 (exactly 1 for ZScore), unique aliases, windowN >= 3, k > 0. Throws InvalidArgument.
  void validate() const;
};

/// {"ruleId", "inputs": [{"alias", "assetId", "variable"}],
///  "threshold": "a > 100 AND b > 5" | "zscore": {"windowN", "k"},
///  "output": {"assetId", "variable"}}
FusionRule rule_from_json(const nlohmann::json& j);
nlohmann::json to_json(const FusionRule& r);

}  // namespace smv::twin
