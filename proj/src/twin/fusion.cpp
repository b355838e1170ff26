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

#include "smv/twin/fusion.hpp"

#include <cctype>
#include <cmath>
#include <set>

#include "smv/common/error.hpp"
#include "smv/common/exact_sum.hpp"

namespace smv::twin {

struct Expression::Node {
  enum Kind { Num, Var, Neg, Not, Add, Sub, Mul, Div, Lt, Le, Gt, Ge, Eq, Ne, And, Or } kind;
  double num = 0;
  std::string name;
  std::shared_ptr<const Node> l, r;
};

namespace {

using Node = Expression::Node;
using NodeP = std::shared_ptr<const Node>;

NodeP make(Node::Kind k, NodeP l = nullptr, NodeP r = nullptr) {
  auto n = std::make_shared<Node>();
  n->kind = k;
  n->l = std::move(l);
  n->r = std::move(r);
  return n;
}

class Parser {
 public:
  Parser(std::string_view text, const std::vector<std::string>& allowed) : s_(text), allowed_(allowed) {}

  NodeP parse() {
    auto n = parse_or();
    skip_ws();
    if (pos_ != s_.size()) error("unexpected '" + std::string(s_.substr(pos_, 1)) + "'");
    return n;
  }

  std::vector<std::string> names;

 private:
  [[noreturn]] void error(const std::string& what) {
    fail(Errc::ParseError, what + " at offset " + std::to_string(pos_) + " in '" + std::string(s_) + "'");
  }

  void skip_ws() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
  }

  static bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.'; }

  // Matches a case-insensitive keyword not followed by an identifier character.
  bool keyword(std::string_view kw) {
    skip_ws();
    if (s_.size() - pos_ < kw.size()) return false;
    for (std::size_t i = 0; i < kw.size(); ++i)
      if (std::toupper(static_cast<unsigned char>(s_[pos_ + i])) != kw[i]) return false;
    if (pos_ + kw.size() < s_.size() && ident_char(s_[pos_ + kw.size()])) return false;
    pos_ += kw.size();
    return true;
  }

  bool symbol(std::string_view sym) {
    skip_ws();
    if (s_.substr(pos_, sym.size()) != sym) return false;
    pos_ += sym.size();
    return true;
  }

  NodeP parse_or() {
    auto l = parse_and();
    while (keyword("OR") || symbol("||")) l = make(Node::Or, l, parse_and());
    return l;
  }

  NodeP parse_and() {
    auto l = parse_not();
    while (keyword("AND") || symbol("&&")) l = make(Node::And, l, parse_not());
    return l;
  }

  NodeP parse_not() {
    skip_ws();
    if (keyword("NOT")) return make(Node::Not, parse_not());
    if (s_.substr(pos_, 1) == "!" && s_.substr(pos_, 2) != "!=") {
      ++pos_;
      return make(Node::Not, parse_not());
    }
    return parse_cmp();
  }

  NodeP parse_cmp() {
    auto l = parse_sum();
    static constexpr std::pair<std::string_view, Node::Kind> kOps[] = {
        {"<=", Node::Le}, {">=", Node::Ge}, {"==", Node::Eq}, {"!=", Node::Ne}, {"<", Node::Lt}, {">", Node::Gt}};
    for (auto [sym, kind] : kOps)
      if (symbol(sym)) return make(kind, l, parse_sum());
    return l;
  }

  NodeP parse_sum() {
    auto l = parse_prod();
    for (;;) {
      if (symbol("+"))
        l = make(Node::Add, l, parse_prod());
      else if (symbol("-"))
        l = make(Node::Sub, l, parse_prod());
      else
        return l;
    }
  }

  NodeP parse_prod() {
    auto l = parse_unary();
    for (;;) {
      if (symbol("*"))
        l = make(Node::Mul, l, parse_unary());
      else if (symbol("/"))
        l = make(Node::Div, l, parse_unary());
      else
        return l;
    }
  }

  NodeP parse_unary() {
    if (symbol("-")) return make(Node::Neg, parse_unary());
    return parse_atom();
  }

  NodeP parse_atom() {
    skip_ws();
    if (pos_ == s_.size()) error("unexpected end of expression");
    if (symbol("(")) {
      auto n = parse_or();
      if (!symbol(")")) error("expected ')'");
      return n;
    }
    for (auto [kw, v] : {std::pair{"TRUE", 1.0}, std::pair{"FALSE", 0.0}}) {
      if (!keyword(kw)) continue;
      auto n = std::make_shared<Node>();
      n->kind = Node::Num;
      n->num = v;
      return n;
    }
    const char c = s_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      const std::string rest(s_.substr(pos_));
      std::size_t used = 0;
      double v;
      try {
        v = std::stod(rest, &used);
      } catch (const std::exception&) {
        error("bad number");
      }
      pos_ += used;
      auto n = std::make_shared<Node>();
      n->kind = Node::Num;
      n->num = v;
      return n;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      const std::size_t start = pos_;
      while (pos_ < s_.size() && ident_char(s_[pos_])) ++pos_;
      auto n = std::make_shared<Node>();
      n->kind = Node::Var;
      n->name = std::string(s_.substr(start, pos_ - start));
      if (!allowed_.empty() && std::find(allowed_.begin(), allowed_.end(), n->name) == allowed_.end())
        error("unknown input '" + n->name + "'");
      if (std::find(names.begin(), names.end(), n->name) == names.end()) names.push_back(n->name);
      return n;
    }
    error("unexpected '" + std::string(1, c) + "'");
  }

  std::string_view s_;
  const std::vector<std::string>& allowed_;
  std::size_t pos_ = 0;
};

double eval(const Node& n, const std::map<std::string, double>& v) {
  auto b = [](double x) { return x != 0.0; };
  switch (n.kind) {
    case Node::Num: return n.num;
    case Node::Var: {
      auto it = v.find(n.name);
      if (it == v.end()) fail(Errc::InsufficientHistory, "no value for input '" + n.name + "'");
      return it->second;
    }
    case Node::Neg: return -eval(*n.l, v);
    case Node::Not: return b(eval(*n.l, v)) ? 0.0 : 1.0;
    case Node::Add: return eval(*n.l, v) + eval(*n.r, v);
    case Node::Sub: return eval(*n.l, v) - eval(*n.r, v);
    case Node::Mul: return eval(*n.l, v) * eval(*n.r, v);
    case Node::Div: return eval(*n.l, v) / eval(*n.r, v);
    case Node::Lt: return eval(*n.l, v) < eval(*n.r, v);
    case Node::Le: return eval(*n.l, v) <= eval(*n.r, v);
    case Node::Gt: return eval(*n.l, v) > eval(*n.r, v);
    case Node::Ge: return eval(*n.l, v) >= eval(*n.r, v);
    case Node::Eq: return eval(*n.l, v) == eval(*n.r, v);
    case Node::Ne: return eval(*n.l, v) != eval(*n.r, v);
    case Node::And: return b(eval(*n.l, v)) && b(eval(*n.r, v));
    case Node::Or: return b(eval(*n.l, v)) || b(eval(*n.r, v));
  }
  return 0;
}

}  // namespace

Expression Expression::parse(std::string_view text, const std::vector<std::string>& names) {
  Parser p(text, names);
  Expression e;
  e.root_ = p.parse();
  e.text_ = std::string(text);
  e.names_ = std::move(p.names);
  return e;
}

double Expression::evaluate(const std::map<std::string, double>& values) const { return eval(*root_, values); }

ZScoreResult zscore(std::span<const double> history, double x, std::size_t window_n, double k) {
  if (window_n < 3) fail(Errc::InvalidArgument, "zscore window must hold at least 3 values");
  if (history.size() < window_n)
    fail(Errc::InsufficientHistory, "zscore needs " + std::to_string(window_n) + " prior values, have " +
                                        std::to_string(history.size()));
  auto w = history.last(window_n);
  ExactSum s;
  for (double v : w) s.add(v);
  const double mean = s.value() / static_cast<double>(window_n);
  ExactSum sq;
  for (double v : w) sq.add((v - mean) * (v - mean));
  const double sd = std::sqrt(sq.value() / static_cast<double>(window_n));
  ZScoreResult r;
  r.z = sd == 0.0 ? 0.0 : (x - mean) / sd;
  r.flagged = std::fabs(r.z) > k;
  return r;
}

void FusionRule::validate() const {
  if (rule_id.empty()) fail(Errc::InvalidArgument, "fusion rule without ruleId");
  if (inputs.empty()) fail(Errc::InvalidArgument, "fusion rule " + rule_id + " has no inputs");
  if (output.empty()) fail(Errc::InvalidArgument, "fusion rule " + rule_id + " has no output variable");
  std::set<std::string> aliases;
  for (const auto& in : inputs)
    if (!aliases.insert(in.alias).second) fail(Errc::InvalidArgument, "duplicate alias '" + in.alias + "'");
  if (auto* z = std::get_if<ZScoreRule>(&kind)) {
    if (inputs.size() != 1) fail(Errc::InvalidArgument, "zscore rule " + rule_id + " takes exactly one input");
    if (z->window_n < 3) fail(Errc::InvalidArgument, "zscore windowN must be >= 3");
    if (!(z->k > 0)) fail(Errc::InvalidArgument, "zscore k must be > 0");
  }
  if (auto* t = std::get_if<ThresholdRule>(&kind))
    for (const auto& n : t->expr.names())
      if (!aliases.contains(n)) fail(Errc::InvalidArgument, "expression uses unknown input '" + n + "'");
}

FusionRule rule_from_json(const nlohmann::json& j) {
  FusionRule r;
  try {
    r.rule_id = j.at("ruleId").get<std::string>();
    std::vector<std::string> aliases;
    for (const auto& in : j.at("inputs")) {
      FusionInput fi;
      fi.asset = AssetId::parse(in.at("assetId").get<std::string>());
      fi.variable = in.at("variable").get<std::string>();
      fi.alias = in.value("alias", fi.variable);
      aliases.push_back(fi.alias);
      r.inputs.push_back(std::move(fi));
    }
    if (j.contains("threshold")) {
      r.kind = ThresholdRule{Expression::parse(j.at("threshold").get<std::string>(), aliases)};
    } else if (j.contains("zscore")) {
      const auto& z = j.at("zscore");
      r.kind = ZScoreRule{z.value("windowN", std::size_t{10}), z.value("k", 3.0)};
    } else {
      fail(Errc::InvalidArgument, "fusion rule " + r.rule_id + " needs 'threshold' or 'zscore'");
    }
    const auto& out = j.at("output");
    r.target = AssetId::parse(out.at("assetId").get<std::string>());
    r.output = out.at("variable").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    fail(Errc::InvalidArgument, std::string("fusion rule: ") + e.what());
  }
  r.validate();
  return r;
}

nlohmann::json to_json(const FusionRule& r) {
  nlohmann::json j;
  j["ruleId"] = r.rule_id;
  j["inputs"] = nlohmann::json::array();
  for (const auto& in : r.inputs)
    j["inputs"].push_back({{"alias", in.alias}, {"assetId", in.asset.str()}, {"variable", in.variable}});
  if (auto* t = std::get_if<ThresholdRule>(&r.kind)) j["threshold"] = t->expr.text();
  if (auto* z = std::get_if<ZScoreRule>(&r.kind)) j["zscore"] = {{"windowN", z->window_n}, {"k", z->k}};
  j["output"] = {{"assetId", r.target.str()}, {"variable", r.output}};
  return j;
}

}  // namespace smv::twin
