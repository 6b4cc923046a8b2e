#include "fabric/governance.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <stdexcept>

#include "fabric/rng.hpp"

namespace fabric {

PredicateParseError::PredicateParseError(const std::string& what, std::size_t position)
    : std::runtime_error(what + " (at position " + std::to_string(position) + ")"),
      position_(position) {}

namespace {

struct Token {
  enum class Kind { word, number, str, op, lparen, rparen, end };
  Kind kind = Kind::end;
  std::string text;
  double number = 0.0;
  std::size_t pos = 0;
};

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) {}

  Token next() {
    while (at_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[at_]))) ++at_;
    Token t;
    t.pos = at_;
    if (at_ >= text_.size()) return t;
    char c = text_[at_];
    if (c == '(') {
      ++at_;
      t.kind = Token::Kind::lparen;
      return t;
    }
    if (c == ')') {
      ++at_;
      t.kind = Token::Kind::rparen;
      return t;
    }
    if (c == '\'' || c == '"') {
      char quote = c;
      std::size_t end = text_.find(quote, at_ + 1);
      if (end == std::string::npos)
        throw PredicateParseError("unterminated string literal", at_);
      t.kind = Token::Kind::str;
      t.text = text_.substr(at_ + 1, end - at_ - 1);
      at_ = end + 1;
      return t;
    }
    if (c == '=' || c == '!' || c == '<' || c == '>') {
      std::string op(1, c);
      ++at_;
      if (at_ < text_.size() && text_[at_] == '=') {
        op += '=';
        ++at_;
      }
      if (op == "!")
        throw PredicateParseError("expected '=' after '!'", t.pos);
      t.kind = Token::Kind::op;
      t.text = op;
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+') {
      std::size_t used = 0;
      try {
        t.number = std::stod(text_.substr(at_), &used);
      } catch (const std::exception&) {
        throw PredicateParseError("malformed number", at_);
      }
      t.kind = Token::Kind::number;
      at_ += used;
      return t;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      std::size_t start = at_;
      while (at_ < text_.size()) {
        char w = text_[at_];
        if (std::isalnum(static_cast<unsigned char>(w)) || w == '_' || w == '-' || w == '.')
          ++at_;
        else
          break;
      }
      t.kind = Token::Kind::word;
      t.text = text_.substr(start, at_ - start);
      return t;
    }
    throw PredicateParseError(std::string("unexpected character '") + c + "'", at_);
  }

 private:
  const std::string& text_;
  std::size_t at_ = 0;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lexer_(text) { advance(); }

  PredicatePtr parse() {
    PredicatePtr e = expr();
    if (cur_.kind != Token::Kind::end)
      throw PredicateParseError("trailing input after predicate", cur_.pos);
    return e;
  }

 private:
  void advance() { cur_ = lexer_.next(); }

  // expr := term (('and'|'or') term)*   -- flat precedence, left associative
  PredicatePtr expr() {
    PredicatePtr left = term();
    while (cur_.kind == Token::Kind::word && (cur_.text == "and" || cur_.text == "or")) {
      bool is_and = cur_.text == "and";
      advance();
      PredicatePtr right = term();
      auto node = std::make_shared<PredicateExpr>();
      node->node = is_and ? PredicateExpr::Node::and_op : PredicateExpr::Node::or_op;
      node->lhs = left;
      node->rhs = right;
      left = node;
    }
    return left;
  }

  // term := 'not'? atom
  PredicatePtr term() {
    if (cur_.kind == Token::Kind::word && cur_.text == "not") {
      advance();
      auto node = std::make_shared<PredicateExpr>();
      node->node = PredicateExpr::Node::not_op;
      node->lhs = atom();
      return node;
    }
    return atom();
  }

  // atom := field op literal | '(' expr ')'
  PredicatePtr atom() {
    if (cur_.kind == Token::Kind::lparen) {
      advance();
      PredicatePtr inner = expr();
      if (cur_.kind != Token::Kind::rparen)
        throw PredicateParseError("expected ')'", cur_.pos);
      advance();
      return inner;
    }
    if (cur_.kind != Token::Kind::word)
      throw PredicateParseError("expected a field reference", cur_.pos);
    std::size_t field_pos = cur_.pos;
    std::string ref = cur_.text;
    advance();

    auto dot = ref.find('.');
    if (dot == std::string::npos)
      throw PredicateParseError("field must be data.<name> or user.<name>", field_pos);
    std::string space = ref.substr(0, dot);
    std::string field = ref.substr(dot + 1);
    if (field.empty())
      throw PredicateParseError("field name missing after '.'", field_pos);
    auto node = std::make_shared<PredicateExpr>();
    node->node = PredicateExpr::Node::compare;
    if (space == "data")
      node->space = FieldSpace::data;
    else if (space == "user")
      node->space = FieldSpace::user;
    else
      throw PredicateParseError("unknown namespace '" + space + "'", field_pos);
    node->field = field;

    if (cur_.kind != Token::Kind::op)
      throw PredicateParseError("expected a comparison operator", cur_.pos);
    if (cur_.text == "=")
      node->op = CompareOp::eq;
    else if (cur_.text == "!=")
      node->op = CompareOp::ne;
    else if (cur_.text == "<")
      node->op = CompareOp::lt;
    else if (cur_.text == "<=")
      node->op = CompareOp::le;
    else if (cur_.text == ">")
      node->op = CompareOp::gt;
    else if (cur_.text == ">=")
      node->op = CompareOp::ge;
    else
      throw PredicateParseError("unknown operator '" + cur_.text + "'", cur_.pos);
    advance();

    if (cur_.kind == Token::Kind::number)
      node->literal = cur_.number;
    else if (cur_.kind == Token::Kind::str)
      node->literal = cur_.text;
    else if (cur_.kind == Token::Kind::word) {
      if (cur_.text == "and" || cur_.text == "or" || cur_.text == "not")
        throw PredicateParseError("keyword cannot be a literal", cur_.pos);
      node->literal = cur_.text;  // bare word literal
    } else {
      throw PredicateParseError("expected a literal", cur_.pos);
    }
    advance();
    return node;
  }

  Lexer lexer_;
  Token cur_;
};

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs,
                    const std::string& field) {
  const bool lhs_num = std::holds_alternative<double>(lhs);
  const bool rhs_num = std::holds_alternative<double>(rhs);
  if (lhs_num != rhs_num)
    throw PredicateEvalError("type mismatch comparing field '" + field + "'");
  if (!lhs_num && op != CompareOp::eq && op != CompareOp::ne)
    throw PredicateEvalError("ordering comparison on string field '" + field + "'");
  if (lhs_num) {
    double a = std::get<double>(lhs), b = std::get<double>(rhs);
    switch (op) {
      case CompareOp::eq: return a == b;
      case CompareOp::ne: return a != b;
      case CompareOp::lt: return a < b;
      case CompareOp::le: return a <= b;
      case CompareOp::gt: return a > b;
      case CompareOp::ge: return a >= b;
    }
  }
  const std::string& a = std::get<std::string>(lhs);
  const std::string& b = std::get<std::string>(rhs);
  return op == CompareOp::eq ? a == b : a != b;
}

Value user_field(const UserContext& user, const std::string& field) {
  if (field == "id") return user.id;
  if (field == "role") return user.role;
  if (field == "clearance") return user.clearance;
  if (field == "at") return user.at;
  throw PredicateEvalError("unknown user field '" + field + "'");
}

}  // namespace

PredicatePtr parse_predicate(const std::string& text) { return Parser(text).parse(); }

bool evaluate_predicate(const PredicateExpr& expr, const AttrValues& data,
                        const UserContext& user) {
  switch (expr.node) {
    case PredicateExpr::Node::and_op:
      return evaluate_predicate(*expr.lhs, data, user) &&
             evaluate_predicate(*expr.rhs, data, user);
    case PredicateExpr::Node::or_op:
      return evaluate_predicate(*expr.lhs, data, user) ||
             evaluate_predicate(*expr.rhs, data, user);
    case PredicateExpr::Node::not_op:
      return !evaluate_predicate(*expr.lhs, data, user);
    case PredicateExpr::Node::compare: {
      Value lhs;
      if (expr.space == FieldSpace::user) {
        lhs = user_field(user, expr.field);
      } else {
        auto it = data.find(expr.field);
        if (it == data.end())
          throw PredicateEvalError("unknown data field '" + expr.field + "'");
        lhs = it->second;
      }
      return compare_values(lhs, expr.op, expr.literal, expr.field);
    }
  }
  throw std::logic_error("unreachable predicate node");
}

Policy Policy::parse(std::string id, std::string text) {
  Policy p;
  p.id = std::move(id);
  p.predicate = parse_predicate(text);
  p.text = std::move(text);
  return p;
}

AccessDecision evaluate_request(const AttrValues& data, const UserContext& user,
                                const std::vector<Policy>& policies) {
  AccessDecision d;
  d.granted = true;
  for (const auto& p : policies) {
    if (!p.predicate) throw std::invalid_argument("policy '" + p.id + "' has no predicate");
    bool holds = false;
    try {
      holds = evaluate_predicate(*p.predicate, data, user);
    } catch (const PredicateEvalError&) {
      holds = false;  // unprovable policies deny (fail closed)
    }
    if (!holds) {
      d.granted = false;
      d.failing.push_back(p.id);
    }
  }
  std::sort(d.failing.begin(), d.failing.end());
  return d;
}

DpResult dp_aggregate(const std::vector<double>& values, double epsilon, double sensitivity,
                      std::uint64_t seed, AggregateKind kind) {
  if (values.empty()) throw std::invalid_argument("dp_aggregate needs at least one value");
  if (epsilon <= 0.0) throw std::invalid_argument("epsilon must be positive");
  if (sensitivity <= 0.0) throw std::invalid_argument("sensitivity must be positive");

  double total = 0.0;
  for (double v : values) total += v;
  DpResult r;
  r.true_value = kind == AggregateKind::sum ? total : total / static_cast<double>(values.size());
  r.scale = sensitivity / epsilon;

  // Inverse-CDF Laplace draw; u = -1/2 would need log(0), so skip it.
  Rng rng(seed);
  double u;
  do {
    u = rng.next_double() - 0.5;
  } while (1.0 - 2.0 * std::abs(u) <= 0.0);
  double sign = u < 0.0 ? -1.0 : 1.0;
  double noise = -r.scale * sign * std::log(1.0 - 2.0 * std::abs(u));
  r.noisy_value = r.true_value + noise;
  return r;
}

}  // namespace fabric
