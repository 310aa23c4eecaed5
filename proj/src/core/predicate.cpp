#include "ccep/core/predicate.hpp"

#include <cctype>
#include <cstdlib>

#include "ccep/core/error.hpp"

namespace ccep {

class PredicateParser {
 public:
  explicit PredicateParser(std::string_view src) : src_(src) {}

  Predicate::Node parse() {
    auto n = expr();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input");
    return n;
  }

 private:
  using Node = Predicate::Node;

  [[noreturn]] void fail(const std::string& what) const {
    throw DefinitionError("predicate '" + std::string(src_) + "': " + what + " at offset " +
                          std::to_string(pos_));
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool eat(std::string_view tok) {
    skip_ws();
    if (src_.substr(pos_, tok.size()) != tok) return false;
    // keywords must not run into an identifier
    if (std::isalpha(static_cast<unsigned char>(tok.front()))) {
      auto end = pos_ + tok.size();
      if (end < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[end])) || src_[end] == '_'))
        return false;
    }
    pos_ += tok.size();
    return true;
  }

  Node expr() {
    Node first = conj();
    if (!peek_or()) return first;
    Node n{Node::Kind::Or, {}, {}, CompareOp::Eq, {}};
    n.children.push_back(std::move(first));
    while (eat("||") || eat("or")) n.children.push_back(conj());
    return n;
  }

  bool peek_or() {
    auto save = pos_;
    bool r = eat("||") || eat("or");
    pos_ = save;
    return r;
  }

  bool peek_and() {
    auto save = pos_;
    bool r = eat("&&") || eat("and");
    pos_ = save;
    return r;
  }

  Node conj() {
    Node first = atom();
    if (!peek_and()) return first;
    Node n{Node::Kind::And, {}, {}, CompareOp::Eq, {}};
    n.children.push_back(std::move(first));
    while (eat("&&") || eat("and")) n.children.push_back(atom());
    return n;
  }

  Node atom() {
    if (eat("(")) {
      Node n = expr();
      if (!eat(")")) fail("expected ')'");
      return n;
    }
    Node n{Node::Kind::Compare, {}, identifier(), CompareOp::Eq, {}};
    n.op = comparison();
    n.literal = literal();
    return n;
  }

  std::string identifier() {
    skip_ws();
    auto start = pos_;
    if (pos_ < src_.size() && (std::isalpha(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
      ++pos_;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_' || src_[pos_] == '.'))
        ++pos_;
    }
    if (start == pos_) fail("expected attribute name");
    return std::string(src_.substr(start, pos_ - start));
  }

  CompareOp comparison() {
    if (eat("==")) return CompareOp::Eq;
    if (eat("!=")) return CompareOp::Ne;
    if (eat("<=")) return CompareOp::Le;
    if (eat(">=")) return CompareOp::Ge;
    if (eat("<")) return CompareOp::Lt;
    if (eat(">")) return CompareOp::Gt;
    fail("expected comparison operator");
  }

  Value literal() {
    skip_ws();
    if (pos_ >= src_.size()) fail("expected literal");
    char c = src_[pos_];
    if (c == '"' || c == '\'') {
      auto end = src_.find(c, pos_ + 1);
      if (end == std::string_view::npos) fail("unterminated string literal");
      std::string s(src_.substr(pos_ + 1, end - pos_ - 1));
      pos_ = end + 1;
      return s;
    }
    if (eat("true")) return true;
    if (eat("false")) return false;
    std::string num(src_.substr(pos_));
    char* end = nullptr;
    double d = std::strtod(num.c_str(), &end);
    if (end == num.c_str()) fail("expected literal");
    pos_ += static_cast<std::size_t>(end - num.c_str());
    return d;
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

Predicate Predicate::parse(std::string_view source) {
  Predicate p;
  p.source_ = std::string(source);
  p.root_ = std::make_shared<const Node>(PredicateParser(p.source_).parse());
  return p;
}

bool Predicate::evaluate(const Attributes& attrs) const { return eval(*root_, attrs); }

std::set<std::string> Predicate::attributes() const {
  std::set<std::string> out;
  collect(*root_, out);
  return out;
}

bool Predicate::eval(const Node& n, const Attributes& attrs) {
  switch (n.kind) {
    case Node::Kind::Or:
      for (const auto& c : n.children)
        if (eval(c, attrs)) return true;
      return false;
    case Node::Kind::And:
      for (const auto& c : n.children)
        if (!eval(c, attrs)) return false;
      return true;
    case Node::Kind::Compare: {
      auto it = attrs.find(n.attribute);
      if (it == attrs.end()) throw EvaluationError("missing attribute '" + n.attribute + "'");
      return compare_values(it->second, n.op, n.literal);
    }
  }
  return false;
}

void Predicate::collect(const Node& n, std::set<std::string>& out) {
  if (n.kind == Node::Kind::Compare) out.insert(n.attribute);
  for (const auto& c : n.children) collect(c, out);
}

bool compare_values(const Value& lhs, CompareOp op, const Value& rhs) {
  if (lhs.index() != rhs.index()) {
    if (op == CompareOp::Eq) return false;
    if (op == CompareOp::Ne) return true;
    throw EvaluationError("ordering comparison between different value types");
  }
  if (is_bool(lhs) && op != CompareOp::Eq && op != CompareOp::Ne)
    throw EvaluationError("ordering comparison on booleans");
  switch (op) {
    case CompareOp::Eq: return lhs == rhs;
    case CompareOp::Ne: return lhs != rhs;
    case CompareOp::Lt: return lhs < rhs;
    case CompareOp::Le: return lhs <= rhs;
    case CompareOp::Gt: return lhs > rhs;
    case CompareOp::Ge: return lhs >= rhs;
  }
  return false;
}

}  // namespace ccep
