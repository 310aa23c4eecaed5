#pragma once

#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ccep/core/value.hpp"

namespace ccep {

enum class CompareOp { Eq, Ne, Lt, Le, Gt, Ge };

/// Boolean condition over event attributes.
///
/// Grammar:
///   expr  := conj (('||' | 'or') conj)*
///   conj  := atom (('&&' | 'and') atom)*
///   atom  := '(' expr ')' | ident op literal
///   op    := == != < <= > >=
///   literal := number | "string" | 'string' | true | false
///
/// Evaluation throws EvaluationError when a referenced attribute is missing or
/// an ordering comparison mixes types. Equality across types is simply false.
class Predicate {
 public:
  /// Throws DefinitionError on syntax errors.
  static Predicate parse(std::string_view source);

  bool evaluate(const Attributes& attrs) const;

  const std::string& source() const { return source_; }
  /// Every attribute name referenced by the expression.
  std::set<std::string> attributes() const;

 private:
  struct Node {
    enum class Kind { Or, And, Compare } kind;
    std::vector<Node> children;
    std::string attribute;
    CompareOp op = CompareOp::Eq;
    Value literal;
  };
  friend class PredicateParser;

  static bool eval(const Node& n, const Attributes& attrs);
  static void collect(const Node& n, std::set<std::string>& out);

  std::string source_;
  std::shared_ptr<const Node> root_;
};

/// Compare two scalars with the predicate semantics described above.
bool compare_values(const Value& lhs, CompareOp op, const Value& rhs);

}  // namespace ccep
