#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "healsim/types.hpp"

namespace healsim {

struct FailureReport;

/// What the planner sees of a failure. All fields are total, so conditions
/// never fail at evaluation time.
struct Fact {
  FaultKind kind = FaultKind::kCF1;
  std::string subject;
  std::int64_t exception_count = 0;
  std::int64_t dependent_count = 0;
  std::int64_t prior_failures_of_subject = 0;

  bool operator==(const Fact&) const = default;
};

/// prior_failures is the number of earlier reports in the run with the same
/// subject.
Fact make_fact(const FailureReport& report, std::int64_t prior_failures);

enum class FactField { kKind, kSubject, kExceptionCount, kDependentCount, kPriorFailures };
enum class CompareOp { kEq, kNe, kGt, kGe, kLt, kLe };

std::string_view to_string(FactField f) noexcept;
std::string_view to_string(CompareOp op) noexcept;
std::optional<FactField> parse_fact_field(std::string_view text) noexcept;
bool is_integer_field(FactField f) noexcept;

using Literal = std::variant<FaultKind, std::string, std::int64_t>;

/// Condition tree. Comparisons are leaves; kNot has one child; kAnd/kOr have
/// two or more. A parenthesised group becomes its own node, so the tree keeps
/// the source's grouping.
struct Condition {
  enum class Kind { kCompare, kNot, kAnd, kOr };

  Kind kind = Kind::kCompare;
  FactField field = FactField::kKind;
  CompareOp op = CompareOp::kEq;
  Literal literal;
  std::vector<Condition> children;

  static Condition compare(FactField field, CompareOp op, Literal literal);
  static Condition negate(Condition inner);
  static Condition all_of(std::vector<Condition> terms);
  static Condition any_of(std::vector<Condition> terms);

  bool operator==(const Condition&) const = default;
};

struct Rule {
  std::string name;
  std::int64_t salience = 0;
  Condition condition;
  Strategy strategy = Strategy::kAS1;

  bool operator==(const Rule&) const = default;
};

/// Rules in file order. Immutable after parsing.
struct RuleSet {
  std::vector<Rule> rules;

  bool operator==(const RuleSet&) const = default;
};

/// Parses the rule language:
///
///   ruleset  := rule*
///   rule     := "rule" STRING ["salience" INT] "when" cond "then" STRATEGY
///   cond     := term (("and"|"or") term)*      -- "and" binds tighter
///   term     := ["not"] (FIELD OP literal | "(" cond ")")
///
/// with '#' line comments. Throws RuleSyntaxError carrying one of
/// SyntaxError, DuplicateRuleName, UnknownStrategy or UnknownField.
RuleSet parse_rules(std::string_view text);

/// Canonical text form; parse_rules(print_rules(r)) == r.
std::string print_rules(const RuleSet& rules);
std::string print_condition(const Condition& cond);

/// The shipped default rule file (same content as data/default.rules).
std::string_view default_rules_text() noexcept;
const RuleSet& default_rules();

bool matches(const Condition& cond, const Fact& fact) noexcept;

/// Highest salience among matching rules, earliest in file order on ties.
/// Pure: repeated calls return the same plan.
std::optional<RepairPlan> select_plan(const RuleSet& rules, const Fact& fact);

/// Like select_plan but throws NoMatchingRule when nothing matches.
RepairPlan evaluate(const RuleSet& rules, const Fact& fact);

}  // namespace healsim
