#include "healsim/rules.hpp"

#include <cctype>
#include <charconv>
#include <set>

#include "bundled_data.hpp"
#include "healsim/analyzer.hpp"
#include "healsim/error.hpp"

namespace healsim {

Fact make_fact(const FailureReport& report, std::int64_t prior_failures) {
  return Fact{report.kind, report.subject_text(), report.exception_count.value_or(0),
              static_cast<std::int64_t>(report.dependent_slots.size()), prior_failures};
}

std::string_view to_string(FactField f) noexcept {
  switch (f) {
    case FactField::kKind: return "kind";
    case FactField::kSubject: return "subject";
    case FactField::kExceptionCount: return "exception_count";
    case FactField::kDependentCount: return "dependent_count";
    case FactField::kPriorFailures: return "prior_failures_of_subject";
  }
  return "kind";
}

std::string_view to_string(CompareOp op) noexcept {
  switch (op) {
    case CompareOp::kEq: return "==";
    case CompareOp::kNe: return "!=";
    case CompareOp::kGt: return ">";
    case CompareOp::kGe: return ">=";
    case CompareOp::kLt: return "<";
    case CompareOp::kLe: return "<=";
  }
  return "==";
}

std::optional<FactField> parse_fact_field(std::string_view text) noexcept {
  for (auto f : {FactField::kKind, FactField::kSubject, FactField::kExceptionCount,
                 FactField::kDependentCount, FactField::kPriorFailures}) {
    if (to_string(f) == text) return f;
  }
  return std::nullopt;
}

bool is_integer_field(FactField f) noexcept {
  return f != FactField::kKind && f != FactField::kSubject;
}

Condition Condition::compare(FactField field, CompareOp op, Literal literal) {
  Condition c;
  c.kind = Kind::kCompare;
  c.field = field;
  c.op = op;
  c.literal = std::move(literal);
  return c;
}

Condition Condition::negate(Condition inner) {
  Condition c;
  c.kind = Kind::kNot;
  c.children.push_back(std::move(inner));
  return c;
}

Condition Condition::all_of(std::vector<Condition> terms) {
  if (terms.size() == 1) return std::move(terms.front());
  Condition c;
  c.kind = Kind::kAnd;
  c.children = std::move(terms);
  return c;
}

Condition Condition::any_of(std::vector<Condition> terms) {
  if (terms.size() == 1) return std::move(terms.front());
  Condition c;
  c.kind = Kind::kOr;
  c.children = std::move(terms);
  return c;
}

namespace {

enum class Tok { kIdent, kString, kInt, kOp, kLParen, kRParen, kEnd };

struct Token {
  Tok type = Tok::kEnd;
  std::string text;
  int line = 1;
  int column = 1;
};

class Lexer {
 public:
  explicit Lexer(std::string_view src) : src_(src) {}

  Token next() {
    skip_blank();
    Token t;
    t.line = line_;
    t.column = col_;
    if (pos_ >= src_.size()) return t;

    char c = src_[pos_];
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      t.type = Tok::kIdent;
      while (pos_ < src_.size() &&
             (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) {
        t.text += advance();
      }
      return t;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && pos_ + 1 < src_.size() &&
         std::isdigit(static_cast<unsigned char>(src_[pos_ + 1])))) {
      t.type = Tok::kInt;
      t.text += advance();
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        t.text += advance();
      }
      return t;
    }
    if (c == '"') return string_literal(t);
    if (c == '(' || c == ')') {
      t.type = c == '(' ? Tok::kLParen : Tok::kRParen;
      t.text = advance();
      return t;
    }
    if (c == '=' || c == '!' || c == '<' || c == '>') {
      t.type = Tok::kOp;
      t.text += advance();
      if (pos_ < src_.size() && src_[pos_] == '=') t.text += advance();
      if (t.text == "=" || t.text == "!") {
        throw RuleSyntaxError(Errc::kSyntaxError, t.line, t.column,
                              "unknown operator '" + t.text + "'");
      }
      return t;
    }
    throw RuleSyntaxError(Errc::kSyntaxError, t.line, t.column,
                          std::string("unexpected character '") + c + "'");
  }

 private:
  char advance() {
    char c = src_[pos_++];
    if (c == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    return c;
  }

  void skip_blank() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (c == '#') {
        while (pos_ < src_.size() && src_[pos_] != '\n') advance();
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        advance();
      } else {
        break;
      }
    }
  }

  Token string_literal(Token t) {
    t.type = Tok::kString;
    advance();
    while (true) {
      if (pos_ >= src_.size() || src_[pos_] == '\n') {
        throw RuleSyntaxError(Errc::kSyntaxError, t.line, t.column,
                              "unterminated string literal");
      }
      char c = advance();
      if (c == '"') return t;
      if (c == '\\') {
        if (pos_ >= src_.size()) continue;
        int esc_line = line_, esc_col = col_;
        char e = advance();
        switch (e) {
          case '"': t.text += '"'; break;
          case '\\': t.text += '\\'; break;
          case 'n': t.text += '\n'; break;
          case 't': t.text += '\t'; break;
          default:
            throw RuleSyntaxError(Errc::kSyntaxError, esc_line, esc_col,
                                  std::string("unknown escape '\\") + e + "'");
        }
      } else {
        t.text += c;
      }
    }
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

const std::set<std::string_view> kKeywords = {"rule", "salience", "when", "then",
                                              "and",  "or",       "not"};

class Parser {
 public:
  explicit Parser(std::string_view text) : lexer_(text) { tok_ = lexer_.next(); }

  RuleSet parse() {
    RuleSet set;
    std::set<std::string> names;
    while (tok_.type != Tok::kEnd) {
      auto at = tok_;
      auto rule = parse_rule();
      if (!names.insert(rule.name).second) {
        throw RuleSyntaxError(Errc::kDuplicateRuleName, at.line, at.column,
                              "duplicate rule name \"" + rule.name + "\"");
      }
      set.rules.push_back(std::move(rule));
    }
    return set;
  }

 private:
  [[noreturn]] void fail(const Token& at, const std::string& msg, Errc code = Errc::kSyntaxError) {
    throw RuleSyntaxError(code, at.line, at.column, msg);
  }

  static std::string describe(const Token& t) {
    switch (t.type) {
      case Tok::kEnd: return "end of input";
      case Tok::kString: return "string \"" + t.text + "\"";
      default: return "'" + t.text + "'";
    }
  }

  Token take() {
    auto t = std::move(tok_);
    tok_ = lexer_.next();
    return t;
  }

  bool at_keyword(std::string_view kw) const {
    return tok_.type == Tok::kIdent && tok_.text == kw;
  }

  void expect_keyword(std::string_view kw) {
    if (!at_keyword(kw)) {
      fail(tok_, "expected '" + std::string(kw) + "', found " + describe(tok_));
    }
    take();
  }

  std::int64_t parse_int(const Token& t) {
    std::int64_t v = 0;
    const char* first = t.text.data();
    const char* last = first + t.text.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last) fail(t, "integer out of range: " + t.text);
    return v;
  }

  Rule parse_rule() {
    expect_keyword("rule");
    if (tok_.type != Tok::kString) fail(tok_, "expected rule name string, found " + describe(tok_));
    auto name_tok = take();
    if (name_tok.text.empty()) fail(name_tok, "rule name must not be empty");

    Rule rule;
    rule.name = name_tok.text;
    if (at_keyword("salience")) {
      take();
      if (tok_.type != Tok::kInt) fail(tok_, "expected salience integer, found " + describe(tok_));
      rule.salience = parse_int(take());
    }
    expect_keyword("when");
    rule.condition = parse_cond();
    expect_keyword("then");
    if (tok_.type != Tok::kIdent || kKeywords.contains(tok_.text)) {
      fail(tok_, "expected strategy, found " + describe(tok_));
    }
    auto strat = take();
    auto s = parse_strategy(strat.text);
    if (!s) fail(strat, "unknown strategy '" + strat.text + "'", Errc::kUnknownStrategy);
    rule.strategy = *s;
    return rule;
  }

  Condition parse_cond() {
    std::vector<Condition> alternatives;
    alternatives.push_back(parse_conjunction());
    while (at_keyword("or")) {
      take();
      alternatives.push_back(parse_conjunction());
    }
    return Condition::any_of(std::move(alternatives));
  }

  Condition parse_conjunction() {
    std::vector<Condition> terms;
    terms.push_back(parse_term());
    while (at_keyword("and")) {
      take();
      terms.push_back(parse_term());
    }
    return Condition::all_of(std::move(terms));
  }

  Condition parse_term() {
    if (at_keyword("not")) {
      take();
      return Condition::negate(parse_atom());
    }
    return parse_atom();
  }

  Condition parse_atom() {
    if (tok_.type == Tok::kLParen) {
      take();
      auto inner = parse_cond();
      if (tok_.type != Tok::kRParen) fail(tok_, "expected ')', found " + describe(tok_));
      take();
      return inner;
    }
    if (tok_.type != Tok::kIdent || kKeywords.contains(tok_.text)) {
      fail(tok_, "expected a field or '(', found " + describe(tok_));
    }
    auto field_tok = take();
    auto field = parse_fact_field(field_tok.text);
    if (!field) fail(field_tok, "unknown field '" + field_tok.text + "'", Errc::kUnknownField);

    if (tok_.type != Tok::kOp) fail(tok_, "expected comparison operator, found " + describe(tok_));
    auto op_tok = take();
    CompareOp op = CompareOp::kEq;
    for (auto candidate : {CompareOp::kEq, CompareOp::kNe, CompareOp::kGt, CompareOp::kGe,
                           CompareOp::kLt, CompareOp::kLe}) {
      if (to_string(candidate) == op_tok.text) op = candidate;
    }
    bool ordering = op != CompareOp::kEq && op != CompareOp::kNe;
    if (ordering && !is_integer_field(*field)) {
      fail(op_tok, "operator '" + op_tok.text + "' needs an integer field, '" +
                       field_tok.text + "' is not one");
    }

    auto lit = take();
    switch (*field) {
      case FactField::kKind: {
        auto k = lit.type == Tok::kIdent ? parse_fault_kind(lit.text) : std::nullopt;
        if (!k) fail(lit, "expected failure kind CF1..CF4, found " + describe(lit));
        return Condition::compare(*field, op, *k);
      }
      case FactField::kSubject:
        if (lit.type != Tok::kString) fail(lit, "expected string, found " + describe(lit));
        return Condition::compare(*field, op, lit.text);
      default:
        if (lit.type != Tok::kInt) fail(lit, "expected integer, found " + describe(lit));
        return Condition::compare(*field, op, parse_int(lit));
    }
  }

  Lexer lexer_;
  Token tok_;
};

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      default: out += c;
    }
  }
  out += '"';
  return out;
}

std::string print_literal(const Literal& lit) {
  return std::visit(
      [](const auto& v) -> std::string {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, FaultKind>) {
          return std::string(to_string(v));
        } else if constexpr (std::is_same_v<T, std::string>) {
          return quote(v);
        } else {
          return std::to_string(v);
        }
      },
      lit);
}

// A child needs parentheses when printing it bare would re-associate it into
// its parent's chain or bind differently.
std::string print_child(const Condition& child, Condition::Kind parent) {
  bool wrap = false;
  switch (parent) {
    case Condition::Kind::kOr: wrap = child.kind == Condition::Kind::kOr; break;
    case Condition::Kind::kAnd:
      wrap = child.kind == Condition::Kind::kOr || child.kind == Condition::Kind::kAnd;
      break;
    case Condition::Kind::kNot: wrap = child.kind != Condition::Kind::kCompare; break;
    case Condition::Kind::kCompare: break;
  }
  auto text = print_condition(child);
  return wrap ? "(" + text + ")" : text;
}

template <typename T>
int compare_values(const T& a, const T& b) {
  return a < b ? -1 : (b < a ? 1 : 0);
}

bool apply_op(CompareOp op, int cmp) noexcept {
  switch (op) {
    case CompareOp::kEq: return cmp == 0;
    case CompareOp::kNe: return cmp != 0;
    case CompareOp::kGt: return cmp > 0;
    case CompareOp::kGe: return cmp >= 0;
    case CompareOp::kLt: return cmp < 0;
    case CompareOp::kLe: return cmp <= 0;
  }
  return false;
}

}  // namespace

RuleSet parse_rules(std::string_view text) { return Parser(text).parse(); }

std::string print_condition(const Condition& cond) {
  switch (cond.kind) {
    case Condition::Kind::kCompare:
      return std::string(to_string(cond.field)) + " " + std::string(to_string(cond.op)) + " " +
             print_literal(cond.literal);
    case Condition::Kind::kNot:
      return "not " + print_child(cond.children.front(), cond.kind);
    case Condition::Kind::kAnd:
    case Condition::Kind::kOr: {
      const char* sep = cond.kind == Condition::Kind::kAnd ? " and " : " or ";
      std::string out;
      for (std::size_t i = 0; i < cond.children.size(); ++i) {
        if (i) out += sep;
        out += print_child(cond.children[i], cond.kind);
      }
      return out;
    }
  }
  return {};
}

std::string print_rules(const RuleSet& rules) {
  std::string out;
  for (const auto& r : rules.rules) {
    out += "rule " + quote(r.name);
    if (r.salience != 0) out += " salience " + std::to_string(r.salience);
    out += " when " + print_condition(r.condition) + " then " +
           std::string(to_string(r.strategy)) + "\n";
  }
  return out;
}

std::string_view default_rules_text() noexcept { return detail::bundled_rules_text(); }

const RuleSet& default_rules() {
  static const RuleSet rules = parse_rules(default_rules_text());
  return rules;
}

bool matches(const Condition& cond, const Fact& fact) noexcept {
  switch (cond.kind) {
    case Condition::Kind::kCompare: {
      int cmp = 0;
      switch (cond.field) {
        case FactField::kKind:
          cmp = compare_values(fact.kind, std::get<FaultKind>(cond.literal));
          break;
        case FactField::kSubject:
          cmp = compare_values(fact.subject, std::get<std::string>(cond.literal));
          break;
        case FactField::kExceptionCount:
          cmp = compare_values(fact.exception_count, std::get<std::int64_t>(cond.literal));
          break;
        case FactField::kDependentCount:
          cmp = compare_values(fact.dependent_count, std::get<std::int64_t>(cond.literal));
          break;
        case FactField::kPriorFailures:
          cmp = compare_values(fact.prior_failures_of_subject,
                               std::get<std::int64_t>(cond.literal));
          break;
      }
      return apply_op(cond.op, cmp);
    }
    case Condition::Kind::kNot:
      return !matches(cond.children.front(), fact);
    case Condition::Kind::kAnd:
      for (const auto& c : cond.children) {
        if (!matches(c, fact)) return false;
      }
      return true;
    case Condition::Kind::kOr:
      for (const auto& c : cond.children) {
        if (matches(c, fact)) return true;
      }
      return false;
  }
  return false;
}

std::optional<RepairPlan> select_plan(const RuleSet& rules, const Fact& fact) {
  const Rule* best = nullptr;
  for (const auto& r : rules.rules) {
    if ((!best || r.salience > best->salience) && matches(r.condition, fact)) best = &r;
  }
  if (!best) return std::nullopt;
  return RepairPlan{best->strategy, fact.subject, best->name};
}

RepairPlan evaluate(const RuleSet& rules, const Fact& fact) {
  auto plan = select_plan(rules, fact);
  if (!plan) {
    throw Error(Errc::kNoMatchingRule, "no rule matches " + std::string(to_string(fact.kind)) +
                                           " on '" + fact.subject + "'");
  }
  return *plan;
}

}  // namespace healsim
