#include "odesel/model.hpp"

#include <cctype>
#include <map>
#include <set>
#include <sstream>

#include "odesel/errors.hpp"

namespace odesel {

namespace {

void walk(const ExprPtr& e, int d, int p) {
  switch (e->kind()) {
    case Expr::Kind::State:
      if (e->index() < 0 || e->index() >= d) {
        throw UsageError("state index out of range in expression");
      }
      return;
    case Expr::Kind::Param:
      if (e->index() < 0 || e->index() >= p) {
        throw UsageError("parameter index out of range in expression");
      }
      return;
    case Expr::Kind::Unary: walk(e->lhs(), d, p); return;
    case Expr::Kind::Binary:
      walk(e->lhs(), d, p);
      walk(e->rhs(), d, p);
      return;
    default: return;
  }
}

}  // namespace

OdeModel OdeModel::create(std::string name, std::vector<std::string> state_names,
                          std::vector<std::string> param_names, std::vector<ExprPtr> rhs,
                          std::vector<double> init_guess,
                          std::vector<std::optional<double>> param_guess) {
  const int d = static_cast<int>(state_names.size());
  const int p = static_cast<int>(param_names.size());
  if (d == 0) throw UsageError("model must declare at least one state");
  if (rhs.size() != state_names.size()) {
    throw UsageError("model needs exactly one right-hand side per state");
  }
  if (!init_guess.empty() && init_guess.size() != state_names.size()) {
    throw UsageError("init guess length must match the state count");
  }
  if (!param_guess.empty() && param_guess.size() != param_names.size()) {
    throw UsageError("parameter guess length must match the parameter count");
  }
  for (const auto& e : rhs) walk(e, d, p);

  OdeModel m;
  m.name_ = std::move(name);
  m.state_names_ = std::move(state_names);
  m.param_names_ = std::move(param_names);
  m.rhs_ = std::move(rhs);
  m.init_guess_ = std::move(init_guess);
  m.param_guess_ = std::move(param_guess);
  if (m.param_guess_.empty()) m.param_guess_.resize(static_cast<std::size_t>(p));

  m.df_dx_.reserve(static_cast<std::size_t>(d) * d);
  m.df_dpsi_.reserve(static_cast<std::size_t>(d) * p);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) m.df_dx_.push_back(differentiate(m.rhs_[idx(j)], VarRef::state(k)));
    for (int q = 0; q < p; ++q) m.df_dpsi_.push_back(differentiate(m.rhs_[idx(j)], VarRef::param(q)));
  }
  m.d2f_dx_dx_.reserve(static_cast<std::size_t>(d) * d * d);
  m.d2f_dx_dpsi_.reserve(static_cast<std::size_t>(d) * d * p);
  m.d2f_dpsi_dpsi_.reserve(static_cast<std::size_t>(d) * p * p);
  for (int j = 0; j < d; ++j) {
    for (int k = 0; k < d; ++k) {
      const ExprPtr& g = m.df_dx(j, k);
      for (int l = 0; l < d; ++l) m.d2f_dx_dx_.push_back(differentiate(g, VarRef::state(l)));
      for (int q = 0; q < p; ++q) m.d2f_dx_dpsi_.push_back(differentiate(g, VarRef::param(q)));
    }
    for (int q = 0; q < p; ++q) {
      const ExprPtr& g = m.df_dpsi(j, q);
      for (int mm = 0; mm < p; ++mm) m.d2f_dpsi_dpsi_.push_back(differentiate(g, VarRef::param(mm)));
    }
  }
  return m;
}

namespace {

enum class Tok { Ident, Number, Plus, Minus, Star, Slash, Caret, LParen, RParen, Comma, Equals, End };

struct Token {
  Tok kind;
  std::string text;
  double number = 0.0;
  int col = 0;  // 1-based
};

bool ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool ident_char(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }

const std::set<std::string>& function_names() {
  static const std::set<std::string> names = {"exp", "log", "sqrt", "sin", "cos"};
  return names;
}

// Tokenizes the expression part of a line. `base_col` is the 1-based column
// of the first character, so reported positions refer to the original line.
std::vector<Token> tokenize(const std::string& s, int line, int base_col) {
  std::vector<Token> out;
  std::size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    int col = base_col + static_cast<int>(i);
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (ident_start(c)) {
      std::size_t j = i;
      while (j < s.size() && ident_char(s[j])) ++j;
      out.push_back({Tok::Ident, s.substr(i, j - i), 0.0, col});
      i = j;
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '.' && i + 1 < s.size() && std::isdigit(static_cast<unsigned char>(s[i + 1])))) {
      std::size_t j = i;
      while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      if (j < s.size() && s[j] == '.') {
        ++j;
        while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
      }
      if (j < s.size() && (s[j] == 'e' || s[j] == 'E')) {
        std::size_t k = j + 1;
        if (k < s.size() && (s[k] == '+' || s[k] == '-')) ++k;
        if (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) {
          ++k;
          while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
          j = k;
        }
      }
      std::string lex = s.substr(i, j - i);
      out.push_back({Tok::Number, lex, std::stod(lex), col});
      i = j;
      continue;
    }
    Tok k;
    switch (c) {
      case '+': k = Tok::Plus; break;
      case '-': k = Tok::Minus; break;
      case '*': k = Tok::Star; break;
      case '/': k = Tok::Slash; break;
      case '^': k = Tok::Caret; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case ',': k = Tok::Comma; break;
      case '=': k = Tok::Equals; break;
      default:
        throw ParseError(std::string("unexpected character '") + c + "'", line, col);
    }
    out.push_back({k, std::string(1, c), 0.0, col});
    ++i;
  }
  out.push_back({Tok::End, "", 0.0, base_col + static_cast<int>(s.size())});
  return out;
}

// Recursive-descent expression parser. Binding order, tightest first:
// atoms, ^ (right-associative), unary minus, * /, + -.
class ExprParser {
 public:
  ExprParser(std::vector<Token> tokens, int line, const std::map<std::string, int>& states,
             const std::map<std::string, int>& params)
      : toks_(std::move(tokens)), line_(line), states_(states), params_(params) {}

  ExprPtr parse() {
    ExprPtr e = parse_add();
    expect(Tok::End, "end of expression");
    return e;
  }

 private:
  const Token& peek() const { return toks_[pos_]; }
  Token take() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg, const Token& at) const {
    std::string where = at.kind == Tok::End ? "end of input" : "'" + at.text + "'";
    throw ParseError(msg + ", found " + where, line_, at.col);
  }

  void expect(Tok kind, const std::string& what) {
    if (peek().kind != kind) fail("expected " + what, peek());
    ++pos_;
  }

  ExprPtr parse_add() {
    ExprPtr e = parse_mul();
    while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
      BinaryOp op = take().kind == Tok::Plus ? BinaryOp::Add : BinaryOp::Sub;
      e = Expr::binary(op, e, parse_mul());
    }
    return e;
  }

  ExprPtr parse_mul() {
    ExprPtr e = parse_unary();
    while (peek().kind == Tok::Star || peek().kind == Tok::Slash) {
      BinaryOp op = take().kind == Tok::Star ? BinaryOp::Mul : BinaryOp::Div;
      e = Expr::binary(op, e, parse_unary());
    }
    return e;
  }

  ExprPtr parse_unary() {
    if (peek().kind == Tok::Minus) {
      take();
      return Expr::unary(UnaryOp::Neg, parse_unary());
    }
    return parse_power();
  }

  ExprPtr parse_power() {
    ExprPtr base = parse_atom();
    if (peek().kind == Tok::Caret) {
      take();
      return Expr::binary(BinaryOp::Pow, base, parse_unary());
    }
    return base;
  }

  ExprPtr parse_atom() {
    const Token& tok = peek();
    switch (tok.kind) {
      case Tok::Number: return Expr::constant(take().number);
      case Tok::LParen: {
        take();
        ExprPtr e = parse_add();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        Token id = take();
        if (function_names().count(id.text)) {
          expect(Tok::LParen, "'(' after function name");
          ExprPtr arg = parse_add();
          expect(Tok::RParen, "')'");
          if (id.text == "exp") return Expr::unary(UnaryOp::Exp, arg);
          if (id.text == "log") return Expr::unary(UnaryOp::Log, arg);
          if (id.text == "sqrt") return Expr::unary(UnaryOp::Sqrt, arg);
          if (id.text == "sin") return Expr::unary(UnaryOp::Sin, arg);
          return Expr::unary(UnaryOp::Cos, arg);
        }
        if (id.text == "t") return Expr::time();
        if (auto it = states_.find(id.text); it != states_.end()) return Expr::state(it->second);
        if (auto it = params_.find(id.text); it != params_.end()) return Expr::param(it->second);
        throw ParseError("reference to undeclared state or parameter '" + id.text + "'", line_,
                         id.col);
      }
      default: fail("expected a number, identifier or '('", tok);
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  int line_;
  const std::map<std::string, int>& states_;
  const std::map<std::string, int>& params_;
};

struct Line {
  int number;
  std::string text;
};

std::vector<Line> split_lines(const std::string& text) {
  std::vector<Line> lines;
  std::istringstream in(text);
  std::string raw;
  int number = 0;
  while (std::getline(in, raw)) {
    ++number;
    if (auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (!raw.empty() && raw.back() == '\r') raw.pop_back();
    lines.push_back({number, raw});
  }
  return lines;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t");
  return s.substr(b, e - b + 1);
}

void check_name(const std::string& name, int line, int col) {
  if (name.empty() || !ident_start(name[0])) {
    throw ParseError("invalid identifier '" + name + "'", line, col);
  }
  for (char c : name) {
    if (!ident_char(c)) throw ParseError("invalid identifier '" + name + "'", line, col);
  }
  if (name == "t") throw ParseError("'t' is reserved for the time variable", line, col);
  if (function_names().count(name)) {
    throw ParseError("'" + name + "' is a reserved function name", line, col);
  }
}

}  // namespace

OdeModel parse_model(const std::string& text) {
  std::string model_name;
  std::vector<std::string> state_names;
  std::vector<std::string> param_names;
  std::map<std::string, int> state_index;
  std::map<std::string, int> param_index;
  std::vector<double> init_guess;
  std::vector<std::optional<double>> param_guess;
  bool saw_states = false, saw_params = false, saw_init = false, saw_name = false;

  struct RhsLine {
    int line;
    int col;
    std::string state;
    std::vector<Token> tokens;
  };
  std::vector<RhsLine> rhs_lines;
  std::vector<std::pair<int, std::vector<Token>>> init_tokens;  // deferred until states known

  for (const Line& ln : split_lines(text)) {
    std::string body = trim(ln.text);
    if (body.empty()) continue;
    int base_col = static_cast<int>(ln.text.find_first_not_of(" \t")) + 1;

    auto colon = body.find(':');
    auto prime = body.find('\'');
    if (colon != std::string::npos && (prime == std::string::npos || colon < prime)) {
      std::string key = trim(body.substr(0, colon));
      std::string rest = trim(body.substr(colon + 1));
      int rest_col = base_col + static_cast<int>(colon) + 1;
      if (key == "name") {
        if (saw_name) throw ParseError("duplicate 'name:' line", ln.number, base_col);
        saw_name = true;
        model_name = rest;
      } else if (key == "states" || key == "params") {
        bool is_states = key == "states";
        bool& seen = is_states ? saw_states : saw_params;
        if (seen) throw ParseError("duplicate '" + key + ":' line", ln.number, base_col);
        seen = true;
        auto toks = tokenize(rest, ln.number, rest_col);
        std::size_t i = 0;
        while (toks[i].kind != Tok::End) {
          if (toks[i].kind != Tok::Ident) {
            throw ParseError("expected identifier in '" + key + ":' list", ln.number, toks[i].col);
          }
          std::string id = toks[i].text;
          check_name(id, ln.number, toks[i].col);
          if (state_index.count(id) || param_index.count(id)) {
            throw ParseError("duplicate declaration of '" + id + "'", ln.number, toks[i].col);
          }
          ++i;
          std::optional<double> guess;
          if (toks[i].kind == Tok::Equals) {
            ++i;
            double sign = 1.0;
            if (toks[i].kind == Tok::Minus) {
              sign = -1.0;
              ++i;
            }
            if (toks[i].kind != Tok::Number) {
              throw ParseError("expected a numeric default after '='", ln.number, toks[i].col);
            }
            guess = sign * toks[i].number;
            ++i;
          }
          if (is_states) {
            if (guess.has_value()) {
              throw ParseError("state defaults belong on the 'init:' line", ln.number, toks[i].col);
            }
            state_index[id] = static_cast<int>(state_names.size());
            state_names.push_back(id);
          } else {
            param_index[id] = static_cast<int>(param_names.size());
            param_names.push_back(id);
            param_guess.push_back(guess);
          }
          if (toks[i].kind == Tok::Comma) {
            ++i;
            if (toks[i].kind == Tok::End) {
              throw ParseError("trailing comma in '" + key + ":' list", ln.number, toks[i].col);
            }
          } else if (toks[i].kind != Tok::End) {
            throw ParseError("expected ',' between identifiers", ln.number, toks[i].col);
          }
        }
        if (is_states && state_names.empty()) {
          throw ParseError("'states:' list must not be empty", ln.number, rest_col);
        }
      } else if (key == "init") {
        if (saw_init) throw ParseError("duplicate 'init:' line", ln.number, base_col);
        saw_init = true;
        init_tokens.emplace_back(ln.number, tokenize(rest, ln.number, rest_col));
      } else {
        throw ParseError("unknown header '" + key + ":'", ln.number, base_col);
      }
      continue;
    }

    if (prime != std::string::npos) {
      std::string lhs = trim(body.substr(0, prime));
      check_name(lhs, ln.number, base_col);
      std::string rest = body.substr(prime + 1);
      auto eq = rest.find('=');
      if (eq == std::string::npos) {
        throw ParseError("expected '=' after \"" + lhs + "'\"", ln.number,
                         base_col + static_cast<int>(prime) + 1);
      }
      std::string expr_text = rest.substr(eq + 1);
      int expr_col = base_col + static_cast<int>(prime + 1 + eq) + 1;
      rhs_lines.push_back({ln.number, base_col, lhs, tokenize(expr_text, ln.number, expr_col)});
      continue;
    }

    throw ParseError("expected a header line or \"<state>' = <expression>\"", ln.number, base_col);
  }

  if (!saw_states) throw ParseError("missing 'states:' declaration", 1, 1);

  // init: either bare numbers in state order, or state=value pairs.
  if (saw_init) {
    init_guess.assign(state_names.size(), 0.0);
    std::vector<bool> have(state_names.size(), false);
    for (auto& [line, toks] : init_tokens) {
      std::size_t i = 0;
      std::size_t positional = 0;
      while (toks[i].kind != Tok::End) {
        if (toks[i].kind == Tok::Ident) {
          auto it = state_index.find(toks[i].text);
          if (it == state_index.end()) {
            throw ParseError("'init:' refers to unknown state '" + toks[i].text + "'", line,
                             toks[i].col);
          }
          int s = it->second;
          ++i;
          if (toks[i].kind != Tok::Equals) {
            throw ParseError("expected '=' after state name in 'init:'", line, toks[i].col);
          }
          ++i;
          double sign = 1.0;
          if (toks[i].kind == Tok::Minus) {
            sign = -1.0;
            ++i;
          }
          if (toks[i].kind != Tok::Number) {
            throw ParseError("expected a number in 'init:'", line, toks[i].col);
          }
          init_guess[static_cast<std::size_t>(s)] = sign * toks[i].number;
          have[static_cast<std::size_t>(s)] = true;
          ++i;
        } else {
          double sign = 1.0;
          if (toks[i].kind == Tok::Minus) {
            sign = -1.0;
            ++i;
          }
          if (toks[i].kind != Tok::Number) {
            throw ParseError("expected a number or state=value in 'init:'", line, toks[i].col);
          }
          if (positional >= state_names.size()) {
            throw ParseError("more 'init:' values than states", line, toks[i].col);
          }
          init_guess[positional] = sign * toks[i].number;
          have[positional] = true;
          ++positional;
          ++i;
        }
        if (toks[i].kind == Tok::Comma) ++i;
      }
    }
    for (std::size_t s = 0; s < have.size(); ++s) {
      if (!have[s]) {
        throw ParseError("'init:' is missing a value for state '" + state_names[s] + "'", 1, 1);
      }
    }
  }

  std::vector<ExprPtr> rhs(state_names.size());
  std::vector<bool> have_rhs(state_names.size(), false);
  for (auto& rl : rhs_lines) {
    auto it = state_index.find(rl.state);
    if (it == state_index.end()) {
      throw ParseError("right-hand side for undeclared state '" + rl.state + "'", rl.line, rl.col);
    }
    std::size_t s = static_cast<std::size_t>(it->second);
    if (have_rhs[s]) {
      throw ParseError("duplicate right-hand side for state '" + rl.state + "'", rl.line, rl.col);
    }
    ExprParser parser(std::move(rl.tokens), rl.line, state_index, param_index);
    rhs[s] = parser.parse();
    have_rhs[s] = true;
  }
  for (std::size_t s = 0; s < have_rhs.size(); ++s) {
    if (!have_rhs[s]) {
      throw ParseError("state '" + state_names[s] + "' has no right-hand side", 1, 1);
    }
  }

  return OdeModel::create(model_name, std::move(state_names), std::move(param_names),
                          std::move(rhs), std::move(init_guess), std::move(param_guess));
}

std::string render(const OdeModel& m) {
  std::ostringstream out;
  out.precision(17);
  if (!m.name().empty()) out << "name: " << m.name() << "\n";
  out << "states: ";
  for (int j = 0; j < m.state_count(); ++j) {
    if (j) out << ", ";
    out << m.state_names()[static_cast<std::size_t>(j)];
  }
  out << "\n";
  out << "params: ";
  for (int q = 0; q < m.param_count(); ++q) {
    if (q) out << ", ";
    out << m.param_names()[static_cast<std::size_t>(q)];
    const auto& g = m.param_guess()[static_cast<std::size_t>(q)];
    if (g.has_value()) out << " = " << *g;
  }
  out << "\n";
  if (!m.init_guess().empty()) {
    out << "init: ";
    for (int j = 0; j < m.state_count(); ++j) {
      if (j) out << ", ";
      out << m.init_guess()[static_cast<std::size_t>(j)];
    }
    out << "\n";
  }
  for (int j = 0; j < m.state_count(); ++j) {
    out << m.state_names()[static_cast<std::size_t>(j)] << "' = "
        << render(*m.rhs(j), m.state_names(), m.param_names()) << "\n";
  }
  return out.str();
}

}  // namespace odesel
