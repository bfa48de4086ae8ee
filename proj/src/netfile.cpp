#include "qpn/netfile.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <vector>

#include "expr_parser.hpp"
#include "qpn/error.hpp"

namespace qpn::netfile {

void ConfigOverrides::apply(RunConfig& config) const {
  if (max_steps) config.max_steps = *max_steps;
  if (policy) config.policy = *policy;
  if (seed) config.seed = *seed;
  if (epsilon) config.epsilon = *epsilon;
}

namespace {

enum class Lex { Word, String, Equals, Arrow };

struct Lexeme {
  Lex kind;
  std::string text;
  SourcePos pos;
};

[[noreturn]] void syntax(SourcePos pos, const std::string& msg) {
  throw Error(ErrorCode::SyntaxError, msg, pos);
}

std::vector<Lexeme> lex_line(std::string_view line, std::size_t lineno) {
  std::vector<Lexeme> out;
  std::size_t i = 0;
  auto at = [&](std::size_t col) { return SourcePos{lineno, col + 1}; };
  while (i < line.size()) {
    const char c = line[i];
    if (c == '#') break;
    if (std::isspace(static_cast<unsigned char>(c))) {
      ++i;
      continue;
    }
    if (c == '=') {
      out.push_back({Lex::Equals, "=", at(i)});
      ++i;
    } else if (line.substr(i, 2) == "->") {
      out.push_back({Lex::Arrow, "->", at(i)});
      i += 2;
    } else if (c == '"') {
      const std::size_t start = i++;
      std::string s;
      bool closed = false;
      while (i < line.size()) {
        if (line[i] == '\\' && i + 1 < line.size()) {
          s += line[i + 1];
          i += 2;
        } else if (line[i] == '"') {
          closed = true;
          ++i;
          break;
        } else {
          s += line[i++];
        }
      }
      if (!closed) syntax(at(start), "unterminated string");
      out.push_back({Lex::String, std::move(s), at(start)});
    } else {
      const std::size_t start = i;
      while (i < line.size() && !std::isspace(static_cast<unsigned char>(line[i])) &&
             line[i] != '=' && line[i] != '"' && line[i] != '#' && line.substr(i, 2) != "->") {
        ++i;
      }
      out.push_back({Lex::Word, std::string(line.substr(start, i - start)), at(start)});
    }
  }
  return out;
}

bool is_identifier(std::string_view s) {
  if (s.empty() || !(std::isalpha(static_cast<unsigned char>(s[0])) || s[0] == '_')) return false;
  for (char c : s) {
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '_')) return false;
  }
  return true;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  return out + "\"";
}

/// Cursor over one line's lexemes.
class Line {
public:
  Line(std::vector<Lexeme> lexemes, std::size_t lineno, std::size_t width)
      : lx_(std::move(lexemes)), end_{lineno, width + 1} {}

  bool done() const { return at_ >= lx_.size(); }
  SourcePos pos() const { return done() ? end_ : lx_[at_].pos; }

  const Lexeme& take(Lex kind, const char* what) {
    if (done() || lx_[at_].kind != kind) {
      syntax(pos(), std::string("expected ") + what + " but found " + describe());
    }
    return lx_[at_++];
  }

  const Lexeme& identifier(const char* what) {
    const Lexeme& l = take(Lex::Word, what);
    if (!is_identifier(l.text)) syntax(l.pos, std::string("'") + l.text + "' is not a valid " + what);
    return l;
  }

  bool peek_string() const { return !done() && lx_[at_].kind == Lex::String; }

  void finish() {
    if (!done()) syntax(pos(), "unexpected " + describe());
  }

private:
  std::string describe() const {
    if (done()) return "end of line";
    const Lexeme& l = lx_[at_];
    return l.kind == Lex::String ? "string " + quote(l.text) : "'" + l.text + "'";
  }

  std::vector<Lexeme> lx_;
  std::size_t at_ = 0;
  SourcePos end_;
};

double parse_double(const Lexeme& l, const char* what) {
  double v = 0.0;
  const char* first = l.text.data();
  const char* last = first + l.text.size();
  if (!l.text.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || !std::isfinite(v)) {
    throw Error(ErrorCode::MalformedNumber, std::string("bad ") + what + " '" + l.text + "'", l.pos);
  }
  return v;
}

template <class Int>
Int parse_int(const Lexeme& l, const char* what) {
  Int v{};
  const char* first = l.text.data();
  const char* last = first + l.text.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last) {
    throw Error(ErrorCode::MalformedNumber, std::string("bad ") + what + " '" + l.text + "'", l.pos);
  }
  return v;
}

/// Parses the text of a quoted weight with positions mapped into the file.
WeightExpr parse_weight(const Lexeme& l) {
  detail::ExprParser p(detail::tokenize(l.text, {l.pos.line, l.pos.column + 1}));
  WeightExpr e = p.expr();
  p.expect_end();
  return e;
}

struct PendingArc {
  std::string from;
  std::string to;
  WeightExpr weight;
  std::optional<ArcKind> kind;
  SourcePos kind_pos;
  std::size_t line = 0;
  SourcePos from_pos;
  SourcePos to_pos;
};

struct PendingMap {
  Assignment assignment;
  SourcePos pos;
};

class Loader {
public:
  NetDocument run(std::string_view text) {
    std::size_t lineno = 0;
    std::size_t begin = 0;
    while (begin <= text.size()) {
      std::size_t end = text.find('\n', begin);
      if (end == std::string_view::npos) end = text.size();
      std::string_view raw = text.substr(begin, end - begin);
      if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
      ++lineno;
      statement(Line(lex_line(raw, lineno), lineno, raw.size()), lineno);
      begin = end + 1;
    }
    if (!name_) syntax({lineno == 0 ? 1 : lineno, 1}, "missing 'net' header");
    return finish();
  }

private:
  void statement(Line line, std::size_t lineno) {
    if (line.done()) return;
    const Lexeme& head = line.take(Lex::Word, "a statement");
    if (!name_) {
      if (head.text != "net") syntax(head.pos, "expected 'net' header before '" + head.text + "'");
      if (line.done()) syntax(line.pos(), "expected a net name");
      const Lexeme& name = line.take(line.peek_string() ? Lex::String : Lex::Word, "a net name");
      name_ = name.text;
      builder_.emplace(name.text);
      line.finish();
      return;
    }
    if (head.text == "net") syntax(head.pos, "duplicate 'net' header");
    if (head.text == "place") return place(line);
    if (head.text == "trans") return transition(line);
    if (head.text == "arc") return arc(line, lineno);
    if (head.text == "k") return scale(line, head.pos);
    if (head.text == "map") return map(line);
    if (head.text == "config") return config(line, head.pos);
    syntax(head.pos, "unknown statement '" + head.text + "'");
  }

  void declare(const Lexeme& id) {
    if (!ids_.emplace(id.text, id.pos).second) {
      throw Error(ErrorCode::DuplicateId, "'" + id.text + "' is already declared", id.pos);
    }
  }

  void place(Line& line) {
    const Lexeme& id = line.identifier("place id");
    declare(id);
    PlaceDecl decl{id.text, PlaceKind::Counter, 0.0};
    std::optional<SourcePos> init_pos;
    std::set<std::string> seen;
    while (!line.done()) {
      const Lexeme& key = line.take(Lex::Word, "an attribute");
      if (!seen.insert(key.text).second) syntax(key.pos, "repeated attribute '" + key.text + "'");
      line.take(Lex::Equals, "'='");
      const Lexeme& value = line.take(Lex::Word, "a value");
      if (key.text == "init") {
        decl.initial = parse_double(value, "initial value");
        init_pos = value.pos;
      } else if (key.text == "kind") {
        if (value.text == "counter") {
          decl.kind = PlaceKind::Counter;
        } else if (value.text == "amplitude") {
          decl.kind = PlaceKind::Amplitude;
        } else {
          syntax(value.pos, "place kind must be counter or amplitude, not '" + value.text + "'");
        }
      } else {
        syntax(key.pos, "unknown place attribute '" + key.text + "'");
      }
    }
    if (decl.kind == PlaceKind::Counter &&
        (decl.initial < 0.0 || decl.initial != std::round(decl.initial))) {
      throw Error(ErrorCode::InvalidInitialMarking,
                  "counter place '" + decl.id + "' needs a non-negative integer initial value",
                  init_pos.value_or(id.pos));
    }
    places_.insert(decl.id);
    builder_->place(decl.id, decl.kind, decl.initial);
  }

  void transition(Line& line) {
    const Lexeme& id = line.identifier("transition id");
    declare(id);
    int priority = 0;
    if (!line.done()) {
      const Lexeme& key = line.take(Lex::Word, "'priority'");
      if (key.text != "priority") syntax(key.pos, "unknown transition attribute '" + key.text + "'");
      line.take(Lex::Equals, "'='");
      priority = parse_int<int>(line.take(Lex::Word, "a priority"), "priority");
    }
    line.finish();
    transitions_.insert(id.text);
    builder_->transition(id.text, priority);
  }

  void arc(Line& line, std::size_t lineno) {
    PendingArc a;
    a.line = lineno;
    const Lexeme& from = line.identifier("arc source");
    a.from = from.text;
    a.from_pos = from.pos;
    line.take(Lex::Arrow, "'->'");
    const Lexeme& to = line.identifier("arc target");
    a.to = to.text;
    a.to_pos = to.pos;
    bool have_weight = false;
    while (!line.done()) {
      const Lexeme& key = line.take(Lex::Word, "an attribute");
      line.take(Lex::Equals, "'='");
      if (key.text == "w") {
        if (have_weight) syntax(key.pos, "repeated attribute 'w'");
        a.weight = parse_weight(line.take(Lex::String, "a quoted weight"));
        have_weight = true;
      } else if (key.text == "kind") {
        if (a.kind) syntax(key.pos, "repeated attribute 'kind'");
        const Lexeme& v = line.take(Lex::Word, "an arc kind");
        a.kind_pos = v.pos;
        if (v.text == "consume") {
          a.kind = ArcKind::Consume;
        } else if (v.text == "drain") {
          a.kind = ArcKind::Drain;
        } else if (v.text == "guard") {
          a.kind = ArcKind::Guard;
        } else {
          syntax(v.pos, "arc kind must be consume, drain or guard, not '" + v.text + "'");
        }
      } else {
        syntax(key.pos, "unknown arc attribute '" + key.text + "'");
      }
    }
    if (!have_weight) syntax(line.pos(), "arc needs a weight w=\"...\"");
    arcs_.push_back(std::move(a));
  }

  void scale(Line& line, SourcePos pos) {
    if (k_) syntax(pos, "duplicate 'k'");
    line.take(Lex::Equals, "'='");
    const Lexeme& v = line.take(Lex::Word, "a number");
    k_ = parse_double(v, "scale constant");
    if (!(*k_ > 0.0)) throw Error(ErrorCode::InvalidParams, "k must be positive", v.pos);
    line.finish();
  }

  void map(Line& line) {
    const Lexeme& id = line.identifier("place id");
    line.take(Lex::Equals, "'='");
    const Lexeme& label = line.take(Lex::String, "a quoted label");
    line.finish();
    for (const auto& m : maps_) {
      if (m.assignment.place == id.text) {
        throw Error(ErrorCode::DuplicateId, "place '" + id.text + "' is mapped twice", id.pos);
      }
      if (m.assignment.label == label.text) {
        throw Error(ErrorCode::DuplicateId, "label " + quote(label.text) + " is used twice",
                    label.pos);
      }
    }
    maps_.push_back({{id.text, label.text}, id.pos});
  }

  void config(Line& line, SourcePos pos) {
    if (have_config_) syntax(pos, "duplicate 'config'");
    have_config_ = true;
    while (!line.done()) {
      const Lexeme& key = line.take(Lex::Word, "a setting");
      line.take(Lex::Equals, "'='");
      const Lexeme& v = line.take(Lex::Word, "a value");
      if (key.text == "max_steps") {
        config_.max_steps = parse_int<std::uint64_t>(v, "max_steps");
        if (*config_.max_steps == 0) throw Error(ErrorCode::InvalidParams, "max_steps must be positive", v.pos);
      } else if (key.text == "policy") {
        config_.policy = parse_policy(v.text);
        if (!config_.policy) syntax(v.pos, "policy must be det or born, not '" + v.text + "'");
      } else if (key.text == "seed") {
        config_.seed = parse_int<std::uint64_t>(v, "seed");
      } else if (key.text == "epsilon") {
        config_.epsilon = parse_double(v, "epsilon");
        if (!(*config_.epsilon > 0.0)) throw Error(ErrorCode::InvalidParams, "epsilon must be positive", v.pos);
      } else {
        syntax(key.pos, "unknown config setting '" + key.text + "'");
      }
    }
  }

  void undeclared(const std::string& id, SourcePos pos, const char* role) {
    throw Error(ErrorCode::UndeclaredReference, std::string(role) + " '" + id + "' is not declared", pos);
  }

  NetDocument finish() {
    for (const PendingArc& a : arcs_) {
      const bool from_place = places_.count(a.from) != 0;
      const bool from_trans = transitions_.count(a.from) != 0;
      if (!from_place && !from_trans) undeclared(a.from, a.from_pos, "arc source");
      if (from_place && !transitions_.count(a.to)) undeclared(a.to, a.to_pos, "transition");
      if (from_trans && !places_.count(a.to)) undeclared(a.to, a.to_pos, "place");
      const std::string& owner = from_place ? a.from : a.to;
      for (const auto& p : free_places(a.weight)) {
        if (!places_.count(p)) {
          throw Error(ErrorCode::UndeclaredReference, "weight reads undeclared place '" + p + "'",
                      {a.line, 1});
        }
      }
      if (from_place) {
        const ArcKind kind = a.kind.value_or(ArcKind::Consume);
        if (kind == ArcKind::Drain && !(a.weight == WeightExpr::mark(owner))) {
          throw Error(ErrorCode::InvalidNet, "drain arc weight must be m(" + owner + ")", {a.line, 1});
        }
        builder_->input(a.from, a.to, a.weight, kind);
      } else {
        if (a.kind) syntax(a.kind_pos, "output arcs take no kind");
        builder_->output(a.from, a.to, a.weight);
      }
    }
    std::optional<QuantumMapping> mapping;
    if (k_ || !maps_.empty()) {
      mapping = QuantumMapping{k_.value_or(1.0), {}};
      for (const auto& m : maps_) {
        if (!places_.count(m.assignment.place)) undeclared(m.assignment.place, m.pos, "place");
        mapping->assignments.push_back(m.assignment);
      }
    }
    return NetDocument{builder_->build(), std::move(mapping), config_};
  }

  std::optional<std::string> name_;
  std::optional<NetBuilder> builder_;
  std::map<std::string, SourcePos> ids_;
  std::set<std::string> places_;
  std::set<std::string> transitions_;
  std::vector<PendingArc> arcs_;
  std::optional<double> k_;
  std::vector<PendingMap> maps_;
  ConfigOverrides config_;
  bool have_config_ = false;
};

}  // namespace

NetDocument load(std::string_view text) { return Loader().run(text); }

NetDocument load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::InvalidParams, "cannot read '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return load(ss.str());
}

std::string save(const NetDocument& doc) {
  std::ostringstream os;
  const PetriNet& net = doc.net;
  os << "net " << (is_identifier(net.name()) ? net.name() : quote(net.name())) << "\n";
  for (const auto& p : net.places()) {
    os << "place " << p.id << " init=" << format_number(p.initial)
       << " kind=" << to_string(p.kind) << "\n";
  }
  for (const auto& t : net.transitions()) {
    os << "trans " << t.id;
    if (t.priority != 0) os << " priority=" << t.priority;
    os << "\n";
  }
  for (const ArcDecl& a : net.arcs()) {
    if (a.input) {
      os << "arc " << a.place << " -> " << a.transition << " w=" << quote(format(a.weight));
      if (a.kind != ArcKind::Consume) os << " kind=" << to_string(a.kind);
    } else {
      os << "arc " << a.transition << " -> " << a.place << " w=" << quote(format(a.weight));
    }
    os << "\n";
  }
  if (doc.mapping) {
    os << "k = " << format_number(doc.mapping->k) << "\n";
    for (const auto& a : doc.mapping->assignments) {
      os << "map " << a.place << " = " << quote(a.label) << "\n";
    }
  }
  if (!doc.config.empty()) {
    os << "config";
    if (doc.config.max_steps) os << " max_steps=" << *doc.config.max_steps;
    if (doc.config.policy) {
      os << " policy=" << (*doc.config.policy == Policy::BornRandom ? "born" : "det");
    }
    if (doc.config.seed) os << " seed=" << *doc.config.seed;
    if (doc.config.epsilon) os << " epsilon=" << format_number(*doc.config.epsilon);
    os << "\n";
  }
  return os.str();
}

std::string save(const PetriNet& net, const std::optional<QuantumMapping>& mapping) {
  return save(NetDocument{net, mapping, {}});
}

}  // namespace qpn::netfile
