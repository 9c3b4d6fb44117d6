#include "logsymp/cli.hpp"

#include <chrono>
#include <cstdio>
#include <random>
#include <set>
#include <sstream>

namespace logsymp {

using namespace model;

namespace {

struct Piece {
  std::string text;
  int column;  // 1-based column of text[0]
};

Piece trim(const Piece& p) {
  std::size_t b = p.text.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {"", p.column + static_cast<int>(p.text.size())};
  std::size_t e = p.text.find_last_not_of(" \t\r");
  return {p.text.substr(b, e - b + 1), p.column + static_cast<int>(b)};
}

std::vector<Piece> split(const Piece& p, char sep) {
  std::vector<Piece> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= p.text.size(); ++i)
    if (i == p.text.size() || p.text[i] == sep) {
      out.push_back(trim({p.text.substr(start, i - start), p.column + static_cast<int>(start)}));
      start = i + 1;
    }
  return out;
}

std::vector<Piece> tokens(const Piece& p) {
  std::vector<Piece> out;
  std::size_t i = 0;
  while (i < p.text.size()) {
    while (i < p.text.size() && (p.text[i] == ' ' || p.text[i] == '\t' || p.text[i] == '\r')) ++i;
    std::size_t start = i;
    while (i < p.text.size() && p.text[i] != ' ' && p.text[i] != '\t' && p.text[i] != '\r') ++i;
    if (i > start) out.push_back({p.text.substr(start, i - start), p.column + static_cast<int>(start)});
  }
  return out;
}

// Empty body means an empty list.
std::vector<Piece> list(const Piece& body, char sep) {
  if (body.text.empty()) return {};
  return split(body, sep);
}

struct Info {
  std::string kind;   // chart, algebroid, section, form, multisection, points, subspace, matrix, morphism
  std::string owner;  // chart or algebroid name
  int degree = 0;
};

struct AlgebroidShape {
  Chart chart;
  std::vector<std::string> labels;
  std::string kind;
};

const std::map<std::string, std::string> kArgKinds = {
    {"algebroid", "algebroid"}, {"lie", "algebroid"},       {"form", "form"},         {"form0", "form"},
    {"form1", "form"},          {"bivector", "multisection"}, {"lambda", "multisection"}, {"euler", "section"},
    {"samples", "points"},      {"nsamples", "points"},     {"grid", "points"},       {"level", "points"},
    {"splitting", "matrix"},    {"splitting0", "matrix"},   {"splitting1", "matrix"}, {"f", "matrix"},
    {"moment", "morphism"},     {"slice", "subspace"},      {"count", "int"},         {"l", "int"},
    {"normal", "coords"}};

const std::map<std::string, std::vector<std::string>> kTaskArgs = {
    {"axioms", {"algebroid"}},
    {"symplectic", {"algebroid", "form"}},
    {"poisson", {"algebroid", "bivector"}},
    {"cartan", {"algebroid"}},
    {"phase", {"algebroid"}},
    {"presymplectic", {"algebroid", "form", "samples"}},
    {"model", {"algebroid", "form", "splitting", "samples", "nsamples"}},
    {"homotopy", {"algebroid", "euler", "normal", "form", "samples"}},
    {"dmw", {"algebroid", "euler", "normal", "form0", "form1", "grid", "nsamples"}},
    {"coisotropic", {"algebroid", "form", "samples", "splitting0", "splitting1", "grid", "nsamples"}},
    {"reduce", {"algebroid", "form", "moment", "lambda", "level", "f", "slice", "samples"}},
    {"log_poisson", {"lie", "l"}},
    {"groupoid_form", {"lie", "l"}}};

class Parser {
 public:
  ModelFile parse(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    while (std::getline(in, raw)) {
      ++line_;
      std::size_t hash = raw.find('#');
      if (hash != std::string::npos) raw = raw.substr(0, hash);
      Piece whole = trim({raw, 1});
      if (whole.text.empty()) continue;
      std::size_t colon = whole.text.find(':');
      Piece head = colon == std::string::npos ? whole : Piece{whole.text.substr(0, colon), whole.column};
      Piece body = colon == std::string::npos
                       ? Piece{"", whole.column + static_cast<int>(whole.text.size())}
                       : trim({whole.text.substr(colon + 1), whole.column + static_cast<int>(colon) + 1});
      auto head_tokens = tokens(head);
      statement(head_tokens, body, colon != std::string::npos);
    }
    return std::move(model_);
  }

 private:
  ModelFile model_;
  int line_ = 0;
  std::map<std::string, Info> names_;
  std::map<std::string, Chart> charts_;
  std::map<std::string, AlgebroidShape> algebroids_;

  [[noreturn]] void fail(const std::string& what, int column) { throw ModelError(what, line_, column); }

  void push(Statement s) {
    model_.statements.push_back(std::move(s));
    model_.lines.push_back(line_);
  }

  void declare(const Piece& name, Info info) {
    if (names_.count(name.text)) fail("duplicate name '" + name.text + "'", name.column);
    names_[name.text] = std::move(info);
  }

  const Chart& chart(const Piece& name) {
    auto it = charts_.find(name.text);
    if (it == charts_.end()) fail("unknown chart '" + name.text + "'", name.column);
    return it->second;
  }

  const AlgebroidShape& algebroid(const Piece& name) {
    auto it = algebroids_.find(name.text);
    if (it == algebroids_.end()) fail("unknown algebroid '" + name.text + "'", name.column);
    return it->second;
  }

  Scalar expr(const Piece& p, const Chart& c) {
    if (p.text.empty()) fail("missing expression", p.column);
    try {
      return parse_scalar(p.text, c);
    } catch (const ParseError& e) {
      fail(e.what(), p.column + static_cast<int>(e.position()));
    } catch (const std::exception& e) {
      fail(e.what(), p.column);
    }
  }

  mpq_class rational(const Piece& p) {
    try {
      return parse_rational(p.text);
    } catch (const std::exception&) {
      fail("expected a rational number, got '" + p.text + "'", p.column);
    }
  }

  int integer(const Piece& p) {
    try {
      std::size_t used = 0;
      int v = std::stoi(p.text, &used, 10);
      if (used == p.text.size() && v >= 0) return v;
    } catch (const std::exception&) {
    }
    fail("expected a non-negative integer, got '" + p.text + "'", p.column);
  }

  std::vector<Scalar> exprs(const Piece& body, const Chart& c, std::size_t count, const std::string& what) {
    auto parts = list(body, ',');
    if (parts.size() != count)
      fail(what + " needs " + std::to_string(count) + " entries, got " + std::to_string(parts.size()), body.column);
    std::vector<Scalar> out;
    for (const auto& p : parts) out.push_back(expr(p, c));
    return out;
  }

  int label_index(const AlgebroidShape& a, const Piece& label) {
    for (std::size_t i = 0; i < a.labels.size(); ++i)
      if (a.labels[i] == label.text) return static_cast<int>(i);
    fail("unknown frame label '" + label.text + "'", label.column);
  }

  void expect(const std::vector<Piece>& t, std::size_t n, bool has_body, bool want_body, const std::string& usage) {
    if (t.size() != n || has_body != want_body) fail("expected: " + usage, t.empty() ? 1 : t[0].column);
  }

  void statement(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    const std::string& kw = t[0].text;
    if (kw == "chart") return chart_decl(t, has_body);
    if (kw == "algebroid") return algebroid_decl(t, has_body);
    if (kw == "anchor") return anchor_decl(t, body, has_body);
    if (kw == "bracket") return bracket_decl(t, body, has_body);
    if (kw == "section") return section_decl(t, body, has_body);
    if (kw == "form" || kw == "multisection") return form_decl(t, body, has_body);
    if (kw == "points") return points_decl(t, body, has_body);
    if (kw == "subspace") return subspace_decl(t, body, has_body);
    if (kw == "matrix") return matrix_decl(t, body, has_body);
    if (kw == "morphism") return morphism_decl(t, body, has_body);
    if (kw == "task") return task_decl(t, has_body);
    fail("unknown statement '" + kw + "'", t[0].column);
  }

  void chart_decl(const std::vector<Piece>& t, bool has_body) {
    if (t.size() < 3 || t[2].text != "coords" || has_body) fail("expected: chart <name> coords <c>... [divisor <c>...]", t[0].column);
    ChartDecl d;
    d.name = t[1].text;
    std::vector<std::string> names;
    std::vector<int> divisor;
    std::size_t i = 3;
    for (; i < t.size() && t[i].text != "divisor"; ++i) {
      if (std::find(names.begin(), names.end(), t[i].text) != names.end()) fail("repeated coordinate", t[i].column);
      names.push_back(t[i].text);
    }
    if (i < t.size()) ++i;
    for (; i < t.size(); ++i) {
      auto it = std::find(names.begin(), names.end(), t[i].text);
      if (it == names.end()) fail("divisor coordinate '" + t[i].text + "' is not a coordinate", t[i].column);
      divisor.push_back(static_cast<int>(it - names.begin()));
    }
    d.chart = Chart(names, divisor);
    declare(t[1], {"chart", "", 0});
    charts_[d.name] = d.chart;
    push(d);
  }

  void algebroid_decl(const std::vector<Piece>& t, bool has_body) {
    if (t.size() < 3 || has_body) fail("expected: algebroid <name> <kind> ...", t[0].column);
    AlgebroidDecl d;
    d.name = t[1].text;
    d.kind = t[2].text;
    AlgebroidShape shape;
    shape.kind = d.kind;
    std::size_t next = 3;
    if (d.kind == "tangent" || d.kind == "log" || d.kind == "custom") {
      if (t.size() < 4) fail("missing chart", t[2].column);
      d.chart = t[3].text;
      shape.chart = chart(t[3]);
      next = 4;
    } else if (d.kind != "lie") {
      fail("unknown algebroid kind '" + d.kind + "'", t[2].column);
    }
    if (d.kind == "lie" || d.kind == "custom") {
      if (next >= t.size() || t[next].text != "labels") fail("expected labels", t.back().column);
      for (std::size_t i = next + 1; i < t.size(); ++i) {
        if (std::find(d.labels.begin(), d.labels.end(), t[i].text) != d.labels.end()) fail("repeated label", t[i].column);
        d.labels.push_back(t[i].text);
      }
      shape.labels = d.labels;
    } else {
      if (t.size() != next) fail("unexpected tokens after the chart", t[next].column);
      for (int i = 0; i < shape.chart.dim(); ++i) shape.labels.push_back("e" + std::to_string(i + 1));
    }
    declare(t[1], {"algebroid", d.chart, 0});
    algebroids_[d.name] = shape;
    push(d);
  }

  const AlgebroidShape& editable(const Piece& name) {
    const AlgebroidShape& a = algebroid(name);
    if (a.kind != "custom" && a.kind != "lie") fail("only custom and lie algebroids take anchor or bracket lines", name.column);
    return a;
  }

  void anchor_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 3, has_body, true, "anchor <algebroid> <label> : <expr>, ...");
    const AlgebroidShape& a = editable(t[1]);
    if (a.kind == "lie") fail("a Lie algebra has no anchor", t[1].column);
    label_index(a, t[2]);
    push(AnchorDecl{t[1].text, t[2].text, exprs(body, a.chart, a.chart.dim(), "anchor row")});
  }

  void bracket_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 4, has_body, true, "bracket <algebroid> <label> <label> : <expr>, ...");
    const AlgebroidShape& a = editable(t[1]);
    if (label_index(a, t[2]) == label_index(a, t[3])) fail("bracket of a frame element with itself", t[3].column);
    push(BracketDecl{t[1].text, t[2].text, t[3].text, exprs(body, a.chart, a.labels.size(), "bracket")});
  }

  void section_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 3, has_body, true, "section <name> <algebroid> : <expr>, ...");
    const AlgebroidShape& a = algebroid(t[2]);
    SectionDecl d{t[1].text, t[2].text, exprs(body, a.chart, a.labels.size(), "section")};
    declare(t[1], {"section", d.algebroid, 1});
    push(d);
  }

  void form_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 4, has_body, true, t[0].text + " <name> <algebroid> <degree> : [i j] <expr> ; ...");
    const AlgebroidShape& a = algebroid(t[2]);
    FormDecl d;
    d.name = t[1].text;
    d.algebroid = t[2].text;
    d.multisection = t[0].text == "multisection";
    d.degree = integer(t[3]);
    const int rank = static_cast<int>(a.labels.size());
    for (const auto& term : list(body, ';')) {
      if (term.text.empty() || term.text[0] != '[') fail("expected [indices] <expr>", term.column);
      std::size_t close = term.text.find(']');
      if (close == std::string::npos) fail("missing ]", term.column);
      std::vector<int> idx;
      for (const auto& tok : tokens({term.text.substr(1, close - 1), term.column + 1})) {
        int i = integer(tok);
        if (i < 1 || i > rank) fail("frame index out of range", tok.column);
        if (!idx.empty() && i - 1 <= idx.back()) fail("indices must increase", tok.column);
        idx.push_back(i - 1);
      }
      if (static_cast<int>(idx.size()) != d.degree) fail("index tuple has the wrong length", term.column);
      Blade b = blade_of(idx);
      if (d.coeffs.count(b)) fail("repeated index tuple", term.column);
      Scalar s = expr(trim({term.text.substr(close + 1), term.column + static_cast<int>(close) + 1}), a.chart);
      if (!s.is_zero()) d.coeffs[b] = s;
    }
    if (d.degree > rank && !d.coeffs.empty()) fail("degree exceeds the rank", t[3].column);
    declare(t[1], {d.multisection ? "multisection" : "form", d.algebroid, d.degree});
    push(d);
  }

  void points_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 3, has_body, true, "points <name> <chart> : <q>, ... ; ...");
    const Chart& c = chart(t[2]);
    PointsDecl d{t[1].text, t[2].text, {}};
    for (const auto& pt : list(body, ';')) {
      RationalPoint p;
      for (const auto& v : list(pt, ',')) p.push_back(rational(v));
      if (static_cast<int>(p.size()) != c.dim()) fail("point has the wrong dimension", pt.column);
      d.points.push_back(p);
    }
    declare(t[1], {"points", d.chart, 0});
    push(d);
  }

  void subspace_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 3, has_body, true, "subspace <name> <chart> : <coord> = <q>, ...");
    const Chart& c = chart(t[2]);
    SubspaceDecl d{t[1].text, t[2].text, {}};
    for (const auto& eq : list(body, ',')) {
      auto sides = split(eq, '=');
      if (sides.size() != 2) fail("expected <coord> = <value>", eq.column);
      if (c.index_of(sides[0].text) < 0) fail("unknown coordinate '" + sides[0].text + "'", sides[0].column);
      for (const auto& [name, v] : d.fixed)
        if (name == sides[0].text) fail("coordinate fixed twice", sides[0].column);
      d.fixed.emplace_back(sides[0].text, rational(sides[1]));
    }
    declare(t[1], {"subspace", d.chart, 0});
    push(d);
  }

  void matrix_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 5, has_body, true, "matrix <name> <chart> <rows> <cols> : <row> ; ...");
    const Chart& c = chart(t[2]);
    MatrixDecl d{t[1].text, t[2].text, integer(t[3]), integer(t[4]), {}};
    auto rows = list(body, ';');
    if (static_cast<int>(rows.size()) != d.rows) fail("wrong number of rows", body.column);
    for (const auto& row : rows) {
      auto entries = exprs(row, c, d.cols, "matrix row");
      d.entries.insert(d.entries.end(), entries.begin(), entries.end());
    }
    declare(t[1], {"matrix", d.chart, 0});
    push(d);
  }

  void morphism_decl(const std::vector<Piece>& t, const Piece& body, bool has_body) {
    expect(t, 4, has_body, true, "morphism <name> <source> <target> : <base> | <fibre rows>");
    const AlgebroidShape& src = algebroid(t[2]);
    const AlgebroidShape& tgt = algebroid(t[3]);
    auto halves = split(body, '|');
    if (halves.size() != 2) fail("expected <base> | <fibre rows>", body.column);
    MorphismDecl d{t[1].text, t[2].text, t[3].text, {}, {}};
    d.base = exprs(halves[0], src.chart, tgt.chart.dim(), "base map");
    auto rows = list(halves[1], ';');
    if (rows.size() != tgt.labels.size()) fail("fibre needs one row per target frame element", halves[1].column);
    for (const auto& row : rows) d.fibre.push_back(exprs(row, src.chart, src.labels.size(), "fibre row"));
    declare(t[1], {"morphism", d.source, 0});
    push(d);
  }

  void task_decl(const std::vector<Piece>& t, bool has_body) {
    if (t.size() < 3 || has_body) fail("expected: task <id> <operation> key=value ...", t[0].column);
    TaskDecl d;
    d.id = t[1].text;
    d.op = t[2].text;
    auto spec = kTaskArgs.find(d.op);
    if (spec == kTaskArgs.end()) fail("unknown operation '" + d.op + "'", t[2].column);
    for (const auto& [other, line] : tasks_)
      if (other == d.id) fail("duplicate task id '" + d.id + "'", t[1].column);
    for (std::size_t i = 3; i < t.size(); ++i) {
      std::size_t eq = t[i].text.find('=');
      if (eq == std::string::npos || eq == 0) fail("expected key=value", t[i].column);
      std::string key = t[i].text.substr(0, eq), value = t[i].text.substr(eq + 1);
      int vcol = t[i].column + static_cast<int>(eq) + 1;
      auto kind = kArgKinds.find(key);
      if (kind == kArgKinds.end()) fail("unknown argument '" + key + "'", t[i].column);
      if (kind->second == "int") {
        integer({value, vcol});
      } else if (kind->second != "coords") {
        auto it = names_.find(value);
        if (it == names_.end()) fail("unresolved name '" + value + "'", vcol);
        if (it->second.kind != kind->second)
          fail("'" + value + "' is a " + it->second.kind + ", expected a " + kind->second, vcol);
      }
      d.args.emplace_back(key, value);
    }
    for (const auto& key : spec->second) {
      bool found = std::any_of(d.args.begin(), d.args.end(), [&](const auto& kv) { return kv.first == key; });
      if (!found) fail("operation '" + d.op + "' needs " + key + "=", t[2].column);
    }
    tasks_.emplace_back(d.id, line_);
    push(d);
  }

  std::vector<std::pair<std::string, int>> tasks_;
};

// ---------------------------------------------------------------- printing

std::string join_scalars(const std::vector<Scalar>& v, const Chart& c) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + v[i].to_string(c);
  return s;
}

std::string join_words(const std::vector<std::string>& v) {
  std::string s;
  for (const auto& w : v) s += " " + w;
  return s;
}

class Printer {
 public:
  std::string print(const ModelFile& m) {
    for (const auto& s : m.statements) std::visit([this](const auto& d) { emit(d); }, s);
    return out_.str();
  }

 private:
  std::ostringstream out_;
  std::map<std::string, Chart> charts_;
  std::map<std::string, Chart> algebroid_charts_;

  void emit(const ChartDecl& d) {
    charts_[d.name] = d.chart;
    out_ << "chart " << d.name << " coords" << join_words(d.chart.names);
    if (!d.chart.divisor.empty()) {
      out_ << " divisor";
      for (int i : d.chart.divisor) out_ << " " << d.chart.names[i];
    }
    out_ << "\n";
  }
  void emit(const AlgebroidDecl& d) {
    algebroid_charts_[d.name] = d.kind == "lie" ? Chart() : charts_.at(d.chart);
    out_ << "algebroid " << d.name << " " << d.kind;
    if (d.kind != "lie") out_ << " " << d.chart;
    if (d.kind == "lie" || d.kind == "custom") out_ << " labels" << join_words(d.labels);
    out_ << "\n";
  }
  void emit(const AnchorDecl& d) {
    out_ << "anchor " << d.algebroid << " " << d.label << " : " << join_scalars(d.row, algebroid_charts_.at(d.algebroid))
         << "\n";
  }
  void emit(const BracketDecl& d) {
    out_ << "bracket " << d.algebroid << " " << d.left << " " << d.right << " : "
         << join_scalars(d.value, algebroid_charts_.at(d.algebroid)) << "\n";
  }
  void emit(const SectionDecl& d) {
    out_ << "section " << d.name << " " << d.algebroid << " : " << join_scalars(d.value, algebroid_charts_.at(d.algebroid))
         << "\n";
  }
  void emit(const FormDecl& d) {
    const Chart& c = algebroid_charts_.at(d.algebroid);
    out_ << (d.multisection ? "multisection " : "form ") << d.name << " " << d.algebroid << " " << d.degree << " :";
    bool first = true;
    for (const auto& [b, s] : d.coeffs) {
      out_ << (first ? " [" : " ; [");
      first = false;
      auto idx = blade_indices(b);
      for (std::size_t i = 0; i < idx.size(); ++i) out_ << (i ? " " : "") << idx[i] + 1;
      out_ << "] " << s.to_string(c);
    }
    out_ << "\n";
  }
  void emit(const PointsDecl& d) {
    out_ << "points " << d.name << " " << d.chart << " :";
    for (std::size_t p = 0; p < d.points.size(); ++p) {
      out_ << (p ? " ; " : " ");
      for (std::size_t i = 0; i < d.points[p].size(); ++i) out_ << (i ? ", " : "") << d.points[p][i].get_str();
    }
    out_ << "\n";
  }
  void emit(const SubspaceDecl& d) {
    out_ << "subspace " << d.name << " " << d.chart << " :";
    for (std::size_t i = 0; i < d.fixed.size(); ++i)
      out_ << (i ? ", " : " ") << d.fixed[i].first << " = " << d.fixed[i].second.get_str();
    out_ << "\n";
  }
  void emit(const MatrixDecl& d) {
    const Chart& c = charts_.at(d.chart);
    out_ << "matrix " << d.name << " " << d.chart << " " << d.rows << " " << d.cols << " :";
    for (int r = 0; r < d.rows; ++r) {
      std::vector<Scalar> row(d.entries.begin() + r * d.cols, d.entries.begin() + (r + 1) * d.cols);
      out_ << (r ? " ; " : " ") << join_scalars(row, c);
    }
    out_ << "\n";
  }
  void emit(const MorphismDecl& d) {
    const Chart& c = algebroid_charts_.at(d.source);
    out_ << "morphism " << d.name << " " << d.source << " " << d.target << " : " << join_scalars(d.base, c) << " |";
    for (std::size_t r = 0; r < d.fibre.size(); ++r) out_ << (r ? " ; " : " ") << join_scalars(d.fibre[r], c);
    out_ << "\n";
  }
  void emit(const TaskDecl& d) {
    out_ << "task " << d.id << " " << d.op;
    for (const auto& [k, v] : d.args) out_ << " " << k << "=" << v;
    out_ << "\n";
  }
};

// ---------------------------------------------------------------- workspace

struct Workspace {
  std::map<std::string, Chart> charts;
  std::map<std::string, AlgebroidPtr> algebroids;
  std::map<std::string, Section> sections;
  std::map<std::string, Form> forms;
  std::map<std::string, MultiSection> multisections;
  std::map<std::string, std::vector<RationalPoint>> points;
  std::map<std::string, CoordinateSubspace> subspaces;
  std::map<std::string, Matrix<Scalar>> matrices;
  std::map<std::string, AlgebroidMorphism> morphisms;
};

int label_of(const AlgebroidDecl& d, const std::string& label) {
  return static_cast<int>(std::find(d.labels.begin(), d.labels.end(), label) - d.labels.begin());
}

Workspace build(const ModelFile& m) {
  Workspace w;
  std::map<std::string, AlgebroidDecl> decls;
  std::map<std::string, Matrix<Scalar>> anchors;
  std::map<std::string, std::vector<const BracketDecl*>> brackets;
  for (const auto& s : m.statements) {
    if (auto* c = std::get_if<ChartDecl>(&s)) w.charts[c->name] = c->chart;
    if (auto* a = std::get_if<AlgebroidDecl>(&s)) {
      decls[a->name] = *a;
      if (a->kind == "custom") anchors[a->name] = Matrix<Scalar>(a->labels.size(), w.charts.at(a->chart).dim());
    }
    if (auto* a = std::get_if<AnchorDecl>(&s)) {
      int i = label_of(decls.at(a->algebroid), a->label);
      for (std::size_t c = 0; c < a->row.size(); ++c) anchors.at(a->algebroid)(i, c) = a->row[c];
    }
    if (auto* b = std::get_if<BracketDecl>(&s)) brackets[b->algebroid].push_back(b);
  }
  for (const auto& [name, d] : decls) {
    if (d.kind == "tangent") {
      w.algebroids[name] = make_tangent(w.charts.at(d.chart));
      continue;
    }
    if (d.kind == "log") {
      w.algebroids[name] = make_log_tangent(w.charts.at(d.chart));
      continue;
    }
    std::shared_ptr<Algebroid> a =
        d.kind == "lie" ? std::make_shared<Algebroid>(Chart(), Matrix<Scalar>(d.labels.size(), 0), d.labels)
                        : std::make_shared<Algebroid>(w.charts.at(d.chart), anchors.at(name), d.labels);
    for (const BracketDecl* b : brackets[name]) {
      int i = label_of(d, b->left), j = label_of(d, b->right);
      Section v = b->value;
      if (i > j) {
        std::swap(i, j);
        for (auto& c : v) c = -c;
      }
      a->set_bracket(i, j, v);
    }
    w.algebroids[name] = a;
  }
  for (const auto& s : m.statements) {
    if (auto* d = std::get_if<SectionDecl>(&s)) w.sections[d->name] = d->value;
    if (auto* d = std::get_if<FormDecl>(&s)) {
      const int rank = w.algebroids.at(d->algebroid)->rank();
      if (d->multisection) {
        MultiSection u(rank, d->degree);
        for (const auto& [b, c] : d->coeffs) u.add(b, c);
        w.multisections[d->name] = u;
      } else {
        Form f(rank, d->degree);
        for (const auto& [b, c] : d->coeffs) f.add(b, c);
        w.forms[d->name] = f;
      }
    }
    if (auto* d = std::get_if<PointsDecl>(&s)) w.points[d->name] = d->points;
    if (auto* d = std::get_if<SubspaceDecl>(&s)) {
      CoordinateSubspace n;
      std::vector<std::pair<int, mpq_class>> fixed;
      for (const auto& [coord, v] : d->fixed) fixed.emplace_back(w.charts.at(d->chart).index_of(coord), v);
      std::sort(fixed.begin(), fixed.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
      for (const auto& [i, v] : fixed) {
        n.fixed.push_back(i);
        n.values.push_back(v);
      }
      w.subspaces[d->name] = n;
    }
    if (auto* d = std::get_if<MatrixDecl>(&s)) {
      Matrix<Scalar> mat(d->rows, d->cols);
      for (int r = 0; r < d->rows; ++r)
        for (int c = 0; c < d->cols; ++c) mat(r, c) = d->entries[r * d->cols + c];
      w.matrices[d->name] = mat;
    }
    if (auto* d = std::get_if<MorphismDecl>(&s)) {
      AlgebroidMorphism mu;
      mu.source = w.algebroids.at(d->source);
      mu.target = w.algebroids.at(d->target);
      mu.base_map = d->base;
      mu.fibre = Matrix<Scalar>(mu.target->rank(), mu.source->rank());
      for (int r = 0; r < mu.target->rank(); ++r)
        for (int c = 0; c < mu.source->rank(); ++c) mu.fibre(r, c) = d->fibre[r][c];
      w.morphisms[d->name] = mu;
    }
  }
  return w;
}

// ---------------------------------------------------------------- tasks

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", v);
  return buf;
}
std::string fmt(bool v) { return v ? "true" : "false"; }
std::string fmt(int v) { return std::to_string(v); }
std::string fmt(std::size_t v) { return std::to_string(v); }

std::string tuple_string(std::initializer_list<int> idx) {
  std::string s = "(";
  bool first = true;
  for (int i : idx) {
    s += (first ? "" : ",") + std::to_string(i + 1);
    first = false;
  }
  return s + ")";
}

class TaskRunner {
 public:
  TaskRunner(const Workspace& w, const TaskDecl& t, const RunOptions& o, std::uint64_t stream)
      : w_(w), t_(t), opt_(o), stream_(stream) {}

  TaskReport run() {
    rep_.id = t_.id;
    rep_.op = t_.op;
    auto start = std::chrono::steady_clock::now();
    try {
      bool ok = dispatch();
      rep_.status = ok ? "pass" : "fail";
    } catch (const std::exception& e) {
      rep_.status = "error";
      add("error", e.what());
    }
    rep_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return rep_;
  }

 private:
  const Workspace& w_;
  const TaskDecl& t_;
  const RunOptions& opt_;
  std::uint64_t stream_;
  TaskReport rep_;

  void add(const std::string& k, const std::string& v) { rep_.fields.emplace_back(k, v); }

  const std::string& arg(const std::string& key) const {
    for (const auto& [k, v] : t_.args)
      if (k == key) return v;
    throw std::invalid_argument("missing argument " + key);
  }
  bool has(const std::string& key) const {
    return std::any_of(t_.args.begin(), t_.args.end(), [&](const auto& kv) { return kv.first == key; });
  }
  int int_arg(const std::string& key, int fallback) const { return has(key) ? std::stoi(arg(key)) : fallback; }

  const AlgebroidPtr& algebroid(const std::string& key = "algebroid") const { return w_.algebroids.at(arg(key)); }
  const Form& form(const std::string& key = "form") const { return w_.forms.at(arg(key)); }
  const std::vector<RationalPoint>& pts(const std::string& key) const { return w_.points.at(arg(key)); }
  std::vector<std::vector<double>> grid(const std::string& key) const {
    std::vector<std::vector<double>> out;
    for (const auto& p : pts(key)) {
      std::vector<double> x;
      for (const auto& v : p) x.push_back(v.get_d());
      out.push_back(x);
    }
    return out;
  }
  std::vector<int> normal(const Algebroid& a) const {
    std::vector<int> out;
    std::istringstream in(arg("normal"));
    std::string name;
    while (std::getline(in, name, ',')) {
      int i = a.chart().index_of(name);
      if (i < 0) throw std::invalid_argument("unknown normal coordinate " + name);
      out.push_back(i);
    }
    return out;
  }

  bool dispatch() {
    const std::string& op = t_.op;
    if (op == "axioms") return axioms();
    if (op == "symplectic") return symplectic();
    if (op == "poisson") return poisson();
    if (op == "cartan") return cartan();
    if (op == "phase") return phase();
    if (op == "presymplectic") return presymplectic();
    if (op == "model") return model();
    if (op == "homotopy") return homotopy();
    if (op == "dmw") return dmw();
    if (op == "coisotropic") return coisotropic();
    if (op == "reduce") return reduce();
    if (op == "log_poisson") return log_poisson();
    if (op == "groupoid_form") return groupoid_form();
    throw std::invalid_argument("unknown operation " + op);
  }

  bool axioms() {
    AxiomReport r = check_axioms(*algebroid());
    add("anchor_failures", fmt(r.anchor_failures.size()));
    add("jacobi_failures", fmt(r.jacobi_failures.size()));
    if (!r.anchor_failures.empty()) {
      const auto& f = r.anchor_failures.front();
      add("anchor_witness", tuple_string({f[0], f[1]}));
    }
    if (!r.jacobi_failures.empty()) {
      const auto& f = r.jacobi_failures.front();
      add("jacobi_witness", tuple_string({f[0], f[1], f[2]}));
    }
    return r.pass;
  }

  bool report_symplectic(const SymplecticReport& r) {
    add("closed", fmt(r.closed));
    add("nondegenerate", fmt(r.nondegenerate));
    if (!r.witnesses.empty()) add("witness", r.witnesses.front());
    return r.pass;
  }

  bool symplectic() { return report_symplectic(check_symplectic(algebroid(), form())); }

  bool poisson() {
    const auto& a = algebroid();
    MultiSection s = schouten(*a, w_.multisections.at(arg("bivector")), w_.multisections.at(arg("bivector")));
    add("schouten_terms", fmt(s.coeffs.size()));
    return s.is_zero();
  }

  Scalar random_scalar(std::mt19937_64& rng, int dim) {
    std::uniform_int_distribution<int> coeff(-2, 2), var(0, std::max(0, dim - 1)), degree(0, 2);
    Scalar s;
    for (int term = 0; term < 3; ++term) {
      Scalar mono(coeff(rng));
      if (dim > 0)
        for (int d = degree(rng); d > 0; --d) mono *= Scalar::variable(var(rng));
      s += mono;
    }
    return s;
  }

  bool cartan() {
    const Algebroid& a = *algebroid();
    const int count = int_arg("count", 100), r = a.rank(), n = a.dim();
    std::mt19937_64 rng(opt_.seed ^ (stream_ * 0x9e3779b97f4a7c15ULL));
    std::uniform_int_distribution<int> deg(0, r);
    int failures[6] = {0, 0, 0, 0, 0, 0};
    for (int inst = 0; inst < count; ++inst) {
      Section s(r), t(r);
      for (int k = 0; k < r; ++k) {
        s[k] = random_scalar(rng, n);
        t[k] = random_scalar(rng, n);
      }
      const int k = deg(rng);
      Form alpha(r, k);
      for (Blade b : blades(r, k)) alpha.add(b, random_scalar(rng, n));
      const Section st = a.bracket(s, t);
      if (k + 2 <= r && !d(a, d(a, alpha)).is_zero()) ++failures[0];
      Form ds = k + 1 <= r ? contract(s, d(a, alpha)) : Form(r, k);
      if (k >= 1) ds = ds + d(a, contract(s, alpha));
      if (lie_derivative(a, s, alpha) != ds) ++failures[1];
      if (lie_derivative(a, s, lie_derivative(a, t, alpha)) - lie_derivative(a, t, lie_derivative(a, s, alpha)) !=
          lie_derivative(a, st, alpha))
        ++failures[2];
      if (k >= 1 && lie_derivative(a, s, contract(t, alpha)) - contract(t, lie_derivative(a, s, alpha)) !=
                        contract(st, alpha))
        ++failures[3];
      if (k >= 2 && !(contract(s, contract(t, alpha)) + contract(t, contract(s, alpha))).is_zero()) ++failures[4];
      if (k + 1 <= r && d(a, lie_derivative(a, s, alpha)) != lie_derivative(a, s, d(a, alpha))) ++failures[5];
    }
    const char* names[6] = {"d_squared", "cartan_formula", "lie_commutator", "lie_contraction", "contractions",
                            "d_lie"};
    add("instances", fmt(count));
    bool ok = true;
    for (int i = 0; i < 6; ++i) {
      add(std::string(names[i]) + "_failures", fmt(failures[i]));
      ok = ok && failures[i] == 0;
    }
    return ok;
  }

  bool phase() {
    PhaseSpace ps = phase_space(algebroid());
    const int r = ps.base_rank();
    Matrix<Scalar> expected(2 * r, 2 * r);
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < r; ++j) expected(i, j) = -ps.c_matrix(i, j);
      expected(i, r + i) = Scalar(-1);
      expected(r + i, i) = Scalar(1);
    }
    bool matrix = ps.frame_matrix() == expected;
    LinearPoissonReport lp = verify_linear_poisson(ps);
    add("frame_matrix", fmt(matrix));
    add("linear_poisson", fmt(lp.pass));
    bool ok = matrix && lp.pass;
    if (has("samples")) {
      ZeroSectionReport z = zero_section_check(ps, pts("samples"));
      add("zero_section_lagrangian", fmt(z.pass));
      ok = ok && z.pass;
    }
    return ok;
  }

  bool presymplectic() {
    PresymplecticData pd = presymplectic_kernel(algebroid(), form(), pts("samples"));
    add("kernel_rank", fmt(pd.kernel.size()));
    add("bracket_closed", fmt(pd.bracket_closed));
    add("basic", fmt(pd.basic));
    return pd.bracket_closed && pd.basic;
  }

  bool model() {
    PresymplecticData pd = presymplectic_kernel(algebroid(), form(), pts("samples"));
    SymplectizationModel m = symplectize(pd, w_.matrices.at(arg("splitting")));
    ModelReport r = check_model(m, pts("nsamples"));
    add("closed", fmt(r.closed));
    add("table", fmt(r.table));
    add("pullback", fmt(r.pullback));
    add("coisotropic", fmt(r.coisotropic));
    if (!r.failures.empty()) add("failure", r.failures.front());
    return r.pass;
  }

  bool homotopy() {
    const auto& a = algebroid();
    RetractionSpec r = scaling_retraction(a, w_.sections.at(arg("euler")), normal(*a), pts("samples"));
    add("closed_form", fmt(r.closed_form));
    const Form& alpha = form();
    const int n = a->dim();
    Form lhs = alpha - retraction_pullback_at_zero(r, alpha, n);
    Form rhs(alpha.rank, alpha.degree);
    if (alpha.degree > 0) rhs = rhs + d(*a, homotopy_kappa(r, alpha, n));
    if (alpha.degree < alpha.rank) rhs = rhs + homotopy_kappa(r, d(*a, alpha), n);
    bool exact = lhs == rhs;
    add("exact", fmt(exact));
    return exact;
  }

  void report_moser(const MoserReport& r) {
    add("max_defect", fmt(r.defect));
    add("grid_points", fmt(r.point_defects.size()));
    add("flow_failures", fmt(r.failures.size()));
    if (!r.failures.empty()) add("first_flow_failure", r.failures.front());
    add("base_residual", fmt(r.base_residual));
    add("fibre_residual", fmt(r.fibre_residual));
    add("transport_defect", fmt(r.transport_defect));
    add("isotopy_defect", fmt(r.isotopy_defect));
    add("primitive_vanishes_on_n", fmt(r.alpha_vanishes_on_n));
    add("steps", fmt(r.steps));
  }

  MoserOptions moser_options() const {
    MoserOptions o;
    o.integrator_tol = opt_.tol;
    return o;
  }

  bool dmw() {
    const auto& a = algebroid();
    RetractionSpec r = scaling_retraction(a, w_.sections.at(arg("euler")), normal(*a), pts("nsamples"));
    MoserReport rep = dmw_verify(a, r, form("form0"), form("form1"), grid("grid"), pts("nsamples"), moser_options());
    report_moser(rep);
    return rep.pass;
  }

  bool coisotropic() {
    PresymplecticData pd = presymplectic_kernel(algebroid(), form(), pts("samples"));
    SymplectizationModel m0 = symplectize(pd, w_.matrices.at(arg("splitting0")));
    SymplectizationModel m1 = symplectize(pd, w_.matrices.at(arg("splitting1")));
    MoserReport rep = coisotropic_embedding_verify(m0, m1, grid("grid"), pts("nsamples"), moser_options());
    report_moser(rep);
    return rep.pass;
  }

  bool reduce() {
    ReductionRequest req;
    req.algebroid = algebroid();
    req.omega = form();
    req.moment = w_.morphisms.at(arg("moment"));
    req.target_lambda = w_.multisections.at(arg("lambda"));
    const auto& level = pts("level");
    if (level.size() != 1) throw std::invalid_argument("level must hold exactly one point");
    req.level = level.front();
    const Matrix<Scalar>& f = w_.matrices.at(arg("f"));
    for (int i = 0; i < f.rows(); ++i) {
      std::vector<mpq_class> row;
      for (int j = 0; j < f.cols(); ++j) {
        if (!f(i, j).is_constant()) throw std::invalid_argument("f must have constant entries");
        row.push_back(f(i, j).constant_value());
      }
      req.f.push_back(row);
    }
    req.slice = w_.subspaces.at(arg("slice"));
    req.samples = pts("samples");
    ReductionResult res = hamiltonian_reduce(req);
    bool identities = std::all_of(res.identities.begin(), res.identities.end(), [](const auto& i) { return i.all(); });
    add("level_set_codim", fmt(res.level_set.fixed.size()));
    add("kernel_rank", fmt(res.presymplectic.kernel.size()));
    add("h_dim", fmt(res.h.size()));
    add("moment_identities", fmt(identities));
    add("kernel_matches", fmt(res.kernel_matches));
    add("h_transitive", fmt(res.h_transitive));
    add("reduced_dim", fmt(res.reduced.algebroid->dim()));
    add("reduced_rank", fmt(res.reduced.algebroid->rank()));
    add("reduced_symplectic", fmt(res.reduced.report.pass));
    for (std::size_t i = 0; i < res.transcript.size(); ++i) add("transcript." + std::to_string(i + 1), res.transcript[i]);
    return res.pass;
  }

  bool log_poisson() {
    PoissonStructure p = log_linear_poisson(*algebroid("lie"), int_arg("l", 0));
    MultiSection s = schouten(*p.algebroid, p.lambda, p.lambda);
    std::vector<std::string> labels;
    for (int i = 0; i < p.algebroid->rank(); ++i) labels.push_back(p.algebroid->labels()[i]);
    add("lambda", to_string(p.lambda, p.algebroid->chart(), labels));
    add("schouten_terms", fmt(s.coeffs.size()));
    return s.is_zero();
  }

  bool groupoid_form() {
    GroupoidForm g = log_groupoid_form(*algebroid("lie"), int_arg("l", 0));
    return report_symplectic(check_symplectic(g.algebroid, g.omega));
  }
};

// ---------------------------------------------------------------- built-ins

std::string log_plane_model() {
  std::ostringstream os;
  os << "# Log plane (x, y) with divisor x = 0. omega0 = dx/x ^ dy is eps1 ^ eps2 in the log frame.\n"
        "chart P coords x y divisor x\n"
        "algebroid A log P\n"
        "form w0 A 2 : [1 2] 1\n"
        "form w1 A 2 : [1 2] 1 + x*y\n"
        "form dw A 2 : [1 2] x*y\n"
        "section eps A : 1, 0\n"
        "points N P : 0, -1 ; 0, 0 ; 0, 1/3 ; 0, 1\n"
        "points G P :";
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) {
      mpq_class x = mpq_class(1, 4) + mpq_class(3 * i, 16), y = mpq_class(-1, 2) + mpq_class(j, 4);
      x.canonicalize();
      y.canonicalize();
      os << (i + j ? " ; " : " ") << x.get_str() << ", " << y.get_str();
    }
  os << "\n"
        "task axioms axioms algebroid=A\n"
        "task symplectic symplectic algebroid=A form=w0\n"
        "task cartan cartan algebroid=A count=100\n"
        "task homotopy homotopy algebroid=A euler=eps normal=x form=dw samples=N\n"
        "task dmw dmw algebroid=A euler=eps normal=x form0=w0 form1=w1 grid=G nsamples=N\n";
  return os.str();
}

const std::map<std::string, std::string>& static_builtins() {
  static const std::map<std::string, std::string> m = {
      {"log-plane-reduction",
       "# Moment mu(x, y) = x from the log plane to the log line with zero Poisson structure.\n"
       "chart P coords x y divisor x\n"
       "chart U coords u divisor u\n"
       "chart Y coords y\n"
       "algebroid A log P\n"
       "algebroid E log U\n"
       "form w A 2 : [1 2] 1\n"
       "multisection zero E 2 :\n"
       "morphism mu A E : x | 1, 0\n"
       "points p1 U : 1\n"
       "points p0 U : 0\n"
       "matrix f_zero U 0 1 :\n"
       "matrix f_line U 1 1 : 1\n"
       "subspace point_slice Y : y = 0\n"
       "subspace no_slice Y :\n"
       "points S Y : -3/4 ; -1/4 ; 1/4 ; 3/4 ; 5/4\n"
       "task away reduce algebroid=A form=w moment=mu lambda=zero level=p1 f=f_zero slice=point_slice samples=S\n"
       "task divisor reduce algebroid=A form=w moment=mu lambda=zero level=p0 f=f_line slice=no_slice samples=S\n"},
      {"aff1-phase",
       "# aff(1) over a point, [a, b] = b, and its phase space.\n"
       "algebroid g lie labels a b\n"
       "bracket g a b : 0, 1\n"
       "task axioms axioms algebroid=g\n"
       "task phase phase algebroid=g\n"},
      {"log-poisson-aff1",
       "algebroid g lie labels a b\n"
       "bracket g a b : 0, 1\n"
       "task log_poisson log_poisson lie=g l=1\n"},
      {"log-poisson-heisenberg",
       "# Heisenberg algebra [X, Y] = Z; the first dual vector X* is a character.\n"
       "algebroid h lie labels X Y Z\n"
       "bracket h X Y : 0, 0, 1\n"
       "task log_poisson log_poisson lie=h l=1\n"},
      {"log-affine",
       "# Closed log form on aff(1) times the log line.\n"
       "algebroid g lie labels a b\n"
       "bracket g a b : 0, 1\n"
       "task groupoid_form groupoid_form lie=g l=1\n"},
      {"rank3-model",
       "# Log tangent of (x, y, z) with divisor x = 0 and omega_B = eps1 ^ eps2; kernel spanned by e3.\n"
       "chart B coords x y z divisor x\n"
       "chart M coords x y z q divisor x\n"
       "algebroid A log B\n"
       "form w A 2 : [1 2] 1\n"
       "points S B : 1, 0, 0 ; 1/2, 1, -1 ; 2, -1/3, 1\n"
       "matrix s0 B 3 1 : 0 ; 0 ; 1\n"
       "matrix s1 B 3 1 : y ; x + 1/2 ; 1\n"
       "points G M : 1/2, -1/2, 0, -1/4 ; 1/2, 1/2, 1/2, 0 ; 1, -1/2, 1/2, 1/4 ; 1, 1/2, 0, -1/4 ; "
       "3/4, 0, 1/4, 1/8\n"
       "task presymplectic presymplectic algebroid=A form=w samples=S\n"
       "task model model algebroid=A form=w splitting=s1 samples=S nsamples=S\n"
       "task coisotropic coisotropic algebroid=A form=w samples=S splitting0=s0 splitting1=s1 grid=G nsamples=S\n"}};
  return m;
}

}  // namespace

ModelFile parse_model(const std::string& text) { return Parser().parse(text); }

std::string print_model(const ModelFile& m) { return Printer().print(m); }

std::vector<std::string> builtin_names() {
  std::vector<std::string> names{"log-plane"};
  for (const auto& [k, v] : static_builtins()) names.push_back(k);
  return names;
}

std::string emit_builtin(const std::string& name) {
  if (name == "log-plane") return log_plane_model();
  auto it = static_builtins().find(name);
  if (it == static_builtins().end()) throw std::invalid_argument("unknown built-in model '" + name + "'");
  return it->second;
}

std::vector<TaskReport> run_model(const ModelFile& m, const RunOptions& options) {
  std::vector<const TaskDecl*> tasks;
  for (const auto& s : m.statements)
    if (auto* t = std::get_if<TaskDecl>(&s))
      if (options.task == "all" || options.task == t->id) tasks.push_back(t);
  if (tasks.empty() && options.task != "all") throw std::invalid_argument("no task named '" + options.task + "'");
  Workspace w = build(m);
  std::vector<TaskReport> out;
  std::uint64_t stream = 0;
  for (const TaskDecl* t : tasks) out.push_back(TaskRunner(w, *t, options, ++stream).run());
  return out;
}

std::string format_machine(const std::vector<TaskReport>& reports) {
  std::ostringstream os;
  int passed = 0;
  for (const auto& r : reports) {
    os << "task." << r.id << ".op=" << r.op << "\n";
    os << "task." << r.id << ".status=" << r.status << "\n";
    for (const auto& [k, v] : r.fields) os << "task." << r.id << "." << k << "=" << v << "\n";
    passed += r.status == "pass";
  }
  os << "summary.tasks=" << reports.size() << "\n";
  os << "summary.passed=" << passed << "\n";
  return os.str();
}

std::string format_text(const std::vector<TaskReport>& reports) {
  std::ostringstream os;
  int passed = 0;
  for (const auto& r : reports) {
    std::string tag = r.status == "pass" ? "PASS" : r.status == "fail" ? "FAIL" : "ERROR";
    char secs[32];
    std::snprintf(secs, sizeof secs, "%.3fs", r.seconds);
    os << "[" << tag << "] " << r.id << " (" << r.op << ") " << secs << "\n";
    for (const auto& [k, v] : r.fields) os << "    " << k << ": " << v << "\n";
    passed += r.status == "pass";
  }
  os << passed << "/" << reports.size() << " tasks passed\n";
  return os.str();
}

int exit_status(const std::vector<TaskReport>& reports) {
  return std::all_of(reports.begin(), reports.end(), [](const TaskReport& r) { return r.status == "pass"; }) ? 0 : 1;
}

}  // namespace logsymp
