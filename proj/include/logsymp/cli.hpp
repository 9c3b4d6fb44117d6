// Line-oriented model files, task dispatch and reports.
//
// One statement per line, '#' starts a comment. Frame and coordinate indices are 1-based.
//
//   chart P coords x y divisor x
//   algebroid A tangent|log P
//   algebroid g lie labels a b
//   algebroid A custom P labels e1 e2
//   anchor A e1 : x, 0
//   bracket A e1 e2 : 2*x, 0
//   section eps A : 1, 0
//   form w A 2 : [1 2] 1/(1+x) ; ...
//   multisection L A 2 : [1 2] x*y
//   points S P : 0, 1 ; 1/2, -1
//   subspace N P : x = 0
//   matrix F P 2 1 : y ; 1
//   morphism mu A E : <base expressions> | <fibre rows separated by ;>
//   task <id> <operation> key=value ...
#pragma once

#include "logsymp/moser.hpp"

#include <cstdint>
#include <variant>

namespace logsymp {

class ModelError : public std::runtime_error {
 public:
  ModelError(const std::string& what, int line, int column)
      : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
        line_(line),
        column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_, column_;
};

namespace model {

struct ChartDecl {
  std::string name;
  Chart chart;
  bool operator==(const ChartDecl&) const = default;
};
struct AlgebroidDecl {
  std::string name, kind, chart;
  std::vector<std::string> labels;
  bool operator==(const AlgebroidDecl&) const = default;
};
struct AnchorDecl {
  std::string algebroid, label;
  std::vector<Scalar> row;
  bool operator==(const AnchorDecl&) const = default;
};
struct BracketDecl {
  std::string algebroid, left, right;
  Section value;
  bool operator==(const BracketDecl&) const = default;
};
struct SectionDecl {
  std::string name, algebroid;
  Section value;
  bool operator==(const SectionDecl&) const = default;
};
struct FormDecl {
  std::string name, algebroid;
  bool multisection = false;
  int degree = 0;
  std::map<Blade, Scalar> coeffs;
  bool operator==(const FormDecl&) const = default;
};
struct PointsDecl {
  std::string name, chart;
  std::vector<RationalPoint> points;
  bool operator==(const PointsDecl&) const = default;
};
struct SubspaceDecl {
  std::string name, chart;
  std::vector<std::pair<std::string, mpq_class>> fixed;
  bool operator==(const SubspaceDecl&) const = default;
};
struct MatrixDecl {
  std::string name, chart;
  int rows = 0, cols = 0;
  std::vector<Scalar> entries;
  bool operator==(const MatrixDecl&) const = default;
};
struct MorphismDecl {
  std::string name, source, target;
  std::vector<Scalar> base;
  std::vector<std::vector<Scalar>> fibre;
  bool operator==(const MorphismDecl&) const = default;
};
struct TaskDecl {
  std::string id, op;
  std::vector<std::pair<std::string, std::string>> args;
  bool operator==(const TaskDecl&) const = default;
};

using Statement = std::variant<ChartDecl, AlgebroidDecl, AnchorDecl, BracketDecl, SectionDecl, FormDecl, PointsDecl,
                               SubspaceDecl, MatrixDecl, MorphismDecl, TaskDecl>;

}  // namespace model

struct ModelFile {
  std::vector<model::Statement> statements;
  /// Source line of each statement; not part of equality.
  std::vector<int> lines;
  bool operator==(const ModelFile& o) const { return statements == o.statements; }
};

/// Throws ModelError with the line and column of the first problem, including unresolved names and
/// dimension mismatches.
ModelFile parse_model(const std::string& text);
std::string print_model(const ModelFile& m);

/// Built-in catalogue; throws std::invalid_argument for an unknown name.
std::vector<std::string> builtin_names();
std::string emit_builtin(const std::string& name);

struct TaskReport {
  std::string id, op;
  /// "pass", "fail" or "error".
  std::string status;
  std::vector<std::pair<std::string, std::string>> fields;
  double seconds = 0;
};

struct RunOptions {
  /// A task id or "all".
  std::string task = "all";
  std::uint64_t seed = 20240611;
  double tol = 1e-8;
};

/// Reports in declaration order. Throws ModelError when the selected task does not exist.
std::vector<TaskReport> run_model(const ModelFile& m, const RunOptions& options = {});

/// Flat key=value lines without timing, so identical inputs give identical bytes.
std::string format_machine(const std::vector<TaskReport>& reports);
std::string format_text(const std::vector<TaskReport>& reports);

/// 0 when every report passes, 1 otherwise.
int exit_status(const std::vector<TaskReport>& reports);

}  // namespace logsymp
