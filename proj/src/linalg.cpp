#include "logsymp/linalg.hpp"

namespace logsymp {

Matrix<mpq_class> evaluate(const Matrix<Scalar>& m, const std::vector<mpq_class>& point) {
  return m.map([&](const Scalar& s) { return s.evaluate(point); });
}

Matrix<double> evaluate(const Matrix<Scalar>& m, const std::vector<double>& point) {
  return m.map([&](const Scalar& s) { return s.evaluate(point); });
}

}  // namespace logsymp
