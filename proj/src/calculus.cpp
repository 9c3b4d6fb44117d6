#include "logsymp/calculus.hpp"

#include <sstream>

namespace logsymp {

std::vector<int> blade_indices(Blade b) {
  std::vector<int> out;
  for (int i = 0; b; ++i, b >>= 1)
    if (b & 1u) out.push_back(i);
  return out;
}

Blade blade_of(const std::vector<int>& increasing) {
  Blade b = 0;
  for (int i : increasing) b |= 1u << i;
  return b;
}

int wedge_sign(Blade a, Blade b) {
  if (a & b) return 0;
  // Count pairs (i in a, j in b) with i > j.
  int inversions = 0;
  for (int j : blade_indices(b)) inversions += blade_degree(a & ~((2u << j) - 1));
  return inversions % 2 ? -1 : 1;
}

std::vector<Blade> blades(int rank, int degree) {
  std::vector<Blade> out;
  if (degree < 0 || degree > rank) return out;
  std::vector<int> idx(degree);
  for (int i = 0; i < degree; ++i) idx[i] = i;
  while (true) {
    out.push_back(blade_of(idx));
    int p = degree - 1;
    while (p >= 0 && idx[p] == rank - degree + p) --p;
    if (p < 0) break;
    ++idx[p];
    for (int q = p + 1; q < degree; ++q) idx[q] = idx[q - 1] + 1;
  }
  return out;
}

Form function_form(int rank, const Scalar& f) {
  Form r(rank, 0);
  r.add(0, f);
  return r;
}

Form one_form(const std::vector<Scalar>& c) {
  Form r(static_cast<int>(c.size()), 1);
  for (std::size_t i = 0; i < c.size(); ++i) r.add(1u << i, c[i]);
  return r;
}

Form two_form(const Matrix<Scalar>& m) {
  Form r(m.rows(), 2);
  for (int a = 0; a < m.rows(); ++a)
    for (int b = a + 1; b < m.cols(); ++b) r.add((1u << a) | (1u << b), m(a, b));
  return r;
}

Matrix<Scalar> form_matrix(const Form& f) {
  if (f.degree != 2) throw std::invalid_argument("form_matrix needs a 2-form");
  Matrix<Scalar> m(f.rank, f.rank);
  for (const auto& [b, s] : f.coeffs) {
    auto idx = blade_indices(b);
    m(idx[0], idx[1]) = s;
    m(idx[1], idx[0]) = -s;
  }
  return m;
}

MultiSection function_multisection(int rank, const Scalar& f) {
  MultiSection r(rank, 0);
  r.add(0, f);
  return r;
}

MultiSection multisection(const Section& s) {
  MultiSection r(static_cast<int>(s.size()), 1);
  for (std::size_t i = 0; i < s.size(); ++i) r.add(1u << i, s[i]);
  return r;
}

MultiSection bivector(const Matrix<Scalar>& m) {
  MultiSection r(m.rows(), 2);
  for (int a = 0; a < m.rows(); ++a)
    for (int b = a + 1; b < m.cols(); ++b) r.add((1u << a) | (1u << b), m(a, b));
  return r;
}

Matrix<Scalar> bivector_matrix(const MultiSection& u) {
  if (u.degree != 2) throw std::invalid_argument("bivector_matrix needs a 2-section");
  Matrix<Scalar> m(u.rank, u.rank);
  for (const auto& [b, s] : u.coeffs) {
    auto idx = blade_indices(b);
    m(idx[0], idx[1]) = s;
    m(idx[1], idx[0]) = -s;
  }
  return m;
}

Section as_section(const MultiSection& u) {
  if (u.degree != 1) throw std::invalid_argument("not a section");
  Section s(u.rank);
  for (const auto& [b, c] : u.coeffs) s[blade_indices(b)[0]] = c;
  return s;
}

std::vector<Scalar> as_one_form(const Form& a) {
  if (a.degree != 1) throw std::invalid_argument("not a 1-form");
  std::vector<Scalar> s(a.rank);
  for (const auto& [b, c] : a.coeffs) s[blade_indices(b)[0]] = c;
  return s;
}

Form d(const Algebroid& a, const Scalar& f) {
  Form r(a.rank(), 1);
  for (int i = 0; i < a.rank(); ++i) r.add(1u << i, a.derive(i, f));
  return r;
}

Form d(const Algebroid& a, const Form& alpha) {
  const int r = a.rank();
  if (alpha.rank != r) throw std::invalid_argument("form rank does not match the algebroid");
  Form out(r, alpha.degree + 1);
  if (alpha.degree >= r) return out;
  // d eps^k = -sum_{i<j} c_ij^k eps^i ^ eps^j
  std::vector<Form> d_eps(r, Form(r, 2));
  for (int i = 0; i < r; ++i)
    for (int j = i + 1; j < r; ++j)
      for (int k = 0; k < r; ++k) d_eps[k].add((1u << i) | (1u << j), -a.c(i, j, k));
  for (const auto& [b, f] : alpha.coeffs) {
    Form basis(r, alpha.degree);
    basis.add(b, Scalar(1));
    out = out + wedge(d(a, f), basis);
    auto idx = blade_indices(b);
    for (std::size_t m = 0; m < idx.size(); ++m) {
      if (d_eps[idx[m]].is_zero()) continue;
      Form rest(r, alpha.degree - 1);
      rest.add(b & ~(1u << idx[m]), m % 2 ? -f : f);
      out = out + wedge(d_eps[idx[m]], rest);
    }
  }
  return out;
}

Form contract(const Section& sigma, const Form& alpha) {
  if (alpha.degree == 0) throw std::invalid_argument("cannot contract a function");
  Form out(alpha.rank, alpha.degree - 1);
  for (const auto& [b, f] : alpha.coeffs) {
    auto idx = blade_indices(b);
    for (std::size_t p = 0; p < idx.size(); ++p) {
      const Scalar& s = sigma[idx[p]];
      if (s.is_zero()) continue;
      out.add(b & ~(1u << idx[p]), p % 2 ? -(s * f) : s * f);
    }
  }
  return out;
}

Scalar evaluate_on(const Form& alpha, const std::vector<Section>& sections) {
  if (static_cast<int>(sections.size()) != alpha.degree) throw std::invalid_argument("wrong number of arguments");
  Form cur = alpha;
  for (const auto& s : sections) cur = contract(s, cur);
  return cur.get(0);
}

Form lie_derivative(const Algebroid& a, const Section& sigma, const Form& alpha) {
  if (alpha.degree == 0) return function_form(a.rank(), a.derive(sigma, alpha.get(0)));
  return contract(sigma, d(a, alpha)) + d(a, contract(sigma, alpha));
}

Scalar pair(const MultiSection& u, const Form& alpha) {
  if (u.degree != alpha.degree) throw std::invalid_argument("pairing needs equal degrees");
  Scalar s;
  for (const auto& [b, c] : u.coeffs) {
    auto it = alpha.coeffs.find(b);
    if (it != alpha.coeffs.end()) s += c * it->second;
  }
  return s;
}

namespace {

int parity(int n) { return ((n % 2) + 2) % 2; }

MultiSection basis_blade(int rank, Blade b, const Scalar& c) {
  MultiSection u(rank, blade_degree(b));
  u.add(b, c);
  return u;
}

/// K(e_I, g) = sum_k (-1)^{p+k+1} (e_{i_k} . g) e_{I without i_k}, k counted from zero.
MultiSection koszul_blade_function(const Algebroid& a, Blade b, const Scalar& g) {
  const int p = blade_degree(b);
  MultiSection out(a.rank(), p - 1);
  if (p == 0 || g.is_constant()) return out;
  auto idx = blade_indices(b);
  for (int k = 0; k < p; ++k) {
    Scalar dg = a.derive(idx[k], g);
    out.add(b & ~(1u << idx[k]), parity(p + k + 1) ? -dg : dg);
  }
  return out;
}

/// K(f e_I, e_j) = -((e_j . f) e_I + f sum_m e_{i_1} .. [e_j, e_{i_m}] .. e_{i_p}).
MultiSection koszul_with_frame(const Algebroid& a, Blade b, const Scalar& f, int j) {
  const int r = a.rank(), p = blade_degree(b);
  MultiSection out(r, p);
  out.add(b, -a.derive(j, f));
  auto idx = blade_indices(b);
  for (int m = 0; m < p; ++m) {
    MultiSection prod = function_multisection(r, -f);
    for (int q = 0; q < p; ++q) {
      if (q == m) {
        MultiSection br(r, 1);
        for (int k = 0; k < r; ++k) br.add(1u << k, a.c(j, idx[m], k));
        prod = wedge(prod, br);
      } else {
        prod = wedge(prod, basis_blade(r, 1u << idx[q], Scalar(1)));
      }
      if (prod.is_zero()) break;
    }
    out = out + prod;
  }
  return out;
}

/// K(f e_I, e_J) by Leibniz in the second argument.
MultiSection koszul_with_blade(const Algebroid& a, Blade bi, const Scalar& f, Blade bj) {
  const int r = a.rank(), p = blade_degree(bi), q = blade_degree(bj);
  if (q == 0) return MultiSection(r, p - 1);
  int first = blade_indices(bj)[0];
  Blade rest = bj & ~(1u << first);
  MultiSection lhs = wedge(koszul_with_frame(a, bi, f, first), basis_blade(r, rest, Scalar(1)));
  MultiSection rhs = wedge(basis_blade(r, 1u << first, Scalar(1)), koszul_with_blade(a, bi, f, rest));
  return parity(p - 1) ? lhs - rhs : lhs + rhs;
}

/// Biderivation in the Koszul convention: K(sigma, f) = sigma . f, K(sigma, tau) = [sigma, tau].
MultiSection koszul(const Algebroid& a, const MultiSection& u, const MultiSection& v) {
  const int r = a.rank();
  MultiSection out(r, u.degree + v.degree - 1);
  if (out.degree < 0) return out;
  for (const auto& [bi, f] : u.coeffs)
    for (const auto& [bj, g] : v.coeffs) {
      if (bi == 0) {
        // K(f, g e_J) = (-1)^q K(g e_J, f)
        MultiSection t = wedge(koszul_blade_function(a, bj, f), basis_blade(r, 0, g));
        out = out + (parity(blade_degree(bj)) ? -t : t);
        continue;
      }
      MultiSection t1 = wedge(koszul_blade_function(a, bi, g), basis_blade(r, bj, f));
      MultiSection t2 = koszul_with_blade(a, bi, f, bj).scaled(g);
      out = out + t1 + t2;
    }
  out.degree = u.degree + v.degree - 1;
  return out;
}

}  // namespace

MultiSection schouten(const Algebroid& a, const MultiSection& u, const MultiSection& v) {
  return -koszul(a, v, u);
}

Form pullback_form(const AlgebroidMorphism& phi, const Form& alpha) {
  const int rs = phi.source->rank();
  std::vector<Form> pulled;
  for (int k = 0; k < phi.target->rank(); ++k) {
    std::vector<Scalar> row(rs);
    for (int i = 0; i < rs; ++i) row[i] = phi.fibre(k, i);
    pulled.push_back(one_form(row));
  }
  Form out(rs, alpha.degree);
  for (const auto& [b, f] : alpha.coeffs) {
    Form term = function_form(rs, f.substitute(phi.base_map));
    for (int k : blade_indices(b)) {
      term = wedge(term, pulled[k]);
      if (term.is_zero()) break;
    }
    out = out + term;
  }
  out.degree = alpha.degree;
  return out;
}

namespace {

std::vector<Scalar> scaling_images(const RetractionSpec& r, const Scalar& s, int dim) {
  std::vector<Scalar> images;
  for (int i = 0; i < dim; ++i) images.push_back(Scalar::variable(i));
  for (int i : r.normal) images[i] = s * images[i];
  return images;
}

Scalar transport_factor(const RetractionSpec& r, Blade b, const Scalar& s) {
  int total = 0;
  for (int j : blade_indices(b)) total += r.transport_exponents.at(j);
  return total == 0 ? Scalar(1) : s.pow(total);
}

void require_closed_form(const RetractionSpec& r) {
  if (!r.closed_form) throw NonPolynomialIntegrand("frame transport has no closed form; use the numeric path");
}

}  // namespace

Form retraction_pullback(const RetractionSpec& r, const Form& alpha, const Scalar& s, int dim) {
  require_closed_form(r);
  auto images = scaling_images(r, s, dim);
  Form out(alpha.rank, alpha.degree);
  for (const auto& [b, f] : alpha.coeffs) out.add(b, f.substitute(images) * transport_factor(r, b, s));
  return out;
}

Form retraction_pullback_at_zero(const RetractionSpec& r, const Form& alpha, int dim) {
  require_closed_form(r);
  auto images = scaling_images(r, Scalar(0), dim);
  Form out(alpha.rank, alpha.degree);
  for (const auto& [b, f] : alpha.coeffs) {
    int total = 0;
    for (int j : blade_indices(b)) total += r.transport_exponents.at(j);
    if (total > 0) continue;
    Scalar v = f.substitute(images);
    if (total < 0 && !v.is_zero()) throw NonPolynomialIntegrand("retraction pullback diverges at s = 0");
    out.add(b, v);
  }
  return out;
}

Form kappa_integrand(const RetractionSpec& r, const Form& alpha, int dim) {
  require_closed_form(r);
  if (alpha.degree == 0) return Form(alpha.rank, -1);
  const Scalar s = Scalar::variable(dim);
  auto images = scaling_images(r, s, dim);
  Section vel(r.euler.size());
  for (std::size_t i = 0; i < vel.size(); ++i) vel[i] = r.euler[i].substitute(images) / s;
  Form moved(alpha.rank, alpha.degree);
  for (const auto& [b, f] : alpha.coeffs) moved.add(b, f.substitute(images));
  Form contracted = contract(vel, moved);
  Form out(alpha.rank, alpha.degree - 1);
  for (const auto& [b, f] : contracted.coeffs) out.add(b, f * transport_factor(r, b, s));
  return out;
}

Form homotopy_kappa(const RetractionSpec& r, const Form& alpha, int dim) {
  Form out(alpha.rank, alpha.degree - 1);
  if (alpha.degree == 0) return out;
  Form integrand = kappa_integrand(r, alpha, dim);
  for (const auto& [b, f] : integrand.coeffs) {
    if (f.den().variable_mask() & (1u << dim))
      throw NonPolynomialIntegrand("kappa integrand is not polynomial in s");
    auto coeffs = f.num().coefficients_in(dim);
    Polynomial sum;
    for (std::size_t m = 0; m < coeffs.size(); ++m) sum += coeffs[m].scaled(mpq_class(1, static_cast<long>(m + 1)));
    out.add(b, Scalar(sum, f.den()));
  }
  return out;
}

namespace {

template <int Kind>
std::string graded_to_string(const Graded<Kind>& f, const Chart& chart, const std::vector<std::string>& labels,
                             const char* prefix) {
  if (f.is_zero()) return "0";
  std::ostringstream os;
  bool first = true;
  for (Blade b : blades(f.rank, f.degree)) {
    auto it = f.coeffs.find(b);
    if (it == f.coeffs.end()) continue;
    if (!first) os << " + ";
    first = false;
    os << "(" << it->second.to_string(chart) << ")";
    for (int i : blade_indices(b)) os << (i == blade_indices(b)[0] ? "*" : "^") << prefix << labels.at(i);
  }
  return os.str();
}

}  // namespace

std::string to_string(const Form& f, const Chart& chart, const std::vector<std::string>& labels) {
  return graded_to_string(f, chart, labels, "d");
}

std::string to_string(const MultiSection& f, const Chart& chart, const std::vector<std::string>& labels) {
  return graded_to_string(f, chart, labels, "");
}

}  // namespace logsymp
