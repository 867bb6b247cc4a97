#include "mmls/polybasis.hpp"

#include <cmath>
#include <json.hpp>

#include "mmls/error.hpp"

namespace mmls {

namespace {

void check_dims(int d, int m) {
  if (d < 1) throw Error(ErrorKind::Configuration, "polynomial domain dimension must be >= 1");
  if (m < 0) throw Error(ErrorKind::Configuration, "polynomial degree must be >= 0");
}

// Appends all exponent vectors of `total` over variables [var, d) in
// descending lexicographic order.
void enumerate_degree(int var, int d, int total, std::vector<int>& current,
                      std::vector<std::vector<int>>& out) {
  if (var == d - 1) {
    current[static_cast<std::size_t>(var)] = total;
    out.push_back(current);
    return;
  }
  for (int e = total; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = e;
    enumerate_degree(var + 1, d, total - e, current, out);
  }
}

struct EquilibratedQr {
  Eigen::ColPivHouseholderQR<Matrix> qr;
  Vector scale;  // column norms removed before factoring
  double rcond = 0.0;
};

// Factors diag(sqrt w) E with unit-norm columns; throws on rank loss.
EquilibratedQr factor_weighted(const Matrix& E, const Vector& sqrt_w, double rcond_min) {
  Matrix A = sqrt_w.asDiagonal() * E;
  EquilibratedQr f;
  f.scale = A.colwise().norm().transpose();
  for (Index j = 0; j < A.cols(); ++j) {
    if (!(f.scale(j) > 0.0)) {
      throw Error(ErrorKind::RankDeficient, "weighted design matrix has a zero column",
                  {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(A.cols()), 0.0, 0});
    }
    A.col(j) /= f.scale(j);
  }
  f.qr.compute(A);
  const auto& R = f.qr.matrixR();
  const Index J = A.cols();
  const double largest = std::abs(R(0, 0));
  const double smallest = std::abs(R(J - 1, J - 1));
  f.rcond = largest > 0.0 ? smallest / largest : 0.0;
  if (!(f.rcond >= rcond_min)) {
    throw Error(ErrorKind::RankDeficient,
                "weighted design matrix is numerically rank deficient (rcond " +
                    std::to_string(f.rcond) + ")",
                {static_cast<std::size_t>(A.rows()), static_cast<std::size_t>(J), f.rcond, 0});
  }
  return f;
}

void check_problem(const WlsProblem& p) {
  if (p.X.rows() != p.Y.rows() || p.X.rows() != p.w.size())
    throw Error(ErrorKind::Configuration, "least-squares problem rows are not aligned");
  if (p.X.cols() < 1) throw Error(ErrorKind::Configuration, "chart coordinates need dimension >= 1");
  for (Index i = 0; i < p.w.size(); ++i)
    if (!std::isfinite(p.w(i)) || p.w(i) < 0.0)
      throw Error(ErrorKind::Configuration, "weights must be finite and nonnegative");
}

}  // namespace

Index basis_size(int d, int m) {
  check_dims(d, m);
  // C(m + d, d) computed incrementally; exact for the sizes used here.
  Index value = 1;
  for (int i = 1; i <= d; ++i) value = value * (m + i) / i;
  return value;
}

std::vector<std::vector<int>> graded_lex_exponents(int d, int m) {
  check_dims(d, m);
  std::vector<std::vector<int>> out;
  out.reserve(static_cast<std::size_t>(basis_size(d, m)));
  std::vector<int> current(static_cast<std::size_t>(d), 0);
  for (int total = 0; total <= m; ++total) enumerate_degree(0, d, total, current, out);
  return out;
}

Vector monomial_basis(const Eigen::Ref<const Vector>& x, int m) {
  const int d = static_cast<int>(x.size());
  const auto exps = graded_lex_exponents(d, m);
  // powers(k, e) = x_k^e
  Matrix powers(d, m + 1);
  for (int k = 0; k < d; ++k) {
    powers(k, 0) = 1.0;
    for (int e = 1; e <= m; ++e) powers(k, e) = powers(k, e - 1) * x(k);
  }
  Vector b(static_cast<Index>(exps.size()));
  for (std::size_t j = 0; j < exps.size(); ++j) {
    double v = 1.0;
    for (int k = 0; k < d; ++k) v *= powers(k, exps[j][static_cast<std::size_t>(k)]);
    b(static_cast<Index>(j)) = v;
  }
  return b;
}

Matrix design_matrix(const Eigen::Ref<const Matrix>& X, int m) {
  const int d = static_cast<int>(X.cols());
  const auto exps = graded_lex_exponents(d, m);
  Matrix E(X.rows(), static_cast<Index>(exps.size()));
  Matrix powers(d, m + 1);
  for (Index i = 0; i < X.rows(); ++i) {
    for (int k = 0; k < d; ++k) {
      powers(k, 0) = 1.0;
      for (int e = 1; e <= m; ++e) powers(k, e) = powers(k, e - 1) * X(i, k);
    }
    for (std::size_t j = 0; j < exps.size(); ++j) {
      double v = 1.0;
      for (int k = 0; k < d; ++k) v *= powers(k, exps[j][static_cast<std::size_t>(k)]);
      E(i, static_cast<Index>(j)) = v;
    }
  }
  return E;
}

Vector PolyModel::evaluate(const Eigen::Ref<const Vector>& x) const {
  if (x.size() != dim_domain)
    throw Error(ErrorKind::Configuration, "polynomial evaluated at a point of the wrong dimension");
  return coeffs.transpose() * monomial_basis(x, degree);
}

std::string PolyModel::to_json() const {
  nlohmann::json j;
  j["ordering"] = kOrdering;
  j["dim_domain"] = dim_domain;
  j["degree"] = degree;
  j["dim_range"] = dim_range();
  j["exponents"] = graded_lex_exponents(dim_domain, degree);
  nlohmann::json rows = nlohmann::json::array();
  for (Index r = 0; r < coeffs.rows(); ++r) {
    std::vector<double> row(coeffs.cols());
    for (Index c = 0; c < coeffs.cols(); ++c) row[static_cast<std::size_t>(c)] = coeffs(r, c);
    rows.push_back(row);
  }
  j["coeffs"] = rows;
  return j.dump();
}

PolyModel PolyModel::from_json(const std::string& text) {
  try {
    const auto j = nlohmann::json::parse(text);
    if (j.at("ordering").get<std::string>() != kOrdering)
      throw Error(ErrorKind::Configuration, "unsupported monomial ordering");
    PolyModel p;
    p.dim_domain = j.at("dim_domain").get<int>();
    p.degree = j.at("degree").get<int>();
    const Index range = j.at("dim_range").get<Index>();
    const auto& rows = j.at("coeffs");
    const Index J = basis_size(p.dim_domain, p.degree);
    if (static_cast<Index>(rows.size()) != J)
      throw Error(ErrorKind::Configuration, "coefficient row count does not match the basis size");
    p.coeffs.resize(J, range);
    for (Index r = 0; r < J; ++r) {
      const auto row = rows.at(static_cast<std::size_t>(r)).get<std::vector<double>>();
      if (static_cast<Index>(row.size()) != range)
        throw Error(ErrorKind::Configuration, "coefficient row has the wrong width");
      for (Index c = 0; c < range; ++c) p.coeffs(r, c) = row[static_cast<std::size_t>(c)];
    }
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("malformed polynomial JSON: ") + e.what());
  }
}

PolyModel wls_fit(const WlsProblem& problem, int m, const FitOptions& options) {
  check_problem(problem);
  const int d = static_cast<int>(problem.X.cols());
  const Index J = basis_size(d, m);

  std::vector<Index> keep;
  keep.reserve(static_cast<std::size_t>(problem.w.size()));
  for (Index i = 0; i < problem.w.size(); ++i)
    if (problem.w(i) > 0.0) keep.push_back(i);
  const Index n_pos = static_cast<Index>(keep.size());
  if (n_pos < J) {
    throw Error(ErrorKind::InsufficientSamples,
                "only " + std::to_string(n_pos) + " positive-weight samples for " +
                    std::to_string(J) + " basis polynomials",
                {static_cast<std::size_t>(n_pos), static_cast<std::size_t>(J), 0.0, 0});
  }

  Matrix X(n_pos, d);
  Matrix Y(n_pos, problem.Y.cols());
  Vector sqrt_w(n_pos);
  for (Index r = 0; r < n_pos; ++r) {
    X.row(r) = problem.X.row(keep[static_cast<std::size_t>(r)]);
    Y.row(r) = problem.Y.row(keep[static_cast<std::size_t>(r)]);
    sqrt_w(r) = std::sqrt(problem.w(keep[static_cast<std::size_t>(r)]));
  }

  const Matrix E = design_matrix(X, m);
  const EquilibratedQr f = factor_weighted(E, sqrt_w, options.rcond);
  const Matrix B = sqrt_w.asDiagonal() * Y;

  PolyModel model;
  model.dim_domain = d;
  model.degree = m;
  model.coeffs = f.qr.solve(B);
  for (Index j = 0; j < J; ++j) model.coeffs.row(j) /= f.scale(j);
  return model;
}

Vector backus_gilbert_coeffs(const WlsProblem& problem, int m, const Eigen::Ref<const Vector>& x0,
                             const FitOptions& options) {
  check_problem(problem);
  const int d = static_cast<int>(problem.X.cols());
  if (x0.size() != d) throw Error(ErrorKind::Configuration, "evaluation point has the wrong dimension");
  const Index J = basis_size(d, m);
  const Index N = problem.w.size();
  for (Index i = 0; i < N; ++i)
    if (!(problem.w(i) > 0.0))
      throw Error(ErrorKind::ZeroWeight, "dual solve requires strictly positive weights");
  if (N < J) {
    throw Error(ErrorKind::InsufficientSamples, "too few samples for the dual solve",
                {static_cast<std::size_t>(N), static_cast<std::size_t>(J), 0.0, 0});
  }

  // a = W E (E^T W E)^{-1} c. With A = sqrt(W) E S^{-1} = Q R P^T the Gram
  // matrix is S P R^T R P^T S, so the multiplier solve is two triangular solves.
  const Matrix E = design_matrix(problem.X, m);
  const Vector sqrt_w = problem.w.cwiseSqrt();
  const EquilibratedQr f = factor_weighted(E, sqrt_w, options.rcond);
  const Vector c = monomial_basis(x0, m);

  const auto R = f.qr.matrixR().topLeftCorner(J, J).triangularView<Eigen::Upper>();
  const auto& P = f.qr.colsPermutation();
  Vector y = P.transpose() * c.cwiseQuotient(f.scale);
  y = R.transpose().solve(y);
  y = R.solve(y);
  const Vector z = (P * y).cwiseQuotient(f.scale);
  return problem.w.cwiseProduct(E * z);
}

}  // namespace mmls
