#include "gridres/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/SparseCholesky>

#include "gridres/error.hpp"

namespace gridres::qp {

using Triplet = Eigen::Triplet<double>;

double Problem::objective(const Vector& x) const {
  return 0.5 * x.dot(P * x) + q.dot(x) + objective_constant;
}

int Builder::add_variable(double lb, double ub, double cost) {
  if (lb > ub) throw InputError("qp: variable lower bound exceeds upper bound");
  lb_.push_back(lb);
  ub_.push_back(ub);
  cost_.push_back(cost);
  return int(lb_.size()) - 1;
}

void Builder::set_bounds(int var, double lb, double ub) {
  if (lb > ub) throw InputError("qp: variable lower bound exceeds upper bound");
  lb_.at(std::size_t(var)) = lb;
  ub_.at(std::size_t(var)) = ub;
}

void Builder::add_cost(int var, double cost) { cost_.at(std::size_t(var)) += cost; }

void Builder::add_square(const Terms& terms, double weight) {
  for (const auto& [i, ai] : terms)
    for (const auto& [j, aj] : terms) p_.emplace_back(i, j, 2.0 * weight * ai * aj);
}

void Builder::add_equality(const Terms& terms, double rhs) {
  int row = int(eq_rhs_.size());
  for (const auto& [j, a] : terms) a_.emplace_back(row, j, a);
  eq_rhs_.push_back(rhs);
}

void Builder::add_inequality(const Terms& terms, double rhs) {
  int row = int(in_rhs_.size());
  for (const auto& [j, a] : terms) g_.emplace_back(row, j, a);
  in_rhs_.push_back(rhs);
}

Problem Builder::build() const {
  const int n = num_variables();
  Problem pr;
  pr.P.resize(n, n);
  pr.P.setFromTriplets(p_.begin(), p_.end());
  pr.q = Eigen::Map<const Vector>(cost_.data(), n);
  pr.A.resize(num_equalities(), n);
  pr.A.setFromTriplets(a_.begin(), a_.end());
  pr.b = Eigen::Map<const Vector>(eq_rhs_.data(), num_equalities());
  pr.G.resize(num_inequalities(), n);
  pr.G.setFromTriplets(g_.begin(), g_.end());
  pr.h = Eigen::Map<const Vector>(in_rhs_.data(), num_inequalities());
  pr.lb = Eigen::Map<const Vector>(lb_.data(), n);
  pr.ub = Eigen::Map<const Vector>(ub_.data(), n);
  pr.objective_constant = constant_;
  return pr;
}

std::string to_string(Status s) {
  switch (s) {
    case Status::Solved: return "solved";
    case Status::SolvedInaccurate: return "solved_inaccurate";
    case Status::MaxIterations: return "max_iterations";
    case Status::NumericalError: return "numerical_error";
  }
  return "?";
}

namespace {

double inf_norm(const Vector& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

double max_step(const Vector& v, const Vector& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

// Inequalities and equalities with variable bounds folded in.
struct Standardized {
  SparseMatrix G, Gt, A, At;
  Vector h, b;
};

Standardized standardize(const Problem& pr) {
  const int n = pr.num_variables();
  std::vector<Triplet> gt, at;
  std::vector<double> hv, bv;
  for (int k = 0; k < pr.G.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(pr.G, k); it; ++it) gt.emplace_back(int(it.row()), int(it.col()), it.value());
  for (int k = 0; k < pr.A.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(pr.A, k); it; ++it) at.emplace_back(int(it.row()), int(it.col()), it.value());
  hv.assign(pr.h.data(), pr.h.data() + pr.h.size());
  bv.assign(pr.b.data(), pr.b.data() + pr.b.size());

  for (int j = 0; j < n; ++j) {
    double lo = pr.lb[j], hi = pr.ub[j];
    if (std::isfinite(lo) && lo == hi) {
      at.emplace_back(int(bv.size()), j, 1.0);
      bv.push_back(lo);
      continue;
    }
    if (std::isfinite(hi)) {
      gt.emplace_back(int(hv.size()), j, 1.0);
      hv.push_back(hi);
    }
    if (std::isfinite(lo)) {
      gt.emplace_back(int(hv.size()), j, -1.0);
      hv.push_back(-lo);
    }
  }

  Standardized s;
  s.G.resize(int(hv.size()), n);
  s.G.setFromTriplets(gt.begin(), gt.end());
  s.A.resize(int(bv.size()), n);
  s.A.setFromTriplets(at.begin(), at.end());
  s.h = Eigen::Map<Vector>(hv.data(), Eigen::Index(hv.size()));
  s.b = Eigen::Map<Vector>(bv.data(), Eigen::Index(bv.size()));
  s.Gt = s.G.transpose();
  s.At = s.A.transpose();
  return s;
}

// Regularised KKT system [[P + GᵀWG + δI, Aᵀ], [A, −δI]] with iterative refinement
// against the unregularised matrix.
class KktSolver {
 public:
  KktSolver(const Problem& pr, const Standardized& st, const Settings& settings)
      : pr_(pr), st_(st), base_delta_(settings.regularization), refine_(settings.refinement_steps) {
    n_ = pr.num_variables();
    p_ = int(st.b.size());
  }

  // Retries with a larger regularisation when a pivot vanishes through cancellation.
  bool factor(const Vector& w) {
    for (double d = base_delta_; d <= 1e-3; d *= 100.0) {
      delta_ = d;
      assemble(w);
      if (!analyzed_ || K_.nonZeros() != pattern_nnz_) {
        ldlt_.analyzePattern(K_);
        analyzed_ = true;
        pattern_nnz_ = K_.nonZeros();
      }
      ldlt_.factorize(K_);
      if (ldlt_.info() == Eigen::Success) return true;
    }
    return false;
  }

  Vector solve(const Vector& rhs) const {
    Vector sol = ldlt_.solve(rhs);
    const double target = 1e-14 * (1.0 + inf_norm(rhs));
    for (int k = 0; k < refine_; ++k) {
      Vector res = rhs - apply_true(sol);
      if (inf_norm(res) <= target) break;
      sol += ldlt_.solve(res);
    }
    return sol;
  }

 private:
  void assemble(const Vector& w) {
    const int N = n_ + p_;
    SparseMatrix H = st_.Gt * w.asDiagonal() * st_.G;
    std::vector<Triplet> t;
    t.reserve(std::size_t(H.nonZeros() + pr_.P.nonZeros() + 2 * st_.A.nonZeros() + N));
    for (int k = 0; k < H.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(H, k); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int k = 0; k < pr_.P.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(pr_.P, k); it; ++it) t.emplace_back(int(it.row()), int(it.col()), it.value());
    for (int k = 0; k < st_.A.outerSize(); ++k) {
      for (SparseMatrix::InnerIterator it(st_.A, k); it; ++it) {
        t.emplace_back(n_ + int(it.row()), int(it.col()), it.value());
        t.emplace_back(int(it.col()), n_ + int(it.row()), it.value());
      }
    }
    for (int i = 0; i < n_; ++i) t.emplace_back(i, i, delta_);
    for (int i = 0; i < p_; ++i) t.emplace_back(n_ + i, n_ + i, -delta_);
    K_.resize(N, N);
    K_.setFromTriplets(t.begin(), t.end());
  }

  Vector apply_true(const Vector& v) const {
    Vector out = K_ * v;
    out.head(n_) -= delta_ * v.head(n_);
    out.tail(p_) += delta_ * v.tail(p_);
    return out;
  }

  const Problem& pr_;
  const Standardized& st_;
  double base_delta_;
  double delta_ = 0.0;
  int refine_;
  int n_ = 0, p_ = 0;
  SparseMatrix K_;
  Eigen::SimplicialLDLT<SparseMatrix, Eigen::Lower> ldlt_;
  bool analyzed_ = false;
  Eigen::Index pattern_nnz_ = 0;
};

}  // namespace

Solution solve(const Problem& pr, const Settings& settings) {
  const int n = pr.num_variables();
  Standardized st = standardize(pr);
  const int m = int(st.h.size());
  const int p = int(st.b.size());

  Solution sol;
  KktSolver kkt(pr, st, settings);

  // Starting point: least-squares fit of the inequalities subject to the equalities.
  Vector x, y, z, s;
  {
    if (!kkt.factor(Vector::Ones(m))) return sol;
    Vector rhs(n + p);
    rhs.head(n) = -pr.q + st.Gt * st.h;
    rhs.tail(p) = st.b;
    Vector xy = kkt.solve(rhs);
    x = xy.head(n);
    y = Vector::Zero(p);
    s = st.h - st.G * x;
    z = -s;
    if (m > 0) {
      double ts = -s.minCoeff();
      if (ts >= -1e-8 * std::max(1.0, s.norm())) s.array() += 1.0 + ts;
      double tz = -z.minCoeff();
      if (tz >= -1e-8 * std::max(1.0, z.norm())) z.array() += 1.0 + tz;
    }
  }

  const double b_scale = 1.0 + inf_norm(st.b);
  const double h_scale = 1.0 + inf_norm(st.h);
  const double q_scale = 1.0 + inf_norm(pr.q);

  // Best iterate by its worst normalised measure, kept for stalls.
  double best_measure = std::numeric_limits<double>::infinity();
  Solution best;

  for (int iter = 0; iter <= settings.max_iterations; ++iter) {
    Vector rd = pr.P * x + pr.q + st.At * y + st.Gt * z;
    Vector rp = st.A * x - st.b;
    Vector rg = st.G * x + s - st.h;
    double pobj = 0.5 * x.dot(pr.P * x) + pr.q.dot(x);
    double gap = m > 0 ? s.dot(z) : 0.0;

    sol.primal_residual = std::max(inf_norm(rp) / b_scale, inf_norm(rg) / h_scale);
    sol.dual_residual = inf_norm(rd) / q_scale;
    sol.gap = gap / std::max(1.0, std::abs(pobj));
    sol.iterations = iter;

    if (!std::isfinite(sol.primal_residual) || !std::isfinite(sol.dual_residual) || !std::isfinite(gap)) {
      sol.status = Status::NumericalError;
      break;
    }
    double measure = std::max({sol.primal_residual, sol.dual_residual, sol.gap});
    if (measure < best_measure) {
      best_measure = measure;
      best = sol;
      best.x = x;
      best.y = y;
      best.z = z;
    }
    if (sol.primal_residual <= settings.tolerance && sol.dual_residual <= settings.tolerance &&
        sol.gap <= settings.tolerance) {
      sol.status = Status::Solved;
      break;
    }
    if (iter == settings.max_iterations) {
      sol.status = Status::MaxIterations;
      break;
    }

    Vector w = z.cwiseQuotient(s);
    if (!kkt.factor(w)) {
        sol.status = Status::NumericalError;
      break;
    }

    auto newton = [&](const Vector& r_sz, Vector& dx, Vector& dy, Vector& dz, Vector& ds) {
      Vector rhs(n + p);
      Vector t = (z.cwiseProduct(rg) - r_sz).cwiseQuotient(s);
      rhs.head(n) = -rd - st.Gt * t;
      rhs.tail(p) = -rp;
      Vector d = kkt.solve(rhs);
      dx = d.head(n);
      dy = d.tail(p);
      Vector gdx = st.G * dx;
      dz = (z.cwiseProduct(rg + gdx) - r_sz).cwiseQuotient(s);
      ds = -rg - gdx;
    };

    double mu = m > 0 ? gap / m : 0.0;
    Vector dx, dy, dz, ds;
    Vector r_sz = s.cwiseProduct(z);
    newton(r_sz, dx, dy, dz, ds);
    double a_aff = std::min(max_step(s, ds), max_step(z, dz));
    double mu_aff = m > 0 ? (s + a_aff * ds).dot(z + a_aff * dz) / m : 0.0;
    double sigma = mu > 0.0 ? std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3) : 0.0;

    r_sz = s.cwiseProduct(z) + ds.cwiseProduct(dz) - Vector::Constant(m, sigma * mu);
    newton(r_sz, dx, dy, dz, ds);
    double alpha = std::min(1.0, 0.99 * std::min(max_step(s, ds), max_step(z, dz)));

    x += alpha * dx;
    y += alpha * dy;
    z += alpha * dz;
    s += alpha * ds;
  }

  if (sol.status == Status::Solved) {
    sol.x = std::move(x);
    sol.y = std::move(y);
    sol.z = std::move(z);
  } else if (best_measure <= settings.inaccurate_tolerance) {
    sol = std::move(best);
    sol.status = Status::SolvedInaccurate;
  } else if (best_measure < std::numeric_limits<double>::infinity()) {
    Status st = sol.status;
    sol = std::move(best);
    sol.status = st;
  }
  if (sol.x.size() == n) sol.objective = pr.objective(sol.x);
  return sol;
}

}  // namespace gridres::qp
