#pragma once

#include <Eigen/Core>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "fraclab/exponents.hpp"
#include "fraclab/grid.hpp"

namespace fraclab {

/// P_q u = sum_k b_k (-Delta)^{s_k} u + q u on the periodic box, with the
/// unknown supported on the rasterized Omega and data on the exterior.
struct ExteriorProblem {
  GridSpec grid;
  std::vector<Shape> Omega;
  std::vector<Shape> W1;
  std::vector<Shape> W2;
  ExponentConfig cfg;
  /// Potential; only its values on Omega nodes are used. Empty means q = 0.
  Field q;

  /// Omega nodes in flat-index order.
  std::vector<std::size_t> interior_nodes() const;
  /// Throws DomainError for weights that are not real and positive,
  /// PreconditionError for empty sets, W meeting Omega or non-finite q.
  void validate() const;
  /// Same geometry with another potential.
  ExteriorProblem with_q(Field q2) const;
};

/// Dense interior solves up to this many unknowns, conjugate gradients beyond.
inline constexpr std::size_t kDenseLimit = 4096;
/// Smallest singular value must exceed this times the operator norm.
inline constexpr double kEigenvalueThreshold = 1e-8;
inline constexpr double kSolverTolerance = 1e-9;

struct ExteriorSolution {
  Field u;
  /// ||A v - rhs|| / ||rhs|| of the interior system.
  double residual = 0.0;
};

class ExteriorSolver {
 public:
  /// Assembles and factorizes. Throws EigenvalueConditionError when 0 is
  /// numerically a Dirichlet eigenvalue.
  explicit ExteriorSolver(ExteriorProblem prob);
  ~ExteriorSolver();
  ExteriorSolver(ExteriorSolver&&) noexcept;

  const ExteriorProblem& problem() const { return prob_; }
  const std::vector<std::size_t>& interior() const { return nodes_; }

  /// sum_k b_k (-Delta)^{s_k} u on the whole grid.
  Field apply_L(const Field& u) const;
  /// Interior operator A_ij = K(y_i - y_j) + q_i delta_ij (dense path only).
  const Eigen::MatrixXcd& interior_matrix() const;
  bool dense() const;
  double sigma_min() const { return sigma_min_; }
  double op_norm() const { return op_norm_; }

  /// B_q(v, w) = sum_k b_k ((-Delta)^{s_k/2} v, (-Delta)^{s_k/2} w) + (q v, w)_Omega
  /// with (f, g) = h^n sum f conj(g).
  cplx form(const Field& v, const Field& w) const;

  /// u_f = f + v with P_q u_f = 0 on Omega. f must vanish on Omega.
  ExteriorSolution solve(const Field& f) const;
  /// Interior solve A v = rhs for arbitrary right-hand sides.
  Eigen::VectorXcd solve_interior(const Eigen::VectorXcd& rhs) const;
  /// P_q u_f on the W2 nodes, zero elsewhere.
  Field dn_apply(const Field& f) const;
  /// Dual pairing h^n sum (P_q u_f) g over nodes outside Omega.
  cplx dn_pair(const Field& f, const Field& g) const;

 private:
  Eigen::VectorXcd apply_A(const Eigen::VectorXcd& v) const;
  Eigen::VectorXcd restrict(const Field& u) const;
  Field extend(const Eigen::VectorXcd& v) const;

  ExteriorProblem prob_;
  std::vector<std::size_t> nodes_;
  std::vector<cplx> q_nodes_;
  struct Dense;
  std::unique_ptr<Dense> dense_;
  double sigma_min_ = 0.0;
  double op_norm_ = 0.0;
};

struct DNMatrix {
  std::vector<Field> sources;
  std::vector<Field> receivers;
  /// entries(i, j) = <Lambda_q f_i, g_j>.
  Eigen::MatrixXcd entries;
};

/// One solve per source, run in parallel.
DNMatrix dn_matrix(const ExteriorSolver& s, const std::vector<Field>& sources, const std::vector<Field>& receivers);

struct IdentityCheck {
  cplx lhs{};  // <(Lambda_1 - Lambda_2) f1, f2>
  cplx rhs{};  // ((q1 - q2) u1_f1, u2_f2)_Omega, bilinear
  double residual = 0.0;  // relative to max(|lhs|, |rhs|)
};

IdentityCheck integral_identity_check(const ExteriorSolver& s1, const ExteriorSolver& s2, const Field& f1,
                                      const Field& f2);

/// Gaussians exp(-|x-c|^2 / (2 (2h)^2)) restricted to the set, centred at
/// the first n Halton points of its bounding box that fall inside it. The
/// dictionary of size n is a prefix of the one of size n+1.
std::vector<Field> bump_dictionary(const GridSpec& g, const std::vector<Shape>& set, int n);

struct RungeResult {
  Eigen::VectorXcd coeffs;
  Field source;
  /// u_f on Omega nodes.
  Eigen::VectorXcd u_interior;
  double error = 0.0;           // ||u_f - g||_{L2(Omega)}
  double relative_error = 0.0;  // error / ||g||_{L2(Omega)}
  double objective = 0.0;       // error^2 + lambda ||c||^2
  double condition = 0.0;       // of the regularized normal matrix
  std::string advisory;         // set when the condition exceeds 1e12
};

/// min ||u_f - g||^2_{L2(Omega)} + lambda ||c||^2 over f in the W1 dictionary.
RungeResult runge_approximate(const ExteriorSolver& s, const Eigen::VectorXcd& g_interior, int n_sources,
                              double lambda);

struct IP2Options {
  int n_sources = 32;
  int n_receivers = 32;
  /// Relative singular-value cutoff when inverting the receiver solutions.
  double svd_cutoff = 1e-12;
  double runge_lambda = 1e-4;
  /// Largest admissible relative Runge error for the constant target.
  double eta = 0.5;
  double mask_level = 0.5;
};

struct Reconstruction {
  Field q;  // estimate on unmasked Omega nodes, zero elsewhere
  std::vector<bool> masked;  // per Omega node
  int masked_count = 0;
  int rank = 0;
  double runge_error = 0.0;  // relative L2(Omega) error of u - 1
  std::vector<double> singular_values;
};

/// Blind recovery of q on Omega from DN data. The reference solver (q = 0)
/// supplies the geometry; data.entries are the measurements.
Reconstruction reconstruct_q(const DNMatrix& data, const ExteriorSolver& reference, const IP2Options& opt = {});

/// DN data for the IP2 experiment generated by the forward solver.
DNMatrix ip2_measure(const ExteriorSolver& truth, const IP2Options& opt = {});

/// Relative L2 error over unmasked Omega nodes.
double reconstruction_error(const Reconstruction& r, const Field& q_true, const std::vector<std::size_t>& nodes);

using MatrixField = std::function<Eigen::Matrix3d(const Point&)>;

struct SymbolEstimate {
  std::vector<double> lambdas;
  std::vector<cplx> values;  // -lambda^{-2} div(A grad h)(x0)
  cplx extrapolated{};
  double max_admissible_lambda = 0.0;
};

/// h(x) = exp(i lambda xi.(x - x0)) chi0(|x - x0| / delta) with chi0 = 1 on
/// [0, 1/2] and 0 beyond 1. Richardson in 1/lambda over the ladder. Throws
/// DomainError naming the largest admissible lambda when a rung breaks the
/// Nyquist limit, TruncationError when the cut-off ball leaves the box.
SymbolEstimate aniso_symbol_extract(const MatrixField& A, const GridSpec& g, const Point& x0, const Point& xi,
                                    const std::vector<double>& ladder, double delta = 8.0);

/// Full symmetric matrix at x0: diagonal from xi = e_j, off-diagonal by
/// polarization over (e_j +- e_k) / sqrt(2).
Eigen::MatrixXd polarize_symbol(const MatrixField& A, const GridSpec& g, const Point& x0,
                                const std::vector<double>& ladder, double delta = 8.0);

}  // namespace fraclab
