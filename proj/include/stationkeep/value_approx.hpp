#pragma once

#include <memory>
#include <string>

#include "stationkeep/dynamics.hpp"
#include "stationkeep/zs_game.hpp"

namespace stationkeep {

/// Fixed feature map sigma: R^n -> R^m with sigma(0) = 0 so that the value
/// estimate vanishes at the origin. sigma_jacobian returns d sigma / d zeta
/// (m x n).
class BasisSet {
 public:
  virtual ~BasisSet() = default;
  virtual int dim() const = 0;   // state dimension n
  virtual int size() const = 0;  // feature count m
  virtual Eigen::VectorXd sigma(const Eigen::VectorXd& zeta) const = 0;
  virtual Eigen::MatrixXd sigma_jacobian(const Eigen::VectorXd& zeta) const = 0;
  virtual std::string name() const = 0;
};

/// All distinct quadratic monomials zeta_i*zeta_j, i <= j, ordered
/// (0,0),(0,1),...,(0,n-1),(1,1),...,(n-1,n-1); m = n(n+1)/2.
class QuadraticBasis final : public BasisSet {
 public:
  explicit QuadraticBasis(int n);

  int dim() const override { return n_; }
  int size() const override { return m_; }
  Eigen::VectorXd sigma(const Eigen::VectorXd& zeta) const override;
  Eigen::MatrixXd sigma_jacobian(const Eigen::VectorXd& zeta) const override;
  std::string name() const override { return "quadratic"; }

  /// Feature index of the monomial zeta_i*zeta_j (i <= j).
  int monomial_index(int i, int j) const;

 private:
  int n_, m_;
};

/// Basis registry keyed by name ("quadratic" ships by default).
std::unique_ptr<BasisSet> make_basis(const std::string& name, int dim);

/// Critic and actor weight estimates over a common basis, with the actor
/// projection radius.
struct WeightSet {
  Eigen::VectorXd Wc;
  Eigen::VectorXd Wa1;
  Eigen::VectorXd Wa2;
  double W_bar = 10.0;
};

enum class Player { one, two };

struct Regressor {
  Eigen::VectorXd omega;
  double p = 1.0;
};

struct BellmanError {
  double delta = 0.0;
  Eigen::VectorXd omega;
  double p = 1.0;
};

struct GMatrices {
  Eigen::MatrixXd G1;   // g R^-1 g'      (n x n)
  Eigen::MatrixXd G2;   // g g' / gamma^2 (n x n)
  Eigen::MatrixXd Gs1;  // sigma' G1 sigma'' (m x m)
  Eigen::MatrixXd Gs2;  // sigma' G2 sigma'' (m x m)
};

/// V_hat = Wc' sigma(zeta).
double value_estimate(const Eigen::VectorXd& wc, const Eigen::VectorXd& zeta,
                      const BasisSet& basis);

/// u1_hat = -1/2 R^-1 g' sigma'' Wa1,  u2_hat = 1/(2 gamma^2) g' sigma'' Wa2.
Eigen::VectorXd policy_hat(const Eigen::VectorXd& w, const Eigen::VectorXd& zeta,
                           const BasisSet& basis, const AffineDynamics& dyn,
                           const GameCost& cost, Player which);

/// omega = sigma'(f + g(u1_hat + u2_hat)), p = sqrt(1 + omega'omega).
Regressor regressor(const Eigen::VectorXd& zeta, const Eigen::VectorXd& u1_hat,
                    const Eigen::VectorXd& u2_hat, const BasisSet& basis,
                    const AffineDynamics& dyn);

/// Measurable form delta = r(zeta, u1_hat, u2_hat) + Wc' omega, with the
/// policies taken from the actor weights.
BellmanError bellman_error(const Eigen::VectorXd& zeta, const WeightSet& weights,
                           const BasisSet& basis, const AffineDynamics& dyn,
                           const GameCost& cost);

GMatrices g_matrices(const Eigen::VectorXd& zeta, const BasisSet& basis,
                     const AffineDynamics& dyn, const GameCost& cost);

}  // namespace stationkeep
