// Conjugates Z1 Z2 by the single-triangle evolution for the duality time and
// compares it with the three-level exchange operator on site 3.

#include <cstdio>

#include <Eigen/Eigenvalues>

#include "ryd/operators.hpp"

int main() {
  using namespace ryd;
  const ModelParams evo = ModelParams::evolution();
  const double tau = duality_time(evo.rabi);
  const Eigen::Matrix4cd H = triangle_block(evo);

  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> es(H);
  Eigen::Vector4cd phase;
  for (int k = 0; k < 4; ++k) phase[k] = std::polar(1.0, -tau * es.eigenvalues()[k]);
  const Eigen::Matrix4cd U = es.eigenvectors() * phase.asDiagonal() * es.eigenvectors().adjoint();

  // Basis order g, r1, r2, r3.  Z_i = 1 - 2 n_i.
  Eigen::Matrix4cd z12 = Eigen::Vector4cd(1, -1, -1, 1).asDiagonal();
  Eigen::Matrix4cd x3 = Eigen::Matrix4cd::Zero();
  x3(0, 3) = x3(3, 0) = 1;
  x3(1, 2) = x3(2, 1) = 1;

  const Eigen::Matrix4cd conj = U.adjoint() * z12 * U;
  std::printf("tau* = %.12f (units of 1/Omega)\n", tau);
  std::printf("conjugated Z1 Z2 (real parts):\n");
  for (int r = 0; r < 4; ++r)
    std::printf("  % .6f % .6f % .6f % .6f\n", conj(r, 0).real(), conj(r, 1).real(), conj(r, 2).real(),
                conj(r, 3).real());
  const double err = (conj - x3).operatorNorm();
  std::printf("|| U^dag Z1Z2 U - X3 ||_2 = %.3e\n", err);
  return err < 1e-10 ? 0 : 1;
}
