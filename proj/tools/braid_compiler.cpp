// Compiles a braid word on N logical qubits and prints the logical matrix.
//
//   braid_compiler "R1^-1 R2 R1^-1" [N]

#include <cstdio>
#include <cstdlib>
#include <string>

#include "ryd/anyons.hpp"

int main(int argc, char** argv) {
  using namespace ryd;
  const std::string word = argc > 1 ? argv[1] : "R1^-1 R2 R1^-1";
  const int N = argc > 2 ? std::atoi(argv[2]) : 1;
  try {
    const auto c = compile_braid(BraidWord::parse(word), N);
    std::printf("word      %s  (N = %d, %d ancillas)\n", c.word.str().c_str(), N, register_size(N));
    std::printf("phase     %+.6f %+.6fi\n", c.global_phase.real(), c.global_phase.imag());
    std::printf("leakage   %.2e\n", c.leakage);
    std::printf("logical matrix (ancilla side, phase removed):\n");
    for (Eigen::Index r = 0; r < c.logical.rows(); ++r) {
      std::printf(" ");
      for (Eigen::Index k = 0; k < c.logical.cols(); ++k)
        std::printf("  %+.4f%+.4fi", c.logical(r, k).real(), c.logical(r, k).imag());
      std::printf("\n");
    }
    if (N == 1) {
      cplx ph;
      const double d = phase_distance(c.logical, fusion_matrix(), &ph);
      std::printf("distance to F up to phase: %.2e\n", d);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
