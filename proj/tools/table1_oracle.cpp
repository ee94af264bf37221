// Prints the (Z_C, X_C', Z_S, X_S') signature of the six reference states on
// the default two-puncture patch.

#include <cstdio>

#include "ryd/codesim.hpp"

int main() {
  using namespace ryd;
  const CodePatch patch(PatchLayout::two_punctures());
  std::printf("%d code qubits, %d logical qubits\n\n", patch.num_code_qubits(), patch.logical_qubits());
  std::printf("state     Z_C  X_C'  Z_S  X_S'  label\n");
  for (auto s : {Table1State::I, Table1State::e, Table1State::m, Table1State::epsilon, Table1State::plus,
                 Table1State::minus}) {
    TableauSim sim(patch, 1);
    prepare_reference(sim, s);
    const auto sig = sim.signature();
    std::printf("%-8s  %+d   %+d    %+d   %+d    %s\n", to_string(s), sig[0], sig[1], sig[2], sig[3],
                to_string(sim.label().kind));
  }
  return 0;
}
