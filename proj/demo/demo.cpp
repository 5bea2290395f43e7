// Classifies a few pairs and prints why.
#include <cstdio>

#include "swstab/swstab.hpp"

int main() {
  using swstab::Mat2;
  struct Named {
    const char* name;
    Mat2 a1;
    Mat2 a2;
  };
  const Named pairs[] = {
      {"same mode", Mat2(-1, 0, 0, -1), Mat2(-1, 0, 0, -1)},
      {"shear pair", Mat2(-1, 10, 0, -1), Mat2(-1, 0, 10, -1)},
      {"two foci", Mat2(-0.1, 1, -1, -0.1), Mat2(-0.1, 0.5, -2, -0.1)},
      {"slow foci", Mat2(-0.3, 1, -1, -0.3), Mat2(-0.3, 0.5, -2, -0.3)},
  };
  for (const auto& p : pairs) {
    const swstab::Verdict v = swstab::classify(p.a1, p.a2);
    std::printf("%s -> %s\n%s\n", p.name, swstab::to_string(v.kind).c_str(), swstab::explain(v).text().c_str());
  }

  // Follow the worst trajectory of the unbounded pair for three revolutions.
  const Mat2 b1(-0.1, 1, -1, -0.1);
  const Mat2 b2(-0.1, 0.5, -2, -0.1);
  const auto wt = swstab::worst_trajectory(b1, b2, swstab::default_start(b1, b2), 3);
  for (const auto& arc : wt.arcs) {
    std::printf("A%d for %.6f from (%.6f, %.6f)\n", arc.field, arc.duration, arc.start.x1, arc.start.x2);
  }
  std::printf("|x| grew by %.6f\n", wt.final_ratio);
  return 0;
}
