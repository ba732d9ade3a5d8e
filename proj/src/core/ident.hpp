#pragma once

#include <string>
#include <vector>

#include "core/panel.hpp"

namespace mldfm {

/* Admissible-rotation zero pattern: an r x r rotation H preserves the
   block-zero loading pattern iff its entries are confined to the mask
   (global x global, group rows x global columns, and each group's own
   diagonal block). */
struct RotationMask {
  BoolMatrix mask;  // true = entry allowed nonzero
  GroupStructure structure;
};

/* r_g^2 + sum_s r_s^2 + r_g * sum_s r_s. */
long count_restrictions(const GroupStructure& structure);

RotationMask rotation_mask(const GroupStructure& structure);

struct IdentCheck {
  std::string name;
  bool pass = false;
  double max_violation = 0.0;
};

struct IdentReport {
  std::vector<IdentCheck> checks;
  double tol = 0.0;
  bool all_pass = false;
};

/* Verifies the identifying restrictions: G'G/T = I, each L_s'L_s/T = I, each
   L_s'G/T = 0, Lambda_g'Lambda_g diagonal, each Lambda_l_s'Lambda_l_s
   diagonal.  Violations are reported, never thrown. */
IdentReport check_identification(const Matrix& G, const std::vector<Matrix>& L,
                                 const Matrix& Lambda_g, const std::vector<Matrix>& Lambda_l,
                                 double tol);

}  // namespace mldfm
