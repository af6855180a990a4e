// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The aldnorm Authors

#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "aldnorm/losses.hpp"
#include "aldnorm/model.hpp"

namespace aldnorm {

struct GradcheckConfig {
  std::uint64_t seed = 1;
  std::size_t sequence_length = 5;
  std::size_t target_length = 4;
  double step = 1e-4;
  double tolerance = 1e-4;
  // Denominator floor of the relative error; gradients below it are
  // compared in absolute terms.
  double floor = 1e-5;
  LossWeights weights{0.5, 0.1};
};

struct GroupGradcheck {
  ParamGroup group;
  std::size_t elements = 0;
  double max_relative_error = 0.0;
  double max_abs_gradient = 0.0;
  std::string worst_parameter;
};

struct GradcheckReport {
  std::vector<GroupGradcheck> groups;  // one entry per group, kAllGroups order
  double tolerance = 0.0;
  double seconds = 0.0;

  bool passed() const;
  std::vector<ParamGroup> failing() const;
};

// Central differences at 64-bit against backward() for every element of
// every parameter, on one ALD turn plus one TN turn of random sentences with
// the adversarial and orthogonality terms switched on. Gradient reversal is
// honoured: groups feeding the discriminator through the reversal are
// compared with the sign of the adversarial term flipped.
GradcheckReport run_gradcheck(const ModelConfig& config, const GradcheckConfig& options = {});

// `group<TAB>max_rel_error<TAB>elements<TAB>status` per group, then a summary.
void write_gradcheck(std::ostream& out, const GradcheckReport& report);

}  // namespace aldnorm
