#pragma once

#include <Eigen/Core>
#include <cstdint>

namespace lser {

using StateVector = Eigen::VectorXd;
using ActionVector = Eigen::VectorXd;

// One interaction record; the unit stored and replayed by every buffer.
struct Transition {
  StateVector state;         // s_t
  ActionVector action;       // a_t
  bool terminal = false;     // m_t, episode ended at this step
  StateVector next_state;    // s_{t+1}
  double reward = 0.0;       // r_t
  std::int64_t episode = 0;  // provenance, kept for debug dumps
};

}  // namespace lser
