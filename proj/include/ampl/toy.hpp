#pragma once

#include "ampl/mechanism.hpp"
#include "ampl/space.hpp"

namespace ampl::toy {

// Two-candidate fixture with a strongly correlated pair of secrets and a
// fixed 0.72/0.28 substitution channel; used by the `toy` CLI command and
// the golden tests.
SecretSpace make_space();
Channel make_channel(const SecretSpace& space);
JointModel make_joint();

}  // namespace ampl::toy
