// SPDX-License-Identifier: Apache-2.0
//
// Umbrella header for the solver library. The harness and configuration
// headers (which pull in yaml-cpp) are included separately.
#pragma once

#include "jfcbd/baseline.hpp"
#include "jfcbd/linalg.hpp"
#include "jfcbd/model.hpp"
#include "jfcbd/pd_solver.hpp"
#include "jfcbd/scenario.hpp"
#include "jfcbd/sdp.hpp"
#include "jfcbd/sdr_oracle.hpp"
#include "jfcbd/trace.hpp"
