#pragma once

#include "hklab/common.hpp"
#include "hklab/config.hpp"
#include "hklab/envelope.hpp"
#include "hklab/geometry.hpp"
#include "hklab/harness.hpp"
#include "hklab/kernel.hpp"
#include "hklab/killing.hpp"
#include "hklab/quadrature.hpp"
#include "hklab/scaling.hpp"
#include "hklab/solver.hpp"
