#pragma once

#include "ksh/complexifier.hpp"
#include "ksh/cst.hpp"
#include "ksh/numeric.hpp"
#include "ksh/operator_sim.hpp"
#include "ksh/quadrature.hpp"
#include "ksh/root_system.hpp"
