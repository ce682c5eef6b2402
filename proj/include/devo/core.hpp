#pragma once

#include "devo/core/coefficient.hpp"
#include "devo/core/delay.hpp"
#include "devo/core/envelope.hpp"
#include "devo/core/error.hpp"
#include "devo/core/history.hpp"
#include "devo/core/linalg.hpp"
#include "devo/core/nonlinear.hpp"
#include "devo/core/operator.hpp"
#include "devo/core/quadrature.hpp"
#include "devo/core/state_norm.hpp"
#include "devo/core/system.hpp"
