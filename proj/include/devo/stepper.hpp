#pragma once

#include "devo/stepper/config.hpp"
#include "devo/stepper/duhamel.hpp"
#include "devo/stepper/epsilon_study.hpp"
#include "devo/stepper/history_buffer.hpp"
#include "devo/stepper/solver.hpp"
#include "devo/stepper/trajectory.hpp"
