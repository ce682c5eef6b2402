#pragma once

#include "devo/workbench/build.hpp"
#include "devo/workbench/commands.hpp"
#include "devo/workbench/config.hpp"
