#pragma once

#include "devo/models/energy.hpp"
#include "devo/models/memory.hpp"
#include "devo/models/mesh.hpp"
#include "devo/models/scalar.hpp"
#include "devo/models/source.hpp"
#include "devo/models/wave.hpp"
