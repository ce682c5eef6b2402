#pragma once

#include "devo/certificates/decay.hpp"
#include "devo/certificates/fit.hpp"
#include "devo/certificates/gronwall.hpp"
#include "devo/certificates/small_data.hpp"
