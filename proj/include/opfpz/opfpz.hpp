#pragma once

#include "opfpz/zones.hpp"
#include "opfpz/dispatch.hpp"
#include "opfpz/network.hpp"
#include "opfpz/admittance.hpp"
#include "opfpz/case_io.hpp"
#include "opfpz/power_flow.hpp"
#include "opfpz/fitness.hpp"
#include "opfpz/solvers.hpp"
#include "opfpz/runner.hpp"
