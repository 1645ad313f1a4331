#pragma once

// Umbrella header: the whole library.

#include "powergame/calibration.hpp"
#include "powergame/developer.hpp"
#include "powergame/extensions.hpp"
#include "powergame/model.hpp"
#include "powergame/numeric.hpp"
#include "powergame/oracle.hpp"
#include "powergame/policy.hpp"
