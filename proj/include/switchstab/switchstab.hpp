#pragma once

// Umbrella header. JSON helpers live in switchstab/json_io.hpp and need
// nlohmann/json on the include path.

#include "switchstab/core.hpp"
#include "switchstab/signal.hpp"
#include "switchstab/generate.hpp"
#include "switchstab/system.hpp"
#include "switchstab/integrator.hpp"
#include "switchstab/limit_sets.hpp"
#include "switchstab/observability.hpp"
#include "switchstab/lyapunov.hpp"
#include "switchstab/cycles.hpp"
#include "switchstab/certify.hpp"
