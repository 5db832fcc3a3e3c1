#pragma once

// Umbrella header for the whole library.

#include "gridhc/errors.hpp"
#include "gridhc/feeders.hpp"
#include "gridhc/hostcap.hpp"
#include "gridhc/io.hpp"
#include "gridhc/loadflow.hpp"
#include "gridhc/netmodel.hpp"
#include "gridhc/scenarios.hpp"
