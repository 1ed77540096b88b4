#pragma once

#include "crystalline/analysis.hpp"
#include "crystalline/anisotropy.hpp"
#include "crystalline/crystalline_flow.hpp"
#include "crystalline/error.hpp"
#include "crystalline/geometry.hpp"
#include "crystalline/periodic.hpp"
#include "crystalline/rates.hpp"
#include "crystalline/report.hpp"
#include "crystalline/rk45.hpp"
#include "crystalline/smooth_flow.hpp"
#include "crystalline/vec2.hpp"
