#pragma once

#include "sindy/core.hpp"
#include "sindy/differentiation.hpp"
#include "sindy/dynamics.hpp"
#include "sindy/error.hpp"
#include "sindy/features.hpp"
#include "sindy/integrate.hpp"
#include "sindy/model.hpp"
#include "sindy/optimize.hpp"
