#pragma once

#include "selfconf/asymptotics.hpp"
#include "selfconf/deformation.hpp"
#include "selfconf/distortion.hpp"
#include "selfconf/errors.hpp"
#include "selfconf/ifs.hpp"
#include "selfconf/io.hpp"
#include "selfconf/maps.hpp"
#include "selfconf/measure.hpp"
#include "selfconf/string_solver.hpp"
