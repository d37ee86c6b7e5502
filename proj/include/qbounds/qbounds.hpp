#pragma once

#include "qbounds/tolerances.hpp"
#include "qbounds/linalg.hpp"
#include "qbounds/numerics.hpp"
#include "qbounds/states.hpp"
#include "qbounds/hypotest.hpp"
#include "qbounds/symmetry.hpp"
#include "qbounds/repbounds.hpp"
#include "qbounds/corollaries.hpp"
#include "qbounds/io.hpp"
#include "qbounds/sweep.hpp"
