#pragma once

#include "expression.hpp"
#include "medium.hpp"
#include "geometry.hpp"
#include "barriers.hpp"
#include "timescale.hpp"
#include "parallel.hpp"
#include "homog1d.hpp"
#include "hs2d.hpp"
