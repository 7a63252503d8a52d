#pragma once

#include "isopurity/core.hpp"
#include "isopurity/coulomb.hpp"
#include "isopurity/errors.hpp"
#include "isopurity/haar.hpp"
#include "isopurity/rational.hpp"
#include "isopurity/rng.hpp"
#include "isopurity/stats.hpp"
#include "isopurity/theory.hpp"
#include "isopurity/version.hpp"
