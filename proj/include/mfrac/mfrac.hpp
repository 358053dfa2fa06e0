#pragma once

#include "mfrac/homogeneous.hpp"
#include "mfrac/mexpr.hpp"
#include "mfrac/nonhomog.hpp"
#include "mfrac/numerics.hpp"
#include "mfrac/problem_io.hpp"
#include "mfrac/solution.hpp"
#include "mfrac/verify.hpp"
