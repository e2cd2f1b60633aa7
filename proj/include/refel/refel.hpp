#pragma once

#include "refel/error.hpp"
#include "refel/matrix.hpp"
#include "refel/matfun.hpp"
#include "refel/model.hpp"
#include "refel/gaussian.hpp"
#include "refel/boost.hpp"
#include "refel/witness.hpp"
#include "refel/specfun.hpp"
#include "refel/nongaussian.hpp"
#include "refel/verify.hpp"
