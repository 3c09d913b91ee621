#pragma once

#include "curveflow/errors.hpp"
#include "curveflow/point.hpp"
#include "curveflow/stencil.hpp"
#include "curveflow/curve.hpp"
#include "curveflow/geometry.hpp"
#include "curveflow/discrete_gradients.hpp"
#include "curveflow/solver.hpp"
#include "curveflow/schemes.hpp"
#include "curveflow/driver.hpp"
#include "curveflow/io.hpp"
