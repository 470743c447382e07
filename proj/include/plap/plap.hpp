#pragma once

#include "plap/errors.hpp"
#include "plap/mesh.hpp"
#include "plap/function_space.hpp"
#include "plap/functional.hpp"
#include "plap/line_search.hpp"
#include "plap/metric.hpp"
#include "plap/eigen.hpp"
#include "plap/geometry.hpp"
#include "plap/solver.hpp"
#include "plap/mountain_pass.hpp"
#include "plap/pipeline.hpp"
#include "plap/equivalence.hpp"
