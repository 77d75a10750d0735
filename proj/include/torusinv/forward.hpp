#pragma once

#include "torusinv/forward/nse.hpp"
#include "torusinv/forward/rde.hpp"
#include "torusinv/forward/reaction.hpp"
#include "torusinv/forward/trajectory.hpp"
