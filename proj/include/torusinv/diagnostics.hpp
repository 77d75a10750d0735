#pragma once
#include "torusinv/diagnostics/conditions.hpp"
#include "torusinv/diagnostics/information.hpp"
#include "torusinv/diagnostics/rate.hpp"
#include "torusinv/diagnostics/stats.hpp"
