#pragma once

#include "torusinv/expcli/config.hpp"
#include "torusinv/expcli/results.hpp"
#include "torusinv/expcli/runner.hpp"
