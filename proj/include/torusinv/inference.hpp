#pragma once
#include "torusinv/inference/forward_map.hpp"
#include "torusinv/inference/likelihood.hpp"
#include "torusinv/inference/pcn.hpp"
#include "torusinv/inference/tikhonov.hpp"
