#pragma once

#include "torusinv/priors/prior.hpp"
