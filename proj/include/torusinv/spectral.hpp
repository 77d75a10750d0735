#pragma once

#include "torusinv/spectral/fft.hpp"
#include "torusinv/spectral/field.hpp"
#include "torusinv/spectral/modes.hpp"
#include "torusinv/spectral/operators.hpp"
#include "torusinv/spectral/serialize.hpp"
