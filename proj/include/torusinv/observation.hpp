#pragma once

#include "torusinv/observation/dataset.hpp"
#include "torusinv/observation/panel.hpp"
