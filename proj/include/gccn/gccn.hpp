#pragma once

#include "gccn/error.hpp"
#include "gccn/tensor.hpp"
#include "gccn/complex.hpp"
#include "gccn/neighborhoods.hpp"
#include "gccn/hasse.hpp"
#include "gccn/autodiff.hpp"
#include "gccn/models.hpp"
#include "gccn/wl.hpp"
#include "gccn/data.hpp"
#include "gccn/train.hpp"
#include "gccn/io.hpp"
