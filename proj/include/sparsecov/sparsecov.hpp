#pragma once

#include "sparsecov/eigensym.hpp"
#include "sparsecov/error.hpp"
#include "sparsecov/estimate.hpp"
#include "sparsecov/io.hpp"
#include "sparsecov/matcore.hpp"
#include "sparsecov/matrix.hpp"
#include "sparsecov/psdfix.hpp"
#include "sparsecov/random.hpp"
#include "sparsecov/simulate.hpp"
#include "sparsecov/sparsity.hpp"
#include "sparsecov/spectral.hpp"
