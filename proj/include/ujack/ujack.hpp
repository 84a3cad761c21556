#pragma once

#include "ujack/bucket_grid.hpp"
#include "ujack/errors.hpp"
#include "ujack/hoeffding.hpp"
#include "ujack/jmb.hpp"
#include "ujack/kernels.hpp"
#include "ujack/numeric.hpp"
#include "ujack/rng.hpp"
#include "ujack/sample.hpp"
#include "ujack/sim.hpp"
#include "ujack/stattests.hpp"
#include "ujack/ustat.hpp"
