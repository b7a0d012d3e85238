#pragma once

#include "hawkes_evolve/bank.hpp"
#include "hawkes_evolve/errors.hpp"
#include "hawkes_evolve/expectations.hpp"
#include "hawkes_evolve/experiments.hpp"
#include "hawkes_evolve/io.hpp"
#include "hawkes_evolve/kernel.hpp"
#include "hawkes_evolve/parallel.hpp"
#include "hawkes_evolve/partition.hpp"
#include "hawkes_evolve/population.hpp"
#include "hawkes_evolve/quadrature.hpp"
#include "hawkes_evolve/rng.hpp"
#include "hawkes_evolve/simulate.hpp"
#include "hawkes_evolve/state.hpp"
#include "hawkes_evolve/stats.hpp"
#include "hawkes_evolve/volterra.hpp"
