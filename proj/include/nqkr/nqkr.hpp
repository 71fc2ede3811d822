#pragma once

#include "nqkr/analysis.hpp"
#include "nqkr/classifier.hpp"
#include "nqkr/errors.hpp"
#include "nqkr/fit.hpp"
#include "nqkr/floquet.hpp"
#include "nqkr/io.hpp"
#include "nqkr/lattice.hpp"
#include "nqkr/observables.hpp"
#include "nqkr/parallel.hpp"
#include "nqkr/propagator.hpp"
