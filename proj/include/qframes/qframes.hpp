#pragma once

#include "errors.hpp"
#include "rational.hpp"
#include "polynomial.hpp"
#include "matrix.hpp"
#include "core.hpp"
#include "weyl.hpp"
#include "hamiltonian.hpp"
#include "frames.hpp"
#include "models.hpp"
#include "series.hpp"
#include "gaussian.hpp"
#include "fft.hpp"
#include "grid.hpp"
#include "cycle_check.hpp"
#include "decay.hpp"
#include "scenario.hpp"
