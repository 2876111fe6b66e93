#pragma once

#include "dopo/commands.hpp"
#include "dopo/ensemble.hpp"
#include "dopo/error.hpp"
#include "dopo/fft.hpp"
#include "dopo/grid.hpp"
#include "dopo/linear_operator.hpp"
#include "dopo/model.hpp"
#include "dopo/philox.hpp"
#include "dopo/positive_p.hpp"
#include "dopo/run_config.hpp"
#include "dopo/snapshot.hpp"
#include "dopo/spectral.hpp"
#include "dopo/spectral_basis.hpp"
#include "dopo/squeezing.hpp"
#include "dopo/stationary.hpp"
