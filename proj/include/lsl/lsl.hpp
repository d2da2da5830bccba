#pragma once

// Liquid Lane-Emden star stability toolkit: equilibria, Sturm-Liouville
// growth modes, scaling-law sweeps, and free-boundary Lagrangian dynamics.

#include "lsl/dynamics.hpp"
#include "lsl/eos.hpp"
#include "lsl/errors.hpp"
#include "lsl/grid.hpp"
#include "lsl/io.hpp"
#include "lsl/numerics.hpp"
#include "lsl/parallel.hpp"
#include "lsl/scaling.hpp"
#include "lsl/spectral.hpp"
#include "lsl/steady_state.hpp"
#include "lsl/tridiagonal.hpp"
#include "lsl/verification.hpp"
