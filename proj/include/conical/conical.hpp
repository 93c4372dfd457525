#pragma once

#include "conical/bgfg.hpp"
#include "conical/bregman.hpp"
#include "conical/csv.hpp"
#include "conical/divergence.hpp"
#include "conical/errors.hpp"
#include "conical/exemplar.hpp"
#include "conical/export.hpp"
#include "conical/matrix.hpp"
#include "conical/nnlad.hpp"
#include "conical/nnls.hpp"
#include "conical/parallel.hpp"
#include "conical/pgm.hpp"
#include "conical/rng.hpp"
#include "conical/selection.hpp"
#include "conical/simplex.hpp"
#include "conical/solver_types.hpp"
#include "conical/synthetic.hpp"
#include "conical/xray.hpp"
