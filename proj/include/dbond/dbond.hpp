#pragma once

#include "dbond/errors.hpp"
#include "dbond/piecewise.hpp"
#include "dbond/models.hpp"
#include "dbond/scenario_io.hpp"
#include "dbond/affine.hpp"
#include "dbond/survival.hpp"
#include "dbond/pricing.hpp"
#include "dbond/rng.hpp"
#include "dbond/fd1d.hpp"
#include "dbond/fd2d.hpp"
#include "dbond/fd_oracles.hpp"
#include "dbond/mc_oracle.hpp"
#include "dbond/figures.hpp"
