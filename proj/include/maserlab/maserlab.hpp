#pragma once

#include "maserlab/amplifier.hpp"
#include "maserlab/constants.hpp"
#include "maserlab/correlations.hpp"
#include "maserlab/dynamics.hpp"
#include "maserlab/error.hpp"
#include "maserlab/linewidth.hpp"
#include "maserlab/meanfield.hpp"
#include "maserlab/params.hpp"
#include "maserlab/sensitivity.hpp"
#include "maserlab/sweep.hpp"
