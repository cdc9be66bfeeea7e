#pragma once

// Convenience umbrella: pulls in the whole subdata-selection toolkit.

#include "aoss/csv.hpp"
#include "aoss/error.hpp"
#include "aoss/evalkit.hpp"
#include "aoss/linalg.hpp"
#include "aoss/modelsel.hpp"
#include "aoss/preprocess.hpp"
#include "aoss/rng.hpp"
#include "aoss/simgen.hpp"
#include "aoss/subselect.hpp"
#include "aoss/svg.hpp"
#include "aoss/types.hpp"
