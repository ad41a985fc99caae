#pragma once

#include "mnb/adversary.hpp"
#include "mnb/analysis.hpp"
#include "mnb/attack_model.hpp"
#include "mnb/config.hpp"
#include "mnb/error.hpp"
#include "mnb/experiment.hpp"
#include "mnb/grid.hpp"
#include "mnb/opf.hpp"
#include "mnb/policies.hpp"
#include "mnb/random.hpp"
#include "mnb/regret.hpp"
#include "mnb/simplex.hpp"
