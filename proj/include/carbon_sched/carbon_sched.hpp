#pragma once

#include "carbon_sched/annealer.hpp"
#include "carbon_sched/calibration.hpp"
#include "carbon_sched/config_graph.hpp"
#include "carbon_sched/controller.hpp"
#include "carbon_sched/core.hpp"
#include "carbon_sched/evaluator.hpp"
#include "carbon_sched/fleet_config.hpp"
#include "carbon_sched/mig_topology.hpp"
#include "carbon_sched/objective.hpp"
#include "carbon_sched/profiles.hpp"
#include "carbon_sched/schemes.hpp"
#include "carbon_sched/serving_sim.hpp"
#include "carbon_sched/trace.hpp"
