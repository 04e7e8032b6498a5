#pragma once

#include "spatialrel/geometry.hpp"
#include "spatialrel/relations.hpp"
#include "spatialrel/scene.hpp"
#include "spatialrel/verbalizer.hpp"
#include "spatialrel/vsr_lexicon.hpp"
#include "spatialrel/ingest.hpp"
#include "spatialrel/random.hpp"
#include "spatialrel/generator.hpp"
#include "spatialrel/rule_solver.hpp"
#include "spatialrel/evaluator.hpp"
