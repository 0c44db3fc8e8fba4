#pragma once

#include "logicx/core.hpp"
#include "logicx/sha256.hpp"
#include "logicx/graph.hpp"
#include "logicx/graph_io.hpp"
#include "logicx/decision_tree.hpp"
#include "logicx/wl.hpp"
#include "logicx/orbits.hpp"
#include "logicx/canonical.hpp"
#include "logicx/match.hpp"
#include "logicx/gcn.hpp"
#include "logicx/predicates.hpp"
#include "logicx/rules.hpp"
#include "logicx/grounding.hpp"
#include "logicx/inference.hpp"
#include "logicx/metrics.hpp"
#include "logicx/synthetic.hpp"
#include "logicx/pipeline.hpp"
#include "logicx/dot.hpp"
