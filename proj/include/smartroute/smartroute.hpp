#pragma once

// Core domain
#include "smartroute/core.hpp"
#include "smartroute/errors.hpp"

// Online features
#include "smartroute/decay.hpp"
#include "smartroute/event_window.hpp"
#include "smartroute/feature_store.hpp"

// Models, metrics, selection, training data
#include "smartroute/dataset.hpp"
#include "smartroute/feature_selection.hpp"
#include "smartroute/forest.hpp"
#include "smartroute/grid_search.hpp"
#include "smartroute/logistic.hpp"
#include "smartroute/metrics.hpp"
#include "smartroute/model_io.hpp"
#include "smartroute/training_data.hpp"
#include "smartroute/tree.hpp"

// Routing pipeline
#include "smartroute/downtime.hpp"
#include "smartroute/router.hpp"
#include "smartroute/rules.hpp"

// Environment and operations
#include "smartroute/config.hpp"
#include "smartroute/service.hpp"
#include "smartroute/simulator.hpp"
#include "smartroute/txlog.hpp"
