#pragma once

#include "auditlab/catalog.hpp"
#include "auditlab/csv.hpp"
#include "auditlab/curve.hpp"
#include "auditlab/design.hpp"
#include "auditlab/error.hpp"
#include "auditlab/events.hpp"
#include "auditlab/fit_result.hpp"
#include "auditlab/kvconfig.hpp"
#include "auditlab/loo.hpp"
#include "auditlab/names.hpp"
#include "auditlab/ols.hpp"
#include "auditlab/optimize.hpp"
#include "auditlab/panel.hpp"
#include "auditlab/parallel.hpp"
#include "auditlab/probit.hpp"
#include "auditlab/records.hpp"
#include "auditlab/rng.hpp"
#include "auditlab/simulate.hpp"
#include "auditlab/stats.hpp"
#include "auditlab/two_threshold.hpp"
