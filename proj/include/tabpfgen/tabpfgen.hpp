#pragma once

#include "tabpfgen/config.hpp"
#include "tabpfgen/csv.hpp"
#include "tabpfgen/dataset.hpp"
#include "tabpfgen/downstream.hpp"
#include "tabpfgen/energy.hpp"
#include "tabpfgen/error.hpp"
#include "tabpfgen/eval.hpp"
#include "tabpfgen/kde.hpp"
#include "tabpfgen/metrics.hpp"
#include "tabpfgen/random.hpp"
#include "tabpfgen/sampler.hpp"
#include "tabpfgen/scorer.hpp"
#include "tabpfgen/svg.hpp"
#include "tabpfgen/tasks.hpp"
#include "tabpfgen/version.hpp"
