#ifndef LSAR_EVAL_HPP
#define LSAR_EVAL_HPP

#include "lsar/classify.hpp"
#include "lsar/cluster.hpp"
#include "lsar/report.hpp"
#include "lsar/retrieval.hpp"
#include "lsar/stats.hpp"

#endif
