// Copyright (C) 2026 The hivekv Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "hivekv/attention.hpp"
#include "hivekv/cache.hpp"
#include "hivekv/config.hpp"
#include "hivekv/estimator.hpp"
#include "hivekv/eviction.hpp"
#include "hivekv/experiment.hpp"
#include "hivekv/numeric.hpp"
#include "hivekv/report.hpp"
#include "hivekv/sampling.hpp"
#include "hivekv/sweep.hpp"
#include "hivekv/workload.hpp"
