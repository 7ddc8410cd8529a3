// Copyright 2026 The NSX Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include "nsx/annotation.hpp"
#include "nsx/config.hpp"
#include "nsx/duration.hpp"
#include "nsx/error.hpp"
#include "nsx/eval.hpp"
#include "nsx/fleet_sim.hpp"
#include "nsx/gateway.hpp"
#include "nsx/highlight.hpp"
#include "nsx/index.hpp"
#include "nsx/loadtest.hpp"
#include "nsx/rank.hpp"
#include "nsx/retrieval.hpp"
#include "nsx/scorer.hpp"
#include "nsx/scoring_pool.hpp"
#include "nsx/server.hpp"
#include "nsx/shard.hpp"
#include "nsx/text.hpp"
