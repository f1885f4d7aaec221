// Copyright 2026 The rbench Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RBENCH_RBENCH_HPP
#define RBENCH_RBENCH_HPP

#include "rbench/analysis.hpp"
#include "rbench/clifford.hpp"
#include "rbench/commands.hpp"
#include "rbench/common.hpp"
#include "rbench/config.hpp"
#include "rbench/fit.hpp"
#include "rbench/herm_norm.hpp"
#include "rbench/io.hpp"
#include "rbench/noise.hpp"
#include "rbench/protocol.hpp"
#include "rbench/rng.hpp"
#include "rbench/superop.hpp"

#endif  // RBENCH_RBENCH_HPP
