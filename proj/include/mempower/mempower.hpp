// Copyright 2026 The mempower Authors.
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

#ifndef MEMPOWER_MEMPOWER_HPP_
#define MEMPOWER_MEMPOWER_HPP_

#include "mempower/angles.hpp"
#include "mempower/channel.hpp"
#include "mempower/control.hpp"
#include "mempower/dynamics.hpp"
#include "mempower/error.hpp"
#include "mempower/flock.hpp"
#include "mempower/game.hpp"
#include "mempower/harness.hpp"
#include "mempower/io.hpp"
#include "mempower/metrics.hpp"
#include "mempower/pendulum.hpp"

#endif  // MEMPOWER_MEMPOWER_HPP_
