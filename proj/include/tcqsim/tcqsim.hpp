// Copyright 2026 The tcqsim Authors
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

#include "tcqsim/commands.hpp"
#include "tcqsim/config.hpp"
#include "tcqsim/errors.hpp"
#include "tcqsim/ideal_gates.hpp"
#include "tcqsim/io.hpp"
#include "tcqsim/lindblad.hpp"
#include "tcqsim/opcore.hpp"
#include "tcqsim/pchip.hpp"
#include "tcqsim/pulse_synth.hpp"
#include "tcqsim/tcq_model.hpp"
