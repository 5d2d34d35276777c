// Copyright 2026 The blockbb84 Authors
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

#pragma once

#include "blockbb84/randomness.hpp"
#include "blockbb84/quantum.hpp"
#include "blockbb84/infotheory.hpp"
#include "blockbb84/circuit.hpp"
#include "blockbb84/attacks.hpp"
#include "blockbb84/protocol.hpp"
#include "blockbb84/postprocess.hpp"
#include "blockbb84/experiment.hpp"
