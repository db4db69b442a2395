//  Copyright 2026 The worp Authors
//
//  Licensed under the Apache License, Version 2.0 (the "License");
//  you may not use this file except in compliance with the License.
//  You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
//  Unless required by applicable law or agreed to in writing, software
//  distributed under the License is distributed on an "AS IS" BASIS,
//  WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//  See the License for the specific language governing permissions and
//  limitations under the License.

#pragma once

#include "worp/accumulator.hpp"
#include "worp/bench.hpp"
#include "worp/calibration.hpp"
#include "worp/collect.hpp"
#include "worp/core.hpp"
#include "worp/element_io.hpp"
#include "worp/error.hpp"
#include "worp/estimate.hpp"
#include "worp/hash.hpp"
#include "worp/json_io.hpp"
#include "worp/parallel.hpp"
#include "worp/pipeline.hpp"
#include "worp/rhh.hpp"
#include "worp/sample.hpp"
#include "worp/serialize.hpp"
#include "worp/transform.hpp"
#include "worp/tvd.hpp"
