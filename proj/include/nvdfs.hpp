// Copyright 2026 The nvdfs Authors
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

#include "nvdfs/spin_core.hpp"
#include "nvdfs/su2.hpp"
#include "nvdfs/nv_model.hpp"
#include "nvdfs/pulse_engine.hpp"
#include "nvdfs/noise_models.hpp"
#include "nvdfs/readout_model.hpp"
#include "nvdfs/tomography.hpp"
#include "nvdfs/fitting.hpp"
#include "nvdfs/experiments.hpp"
#include "nvdfs/io.hpp"
#include "nvdfs/cli.hpp"
