/*
 * Copyright 2026 The mfcv Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 *
 */

#ifndef MFCV_MFCV_HPP
#define MFCV_MFCV_HPP

#include "mfcv/sampling.hpp"
#include "mfcv/kernels.hpp"
#include "mfcv/optimize.hpp"
#include "mfcv/gp.hpp"
#include "mfcv/loocv.hpp"
#include "mfcv/cost_model.hpp"
#include "mfcv/benchmarks.hpp"
#include "mfcv/acquisition.hpp"
#include "mfcv/harness.hpp"
#include "mfcv/config.hpp"
#include "mfcv/output.hpp"

#endif // MFCV_MFCV_HPP
