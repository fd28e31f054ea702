// Copyright 2026 The UDC Authors
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

#ifndef UDC_PARALLEL_H_
#define UDC_PARALLEL_H_

#include <functional>

namespace udc {

// Runs fn(i) for i in [0, n) on up to `workers` threads. workers <= 1 runs
// inline. The first exception thrown by any task is rethrown after all
// threads join.
void ParallelFor(int n, int workers, const std::function<void(int)>& fn);

}  // namespace udc

#endif  // UDC_PARALLEL_H_
