// Copyright 2026 The mchain Authors
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

namespace mchain::cli {

enum ExitCode : int {
    kSuccess = 0,
    kUsage = 2,
    kNumerical = 3,
    kPartialSweep = 4,
};

// Environment variable naming the default output directory.
inline constexpr const char* kOutputEnv = "MCHAIN_OUT";

int run(int argc, char** argv);

}  // namespace mchain::cli
