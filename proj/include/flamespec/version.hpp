// Copyright 2026 The flamespec Authors
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

#ifndef FLAMESPEC_VERSION_HPP_
#define FLAMESPEC_VERSION_HPP_

#ifndef FLAMESPEC_VERSION_STRING
#define FLAMESPEC_VERSION_STRING "0.0.0"
#endif

namespace flamespec {

inline constexpr const char* kToolVersion = FLAMESPEC_VERSION_STRING;

}  // namespace flamespec

#endif  // FLAMESPEC_VERSION_HPP_
