// Copyright 2026 The dpcert Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DPCERT_STATUS_MACROS_H_
#define DPCERT_STATUS_MACROS_H_

#include "absl/status/status.h"
#include "absl/status/statusor.h"

#define DPCERT_STATUS_CONCAT_INNER_(x, y) x##y
#define DPCERT_STATUS_CONCAT_(x, y) DPCERT_STATUS_CONCAT_INNER_(x, y)

#define DPCERT_RETURN_IF_ERROR(expr)        \
  do {                                      \
    const absl::Status _dpcert_st = (expr); \
    if (!_dpcert_st.ok()) return _dpcert_st; \
  } while (0)

#define DPCERT_ASSIGN_OR_RETURN_IMPL_(tmp, lhs, expr) \
  auto tmp = (expr);                                  \
  if (!tmp.ok()) return tmp.status();                 \
  lhs = std::move(tmp).value()

#define DPCERT_ASSIGN_OR_RETURN(lhs, expr) \
  DPCERT_ASSIGN_OR_RETURN_IMPL_(           \
      DPCERT_STATUS_CONCAT_(_dpcert_statusor_, __LINE__), lhs, expr)

#endif  // DPCERT_STATUS_MACROS_H_
