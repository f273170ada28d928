// Copyright (c) 2026 the hullforge authors.
// SPDX-License-Identifier: Apache-2.0
#pragma once

namespace hullforge::detail {

// Cube case tables; see mc_tables.cpp for the numbering conventions.
extern const int kEdgeTable[256];
extern const int kTriTable[256][16];
extern const int kEdgeCorners[12][2];

}  // namespace hullforge::detail
