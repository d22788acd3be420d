// Copyright (C) 2026 The cohere authors
// SPDX-License-Identifier: Apache-2.0
//

#pragma once

#include "cohere/scalar.hpp"
#include "cohere/error.hpp"
#include "cohere/matrix.hpp"
#include "cohere/support.hpp"
#include "cohere/cycle.hpp"
#include "cohere/coherence.hpp"
#include "cohere/marginals.hpp"
#include "cohere/oracle.hpp"
