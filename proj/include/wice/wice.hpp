// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "wice/baseline.hpp"
#include "wice/channel.hpp"
#include "wice/constellation.hpp"
#include "wice/dataset.hpp"
#include "wice/dft.hpp"
#include "wice/frame.hpp"
#include "wice/metrics.hpp"
#include "wice/random.hpp"
#include "wice/simulate.hpp"
#include "wice/types.hpp"
#include "wice/wi.hpp"
