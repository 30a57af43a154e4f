#pragma once

#include "stochspin/diffusion.hpp"
#include "stochspin/drift.hpp"
#include "stochspin/error.hpp"
#include "stochspin/flatness_control.hpp"
#include "stochspin/fokker_planck.hpp"
#include "stochspin/spin_state.hpp"
#include "stochspin/stern_gerlach.hpp"
