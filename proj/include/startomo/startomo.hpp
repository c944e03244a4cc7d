#ifndef STARTOMO_STARTOMO_HPP
#define STARTOMO_STARTOMO_HPP

#include "startomo/block_hilbert.hpp"
#include "startomo/circuits.hpp"
#include "startomo/design_optimizer.hpp"
#include "startomo/measurement.hpp"
#include "startomo/states.hpp"
#include "startomo/tomography.hpp"

#endif  // STARTOMO_STARTOMO_HPP
