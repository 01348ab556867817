#pragma once

#include "liepoisson/state.hpp"
#include "liepoisson/poisson.hpp"
#include "liepoisson/integrators.hpp"
#include "liepoisson/splitting.hpp"
#include "liepoisson/rigid_body.hpp"
#include "liepoisson/verify.hpp"
