#pragma once

#include "swstab/error.hpp"
#include "swstab/mat2.hpp"
#include "swstab/invariants.hpp"
#include "swstab/normal_form.hpp"
#include "swstab/lyapunov.hpp"
#include "swstab/simulate.hpp"
#include "swstab/worst_traj.hpp"
#include "swstab/classify.hpp"
