#pragma once

#include "bicons/error.hpp"
#include "bicons/numerics.hpp"
#include "bicons/models.hpp"
#include "bicons/intrinsic.hpp"
#include "bicons/extrinsic.hpp"
#include "bicons/verify.hpp"
#include "bicons/export.hpp"
