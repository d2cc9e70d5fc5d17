#pragma once

#include "kdc/assoc.hpp"
#include "kdc/errors.hpp"
#include "kdc/io.hpp"
#include "kdc/kernels.hpp"
#include "kdc/linreg.hpp"
#include "kdc/rng.hpp"
#include "kdc/simgen.hpp"
#include "kdc/studies.hpp"
#include "kdc/types.hpp"
