#pragma once

#include "pretherm/errors.hpp"
#include "pretherm/ion_chain.hpp"
#include "pretherm/coupling.hpp"
#include "pretherm/dynamics.hpp"
#include "pretherm/ensembles.hpp"
#include "pretherm/oracle.hpp"
#include "pretherm/experiments.hpp"
#include "pretherm/io.hpp"
#include "pretherm/validation.hpp"
