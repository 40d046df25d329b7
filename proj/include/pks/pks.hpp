#pragma once

#include "pks/config.hpp"
#include "pks/diagnostics.hpp"
#include "pks/error.hpp"
#include "pks/experiments.hpp"
#include "pks/fft.hpp"
#include "pks/field.hpp"
#include "pks/flows.hpp"
#include "pks/functional_lab.hpp"
#include "pks/grid.hpp"
#include "pks/init.hpp"
#include "pks/io.hpp"
#include "pks/model.hpp"
#include "pks/random_fields.hpp"
#include "pks/solver.hpp"
#include "pks/spectral.hpp"
