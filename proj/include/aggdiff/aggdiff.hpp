#pragma once

#include "aggdiff/errors.hpp"
#include "aggdiff/params.hpp"
#include "aggdiff/field.hpp"
#include "aggdiff/riesz.hpp"
#include "aggdiff/functionals.hpp"
#include "aggdiff/extremal.hpp"
#include "aggdiff/evolve.hpp"
#include "aggdiff/classify.hpp"
#include "aggdiff/config.hpp"
