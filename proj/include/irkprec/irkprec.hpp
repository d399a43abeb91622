#ifndef IRKPREC_IRKPREC_HPP
#define IRKPREC_IRKPREC_HPP

#include "irkprec/banded.hpp"
#include "irkprec/core.hpp"
#include "irkprec/experiments.hpp"
#include "irkprec/krylov.hpp"
#include "irkprec/linop.hpp"
#include "irkprec/mass.hpp"
#include "irkprec/polynomial.hpp"
#include "irkprec/precond.hpp"
#include "irkprec/problem.hpp"
#include "irkprec/spatial.hpp"
#include "irkprec/spectral.hpp"
#include "irkprec/stepper.hpp"
#include "irkprec/tableau.hpp"
#include "irkprec/verify.hpp"

#endif  // IRKPREC_IRKPREC_HPP
