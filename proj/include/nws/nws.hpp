#pragma once

#include "nws/elliptic.hpp"
#include "nws/equivalence.hpp"
#include "nws/errors.hpp"
#include "nws/expr.hpp"
#include "nws/jets.hpp"
#include "nws/model.hpp"
#include "nws/mol.hpp"
#include "nws/quadrature.hpp"
#include "nws/solutions.hpp"
#include "nws/symmetry.hpp"
