#pragma once

#include "hjsel/adjoint.hpp"
#include "hjsel/commutation.hpp"
#include "hjsel/error.hpp"
#include "hjsel/fit.hpp"
#include "hjsel/grid.hpp"
#include "hjsel/hamiltonian.hpp"
#include "hjsel/measures.hpp"
#include "hjsel/mollifier.hpp"
#include "hjsel/periodic_function.hpp"
#include "hjsel/scheme.hpp"
#include "hjsel/solver.hpp"
#include "hjsel/trig_basis.hpp"
