#pragma once

#include "cqed/core.hpp"
#include "cqed/linkage_model.hpp"
#include "cqed/state_space.hpp"
#include "cqed/models.hpp"
#include "cqed/hamiltonian.hpp"
#include "cqed/elimination.hpp"
#include "cqed/dynamics.hpp"
#include "cqed/decoherence.hpp"
#include "cqed/parallel.hpp"
#include "cqed/gates.hpp"
