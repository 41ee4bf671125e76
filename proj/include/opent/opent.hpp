#pragma once

// Umbrella header.
#include "opent/types.hpp"
#include "opent/dense_operator.hpp"
#include "opent/local_basis.hpp"
#include "opent/norms.hpp"
#include "opent/schmidt.hpp"
#include "opent/entropy.hpp"
#include "opent/circuits.hpp"
#include "opent/truncation.hpp"
#include "opent/bounds.hpp"
#include "opent/randmat.hpp"
#include "opent/experiments/config.hpp"
#include "opent/experiments/csv.hpp"
#include "opent/experiments/analysis.hpp"
#include "opent/experiments/runners.hpp"
#include "opent/experiments/svg.hpp"
