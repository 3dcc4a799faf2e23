#pragma once

#include "abcd/analysis.hpp"
#include "abcd/block_rules.hpp"
#include "abcd/config.hpp"
#include "abcd/dataset.hpp"
#include "abcd/delays.hpp"
#include "abcd/ode.hpp"
#include "abcd/parallel.hpp"
#include "abcd/partition.hpp"
#include "abcd/policy.hpp"
#include "abcd/problem.hpp"
#include "abcd/simulator.hpp"
#include "abcd/solver.hpp"
#include "abcd/trace.hpp"
