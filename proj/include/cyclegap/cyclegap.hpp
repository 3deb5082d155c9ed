#ifndef CYCLEGAP_CYCLEGAP_HPP
#define CYCLEGAP_CYCLEGAP_HPP

#include "cyclegap/core.hpp"
#include "cyclegap/linalg.hpp"
#include "cyclegap/operators.hpp"
#include "cyclegap/scenario.hpp"
#include "cyclegap/sets.hpp"
#include "cyclegap/solver.hpp"
#include "cyclegap/verify.hpp"

#endif  // CYCLEGAP_CYCLEGAP_HPP
