#pragma once

#include "wcfg/bench.hpp"
#include "wcfg/chart.hpp"
#include "wcfg/errors.hpp"
#include "wcfg/grammar.hpp"
#include "wcfg/inside.hpp"
#include "wcfg/leftcorner.hpp"
#include "wcfg/matrix.hpp"
#include "wcfg/oracle.hpp"
#include "wcfg/prefix.hpp"
#include "wcfg/semiring.hpp"
