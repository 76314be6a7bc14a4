#pragma once

#include "monodromy/catalog.hpp"
#include "monodromy/cpath.hpp"
#include "monodromy/expr.hpp"
#include "monodromy/linalg.hpp"
#include "monodromy/obstruction.hpp"
#include "monodromy/odeint.hpp"
#include "monodromy/probing.hpp"
#include "monodromy/report.hpp"
#include "monodromy/runner.hpp"
#include "monodromy/system.hpp"
#include "monodromy/version.hpp"
