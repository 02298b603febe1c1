#pragma once

#include "nlsgc/rational.hpp"
#include "nlsgc/expr.hpp"
#include "nlsgc/parse.hpp"
#include "nlsgc/sampling.hpp"
#include "nlsgc/liealg.hpp"
#include "nlsgc/invariance.hpp"
#include "nlsgc/equiv.hpp"
#include "nlsgc/tables.hpp"
#include "nlsgc/classifier.hpp"
