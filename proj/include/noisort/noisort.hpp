#pragma once

// Sorting with persistent comparison errors.

#include "bit_source.hpp"
#include "constants.hpp"
#include "derand.hpp"
#include "element.hpp"
#include "noisy_search.hpp"
#include "oracle.hpp"
#include "random.hpp"
#include "referee.hpp"
#include "rifflesort.hpp"
#include "subset.hpp"
#include "windowsort.hpp"
