#pragma once

#include "nsbandit/acceptance.hpp"
#include "nsbandit/bandit.hpp"
#include "nsbandit/coupling.hpp"
#include "nsbandit/csv.hpp"
#include "nsbandit/error.hpp"
#include "nsbandit/parallel.hpp"
#include "nsbandit/pdmp.hpp"
#include "nsbandit/regret.hpp"
#include "nsbandit/rng.hpp"
#include "nsbandit/schedule.hpp"
#include "nsbandit/stats.hpp"
#include "nsbandit/tables.hpp"
#include "nsbandit/theory.hpp"
