#pragma once

#include "fracdyn/curves.hpp"
#include "fracdyn/error.hpp"
#include "fracdyn/fdesolve.hpp"
#include "fracdyn/io/csv.hpp"
#include "fracdyn/io/format.hpp"
#include "fracdyn/io/json.hpp"
#include "fracdyn/io/svg.hpp"
#include "fracdyn/linsys.hpp"
#include "fracdyn/mlf.hpp"
#include "fracdyn/polynomial.hpp"
#include "fracdyn/region2.hpp"
#include "fracdyn/singular.hpp"
#include "fracdyn/stability.hpp"
#include "fracdyn/trajectory.hpp"
