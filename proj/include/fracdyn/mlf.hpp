#pragma once

#include "fracdyn/mlf/evaluate.hpp"
#include "fracdyn/mlf/zeros.hpp"
